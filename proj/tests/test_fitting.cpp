/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: tests/test_fitting.cpp
 *
 * Copyright 2026 The vidface Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "vidface/camera/affine_camera.hpp"
#include "vidface/fitting/fitting.hpp"
#include "vidface/fitting/nnls.hpp"
#include "vidface/pipeline/synthetic_face.hpp"

#include "catch_amalgamated.hpp"

#include <filesystem>
#include <random>

using namespace vidface;

namespace {

const pipeline::SyntheticFace& face()
{
    static const pipeline::SyntheticFace instance = [] {
        pipeline::SyntheticFaceConfig config;
        config.texture_resolution = 8;
        return pipeline::make_synthetic_face(config);
    }();
    return instance;
}

// Same layout, with affine deformation also removed at the outline landmarks.
const pipeline::SyntheticFace& outline_rigid_face()
{
    static const pipeline::SyntheticFace instance = [] {
        pipeline::SyntheticFaceConfig config;
        config.texture_resolution = 8;
        config.contour_affine_free = true;
        return pipeline::make_synthetic_face(config);
    }();
    return instance;
}

camera::AffineCamera frontal_camera()
{
    return camera::camera_from_pose(1.5, 0.0, 0.0, 0.0, {320.0, 240.0});
}

Eigen::VectorXd random_vector(std::mt19937& rng, int size, double stddev = 1.0)
{
    std::normal_distribution<double> normal(0.0, stddev);
    Eigen::VectorXd v(size);
    for (int i = 0; i < size; ++i)
    {
        v(i) = normal(rng);
    }
    return v;
}

// Projects the generating vertex of every landmark of the synthetic face.
fitting::LandmarkSet project_landmarks(const camera::AffineCamera& cam, const model::MeshInstance& mesh,
                                       double noise = 0.0, std::mt19937* rng = nullptr)
{
    fitting::LandmarkSet set;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& [id, vertex] : face().landmark_vertices)
    {
        Eigen::Vector2d p = cam.project(mesh.vertex(vertex));
        if (noise > 0.0)
        {
            p += noise * Eigen::Vector2d(normal(*rng), normal(*rng));
        }
        set.entries.push_back({id, p, std::nullopt});
    }
    return set;
}

// All 68 landmarks as fixed correspondences to their generating vertices.
fitting::Correspondences all_correspondences(const fitting::LandmarkSet& landmarks)
{
    fitting::Correspondences c;
    const auto& pairs = face().landmark_vertices;
    for (std::size_t k = 0; k < pairs.size(); ++k)
    {
        c.add(pairs[k].first, landmarks.entries[k].position, pairs[k].second, 1.0);
    }
    return c;
}

model::MeshInstance mesh_of(const Eigen::VectorXd& alpha, const Eigen::VectorXd& psi)
{
    return model::generate_shape_with_expression(face().model.shape, face().model.blendshapes, alpha, psi);
}

double objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& x)
{
    return (A * x - b).squaredNorm();
}

// Enumerates every passive set and keeps the best feasible unconstrained solution.
Eigen::VectorXd exhaustive_nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b)
{
    const auto n = A.cols();
    Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
    double best_value = objective(A, b, best);
    for (int mask = 1; mask < (1 << n); ++mask)
    {
        std::vector<Eigen::Index> indices;
        for (Eigen::Index j = 0; j < n; ++j)
        {
            if (mask & (1 << j))
            {
                indices.push_back(j);
            }
        }
        Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(indices.size()));
        for (std::size_t k = 0; k < indices.size(); ++k)
        {
            sub.col(static_cast<Eigen::Index>(k)) = A.col(indices[k]);
        }
        const Eigen::VectorXd z = sub.colPivHouseholderQr().solve(b);
        if ((z.array() < 0.0).any())
        {
            continue;
        }
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < indices.size(); ++k)
        {
            x(indices[k]) = z(static_cast<Eigen::Index>(k));
        }
        const double value = objective(A, b, x);
        if (value < best_value)
        {
            best_value = value;
            best = x;
        }
    }
    return best;
}

void require_kkt(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& x, double tolerance)
{
    const Eigen::VectorXd gradient = A.transpose() * (A * x - b);
    for (Eigen::Index j = 0; j < x.size(); ++j)
    {
        REQUIRE(x(j) >= 0.0);
        if (x(j) > 0.0)
        {
            REQUIRE(std::abs(gradient(j)) <= tolerance);
        }
        else
        {
            REQUIRE(gradient(j) >= -tolerance);
        }
    }
}

} // namespace

TEST_CASE("synthetic face layout", "[fitting][synthetic]")
{
    const auto& f = face();
    REQUIRE(f.landmark_vertices.size() == 68);
    REQUIRE(f.mapping.pairs.size() == 52);
    REQUIRE_NOTHROW(f.mapping.validate(f.model.shape.num_vertices()));
    for (const auto& [id, vertex] : f.landmark_vertices)
    {
        if (f.mapping.is_contour_landmark(id))
        {
            const auto& outline = std::stoi(id) <= 8 ? f.mapping.contour_right : f.mapping.contour_left;
            REQUIRE(std::find(outline.begin(), outline.end(), vertex) != outline.end());
        }
    }
    REQUIRE(outline_rigid_face().landmark_vertices == f.landmark_vertices);
}

TEST_CASE("fit_shape", "[fitting][shape]")
{
    const auto& shape = face().model.shape;
    const auto cam = frontal_camera();
    const int M = shape.num_components();
    std::mt19937 rng(7);

    SECTION("landmarks at the projected mean give alpha = 0")
    {
        const auto landmarks = project_landmarks(cam, model::MeshInstance{shape.mean});
        for (double lambda : {1e-3, 1.0, 10.0})
        {
            const Eigen::VectorXd alpha = fitting::fit_shape(cam, shape, all_correspondences(landmarks), lambda);
            REQUIRE(alpha.cwiseAbs().maxCoeff() <= 1e-9);
        }
    }

    SECTION("recovers known coefficients with tiny regularisation")
    {
        for (int trial = 0; trial < 10; ++trial)
        {
            const Eigen::VectorXd truth = random_vector(rng, M);
            const auto landmarks = project_landmarks(cam, model::generate_shape(shape, truth));
            const Eigen::VectorXd alpha = fitting::fit_shape(cam, shape, all_correspondences(landmarks), 1e-8);
            REQUIRE((alpha - truth).cwiseAbs().maxCoeff() <= 1e-4);
        }
    }

    SECTION("the solution beats 100 random perturbations")
    {
        const Eigen::VectorXd truth = random_vector(rng, M);
        const auto landmarks = project_landmarks(cam, model::generate_shape(shape, truth), 1.0, &rng);
        const auto corr = all_correspondences(landmarks);
        const Eigen::VectorXd alpha = fitting::fit_shape(cam, shape, corr, 1.0);
        const double best = fitting::shape_fitting_cost(cam, shape, corr, alpha, 1.0);
        for (int i = 0; i < 100; ++i)
        {
            const Eigen::VectorXd delta = random_vector(rng, M).normalized() * 1e-2;
            REQUIRE(fitting::shape_fitting_cost(cam, shape, corr, alpha + delta, 1.0) > best);
        }
    }

    SECTION("central finite differences vanish at the solution")
    {
        const auto centred = camera::camera_from_pose(1.5, 0.0, 0.0, 0.0, {0.0, 0.0});
        const Eigen::VectorXd truth = random_vector(rng, M);
        const auto landmarks = project_landmarks(centred, model::generate_shape(shape, truth), 0.5, &rng);
        const auto corr = all_correspondences(landmarks);
        const Eigen::VectorXd alpha = fitting::fit_shape(centred, shape, corr, 1.0);
        constexpr double h = 1e-6;
        for (int m = 0; m < M; ++m)
        {
            Eigen::VectorXd plus = alpha, minus = alpha;
            plus(m) += h;
            minus(m) -= h;
            const double gradient = (fitting::shape_fitting_cost(centred, shape, corr, plus, 1.0) -
                                     fitting::shape_fitting_cost(centred, shape, corr, minus, 1.0)) /
                                    (2.0 * h);
            REQUIRE(std::abs(gradient) <= 1e-6);
        }
    }

    SECTION("doubling the variances and halving lambda gives the same alpha")
    {
        const Eigen::VectorXd truth = random_vector(rng, M);
        const auto landmarks = project_landmarks(cam, model::generate_shape(shape, truth), 1.0, &rng);
        auto corr = all_correspondences(landmarks);
        const Eigen::VectorXd reference = fitting::fit_shape(cam, shape, corr, 1.0);
        for (auto& v : corr.variances)
        {
            v *= 2.0;
        }
        const Eigen::VectorXd scaled = fitting::fit_shape(cam, shape, corr, 0.5);
        REQUIRE((reference - scaled).cwiseAbs().maxCoeff() <= 1e-8);
    }

    SECTION("per-landmark variance down-weights a landmark")
    {
        const auto landmarks = project_landmarks(cam, model::MeshInstance{shape.mean});
        auto corr = all_correspondences(landmarks);
        corr.image_points[30] += Eigen::Vector2d(20.0, 0.0);
        const Eigen::VectorXd tight = fitting::fit_shape(cam, shape, corr, 1.0);
        corr.variances[30] = 1e6;
        const Eigen::VectorXd loose = fitting::fit_shape(cam, shape, corr, 1.0);
        REQUIRE(loose.norm() < tight.norm());
    }

    SECTION("lambda = 0 with too few landmarks is rank deficient")
    {
        const auto landmarks = project_landmarks(cam, model::MeshInstance{shape.mean});
        auto corr = all_correspondences(landmarks);
        fitting::Correspondences few;
        for (int k = 20; k < 23; ++k)
        {
            few.add(corr.landmark_ids[k], corr.image_points[k], corr.vertex_ids[k]);
        }
        REQUIRE_THROWS_AS(fitting::fit_shape(cam, shape, few, 0.0), core::RankDeficient);
        REQUIRE_NOTHROW(fitting::fit_shape(cam, shape, few, 1.0));
    }

    SECTION("invalid input")
    {
        REQUIRE_THROWS_AS(fitting::fit_shape(cam, shape, fitting::Correspondences{}, 1.0),
                          core::InsufficientCorrespondences);
        const auto corr = all_correspondences(project_landmarks(cam, model::MeshInstance{shape.mean}));
        REQUIRE_THROWS_AS(fitting::fit_shape(cam, shape, corr, -1.0), std::invalid_argument);
    }

    SECTION("landmark/mapping overload uses only fixed pairs")
    {
        const Eigen::VectorXd truth = random_vector(rng, M);
        const auto landmarks = project_landmarks(cam, model::generate_shape(shape, truth));
        const Eigen::VectorXd alpha = fitting::fit_shape(cam, shape, landmarks, face().mapping, 1e-8);
        REQUIRE((alpha - truth).cwiseAbs().maxCoeff() <= 1e-4);
    }
}

TEST_CASE("nnls", "[fitting][nnls]")
{
    std::mt19937 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);

    SECTION("unconstrained optimum inside the feasible region")
    {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
        const Eigen::Vector3d b(1.0, 2.0, 3.0);
        REQUIRE(fitting::nnls(A, b) == Eigen::VectorXd(b));
    }

    SECTION("negative targets are clamped to zero exactly")
    {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
        const Eigen::Vector3d b(1.0, -2.0, 3.0);
        const Eigen::VectorXd x = fitting::nnls(A, b);
        REQUIRE(x(1) == 0.0);
        REQUIRE(x(0) == Catch::Approx(1.0));
        REQUIRE(x(2) == Catch::Approx(3.0));
    }

    SECTION("matches exhaustive enumeration and satisfies KKT")
    {
        for (int trial = 0; trial < 200; ++trial)
        {
            const int n = 1 + trial % 4;
            Eigen::MatrixXd A(10, n);
            Eigen::VectorXd b(10);
            for (int i = 0; i < 10; ++i)
            {
                for (int j = 0; j < n; ++j)
                {
                    A(i, j) = normal(rng);
                }
                b(i) = normal(rng);
            }
            const Eigen::VectorXd x = fitting::nnls(A, b);
            const Eigen::VectorXd reference = exhaustive_nnls(A, b);
            REQUIRE((x - reference).cwiseAbs().maxCoeff() <= 1e-9);
            require_kkt(A, b, x, 1e-8);
        }
    }

    SECTION("empty problem and mismatched sizes")
    {
        REQUIRE(fitting::nnls(Eigen::MatrixXd(4, 0), Eigen::VectorXd::Zero(4)).size() == 0);
        REQUIRE_THROWS_AS(fitting::nnls(Eigen::MatrixXd::Zero(4, 2), Eigen::VectorXd::Zero(3)),
                          std::invalid_argument);
    }
}

TEST_CASE("fit_expressions", "[fitting][expressions]")
{
    const auto& shape = face().model.shape;
    const auto& blendshapes = face().model.blendshapes;
    const auto cam = frontal_camera();
    std::mt19937 rng(3);
    const Eigen::VectorXd alpha = random_vector(rng, shape.num_components());
    const model::MeshInstance identity = model::generate_shape(shape, alpha);
    const int L = blendshapes.num_blendshapes();

    SECTION("landmarks at the identity projection give psi = 0")
    {
        const auto corr = all_correspondences(project_landmarks(cam, identity));
        const Eigen::VectorXd psi = fitting::fit_expressions(cam, blendshapes, corr, identity);
        REQUIRE(psi.size() == L);
        REQUIRE(psi.cwiseAbs().maxCoeff() <= 1e-9);
    }

    SECTION("recovers non-negative coefficients")
    {
        Eigen::VectorXd truth(L);
        truth << 0.5, 1.2, 0.3, 0.8;
        const auto corr = all_correspondences(project_landmarks(cam, mesh_of(alpha, truth)));
        const Eigen::VectorXd psi = fitting::fit_expressions(cam, blendshapes, corr, identity);
        REQUIRE((psi - truth).cwiseAbs().maxCoeff() <= 1e-4);
    }

    SECTION("a negative ground-truth coefficient is clamped to zero")
    {
        Eigen::VectorXd truth(L);
        truth << 0.7, -0.8, 0.5, 0.4;
        const auto corr = all_correspondences(project_landmarks(cam, mesh_of(alpha, truth)));
        const Eigen::VectorXd psi = fitting::fit_expressions(cam, blendshapes, corr, identity);
        REQUIRE(psi(1) == 0.0);
        REQUIRE((psi - truth.cwiseMax(0.0)).cwiseAbs().maxCoeff() <= 1e-4);

        // Rebuild the weighted NNLS system and check optimality against enumeration.
        const Eigen::MatrixXd sub = model::blendshape_submatrix(blendshapes, corr.vertex_ids);
        const Eigen::Matrix<double, 2, 4> P = cam.matrix().topRows<2>();
        Eigen::MatrixXd A(2 * corr.size(), L);
        Eigen::VectorXd b(2 * corr.size());
        for (std::size_t k = 0; k < corr.size(); ++k)
        {
            const double w = 1.0 / std::sqrt(2.0);
            A.middleRows<2>(2 * k) = w * P * sub.middleRows<4>(4 * k);
            b.segment<2>(2 * k) = w * (corr.image_points[k] - cam.project(identity.vertex(corr.vertex_ids[k])));
        }
        require_kkt(A, b, psi, 1e-8);
        REQUIRE((psi - exhaustive_nnls(A, b)).cwiseAbs().maxCoeff() <= 1e-9);
    }

    SECTION("no blendshapes gives an empty result")
    {
        const auto corr = all_correspondences(project_landmarks(cam, identity));
        model::BlendshapeSet none;
        none.displacements = Eigen::MatrixXd::Zero(shape.mean.size(), 0);
        REQUIRE(fitting::fit_expressions(cam, none, corr, identity).size() == 0);
    }
}

TEST_CASE("fit_shape_and_expressions", "[fitting][alternation]")
{
    const auto& shape = face().model.shape;
    const auto& blendshapes = face().model.blendshapes;
    const auto cam = frontal_camera();
    const int M = shape.num_components();
    const int L = blendshapes.num_blendshapes();
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uniform(0.0, 1.5);
    fitting::FitOptions options;
    options.lambda = 1e-8;

    SECTION("noiseless data converges within ten rounds and recovers both coefficient sets")
    {
        for (int trial = 0; trial < 10; ++trial)
        {
            const Eigen::VectorXd alpha = random_vector(rng, M);
            Eigen::VectorXd psi(L);
            for (int j = 0; j < L; ++j)
            {
                psi(j) = uniform(rng);
            }
            const auto corr = all_correspondences(project_landmarks(cam, mesh_of(alpha, psi)));
            const auto result = fitting::fit_shape_and_expressions(cam, shape, blendshapes, corr, options);
            REQUIRE(result.converged);
            REQUIRE(result.alternations <= 10);
            REQUIRE((result.alpha - alpha).cwiseAbs().maxCoeff() <= 1e-3);
            REQUIRE((result.psi - psi).cwiseAbs().maxCoeff() <= 1e-3);
        }
    }

    SECTION("neutral data converges in at most two rounds")
    {
        const Eigen::VectorXd alpha = random_vector(rng, M);
        const auto corr = all_correspondences(project_landmarks(cam, model::generate_shape(shape, alpha)));
        const auto result = fitting::fit_shape_and_expressions(cam, shape, blendshapes, corr, options);
        REQUIRE(result.converged);
        REQUIRE(result.alternations <= 2);
        REQUIRE(result.psi.cwiseAbs().maxCoeff() <= 1e-6);
    }

    SECTION("recorded cost is non-increasing under noise")
    {
        for (int trial = 0; trial < 10; ++trial)
        {
            const Eigen::VectorXd alpha = random_vector(rng, M);
            Eigen::VectorXd psi(L);
            for (int j = 0; j < L; ++j)
            {
                psi(j) = uniform(rng);
            }
            const auto corr = all_correspondences(project_landmarks(cam, mesh_of(alpha, psi), 1.0, &rng));
            fitting::FitOptions noisy;
            const auto result = fitting::fit_shape_and_expressions(cam, shape, blendshapes, corr, noisy);
            REQUIRE(result.residuals.size() == static_cast<std::size_t>(result.alternations));
            for (std::size_t i = 1; i < result.residuals.size(); ++i)
            {
                REQUIRE(result.residuals[i] <= result.residuals[i - 1] + 1e-6);
            }
            REQUIRE((result.psi.array() >= 0.0).all());
        }
    }

    SECTION("one more round after convergence changes nothing")
    {
        const Eigen::VectorXd alpha = random_vector(rng, M);
        Eigen::VectorXd psi(L);
        psi << 0.4, 0.0, 1.1, 0.6;
        const auto corr = all_correspondences(project_landmarks(cam, mesh_of(alpha, psi), 0.5, &rng));
        const auto result = fitting::fit_shape_and_expressions(cam, shape, blendshapes, corr);
        REQUIRE(result.converged);
        const Eigen::VectorXd offset = blendshapes.displacements * result.psi;
        const Eigen::VectorXd next_alpha = fitting::fit_shape(cam, shape, corr, 1.0, &offset);
        const Eigen::VectorXd next_psi =
            fitting::fit_expressions(cam, blendshapes, corr, model::generate_shape(shape, next_alpha));
        REQUIRE((next_alpha - result.alpha).cwiseAbs().maxCoeff() < 1e-5);
        REQUIRE((next_psi - result.psi).cwiseAbs().maxCoeff() < 1e-5);
    }

    SECTION("max_alternations must be positive")
    {
        const auto corr = all_correspondences(project_landmarks(cam, model::MeshInstance{shape.mean}));
        fitting::FitOptions bad;
        bad.max_alternations = 0;
        REQUIRE_THROWS_AS(fitting::fit_shape_and_expressions(cam, shape, blendshapes, corr, bad),
                          std::invalid_argument);
    }
}

TEST_CASE("refine_contour", "[fitting][contour]")
{
    const auto& f = face();
    const model::MeshInstance mesh{f.model.shape.mean};
    std::mt19937 rng(13);

    SECTION("landmark exactly on a candidate projection")
    {
        const auto cam = camera::camera_from_pose(1.5, 25.0, 0.0, 0.0, {320.0, 240.0});
        const int j = f.mapping.contour_right[7];
        fitting::LandmarkSet landmarks;
        landmarks.entries.push_back({"3", cam.project(mesh.vertex(j)), std::nullopt});
        const auto result = fitting::refine_contour(cam, mesh, landmarks, f.mapping);
        REQUIRE(result.side == fitting::ContourSide::Right);
        REQUIRE(result.assignments.at("3") == j);
        REQUIRE((cam.project(mesh.vertex(j)) - landmarks.entries[0].position).squaredNorm() == 0.0);
    }

    SECTION("ties go to the smaller vertex index")
    {
        model::MeshInstance toy;
        toy.vertices.resize(9);
        toy.vertices << 0, 0, 0, -1, 0, 0, 1, 0, 0;
        const camera::AffineCamera cam = camera::camera_from_pose(1.0, 0.0, 0.0, 0.0, {0.0, 0.0});
        REQUIRE(fitting::closest_projected_vertex(cam, toy, {2, 1}, {0.0, 0.0}) == 1);
        REQUIRE(fitting::closest_projected_vertex(cam, toy, {1, 2}, {0.0, 0.0}) == 1);
    }

    SECTION("matches a brute-force argmin")
    {
        std::uniform_real_distribution<double> angle(-40.0, 40.0);
        std::uniform_real_distribution<double> offset(-60.0, 60.0);
        for (int trial = 0; trial < 200; ++trial)
        {
            const auto cam = camera::camera_from_pose(1.0 + 0.01 * (trial % 5), angle(rng), angle(rng) / 4.0,
                                                      angle(rng) / 4.0, {offset(rng), offset(rng)});
            const model::MeshInstance random_mesh =
                model::generate_shape(f.model.shape, random_vector(rng, f.model.shape.num_components()));
            fitting::LandmarkSet landmarks;
            for (const auto& id : fitting::ibug_contour_right_ids())
            {
                landmarks.entries.push_back({id, {offset(rng), offset(rng)}, std::nullopt});
            }
            for (const auto& id : fitting::ibug_contour_left_ids())
            {
                landmarks.entries.push_back({id, {offset(rng), offset(rng)}, std::nullopt});
            }
            const auto result = fitting::refine_contour(cam, random_mesh, landmarks, f.mapping);
            const bool right = result.side == fitting::ContourSide::Right;
            const auto& candidates = right ? f.mapping.contour_right : f.mapping.contour_left;
            REQUIRE(result.assignments.size() == 8);
            REQUIRE(result.excluded.size() == 8);
            for (const auto& [id, chosen] : result.assignments)
            {
                const Eigen::Vector2d y = landmarks.find(id)->position;
                int best = -1;
                double best_distance = std::numeric_limits<double>::infinity();
                for (int v : candidates)
                {
                    const double d = (cam.project(random_mesh.vertex(v)) - y).squaredNorm();
                    if (d < best_distance || (d == best_distance && v < best))
                    {
                        best_distance = d;
                        best = v;
                    }
                }
                REQUIRE(chosen == best);
            }
        }
    }

    SECTION("the side follows the yaw sign")
    {
        fitting::LandmarkSet landmarks;
        landmarks.entries.push_back({"2", {0.0, 0.0}, std::nullopt});
        landmarks.entries.push_back({"16", {0.0, 0.0}, std::nullopt});
        const auto right = fitting::refine_contour(camera::camera_from_pose(1.0, 30.0, 0.0, 0.0, {0, 0}), mesh,
                                                   landmarks, f.mapping);
        REQUIRE(right.side == fitting::ContourSide::Right);
        REQUIRE(right.assignments.count("2") == 1);
        REQUIRE(right.excluded == std::vector<std::string>{"16"});
        const auto left = fitting::refine_contour(camera::camera_from_pose(1.0, -30.0, 0.0, 0.0, {0, 0}), mesh,
                                                  landmarks, f.mapping);
        REQUIRE(left.side == fitting::ContourSide::Left);
        REQUIRE(left.assignments.count("16") == 1);
        REQUIRE(left.excluded == std::vector<std::string>{"2"});
    }

    SECTION("empty candidate list is a configuration error")
    {
        auto mapping = f.mapping;
        mapping.contour_right.clear();
        fitting::LandmarkSet landmarks;
        landmarks.entries.push_back({"4", {0.0, 0.0}, std::nullopt});
        REQUIRE_THROWS_AS(fitting::refine_contour(camera::camera_from_pose(1.0, 20.0, 0.0, 0.0, {0, 0}), mesh,
                                                  landmarks, mapping),
                          core::ConfigurationError);
    }

    SECTION("refinement never increases the contour distance")
    {
        std::uniform_int_distribution<std::size_t> pick(0, f.mapping.contour_right.size() - 1);
        for (int trial = 0; trial < 50; ++trial)
        {
            const auto cam = camera::camera_from_pose(1.5, 20.0, 0.0, 0.0, {320.0, 240.0});
            const auto landmarks = project_landmarks(cam, mesh, 3.0, &rng);
            const auto result = fitting::refine_contour(cam, mesh, landmarks, f.mapping);
            double previous = 0.0;
            double refined = 0.0;
            for (const auto& [id, chosen] : result.assignments)
            {
                const Eigen::Vector2d y = landmarks.find(id)->position;
                previous += (cam.project(mesh.vertex(f.mapping.contour_right[pick(rng)])) - y).squaredNorm();
                refined += (cam.project(mesh.vertex(chosen)) - y).squaredNorm();
            }
            REQUIRE(refined <= previous);
        }
    }
}

TEST_CASE("fit_frame", "[fitting][frame]")
{
    const auto& f = face();
    const auto& shape = f.model.shape;
    const int M = shape.num_components();
    const int L = f.model.blendshapes.num_blendshapes();
    std::mt19937 rng(17);

    SECTION("recovers a fully known synthetic frame")
    {
        const auto& g = outline_rigid_face();
        const auto cam = camera::camera_from_pose(1.4, 20.0, 5.0, -3.0, {300.0, 250.0});
        const Eigen::VectorXd alpha = random_vector(rng, M);
        Eigen::VectorXd psi(L);
        psi << 0.3, 0.9, 0.0, 0.5;
        const auto mesh = model::generate_shape_with_expression(g.model.shape, g.model.blendshapes, alpha, psi);
        const auto landmarks = project_landmarks(cam, mesh);
        fitting::FitOptions options;
        options.lambda = 1e-8;
        const auto result = fitting::fit_frame(g.model.shape, g.model.blendshapes, landmarks, g.mapping, options);
        REQUIRE((result.alpha - alpha).cwiseAbs().maxCoeff() <= 1e-2);
        const auto fitted =
            model::generate_shape_with_expression(g.model.shape, g.model.blendshapes, result.alpha, result.psi);
        double sum = 0.0;
        for (const auto& [id, vertex] : g.landmark_vertices)
        {
            sum += (result.camera.project(fitted.vertex(vertex)) - cam.project(mesh.vertex(vertex))).squaredNorm();
        }
        REQUIRE(std::sqrt(sum / g.landmark_vertices.size()) <= 1e-3);
        REQUIRE(result.contour_assignments.size() == 8);
        for (const auto& [id, vertex] : result.contour_assignments)
        {
            REQUIRE(std::stoi(id) <= 8);
        }
    }

    SECTION("four landmarks and no contour")
    {
        const auto cam = frontal_camera();
        const model::MeshInstance mesh{shape.mean};
        fitting::LandmarkSet landmarks;
        for (const std::string id : {"37", "46", "31", "58"})
        {
            landmarks.entries.push_back({id, cam.project(mesh.vertex(f.mapping.pairs.at(id))), std::nullopt});
        }
        const auto result = fitting::fit_frame(shape, f.model.blendshapes, landmarks, f.mapping);
        REQUIRE(result.contour_assignments.empty());
        REQUIRE(result.alpha.size() == M);
        REQUIRE(result.alpha.allFinite());
        REQUIRE((result.psi.array() >= 0.0).all());
        REQUIRE(result.camera.matrix().row(2) == Eigen::RowVector4d(0, 0, 0, 1));
    }

    SECTION("fewer than four fixed landmarks")
    {
        fitting::LandmarkSet landmarks;
        for (const std::string id : {"37", "46", "31", "3"})
        {
            landmarks.entries.push_back({id, {0.0, 0.0}, std::nullopt});
        }
        REQUIRE_THROWS_AS(fitting::fit_frame(shape, f.model.blendshapes, landmarks, f.mapping),
                          core::InsufficientCorrespondences);
    }

    SECTION("a 30 degree yaw picks the camera-facing outline")
    {
        for (double yaw : {30.0, -30.0})
        {
            const auto cam = camera::camera_from_pose(1.5, yaw, 0.0, 0.0, {320.0, 240.0});
            const auto landmarks = project_landmarks(cam, model::generate_shape(shape, random_vector(rng, M)));
            const auto result = fitting::fit_frame(shape, f.model.blendshapes, landmarks, f.mapping);
            REQUIRE(fitting::front_facing_side(result.camera) ==
                    (yaw > 0 ? fitting::ContourSide::Right : fitting::ContourSide::Left));
            for (const auto& [id, vertex] : result.contour_assignments)
            {
                REQUIRE((yaw > 0) == (std::stoi(id) <= 8));
            }
        }
    }
}
