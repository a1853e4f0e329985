/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: tests/test_tracker.cpp
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
#include "vidface/tracker/cascade.hpp"
#include "vidface/tracker/hog.hpp"
#include "vidface/tracker/io.hpp"

#include "catch_amalgamated.hpp"

#include "Eigen/LU"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

using namespace vidface;
using tracker::HogConfig;

namespace {

// Four dark blobs on a bright background: a small rigid "face" for cascade tests.
Eigen::VectorXd blob_template()
{
    Eigen::VectorXd t(8);
    t << -0.5, -0.3, 0.5, -0.25, 0.05, 0.1, -0.1, 0.5;
    return t;
}

core::Image1f blob_image(const Eigen::VectorXd& landmarks, int size = 96)
{
    core::Image1f image(size, size, 0.8f);
    for (int r = 0; r < size; ++r)
    {
        for (int c = 0; c < size; ++c)
        {
            double v = 0.8;
            for (Eigen::Index i = 0; i < landmarks.size() / 2; ++i)
            {
                const double dx = c - landmarks(2 * i);
                const double dy = r - landmarks(2 * i + 1);
                v -= (0.5 + 0.1 * i) * std::exp(-(dx * dx + dy * dy) / (2.0 * 9.0));
            }
            image(r, c) = static_cast<float>(v);
        }
    }
    return image;
}

tracker::TrainingSample blob_sample(std::mt19937& rng)
{
    std::uniform_real_distribution<double> centre(38.0, 58.0);
    std::uniform_real_distribution<double> width(32.0, 44.0);
    const double cx = centre(rng);
    const double cy = centre(rng);
    const double w = width(rng);
    Eigen::VectorXd landmarks = blob_template();
    for (int i = 0; i < 4; ++i)
    {
        landmarks(2 * i) = cx + w * landmarks(2 * i);
        landmarks(2 * i + 1) = cy + w * landmarks(2 * i + 1);
    }
    return {blob_image(landmarks), landmarks};
}

HogConfig fixed_patch_config()
{
    HogConfig c;
    c.eye_left = -1; // no eye landmarks: fixed 24 pixel patches
    return c;
}

// Straightforward HOG written independently of the library: explicit degrees and per-cell loops.
Eigen::VectorXd reference_hog(const Eigen::MatrixXd& p, int cells, int bins, double eps)
{
    const int n = static_cast<int>(p.rows());
    const int cs = n / cells;
    std::vector<double> h(cells * cells * bins, 0.0);
    const double width_deg = 180.0 / bins;
    for (int cy = 0; cy < cells; ++cy)
    {
        for (int cx = 0; cx < cells; ++cx)
        {
            for (int r = cy * cs; r < (cy + 1) * cs; ++r)
            {
                for (int c = cx * cs; c < (cx + 1) * cs; ++c)
                {
                    double gx;
                    double gy;
                    if (c == 0)
                        gx = p(r, 1) - p(r, 0);
                    else if (c == n - 1)
                        gx = p(r, n - 1) - p(r, n - 2);
                    else
                        gx = (p(r, c + 1) - p(r, c - 1)) / 2.0;
                    if (r == 0)
                        gy = p(1, c) - p(0, c);
                    else if (r == n - 1)
                        gy = p(n - 1, c) - p(n - 2, c);
                    else
                        gy = (p(r + 1, c) - p(r - 1, c)) / 2.0;
                    const double mag = std::hypot(gx, gy);
                    if (mag == 0.0)
                        continue;
                    double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
                    while (deg < 0.0)
                        deg += 180.0;
                    while (deg >= 180.0)
                        deg -= 180.0;
                    const int lo = static_cast<int>(deg / width_deg);
                    const double frac = deg / width_deg - lo;
                    const int base = (cy * cells + cx) * bins;
                    h[base + lo % bins] += (1.0 - frac) * mag;
                    h[base + (lo + 1) % bins] += frac * mag;
                }
            }
        }
    }
    double norm2 = 0.0;
    for (double v : h)
        norm2 += v * v;
    Eigen::VectorXd out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        out(i) = h[i] / std::sqrt(norm2 + eps * eps);
    return out;
}

} // namespace

TEST_CASE("hog descriptor", "[tracker][hog]")
{
    SECTION("constant patch gives zero histograms")
    {
        const Eigen::MatrixXd patch = Eigen::MatrixXd::Constant(24, 24, 0.4);
        const auto d = tracker::hog_descriptor(patch, 3, 9, 1e-5);
        REQUIRE(d.size() == 81);
        REQUIRE(d.isZero(0.0));
    }

    SECTION("vertical step edge fills the horizontal-gradient bin")
    {
        Eigen::MatrixXd patch(24, 24);
        for (int c = 0; c < 24; ++c)
        {
            patch.col(c).setConstant(c < 12 ? 0.0 : 1.0);
        }
        const auto d = tracker::hog_descriptor(patch, 3, 9, 1e-5);
        double bin0 = 0.0;
        double other = 0.0;
        for (int i = 0; i < d.size(); ++i)
        {
            (i % 9 == 0 ? bin0 : other) += d(i);
        }
        REQUIRE(bin0 > 0.5);
        REQUIRE(other == 0.0);
    }

    SECTION("matches a naive reference on random patches")
    {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial)
        {
            Eigen::MatrixXd patch(24, 24);
            for (int i = 0; i < patch.size(); ++i)
            {
                patch.data()[i] = unit(rng);
            }
            const auto d = tracker::hog_descriptor(patch, 3, 9, 1e-5);
            REQUIRE((d - reference_hog(patch, 3, 9, 1e-5)).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }

    SECTION("descriptor is deterministic and has unit norm for textured patches")
    {
        Eigen::MatrixXd patch(12, 12);
        for (int r = 0; r < 12; ++r)
            for (int c = 0; c < 12; ++c)
                patch(r, c) = std::sin(0.7 * r) * std::cos(0.3 * c);
        const auto a = tracker::hog_descriptor(patch, 2, 6, 1e-5);
        const auto b = tracker::hog_descriptor(patch, 2, 6, 1e-5);
        REQUIRE(a == b);
        REQUIRE(a.size() == 24);
        REQUIRE(a.norm() == Catch::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("extract_features", "[tracker][hog]")
{
    std::mt19937 rng(5);
    const auto sample = blob_sample(rng);
    const auto config = fixed_patch_config();

    SECTION("length is K times cells^2 times bins")
    {
        REQUIRE(tracker::extract_features(sample.image, sample.landmarks, config).size() == 4 * 81);
    }

    SECTION("integer translation of image and landmarks leaves features unchanged")
    {
        const int shift_x = 7;
        const int shift_y = -4;
        core::Image1f shifted(sample.image.height(), sample.image.width());
        for (int r = 0; r < shifted.height(); ++r)
            for (int c = 0; c < shifted.width(); ++c)
                shifted(r, c) = sample.image.clamped(r - shift_y, c - shift_x);
        Eigen::VectorXd moved = sample.landmarks;
        for (int i = 0; i < 4; ++i)
        {
            moved(2 * i) += shift_x;
            moved(2 * i + 1) += shift_y;
        }
        const auto a = tracker::extract_features(sample.image, sample.landmarks, config);
        const auto b = tracker::extract_features(shifted, moved, config);
        REQUIRE((a - b).cwiseAbs().maxCoeff() <= 1e-5);
    }

    SECTION("landmarks outside the image are handled by edge replication")
    {
        Eigen::VectorXd outside = sample.landmarks;
        outside(0) = -50.0;
        outside(1) = 500.0;
        const auto f = tracker::extract_features(sample.image, outside, config);
        REQUIRE(f.allFinite());
    }

    SECTION("patch side follows the inter-eye distance when eye landmarks exist")
    {
        HogConfig c;
        c.eye_left = 0;
        c.eye_right = 1;
        Eigen::VectorXd lm(4);
        lm << 10.0, 20.0, 90.0, 20.0;
        REQUIRE(tracker::patch_side(c, lm) == Catch::Approx(20.0));
        lm << 10.0, 20.0, 11.0, 20.0;
        REQUIRE(tracker::patch_side(c, lm) == Catch::Approx(c.min_patch_side));
        REQUIRE(tracker::patch_side(fixed_patch_config(), lm) == 24.0);
    }
}

TEST_CASE("predict", "[tracker][cascade]")
{
    std::mt19937 rng(9);
    const auto sample = blob_sample(rng);
    tracker::RegressorCascade cascade;
    cascade.feature_config = fixed_patch_config();
    cascade.mean_landmarks = tracker::normalise_to_unit_box(blob_template());
    const int d = cascade.feature_config.feature_length(4);

    SECTION("all-zero stages return the input")
    {
        cascade.stages.assign(3, {Eigen::MatrixXd::Zero(8, d), Eigen::VectorXd::Zero(8)});
        REQUIRE(tracker::predict(cascade, sample.image, sample.landmarks) == sample.landmarks);
    }

    SECTION("a single offset stage adds the offset")
    {
        Eigen::VectorXd delta(8);
        delta << 1, -2, 3, -4, 0.5, 0.25, -1, 2;
        cascade.stages.assign(1, {Eigen::MatrixXd::Zero(8, d), delta});
        REQUIRE(tracker::predict(cascade, sample.image, sample.landmarks) == sample.landmarks + delta);
    }

    SECTION("wrong initial length is rejected")
    {
        cascade.stages.assign(1, {Eigen::MatrixXd::Zero(8, d), Eigen::VectorXd::Zero(8)});
        REQUIRE_THROWS_AS(tracker::predict(cascade, sample.image, Eigen::VectorXd::Zero(6)), core::ValidationError);
    }
}

TEST_CASE("fit_ridge", "[tracker][train]")
{
    std::mt19937 rng(11);
    std::normal_distribution<double> normal;

    SECTION("an exact linear relation is recovered with a tiny ridge")
    {
        const int d = 1;
        const int n = 40;
        Eigen::MatrixXd features(d, n);
        for (int j = 0; j < n; ++j)
            features(0, j) = normal(rng);
        Eigen::MatrixXd targets = 2.5 * features;
        targets.array() += 0.75;
        const auto stage = tracker::fit_ridge(features, targets, 1e-12);
        const Eigen::MatrixXd predicted = (stage.A * features).colwise() + stage.b;
        REQUIRE((predicted - targets).cwiseAbs().maxCoeff() <= 1e-8);
        REQUIRE(stage.A(0, 0) == Catch::Approx(2.5).epsilon(1e-9));
        REQUIRE(stage.b(0) == Catch::Approx(0.75).epsilon(1e-9));
    }

    SECTION("dual form agrees with the primal form")
    {
        const int d = 30;
        const int m = 4;
        Eigen::MatrixXd few(d, 12);
        Eigen::MatrixXd y(m, 12);
        for (int i = 0; i < few.size(); ++i)
            few.data()[i] = normal(rng);
        for (int i = 0; i < y.size(); ++i)
            y.data()[i] = normal(rng);
        const double lambda = 0.3;
        const auto dual = tracker::fit_ridge(few, y, lambda);
        // Primal normal equations written out directly.
        const Eigen::MatrixXd fc = few.colwise() - few.rowwise().mean();
        const Eigen::MatrixXd yc = y.colwise() - y.rowwise().mean();
        const Eigen::MatrixXd gram = fc * fc.transpose() + lambda * Eigen::MatrixXd::Identity(d, d);
        const Eigen::MatrixXd primal = (yc * fc.transpose()) * gram.inverse();
        REQUIRE((dual.A - primal).cwiseAbs().maxCoeff() <= 1e-9);
    }

    SECTION("zero-variance feature rows with lambda 0 raise RankDeficient")
    {
        Eigen::MatrixXd features = Eigen::MatrixXd::Zero(3, 20);
        for (int j = 0; j < 20; ++j)
            features(0, j) = normal(rng);
        const Eigen::MatrixXd targets = Eigen::MatrixXd::Ones(2, 20);
        REQUIRE_THROWS_AS(tracker::fit_ridge(features, targets, 0.0), core::RankDeficient);
        REQUIRE_NOTHROW(tracker::fit_ridge(features, targets, 1e-6));
    }

    SECTION("invalid input")
    {
        REQUIRE_THROWS_AS(tracker::fit_ridge(Eigen::MatrixXd(2, 3), Eigen::MatrixXd(2, 4), 1.0), core::ValidationError);
        REQUIRE_THROWS_AS(tracker::fit_ridge(Eigen::MatrixXd::Ones(2, 3), Eigen::MatrixXd::Ones(2, 3), -1.0),
                          core::ValidationError);
    }
}

TEST_CASE("train", "[tracker][train]")
{
    std::mt19937 rng(13);
    std::vector<tracker::TrainingSample> samples;
    for (int i = 0; i < 30; ++i)
    {
        samples.push_back(blob_sample(rng));
    }
    tracker::TrainingOptions options;
    options.feature_config = fixed_patch_config();

    SECTION("ground truth equal to initialisation gives a zero map")
    {
        tracker::TrainingOptions exact = options;
        exact.perturbation.translation = 0.0;
        exact.perturbation.scale = 0.0;
        exact.num_stages = 1;
        const auto cascade = tracker::train(samples, exact);
        REQUIRE(cascade.stages.front().A.norm() <= 1e-6);
        REQUIRE(cascade.stages.front().b.cwiseAbs().maxCoeff() <= 1e-6);
    }

    SECTION("stage errors are non-increasing over five stages")
    {
        tracker::TrainingReport report;
        const auto cascade = tracker::train(samples, options, &report);
        REQUIRE(cascade.stages.size() == 5);
        REQUIRE(report.stage_errors.size() == 6);
        for (std::size_t s = 1; s < report.stage_errors.size(); ++s)
        {
            REQUIRE(report.stage_errors[s] <= report.stage_errors[s - 1]);
        }
        REQUIRE(report.stage_errors.back() < 0.5 * report.stage_errors.front());
        REQUIRE_NOTHROW(cascade.validate());

        SECTION("the trained cascade improves held-out initialisations")
        {
            std::mt19937 held_rng(99);
            double before = 0.0;
            double after = 0.0;
            for (int i = 0; i < 10; ++i)
            {
                const auto s = blob_sample(held_rng);
                auto box = tracker::bounding_box(s.landmarks);
                box.x += 1.5;
                box.y -= 1.0;
                const Eigen::VectorXd init = tracker::align_to_box(cascade.mean_landmarks, box);
                before += tracker::mean_point_error(init, s.landmarks);
                after += tracker::mean_point_error(tracker::predict(cascade, s.image, init), s.landmarks);
            }
            REQUIRE(after < 0.5 * before);
        }
    }

    SECTION("training is deterministic")
    {
        options.num_stages = 2;
        const auto a = tracker::train(samples, options);
        const auto b = tracker::train(samples, options);
        for (std::size_t s = 0; s < a.stages.size(); ++s)
        {
            REQUIRE(a.stages[s].A == b.stages[s].A);
            REQUIRE(a.stages[s].b == b.stages[s].b);
        }
    }

    SECTION("invalid options")
    {
        REQUIRE_THROWS_AS(tracker::train({}, options), core::ValidationError);
        options.num_stages = 0;
        REQUIRE_THROWS_AS(tracker::train(samples, options), core::ValidationError);
    }
}

TEST_CASE("track_video_step", "[tracker][video]")
{
    tracker::RegressorCascade cascade;
    cascade.feature_config = fixed_patch_config();
    cascade.mean_landmarks = tracker::normalise_to_unit_box(blob_template());
    cascade.stages.assign(1, {Eigen::MatrixXd::Zero(8, cascade.feature_config.feature_length(4)),
                              Eigen::VectorXd::Zero(8)});
    const core::Image1f frame(64, 64, 0.5f);

    SECTION("previous landmarks equal to the scaled mean are reproduced")
    {
        const tracker::FaceBox box{10.0, 12.0, 40.0, 37.0};
        const Eigen::VectorXd previous = tracker::align_to_box(cascade.mean_landmarks, box);
        const auto out = tracker::track_video_step(cascade, frame, previous, std::nullopt);
        REQUIRE((out - previous).cwiseAbs().maxCoeff() <= 1e-12);
    }

    SECTION("a face box centres the mean and scales it to the box width")
    {
        const tracker::FaceBox box{5.0, 7.0, 30.0, 50.0};
        const auto out = tracker::track_video_step(cascade, frame, std::nullopt, box);
        const auto placed = tracker::bounding_box(out);
        REQUIRE(placed.centre_x() == Catch::Approx(box.centre_x()));
        REQUIRE(placed.centre_y() == Catch::Approx(box.centre_y()));
        REQUIRE(placed.width == Catch::Approx(box.width));
    }

    SECTION("previous landmarks take precedence over the box")
    {
        const Eigen::VectorXd previous = tracker::align_to_box(cascade.mean_landmarks, {20.0, 20.0, 10.0, 10.0});
        const auto out = tracker::track_video_step(cascade, frame, previous, tracker::FaceBox{0.0, 0.0, 60.0, 60.0});
        REQUIRE((out - previous).cwiseAbs().maxCoeff() <= 1e-12);
    }

    SECTION("no initialiser")
    {
        REQUIRE_THROWS_AS(tracker::track_video_step(cascade, frame, std::nullopt, std::nullopt),
                          core::MissingInitialization);
    }
}

TEST_CASE("cascade io", "[tracker][io]")
{
    std::mt19937 rng(21);
    std::vector<tracker::TrainingSample> samples;
    for (int i = 0; i < 6; ++i)
    {
        samples.push_back(blob_sample(rng));
    }
    tracker::TrainingOptions options;
    options.feature_config = fixed_patch_config();
    options.num_stages = 2;
    const auto cascade = tracker::train(samples, options);
    const auto path = (std::filesystem::temp_directory_path() / "vidface_cascade_test.msgpack").string();

    SECTION("round trip is exact")
    {
        tracker::save_cascade(path, cascade);
        const auto loaded = tracker::load_cascade(path);
        REQUIRE(loaded.stages.size() == cascade.stages.size());
        for (std::size_t s = 0; s < loaded.stages.size(); ++s)
        {
            REQUIRE(loaded.stages[s].A == cascade.stages[s].A);
            REQUIRE(loaded.stages[s].b == cascade.stages[s].b);
        }
        REQUIRE(loaded.mean_landmarks == cascade.mean_landmarks);
        REQUIRE(loaded.feature_config.eye_left == -1);
        REQUIRE(tracker::predict(loaded, samples[0].image, samples[1].landmarks) ==
                tracker::predict(cascade, samples[0].image, samples[1].landmarks));
    }

    SECTION("schema errors")
    {
        auto j = tracker::to_json(cascade);
        j["version"] = 7;
        REQUIRE_THROWS_AS(tracker::cascade_from_json(j), core::SchemaVersionMismatch);
        j = tracker::to_json(cascade);
        j["K"] = 5;
        REQUIRE_THROWS_AS(tracker::cascade_from_json(j), core::ValidationError);
        j = tracker::to_json(cascade);
        j["stages"] = nlohmann::json::array();
        REQUIRE_THROWS_AS(tracker::cascade_from_json(j), core::ValidationError);
        j = tracker::to_json(cascade);
        j.erase("mean_landmarks");
        REQUIRE_THROWS_AS(tracker::cascade_from_json(j), core::ParseError);
    }

    SECTION("missing and corrupt files")
    {
        REQUIRE_THROWS_AS(tracker::load_cascade(path + ".missing"), core::FileNotFound);
        std::ofstream(path, std::ios::binary) << "not msgpack";
        REQUIRE_THROWS_AS(tracker::load_cascade(path), core::ParseError);
    }
    std::filesystem::remove(path);
}
