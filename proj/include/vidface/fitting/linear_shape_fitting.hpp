/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/fitting/linear_shape_fitting.hpp
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
#pragma once

#ifndef VIDFACE_FITTING_LINEAR_SHAPE_FITTING_HPP
#define VIDFACE_FITTING_LINEAR_SHAPE_FITTING_HPP

#include "vidface/camera/affine_camera.hpp"
#include "vidface/core/exceptions.hpp"
#include "vidface/fitting/landmarks.hpp"
#include "vidface/model/PcaShapeModel.hpp"

#include "Eigen/Core"
#include "Eigen/QR"

#include <optional>
#include <string>
#include <vector>

namespace vidface {
namespace fitting {

/**
 * Resolved 2D-3D correspondences: image point k belongs to model vertex vertex_ids[k].
 */
struct Correspondences
{
    std::vector<std::string> landmark_ids;
    std::vector<Eigen::Vector2d> image_points;
    std::vector<int> vertex_ids;
    std::vector<double> variances; ///< sigma^2_2D per point

    std::size_t size() const noexcept { return vertex_ids.size(); };

    void add(const std::string& id, const Eigen::Vector2d& point, int vertex, double variance = 1.0)
    {
        landmark_ids.push_back(id);
        image_points.push_back(point);
        vertex_ids.push_back(vertex);
        variances.push_back(variance);
    };
};

/**
 * Pairs every landmark that has a fixed vertex in the mapping. Contour landmarks are left out unless
 * \p include_contour is set.
 */
inline Correspondences fixed_correspondences(const LandmarkSet& landmarks, const LandmarkVertexMapping& mapping,
                                             bool include_contour = false)
{
    Correspondences c;
    for (const auto& l : landmarks.entries)
    {
        if (!include_contour && mapping.is_contour_landmark(l.id))
        {
            continue;
        }
        if (const auto vertex = mapping.vertex(l.id))
        {
            c.add(l.id, l.position, *vertex, l.variance.value_or(1.0));
        }
    }
    return c;
};

inline std::vector<Eigen::Vector3d> vertex_positions(const model::MeshInstance& mesh, const std::vector<int>& ids)
{
    std::vector<Eigen::Vector3d> points;
    points.reserve(ids.size());
    for (int id : ids)
    {
        points.push_back(mesh.vertex(id));
    }
    return points;
};

/**
 * The shape fitting cost
 *   E = sum_k ||y_m2D,k - y_k||^2 / (2 sigma_k^2) + lambda ||alpha||^2,
 * summed over the two image coordinates of each correspondence, where y_m2D is the projection of the shape
 * generated from alpha (plus \p offset, a 3N displacement such as the current expression) by \p camera.
 */
inline double shape_fitting_cost(const camera::AffineCamera& camera, const model::PcaShapeModel& model,
                                 const Correspondences& correspondences, const Eigen::VectorXd& alpha,
                                 double lambda, const Eigen::VectorXd* offset = nullptr)
{
    model::MeshInstance mesh = model::generate_shape(model, alpha);
    if (offset)
    {
        mesh.vertices += *offset;
    }
    double cost = lambda * alpha.squaredNorm();
    for (std::size_t k = 0; k < correspondences.size(); ++k)
    {
        const Eigen::Vector2d r = camera.project(mesh.vertex(correspondences.vertex_ids[k])) -
                                  correspondences.image_points[k];
        cost += r.squaredNorm() / (2.0 * correspondences.variances[k]);
    }
    return cost;
};

/**
 * @brief Finds the PCA shape coefficients that minimise shape_fitting_cost() for a given camera.
 *
 * The projection is linear in alpha: with V_h the homogeneous landmark submatrix of the basis (see
 * model::landmark_basis_submatrix()) and P block-diagonal copies of the camera, y_m2D = P (V_h alpha +
 * mean_h + offset_h). The weighted, Tikhonov-regularised system
 *
 *   [ W P V_h       ]           [ W (y - P (mean_h + offset_h)) ]
 *   [ sqrt(lambda) I] alpha  =  [ 0                             ]
 *
 * with W = diag(1 / sqrt(2 sigma^2)) is solved in the least-squares sense by column-pivoting QR.
 *
 * @param[in] lambda Regularisation weight, >= 0. With lambda = 0 the system has to have full column rank,
 *                   otherwise core::RankDeficient is thrown.
 * @param[in] offset Optional 3N displacement added to the mean (the current expression in the alternating
 *                   fit).
 */
inline model::ShapeCoefficients fit_shape(const camera::AffineCamera& camera, const model::PcaShapeModel& model,
                                          const Correspondences& correspondences, double lambda = 1.0,
                                          const Eigen::VectorXd* offset = nullptr)
{
    if (correspondences.size() == 0)
    {
        throw core::InsufficientCorrespondences(0, 1);
    }
    if (!(lambda >= 0.0))
    {
        throw std::invalid_argument("fit_shape: lambda must be >= 0");
    }
    const auto num_points = static_cast<Eigen::Index>(correspondences.size());
    const int num_coeffs = model.num_components();
    const model::HomogeneousSubmodel sub = model::landmark_basis_submatrix(model, correspondences.vertex_ids);

    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(2 * num_points + num_coeffs, num_coeffs);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * num_points + num_coeffs);
    const Eigen::Matrix<double, 2, 4> projection = camera.matrix().topRows<2>();
    for (Eigen::Index k = 0; k < num_points; ++k)
    {
        Eigen::Vector4d base = sub.mean.segment<4>(4 * k);
        if (offset)
        {
            base.head<3>() += offset->segment<3>(3 * correspondences.vertex_ids[k]);
        }
        const double weight = 1.0 / std::sqrt(2.0 * correspondences.variances[k]);
        system.middleRows<2>(2 * k) = weight * projection * sub.basis.middleRows<4>(4 * k);
        rhs.segment<2>(2 * k) = weight * (correspondences.image_points[k] - projection * base);
    }
    system.bottomRows(num_coeffs).diagonal().setConstant(std::sqrt(lambda));

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
    if (qr.rank() < num_coeffs)
    {
        throw core::RankDeficient("fit_shape: underdetermined system; use lambda > 0", static_cast<int>(qr.rank()),
                                  num_coeffs);
    }
    return qr.solve(rhs);
};

inline model::ShapeCoefficients fit_shape(const camera::AffineCamera& camera, const model::PcaShapeModel& model,
                                          const LandmarkSet& landmarks, const LandmarkVertexMapping& mapping,
                                          double lambda = 1.0, const Eigen::VectorXd* offset = nullptr)
{
    return fit_shape(camera, model, fixed_correspondences(landmarks, mapping), lambda, offset);
};

} /* namespace fitting */
} /* namespace vidface */

#endif /* VIDFACE_FITTING_LINEAR_SHAPE_FITTING_HPP */
