/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/fitting/blendshape_fitting.hpp
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

#ifndef VIDFACE_FITTING_BLENDSHAPE_FITTING_HPP
#define VIDFACE_FITTING_BLENDSHAPE_FITTING_HPP

#include "vidface/camera/affine_camera.hpp"
#include "vidface/fitting/linear_shape_fitting.hpp"
#include "vidface/fitting/nnls.hpp"
#include "vidface/model/PcaShapeModel.hpp"

#include "Eigen/Core"

namespace vidface {
namespace fitting {

/**
 * @brief Fits non-negative blendshape coefficients to the landmarks, given the identity shape.
 *
 * Minimises sum_k ||P_k (identity_h + B_h psi) - y_k||^2 / (2 sigma_k^2) subject to psi >= 0 with nnls().
 * B_h is the homogeneous landmark submatrix of the blendshapes, unscaled. With equal variances this is the
 * plain reprojection distance.
 */
inline model::ExpressionCoefficients fit_expressions(const camera::AffineCamera& camera,
                                                     const model::BlendshapeSet& blendshapes,
                                                     const Correspondences& correspondences,
                                                     const model::MeshInstance& identity_shape)
{
    const int num_blendshapes = blendshapes.num_blendshapes();
    if (num_blendshapes == 0)
    {
        return Eigen::VectorXd(0);
    }
    const auto num_points = static_cast<Eigen::Index>(correspondences.size());
    const Eigen::MatrixXd sub = model::blendshape_submatrix(blendshapes, correspondences.vertex_ids);
    const Eigen::Matrix<double, 2, 4> projection = camera.matrix().topRows<2>();

    Eigen::MatrixXd system(2 * num_points, num_blendshapes);
    Eigen::VectorXd rhs(2 * num_points);
    for (Eigen::Index k = 0; k < num_points; ++k)
    {
        const double weight = 1.0 / std::sqrt(2.0 * correspondences.variances[k]);
        system.middleRows<2>(2 * k) = weight * projection * sub.middleRows<4>(4 * k);
        const Eigen::Vector3d vertex = identity_shape.vertex(correspondences.vertex_ids[k]);
        rhs.segment<2>(2 * k) = weight * (correspondences.image_points[k] - camera.project(vertex));
    }
    return nnls(system, rhs);
};

inline model::ExpressionCoefficients fit_expressions(const camera::AffineCamera& camera,
                                                     const model::BlendshapeSet& blendshapes,
                                                     const LandmarkSet& landmarks,
                                                     const LandmarkVertexMapping& mapping,
                                                     const model::MeshInstance& identity_shape)
{
    return fit_expressions(camera, blendshapes, fixed_correspondences(landmarks, mapping), identity_shape);
};

} /* namespace fitting */
} /* namespace vidface */

#endif /* VIDFACE_FITTING_BLENDSHAPE_FITTING_HPP */
