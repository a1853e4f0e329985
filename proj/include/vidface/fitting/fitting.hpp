/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/fitting/fitting.hpp
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

#ifndef VIDFACE_FITTING_FITTING_HPP
#define VIDFACE_FITTING_FITTING_HPP

#include "vidface/camera/affine_camera.hpp"
#include "vidface/core/exceptions.hpp"
#include "vidface/fitting/blendshape_fitting.hpp"
#include "vidface/fitting/contour_correspondence.hpp"
#include "vidface/fitting/landmarks.hpp"
#include "vidface/fitting/linear_shape_fitting.hpp"
#include "vidface/model/PcaShapeModel.hpp"

#include "Eigen/Core"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace vidface {
namespace fitting {

struct FitOptions
{
    double lambda = 1.0;              ///< Weight of ||alpha||^2
    int max_alternations = 10;        ///< Shape/expression rounds in fit_shape_and_expressions()
    double tolerance = 1e-5;          ///< Stop once max |delta (alpha, psi)| falls below this
    int outer_iterations = 3;         ///< Camera/shape/contour rounds in fit_frame()
};

struct FitResult
{
    model::ShapeCoefficients alpha;
    model::ExpressionCoefficients psi;
    camera::AffineCamera camera;
    /// Fitting cost after each alternation: reprojection term sum r^2 / (2 sigma^2) plus lambda ||alpha||^2.
    std::vector<double> residuals;
    std::map<std::string, int> contour_assignments;
    int alternations = 0;
    bool converged = false;
};

/**
 * Total alternating-fit objective at (alpha, psi): shape_fitting_cost() with the expression as offset.
 */
inline double joint_cost(const camera::AffineCamera& camera, const model::PcaShapeModel& model,
                         const model::BlendshapeSet& blendshapes, const Correspondences& correspondences,
                         const Eigen::VectorXd& alpha, const Eigen::VectorXd& psi, double lambda)
{
    if (psi.size() == 0)
    {
        return shape_fitting_cost(camera, model, correspondences, alpha, lambda);
    }
    const Eigen::VectorXd offset = blendshapes.displacements * psi;
    return shape_fitting_cost(camera, model, correspondences, alpha, lambda, &offset);
};

/**
 * @brief Alternates between fitting the shape (given the expression) and the expressions (given the shape).
 *
 * Starts from alpha = 0, psi = 0. Each round first solves for alpha with the current blendshape
 * displacement as offset, then for psi >= 0 on top of the new identity shape. Both steps minimise the same
 * objective over one block of variables, so the recorded cost never increases. Stops when neither alpha
 * nor psi changed by more than \c options.tolerance or after \c options.max_alternations rounds.
 */
inline FitResult fit_shape_and_expressions(const camera::AffineCamera& camera, const model::PcaShapeModel& model,
                                           const model::BlendshapeSet& blendshapes,
                                           const Correspondences& correspondences, const FitOptions& options = {})
{
    if (options.max_alternations < 1)
    {
        throw std::invalid_argument("fit_shape_and_expressions: max_alternations must be >= 1");
    }
    FitResult result;
    result.camera = camera;
    result.alpha = Eigen::VectorXd::Zero(model.num_components());
    result.psi = Eigen::VectorXd::Zero(blendshapes.num_blendshapes());
    Eigen::VectorXd offset = Eigen::VectorXd::Zero(model.mean.size());

    for (int round = 0; round < options.max_alternations; ++round)
    {
        const Eigen::VectorXd alpha = fit_shape(camera, model, correspondences, options.lambda, &offset);
        const model::MeshInstance identity = model::generate_shape(model, alpha);
        const Eigen::VectorXd psi = fit_expressions(camera, blendshapes, correspondences, identity);

        double change = (alpha - result.alpha).cwiseAbs().maxCoeff();
        if (psi.size() > 0)
        {
            change = std::max(change, (psi - result.psi).cwiseAbs().maxCoeff());
            offset = blendshapes.displacements * psi;
        }
        result.alpha = alpha;
        result.psi = psi;
        result.alternations = round + 1;
        result.residuals.push_back(
            joint_cost(camera, model, blendshapes, correspondences, alpha, psi, options.lambda));
        if (change < options.tolerance)
        {
            result.converged = true;
            break;
        }
    }
    return result;
};

inline FitResult fit_shape_and_expressions(const camera::AffineCamera& camera, const model::PcaShapeModel& model,
                                           const model::BlendshapeSet& blendshapes, const LandmarkSet& landmarks,
                                           const LandmarkVertexMapping& mapping, const FitOptions& options = {})
{
    return fit_shape_and_expressions(camera, model, blendshapes, fixed_correspondences(landmarks, mapping),
                                     options);
};

/**
 * @brief Fits camera, shape and expressions to the landmarks of one frame.
 *
 * Round 1 estimates the camera from the fixed (non-contour) correspondences on the mean shape and runs
 * the alternating shape/expression fit. Every following round first matches the front-facing contour
 * landmarks to the model outline (refine_contour()), adds them to the correspondences, re-estimates the
 * camera on the current mesh and refits. \c options.outer_iterations rounds are run in total.
 *
 * Requires >= 4 landmarks with fixed correspondences.
 */
inline FitResult fit_frame(const model::PcaShapeModel& model, const model::BlendshapeSet& blendshapes,
                           const LandmarkSet& landmarks, const LandmarkVertexMapping& mapping,
                           const FitOptions& options = {})
{
    const Correspondences fixed = fixed_correspondences(landmarks, mapping);
    if (fixed.size() < 4)
    {
        throw core::InsufficientCorrespondences(fixed.size(), 4);
    }
    const bool has_contour_landmarks =
        std::any_of(landmarks.entries.begin(), landmarks.entries.end(),
                    [&mapping](const Landmark& l) { return mapping.is_contour_landmark(l.id); });

    model::MeshInstance mesh{model.mean};
    Correspondences correspondences = fixed;
    ContourCorrespondences contour;
    FitResult result;
    for (int round = 0; round < std::max(1, options.outer_iterations); ++round)
    {
        if (round > 0 && has_contour_landmarks)
        {
            contour = refine_contour(result.camera, mesh, landmarks, mapping);
            correspondences = fixed;
            for (const auto& [id, vertex] : contour.assignments)
            {
                const Landmark* l = landmarks.find(id);
                correspondences.add(id, l->position, vertex, l->variance.value_or(1.0));
            }
        }
        const camera::AffineCamera camera = camera::estimate_affine_camera(
            correspondences.image_points, vertex_positions(mesh, correspondences.vertex_ids));
        result = fit_shape_and_expressions(camera, model, blendshapes, correspondences, options);
        result.contour_assignments = contour.assignments;
        mesh = model::generate_shape_with_expression(model, blendshapes, result.alpha, result.psi);
    }
    return result;
};

} /* namespace fitting */
} /* namespace vidface */

#endif /* VIDFACE_FITTING_FITTING_HPP */
