/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/pipeline/synthetic_sequence.hpp
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

#ifndef VIDFACE_PIPELINE_SYNTHETIC_SEQUENCE_HPP
#define VIDFACE_PIPELINE_SYNTHETIC_SEQUENCE_HPP

#include "vidface/camera/affine_camera.hpp"
#include "vidface/core/Image.hpp"
#include "vidface/core/exceptions.hpp"
#include "vidface/fitting/landmarks.hpp"
#include "vidface/model/PcaShapeModel.hpp"
#include "vidface/pipeline/synthetic_face.hpp"
#include "vidface/texture/render.hpp"
#include "vidface/tracker/cascade.hpp"

#include "Eigen/Core"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace vidface {
namespace pipeline {

/**
 * Rendered frames with everything that generated them.
 */
struct SyntheticSequence
{
    std::vector<core::Image3f> frames;
    std::vector<fitting::LandmarkSet> landmarks; ///< all 68 ibug landmarks per frame
    std::vector<camera::AffineCamera> cameras;
    model::ShapeCoefficients alpha;
    std::vector<model::ExpressionCoefficients> psis;
};

// Smooth two-tone backdrop.
inline core::Rgb background_colour(int row, int col, int width, int height)
{
    const double x = static_cast<double>(col) / std::max(width - 1, 1);
    const double y = static_cast<double>(row) / std::max(height - 1, 1);
    const auto v = static_cast<float>(0.30 + 0.10 * x + 0.05 * y);
    return {v, v + 0.03f, v + 0.06f};
};

/**
 * Renders a textured face over the background; pixels outside the face keep background_colour().
 */
inline core::Image3f render_frame(const SyntheticFace& face, const model::ShapeCoefficients& alpha,
                                  const model::ExpressionCoefficients& psi, const camera::AffineCamera& camera,
                                  int width, int height)
{
    auto view = texture::render_view(face.model.shape, face.model.blendshapes, alpha, psi, face.texture, camera,
                                     width, height);
    for (int r = 0; r < height; ++r)
    {
        for (int c = 0; c < width; ++c)
        {
            if (!view.mask(r, c))
            {
                view.colour(r, c) = background_colour(r, c, width, height);
            }
        }
    }
    return view.colour;
};

/**
 * Projects the generating vertex of each of the 68 landmarks.
 */
inline fitting::LandmarkSet project_landmarks(const SyntheticFace& face, const model::MeshInstance& mesh,
                                              const camera::AffineCamera& camera)
{
    fitting::LandmarkSet set;
    for (const auto& [id, vertex] : face.landmark_vertices)
    {
        set.entries.push_back({id, camera.project(mesh.vertex(vertex)), std::nullopt});
    }
    return set;
};

/**
 * @brief Renders one frame per (camera, psi) pair with a fixed identity.
 *
 * Ground-truth landmarks are the exact projections of the landmark vertices of the posed, expressive
 * mesh. Outline landmarks use their fixed outline vertices, not the silhouette.
 */
inline SyntheticSequence generate_synthetic_sequence(const SyntheticFace& face, const model::ShapeCoefficients& alpha,
                                                     const std::vector<model::ExpressionCoefficients>& psis,
                                                     const std::vector<camera::AffineCamera>& cameras, int width,
                                                     int height)
{
    if (psis.size() != cameras.size())
    {
        throw core::ValidationError("schedule", "expression and camera schedules differ in length");
    }
    if (width < 1 || height < 1)
    {
        throw core::ValidationError("frame size", "width and height must be positive");
    }
    SyntheticSequence seq;
    seq.alpha = alpha;
    seq.psis = psis;
    seq.cameras = cameras;
    for (std::size_t k = 0; k < cameras.size(); ++k)
    {
        const auto mesh =
            model::generate_shape_with_expression(face.model.shape, face.model.blendshapes, alpha, psis[k]);
        seq.frames.push_back(render_frame(face, alpha, psis[k], cameras[k], width, height));
        seq.landmarks.push_back(project_landmarks(face, mesh, cameras[k]));
    }
    return seq;
};

/**
 * Cameras for a head turning linearly from \p yaw_from to \p yaw_to degrees over \p n frames.
 */
inline std::vector<camera::AffineCamera> yaw_sweep(int n, double yaw_from, double yaw_to, double scale,
                                                   const Eigen::Vector2d& centre, double pitch = 0.0)
{
    std::vector<camera::AffineCamera> cameras;
    for (int k = 0; k < n; ++k)
    {
        const double t = n > 1 ? static_cast<double>(k) / (n - 1) : 0.0;
        cameras.push_back(camera::camera_from_pose(scale, yaw_from + t * (yaw_to - yaw_from), pitch, 0.0, centre));
    }
    return cameras;
};

/**
 * Expression coefficients that rise and fall smoothly in [0, amplitude], each blendshape with its own phase.
 */
inline std::vector<model::ExpressionCoefficients> expression_schedule(int n, int num_blendshapes,
                                                                      double amplitude = 0.8)
{
    std::vector<model::ExpressionCoefficients> psis;
    for (int k = 0; k < n; ++k)
    {
        Eigen::VectorXd psi(num_blendshapes);
        for (int j = 0; j < num_blendshapes; ++j)
        {
            const double phase = 2.0 * std::numbers::pi * (static_cast<double>(k) / std::max(n, 1) +
                                                           static_cast<double>(j) / std::max(num_blendshapes, 1));
            psi(j) = amplitude * 0.5 * (1.0 - std::cos(phase));
        }
        psis.push_back(psi);
    }
    return psis;
};

/**
 * Draws for the random training corpus of the tracker.
 */
struct CorpusConfig
{
    int num_images = 50;
    int width = 640;
    int height = 480;
    double max_yaw = 30.0;
    double max_pitch = 10.0;
    double max_roll = 8.0;
    double min_scale = 1.3;
    double max_scale = 1.7;
    double max_shift = 40.0; ///< pixels from the image centre
    double expression_amplitude = 1.0;
    std::uint32_t seed = 7;
};

/**
 * Random poses, identities and expressions rendered to greyscale, with exact landmarks.
 */
inline std::vector<tracker::TrainingSample> generate_training_corpus(const SyntheticFace& face,
                                                                     const CorpusConfig& config)
{
    std::mt19937 rng(config.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> positive(0.0, 1.0);
    std::normal_distribution<double> normal;
    const int m = face.model.shape.num_components();
    const int l = face.model.blendshapes.num_blendshapes();
    std::vector<tracker::TrainingSample> samples;
    for (int i = 0; i < config.num_images; ++i)
    {
        Eigen::VectorXd alpha(m);
        for (int j = 0; j < m; ++j)
        {
            alpha(j) = normal(rng);
        }
        Eigen::VectorXd psi(l);
        for (int j = 0; j < l; ++j)
        {
            psi(j) = config.expression_amplitude * positive(rng);
        }
        const double scale = config.min_scale + (config.max_scale - config.min_scale) * positive(rng);
        const Eigen::Vector2d centre(0.5 * config.width + config.max_shift * unit(rng),
                                     0.5 * config.height + config.max_shift * unit(rng));
        const auto cam = camera::camera_from_pose(scale, config.max_yaw * unit(rng), config.max_pitch * unit(rng),
                                                  config.max_roll * unit(rng), centre);
        const auto mesh = model::generate_shape_with_expression(face.model.shape, face.model.blendshapes, alpha, psi);
        samples.push_back({core::to_grayscale(render_frame(face, alpha, psi, cam, config.width, config.height)),
                           project_landmarks(face, mesh, cam).flattened()});
    }
    return samples;
};

} /* namespace pipeline */
} /* namespace vidface */

#endif /* VIDFACE_PIPELINE_SYNTHETIC_SEQUENCE_HPP */
