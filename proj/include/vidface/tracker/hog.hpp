/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/tracker/hog.hpp
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

#ifndef VIDFACE_TRACKER_HOG_HPP
#define VIDFACE_TRACKER_HOG_HPP

#include "vidface/core/Image.hpp"
#include "vidface/core/exceptions.hpp"

#include "Eigen/Core"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vidface {
namespace tracker {

/**
 * @brief Parameters of the per-landmark HOG descriptor.
 *
 * Each landmark gets a square patch of side \c patch_factor times the inter-eye distance of the current
 * estimate (landmark indices \c eye_left and \c eye_right, zero-based). When those indices do not exist
 * in the landmark vector, the patch side is \c patch_pixels image pixels. The patch is resampled to a
 * \c patch_pixels x \c patch_pixels grid and divided into \c cells x \c cells cells.
 */
struct HogConfig
{
    int cells = 3;
    int bins = 9;
    int patch_pixels = 24;
    double patch_factor = 0.25;
    int eye_left = 36;
    int eye_right = 45;
    double epsilon = 1e-5;
    double min_patch_side = 4.0;

    int descriptor_length() const { return cells * cells * bins; };
    int feature_length(int num_landmarks) const { return num_landmarks * descriptor_length(); };

    void validate() const
    {
        if (cells < 1)
        {
            throw core::ValidationError("feature_config.cells", "must be at least 1");
        }
        if (bins < 1)
        {
            throw core::ValidationError("feature_config.bins", "must be at least 1");
        }
        if (patch_pixels < cells || patch_pixels % cells != 0)
        {
            throw core::ValidationError("feature_config.patch_pixels", "must be a positive multiple of cells");
        }
        if (!(patch_factor > 0.0) || !(epsilon > 0.0) || !(min_patch_side > 0.0))
        {
            throw core::ValidationError("feature_config", "patch_factor, epsilon and min_patch_side must be positive");
        }
    };
};

/**
 * Patch side in image pixels for the landmark estimate \p landmarks (interleaved x0, y0, x1, y1, ...).
 */
inline double patch_side(const HogConfig& config, const Eigen::VectorXd& landmarks)
{
    const int k = static_cast<int>(landmarks.size() / 2);
    if (config.eye_left < 0 || config.eye_right < 0 || config.eye_left >= k || config.eye_right >= k)
    {
        return config.patch_pixels;
    }
    const Eigen::Vector2d a = landmarks.segment<2>(2 * config.eye_left);
    const Eigen::Vector2d b = landmarks.segment<2>(2 * config.eye_right);
    return std::max(config.patch_factor * (a - b).norm(), config.min_patch_side);
};

/**
 * Resamples the square patch of side \p side centred at (\p cx, \p cy) onto a \p n x \p n grid with
 * bilinear interpolation. Samples falling outside the image replicate the border.
 */
inline Eigen::MatrixXd sample_patch(const core::Image1f& image, double cx, double cy, double side, int n)
{
    Eigen::MatrixXd patch(n, n);
    const double step = side / n;
    for (int r = 0; r < n; ++r)
    {
        const double y = cy + (r + 0.5 - 0.5 * n) * step;
        for (int c = 0; c < n; ++c)
        {
            const double x = cx + (c + 0.5 - 0.5 * n) * step;
            patch(r, c) = core::sample_bilinear(image, x, y);
        }
    }
    return patch;
};

/**
 * @brief HOG descriptor of a resampled patch.
 *
 * Gradients use central differences (one-sided at the patch border). Each pixel votes its gradient
 * magnitude into the two nearest unsigned orientation bins, centred at multiples of pi / bins, with
 * linear weights inside the cell that contains it. All cells of the patch form one block that is L2-normalised as v / sqrt(|v|^2 + eps^2),
 * so a constant patch yields an all-zero descriptor. Layout: cell-row major, then cell column, then bin.
 */
inline Eigen::VectorXd hog_descriptor(const Eigen::MatrixXd& patch, int cells, int bins, double epsilon)
{
    const int n = static_cast<int>(patch.rows());
    const int cell = n / cells;
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(cells * cells * bins);
    const double bin_width = std::numbers::pi / bins;
    for (int r = 0; r < n; ++r)
    {
        const int r0 = std::max(r - 1, 0);
        const int r1 = std::min(r + 1, n - 1);
        for (int c = 0; c < n; ++c)
        {
            const int c0 = std::max(c - 1, 0);
            const int c1 = std::min(c + 1, n - 1);
            const double gx = (patch(r, c1) - patch(r, c0)) / (c1 - c0);
            const double gy = (patch(r1, c) - patch(r0, c)) / (r1 - r0);
            const double magnitude = std::sqrt(gx * gx + gy * gy);
            if (magnitude == 0.0)
            {
                continue;
            }
            double angle = std::atan2(gy, gx);
            if (angle < 0.0)
            {
                angle += std::numbers::pi;
            }
            if (angle >= std::numbers::pi)
            {
                angle -= std::numbers::pi;
            }
            // Bin b is centred at b * bin_width; orientation wraps around.
            const double position = angle / bin_width;
            const double lower = std::floor(position);
            const double t = position - lower;
            const int b0 = (static_cast<int>(lower) + bins) % bins;
            const int b1 = (b0 + 1) % bins;
            const int offset = ((r / cell) * cells + (c / cell)) * bins;
            hist(offset + b0) += (1.0 - t) * magnitude;
            hist(offset + b1) += t * magnitude;
        }
    }
    return hist / std::sqrt(hist.squaredNorm() + epsilon * epsilon);
};

/**
 * Feature vector f(I, theta): HOG descriptors of all landmarks, concatenated in landmark order.
 */
inline Eigen::VectorXd extract_features(const core::Image1f& image, const Eigen::VectorXd& landmarks,
                                        const HogConfig& config)
{
    const int k = static_cast<int>(landmarks.size() / 2);
    const int length = config.descriptor_length();
    const double side = patch_side(config, landmarks);
    Eigen::VectorXd features(k * length);
    for (int i = 0; i < k; ++i)
    {
        const auto patch = sample_patch(image, landmarks(2 * i), landmarks(2 * i + 1), side, config.patch_pixels);
        features.segment(i * length, length) = hog_descriptor(patch, config.cells, config.bins, config.epsilon);
    }
    return features;
};

} /* namespace tracker */
} /* namespace vidface */

#endif /* VIDFACE_TRACKER_HOG_HPP */
