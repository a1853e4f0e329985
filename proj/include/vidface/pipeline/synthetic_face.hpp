/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/pipeline/synthetic_face.hpp
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

#ifndef VIDFACE_PIPELINE_SYNTHETIC_FACE_HPP
#define VIDFACE_PIPELINE_SYNTHETIC_FACE_HPP

#include "vidface/core/Image.hpp"
#include "vidface/fitting/landmarks.hpp"
#include "vidface/model/synthetic.hpp"

#include "Eigen/Core"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vidface {
namespace pipeline {

/**
 * The synthetic head model together with a 68-point ibug-style landmark layout, outline candidates and an
 * albedo texture in isomap space. This is the verification substrate: every landmark has a known vertex.
 */
struct SyntheticFace
{
    model::SyntheticModel model;
    fitting::LandmarkVertexMapping mapping;
    /// All 68 landmarks (ibug order) with the vertex that generates them, including contour landmarks.
    std::vector<std::pair<std::string, int>> landmark_vertices;
    core::Image3f texture;
};

struct SyntheticFaceConfig
{
    model::SyntheticModelConfig model;
    int texture_resolution = 512;
    // Also strip affine deformation at each outline's landmark vertices.
    bool contour_affine_free = false;
};

namespace detail {

// Landmark positions in grid parameter space (s to the subject's left, t down), ibug 18-68.
inline std::vector<Eigen::Vector2d> ibug_interior_template()
{
    return {
        // 18-22 right brow, 23-27 left brow
        {0.335, 0.345}, {0.36, 0.33}, {0.39, 0.325}, {0.42, 0.33}, {0.45, 0.34},
        {0.55, 0.34}, {0.58, 0.33}, {0.61, 0.325}, {0.64, 0.33}, {0.665, 0.345},
        // 28-31 nose bridge, 32-36 nostrils
        {0.5, 0.40}, {0.5, 0.45}, {0.5, 0.50}, {0.5, 0.56},
        {0.47, 0.615}, {0.485, 0.625}, {0.5, 0.63}, {0.515, 0.625}, {0.53, 0.615},
        // 37-42 right eye, 43-48 left eye
        {0.36, 0.42}, {0.385, 0.405}, {0.415, 0.405}, {0.44, 0.42}, {0.415, 0.435}, {0.385, 0.435},
        {0.56, 0.42}, {0.585, 0.405}, {0.615, 0.405}, {0.64, 0.42}, {0.615, 0.435}, {0.585, 0.435},
        // 49-60 outer lips
        {0.44, 0.75}, {0.46, 0.728}, {0.482, 0.72}, {0.5, 0.724}, {0.518, 0.72}, {0.54, 0.728},
        {0.56, 0.75}, {0.54, 0.778}, {0.518, 0.79}, {0.5, 0.792}, {0.482, 0.79}, {0.46, 0.778},
        // 61-68 inner lips
        {0.455, 0.75}, {0.48, 0.742}, {0.5, 0.742}, {0.52, 0.742}, {0.545, 0.75}, {0.52, 0.762},
        {0.5, 0.762}, {0.48, 0.762},
    };
};

inline constexpr double chin_t = 0.93;

// Right outline (subject's right, small s): from cheek height down towards the chin. beta in [0, 1].
inline Eigen::Vector2d right_outline(double beta)
{
    const double angle = beta * 0.92 * std::numbers::pi / 2.0;
    return {0.5 - 0.375 * std::cos(angle), 0.45 + 0.46 * std::sin(angle)};
};

inline double gaussian(double d, double sigma) { return std::exp(-0.5 * d * d / (sigma * sigma)); };

inline double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    const Eigen::Vector2d ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / std::max(ab.squaredNorm(), 1e-12), 0.0, 1.0);
    return (p - (a + t * ab)).norm();
};

inline double polyline_distance(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& points, bool closed)
{
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
    {
        d = std::min(d, segment_distance(p, points[i], points[i + 1]));
    }
    if (closed && points.size() > 2)
    {
        d = std::min(d, segment_distance(p, points.back(), points.front()));
    }
    return d;
};

inline core::Rgb mix(const core::Rgb& a, const core::Rgb& b, double t)
{
    const auto f = static_cast<float>(std::clamp(t, 0.0, 1.0));
    return {a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f, a[2] + (b[2] - a[2]) * f};
};

/**
 * Albedo in grid parameter space: skin with low-frequency variation, hair on top, and darker or coloured
 * brows, eyes, nostrils and lips so that the landmarks carry image structure.
 */
inline core::Rgb face_albedo(const Eigen::Vector2d& st, const std::vector<Eigen::Vector2d>& landmarks)
{
    const double s = st.x();
    const double t = st.y();
    core::Rgb colour{static_cast<float>(0.78 + 0.05 * std::sin(6.0 * std::numbers::pi * s) * std::cos(4.0 * std::numbers::pi * t)),
                     static_cast<float>(0.60 + 0.04 * std::cos(5.0 * std::numbers::pi * s + 1.0) * std::sin(3.0 * std::numbers::pi * t)),
                     static_cast<float>(0.50 + 0.03 * std::sin(7.0 * std::numbers::pi * t))};
    // Hair above the forehead, fading in smoothly.
    colour = mix(colour, {0.25f, 0.17f, 0.12f}, 1.0 / (1.0 + std::exp((t - 0.2) / 0.02)));
    const auto lm = [&landmarks](int ibug) { return landmarks[ibug - 18]; };
    const auto range = [&landmarks](int first, int last) {
        return std::vector<Eigen::Vector2d>(landmarks.begin() + (first - 18), landmarks.begin() + (last - 17));
    };
    const core::Rgb brow{0.22f, 0.15f, 0.1f};
    colour = mix(colour, brow, 0.9 * gaussian(polyline_distance(st, range(18, 22), false), 0.008));
    colour = mix(colour, brow, 0.9 * gaussian(polyline_distance(st, range(23, 27), false), 0.008));
    for (const auto& [first, last] : {std::pair{37, 42}, std::pair{43, 48}})
    {
        const auto eye = range(first, last);
        Eigen::Vector2d centre = Eigen::Vector2d::Zero();
        for (const auto& p : eye)
        {
            centre += p;
        }
        centre /= static_cast<double>(eye.size());
        const Eigen::Vector2d d = (st - centre).cwiseQuotient(Eigen::Vector2d(0.04, 0.02));
        colour = mix(colour, {0.92f, 0.9f, 0.88f}, gaussian(d.norm(), 0.55));
        colour = mix(colour, {0.12f, 0.2f, 0.3f}, gaussian((st - centre).norm(), 0.008));
        colour = mix(colour, {0.2f, 0.12f, 0.1f}, 0.8 * gaussian(polyline_distance(st, eye, true), 0.004));
    }
    colour = mix(colour, {0.35f, 0.2f, 0.18f}, 0.8 * gaussian((st - lm(33)).norm(), 0.008));
    colour = mix(colour, {0.35f, 0.2f, 0.18f}, 0.8 * gaussian((st - lm(35)).norm(), 0.008));
    colour = mix(colour, {0.65f, 0.45f, 0.4f}, 0.6 * gaussian(polyline_distance(st, range(28, 31), false), 0.006));
    const auto outer_lips = range(49, 60);
    const auto inner_lips = range(61, 68);
    const double lip_distance = polyline_distance(st, outer_lips, true);
    colour = mix(colour, {0.72f, 0.3f, 0.3f}, gaussian(lip_distance, 0.012));
    colour = mix(colour, {0.3f, 0.1f, 0.1f}, 0.9 * gaussian(polyline_distance(st, inner_lips, true), 0.004));
    return colour;
};

} /* namespace detail */

/**
 * Builds the synthetic face. Interior landmarks (ibug 18-68) and the chin (9) snap to their nearest free
 * grid vertex. The outlines are the grid vertices along a jaw curve on each side; contour landmarks 1-8
 * and 10-17 sit on evenly spaced outline vertices. The identity basis is then made free of affine
 * deformations at the fixed landmark vertices, and with \c contour_affine_free also at each side's contour
 * landmark vertices (see model::remove_affine_modes()).
 */
inline SyntheticFace make_synthetic_face(const SyntheticFaceConfig& config = {})
{
    SyntheticFace face;
    face.model = model::make_synthetic_model(config.model);
    const auto& m = face.model;

    std::set<int> used;
    const auto claim_nearest_free = [&m, &used](const Eigen::Vector2d& st) {
        int best = -1;
        double best_distance = std::numeric_limits<double>::infinity();
        const int centre = m.nearest_vertex(st);
        const int row0 = centre / m.config.cols;
        const int col0 = centre % m.config.cols;
        for (int r = std::max(0, row0 - 3); r <= std::min(m.config.rows - 1, row0 + 3); ++r)
        {
            for (int c = std::max(0, col0 - 3); c <= std::min(m.config.cols - 1, col0 + 3); ++c)
            {
                const int v = m.vertex_index(r, c);
                const double d = (m.grid_parameters(v) - st).norm();
                if (!used.count(v) && d < best_distance)
                {
                    best_distance = d;
                    best = v;
                }
            }
        }
        if (best < 0)
        {
            throw std::runtime_error("make_synthetic_face: grid too coarse for the landmark layout");
        }
        used.insert(best);
        return best;
    };

    // Outline candidates, sampled densely along the jaw curve.
    constexpr int samples = 400;
    for (int i = 0; i <= samples; ++i)
    {
        const Eigen::Vector2d right = detail::right_outline(static_cast<double>(i) / samples);
        const Eigen::Vector2d left(1.0 - right.x(), right.y());
        const int vr = m.nearest_vertex(right);
        const int vl = m.nearest_vertex(left);
        if (face.mapping.contour_right.empty() || face.mapping.contour_right.back() != vr)
        {
            face.mapping.contour_right.push_back(vr);
        }
        if (face.mapping.contour_left.empty() || face.mapping.contour_left.back() != vl)
        {
            face.mapping.contour_left.push_back(vl);
        }
    }
    used.insert(face.mapping.contour_right.begin(), face.mapping.contour_right.end());
    used.insert(face.mapping.contour_left.begin(), face.mapping.contour_left.end());

    std::vector<int> contour_right_vertices, contour_left_vertices;
    for (int k = 0; k < 8; ++k)
    {
        const Eigen::Vector2d right = detail::right_outline(k / 8.0);
        contour_right_vertices.push_back(m.nearest_vertex(right));
        contour_left_vertices.push_back(m.nearest_vertex({1.0 - right.x(), right.y()}));
    }
    for (int k = 0; k < 8; ++k)
    {
        face.landmark_vertices.emplace_back(std::to_string(k + 1), contour_right_vertices[k]);
    }
    const int chin = claim_nearest_free({0.5, detail::chin_t});
    face.landmark_vertices.emplace_back("9", chin);
    face.mapping.pairs["9"] = chin;
    for (int k = 0; k < 8; ++k)
    {
        face.landmark_vertices.emplace_back(std::to_string(k + 10), contour_left_vertices[7 - k]);
    }
    const auto interior = detail::ibug_interior_template();
    for (std::size_t i = 0; i < interior.size(); ++i)
    {
        const std::string id = std::to_string(18 + i);
        const int v = claim_nearest_free(interior[i]);
        face.landmark_vertices.emplace_back(id, v);
        face.mapping.pairs[id] = v;
    }

    std::vector<int> fixed_vertices;
    for (const auto& [id, vertex] : face.mapping.pairs)
    {
        fixed_vertices.push_back(vertex);
    }
    if (config.contour_affine_free)
    {
        model::remove_affine_modes(face.model.shape, {fixed_vertices, contour_right_vertices, contour_left_vertices});
    }
    else
    {
        model::remove_affine_modes(face.model.shape, {fixed_vertices});
    }

    // Texture in isomap space: texel (row, col) has its centre at uv = ((col + 0.5) / res, (row + 0.5) / res).
    const int res = config.texture_resolution;
    face.texture = core::Image3f(res, res);
    const double margin = m.config.uv_margin;
    for (int r = 0; r < res; ++r)
    {
        for (int c = 0; c < res; ++c)
        {
            const Eigen::Vector2d uv((c + 0.5) / res, (r + 0.5) / res);
            const Eigen::Vector2d st = (uv - Eigen::Vector2d::Constant(margin)) / (1.0 - 2.0 * margin);
            face.texture(r, c) = detail::face_albedo(st, interior);
        }
    }
    return face;
};

} /* namespace pipeline */
} /* namespace vidface */

#endif /* VIDFACE_PIPELINE_SYNTHETIC_FACE_HPP */
