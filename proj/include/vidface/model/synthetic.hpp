/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/model/synthetic.hpp
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

#ifndef VIDFACE_MODEL_SYNTHETIC_HPP
#define VIDFACE_MODEL_SYNTHETIC_HPP

#include "vidface/model/PcaShapeModel.hpp"

#include "Eigen/Core"
#include "Eigen/QR"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace vidface {
namespace model {

/**
 * A localised expression displacement: vertices within \c radius of \c center (in grid parameter space)
 * move along \c direction, with a smooth compactly supported falloff. A blendshape may consist of several
 * regions.
 */
struct BlendshapeRegion
{
    Eigen::Vector2d center;
    double radius;
    Eigen::Vector3d direction;
};

/**
 * Parameters of the synthetic head model. The mesh is a rows x cols grid wrapped around an ellipsoid;
 * grid parameters (s, t) in [0,1]^2 map to longitude (s - 0.5) * longitude_range and latitude
 * (0.5 - t) * latitude_range. The face looks along +z, +x is the subject's left, +y is up.
 */
struct SyntheticModelConfig
{
    int rows = 64;
    int cols = 64;
    int num_components = 10;
    int num_blendshapes = 4;
    double longitude_range = 200.0; ///< degrees
    double latitude_range = 140.0;  ///< degrees
    Eigen::Vector3d radii{75.0, 100.0, 80.0};
    double nose_height = 28.0;
    int basis_frequencies = 4; ///< Cosine frequencies 0..basis_frequencies-1 per grid direction in the basis fields
    double basis_frequency_scale = 1.0; ///< Multiplies every cosine frequency of the basis fields
    double shape_scale = 4.0; ///< Typical per-vertex displacement of a unit coefficient of the first component
    double blendshape_amplitude = 8.0;
    double uv_margin = 0.0173; ///< Keeps texel centres off the triangle edges of the UV grid
    unsigned int seed = 42;
};

// Default expression regions in grid parameter space: jaw open (upper lip rises, lower lip and chin drop),
// right and left inner brow raise (outer brow drops), eye closing (upper lids down, lower lids up). Supports of different
// blendshapes do not overlap.
inline std::vector<std::vector<BlendshapeRegion>> default_blendshape_regions()
{
    return {
        {{{0.5, 0.70}, 0.055, {0.0, 1.0, 0.1}}, {{0.5, 0.85}, 0.1, {0.0, -1.0, 0.1}}},
        {{{0.44, 0.32}, 0.04, {0.0, 1.0, 0.1}}, {{0.34, 0.34}, 0.035, {0.0, -1.0, 0.1}}},
        {{{0.56, 0.32}, 0.04, {0.0, 1.0, 0.1}}, {{0.66, 0.34}, 0.035, {0.0, -1.0, 0.1}}},
        {{{0.40, 0.40}, 0.03, {0.0, -1.0, 0.1}},
         {{0.40, 0.44}, 0.03, {0.0, 1.0, 0.1}},
         {{0.60, 0.40}, 0.03, {0.0, -1.0, 0.1}},
         {{0.60, 0.44}, 0.03, {0.0, 1.0, 0.1}}},
    };
};

struct SyntheticModel
{
    PcaShapeModel shape;
    BlendshapeSet blendshapes;
    SyntheticModelConfig config;

    int vertex_index(int row, int col) const noexcept { return row * config.cols + col; };

    // Grid parameters (s, t) of a vertex.
    Eigen::Vector2d grid_parameters(int vertex) const
    {
        return {static_cast<double>(vertex % config.cols) / (config.cols - 1),
                static_cast<double>(vertex / config.cols) / (config.rows - 1)};
    };

    // The vertex whose grid parameters are closest to (s, t).
    int nearest_vertex(const Eigen::Vector2d& st) const
    {
        const int col = static_cast<int>(std::lround(std::clamp(st.x(), 0.0, 1.0) * (config.cols - 1)));
        const int row = static_cast<int>(std::lround(std::clamp(st.y(), 0.0, 1.0) * (config.rows - 1)));
        return vertex_index(row, col);
    };

    Eigen::Vector2d uv_of_grid(const Eigen::Vector2d& st) const
    {
        return Eigen::Vector2d::Constant(config.uv_margin) + (1.0 - 2.0 * config.uv_margin) * st;
    };
};

namespace detail {
inline Eigen::Vector3d ellipsoid_point(const SyntheticModelConfig& config, double s, double t)
{
    constexpr double deg = std::numbers::pi / 180.0;
    const double longitude = (s - 0.5) * config.longitude_range * deg;
    const double latitude = (0.5 - t) * config.latitude_range * deg;
    Eigen::Vector3d p(config.radii.x() * std::sin(longitude) * std::cos(latitude),
                      config.radii.y() * std::sin(latitude),
                      config.radii.z() * std::cos(longitude) * std::cos(latitude));
    // Nose: a ridge from the brows down to the tip, and a bump at the tip.
    const double ds = (s - 0.5) / 0.035;
    const double ridge_t = std::clamp((t - 0.40) / 0.18, 0.0, 1.0);
    const double ridge = (t > 0.36 && t < 0.62) ? ridge_t * std::exp(-0.5 * ds * ds) : 0.0;
    const double tip = std::exp(-0.5 * (ds * ds / 1.5 + std::pow((t - 0.56) / 0.03, 2)));
    p.z() += config.nose_height * std::max(ridge, tip);
    return p;
};

inline double compact_falloff(double distance, double radius)
{
    if (distance >= radius)
    {
        return 0.0;
    }
    const double q = 1.0 - (distance * distance) / (radius * radius);
    return q * q;
};
} /* namespace detail */

/**
 * @brief Generates a self-contained synthetic morphable model.
 *
 * Mean: an ellipsoidal head with a nose. Basis: random smooth displacement fields (low-frequency cosines
 * over the grid parameters with random 3D coefficients), orthonormalised by QR. Standard deviations
 * decrease with the component index. Blendshapes: localised bumps from default_blendshape_regions(), with
 * randomly perturbed directions; further blendshapes get random regions.
 */
inline SyntheticModel make_synthetic_model(const SyntheticModelConfig& config = {})
{
    if (config.rows < 2 || config.cols < 2)
    {
        throw std::invalid_argument("make_synthetic_model: grid needs at least 2x2 vertices");
    }
    const int frequencies = config.basis_frequencies;
    if (frequencies < 1 || config.num_components < 0 || config.num_components > 3 * frequencies * frequencies)
    {
        throw std::invalid_argument("make_synthetic_model: num_components exceeds 3 * basis_frequencies^2");
    }
    SyntheticModel result;
    result.config = config;
    std::mt19937 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const int num_vertices = config.rows * config.cols;
    PcaShapeModel& shape = result.shape;
    shape.mean.resize(3 * num_vertices);
    shape.uv.resize(num_vertices);
    for (int v = 0; v < num_vertices; ++v)
    {
        const Eigen::Vector2d st = result.grid_parameters(v);
        shape.mean.segment<3>(3 * v) = detail::ellipsoid_point(config, st.x(), st.y());
        shape.uv[v] = result.uv_of_grid(st);
    }
    for (int r = 0; r + 1 < config.rows; ++r)
    {
        for (int c = 0; c + 1 < config.cols; ++c)
        {
            const int a = result.vertex_index(r, c);
            const int b = result.vertex_index(r, c + 1);
            const int d = result.vertex_index(r + 1, c);
            const int e = result.vertex_index(r + 1, c + 1);
            shape.triangles.push_back({a, d, b});
            shape.triangles.push_back({b, d, e});
        }
    }

    // Smooth random fields, then orthonormalise.
    const int num_features = frequencies * frequencies;
    Eigen::MatrixXd features(num_vertices, num_features);
    for (int v = 0; v < num_vertices; ++v)
    {
        const Eigen::Vector2d st = result.grid_parameters(v);
        for (int i = 0; i < frequencies; ++i)
        {
            for (int j = 0; j < frequencies; ++j)
            {
                features(v, i * frequencies + j) =
                    std::cos(std::numbers::pi * config.basis_frequency_scale * i * st.x()) *
                    std::cos(std::numbers::pi * config.basis_frequency_scale * j * st.y());
            }
        }
    }
    Eigen::MatrixXd fields(3 * num_vertices, config.num_components);
    for (int m = 0; m < config.num_components; ++m)
    {
        Eigen::MatrixXd coefficients(num_features, 3);
        for (int f = 0; f < num_features; ++f)
        {
            for (int k = 0; k < 3; ++k)
            {
                coefficients(f, k) = normal(rng);
            }
        }
        const Eigen::MatrixXd displacement = features * coefficients; // N x 3
        for (int v = 0; v < num_vertices; ++v)
        {
            fields.block<3, 1>(3 * v, m) = displacement.row(v).transpose();
        }
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(fields);
    shape.basis = qr.householderQ() * Eigen::MatrixXd::Identity(3 * num_vertices, config.num_components);
    // Fix column signs for reproducibility across QR implementations.
    for (int m = 0; m < config.num_components; ++m)
    {
        if (shape.basis.col(m).dot(fields.col(m)) < 0.0)
        {
            shape.basis.col(m) *= -1.0;
        }
    }
    shape.stddevs.resize(config.num_components);
    for (int m = 0; m < config.num_components; ++m)
    {
        shape.stddevs(m) = config.shape_scale * std::sqrt(3.0 * num_vertices) / (1.0 + 0.5 * m);
    }

    auto regions = default_blendshape_regions();
    while (static_cast<int>(regions.size()) < config.num_blendshapes)
    {
        regions.push_back({{{0.3 + 0.4 * uniform(rng), 0.3 + 0.5 * uniform(rng)},
                            0.05 + 0.05 * uniform(rng),
                            Eigen::Vector3d(normal(rng), normal(rng), normal(rng)).normalized()}});
    }
    regions.resize(std::max(0, config.num_blendshapes));
    result.blendshapes.displacements = Eigen::MatrixXd::Zero(3 * num_vertices, config.num_blendshapes);
    for (int j = 0; j < config.num_blendshapes; ++j)
    {
        const Eigen::Vector3d jitter(0.2 * normal(rng), 0.2 * normal(rng), 0.2 * normal(rng));
        const double amplitude = config.blendshape_amplitude * (0.75 + 0.5 * uniform(rng));
        for (const auto& region : regions[j])
        {
            const Eigen::Vector3d direction = (region.direction.normalized() + jitter).normalized();
            for (int v = 0; v < num_vertices; ++v)
            {
                const double w =
                    detail::compact_falloff((result.grid_parameters(v) - region.center).norm(), region.radius);
                if (w > 0.0)
                {
                    result.blendshapes.displacements.block<3, 1>(3 * v, j) += amplitude * w * direction;
                }
            }
        }
    }
    return result;
};

/**
 * Removes affine deformations from the basis at groups of vertices, then re-orthonormalises.
 *
 * For every group g and coordinate channel, the basis values at the group's vertices are made orthogonal to
 * the affine functions (1, x, y, z) of their mean positions. An affine camera estimated from the vertices of
 * any union of groups then cannot absorb an identity change. The correction subtracted from each column is a
 * smooth field: affine functions of the mean, each group's set windowed by a Gaussian around the group.
 * Standard deviations are kept.
 */
inline void remove_affine_modes(PcaShapeModel& shape, const std::vector<std::vector<int>>& groups)
{
    const auto num_vertices = static_cast<Eigen::Index>(shape.mean.size() / 3);
    const auto num_functions = static_cast<Eigen::Index>(4 * groups.size());
    const auto h = [&shape](Eigen::Index v) {
        return Eigen::Vector4d(1.0, shape.mean(3 * v), shape.mean(3 * v + 1), shape.mean(3 * v + 2));
    };
    // Constraints (rows of A) and correction fields (columns of Phi), per channel.
    Eigen::MatrixXd constraints = Eigen::MatrixXd::Zero(num_functions, num_vertices);
    Eigen::MatrixXd corrections(num_vertices, num_functions);
    for (std::size_t g = 0; g < groups.size(); ++g)
    {
        const auto& group = groups[g];
        if (group.size() < 4)
        {
            throw std::invalid_argument("remove_affine_modes: every group needs at least 4 vertices");
        }
        Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
        for (int v : group)
        {
            centroid += shape.mean.segment<3>(3 * v);
        }
        centroid /= static_cast<double>(group.size());
        double radius = 0.0;
        for (int v : group)
        {
            radius = std::max(radius, (shape.mean.segment<3>(3 * v) - centroid).norm());
        }
        radius = std::max(radius, 1e-6);
        for (int v : group)
        {
            constraints.block<4, 1>(4 * static_cast<Eigen::Index>(g), v) += h(v);
        }
        for (Eigen::Index v = 0; v < num_vertices; ++v)
        {
            const double d = (shape.mean.segment<3>(3 * v) - centroid).norm() / radius;
            corrections.block<1, 4>(v, 4 * static_cast<Eigen::Index>(g)) = std::exp(-0.5 * d * d) * h(v).transpose();
        }
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> system(constraints * corrections);

    const Eigen::MatrixXd original = shape.basis;
    Eigen::MatrixXd fields = shape.basis;
    for (Eigen::Index m = 0; m < fields.cols(); ++m)
    {
        for (int channel = 0; channel < 3; ++channel)
        {
            Eigen::VectorXd values(num_vertices);
            for (Eigen::Index v = 0; v < num_vertices; ++v)
            {
                values(v) = fields(3 * v + channel, m);
            }
            values -= corrections * system.solve(constraints * values);
            for (Eigen::Index v = 0; v < num_vertices; ++v)
            {
                fields(3 * v + channel, m) = values(v);
            }
        }
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(fields);
    shape.basis = qr.householderQ() * Eigen::MatrixXd::Identity(fields.rows(), fields.cols());
    for (Eigen::Index m = 0; m < fields.cols(); ++m)
    {
        if (shape.basis.col(m).dot(original.col(m)) < 0.0)
        {
            shape.basis.col(m) *= -1.0;
        }
    }
};

} /* namespace model */
} /* namespace vidface */

#endif /* VIDFACE_MODEL_SYNTHETIC_HPP */
