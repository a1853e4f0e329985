/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/texture/isomap_layout.hpp
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

#ifndef VIDFACE_TEXTURE_ISOMAP_LAYOUT_HPP
#define VIDFACE_TEXTURE_ISOMAP_LAYOUT_HPP

#include "vidface/core/exceptions.hpp"
#include "vidface/model/PcaShapeModel.hpp"
#include "vidface/texture/rasterizer.hpp"

#include "Eigen/Core"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

namespace vidface {
namespace texture {

/**
 * @brief Fixed assignment of isomap texels to surface points of the model.
 *
 * Texel (row, col) has its centre at uv = ((col + 0.5) / resolution, (row + 0.5) / resolution), and
 * \c triangle is -1 for uncovered texels. The layout depends only on the uv coordinates and triangles,
 * so a texel refers to the same surface point in every mesh instance of the model.
 */
struct IsomapLayout
{
    int resolution = 0;
    std::vector<int> triangle;                 ///< resolution^2, row-major
    std::vector<Eigen::Vector3d> barycentrics; ///< resolution^2, row-major
    int degenerate_triangles = 0;              ///< zero-area uv triangles that were skipped

    std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * resolution + col; };
    bool covered(std::size_t texel) const { return triangle[texel] >= 0; };

    std::size_t num_covered() const
    {
        return static_cast<std::size_t>(std::count_if(triangle.begin(), triangle.end(), [](int t) { return t >= 0; }));
    };
};

namespace detail {
// Signed doubled area of (a, b, p), evaluated with the endpoints in ascending vertex order. The
// two triangles sharing an edge get exactly opposite values.
inline double edge_function(const std::vector<Eigen::Vector2d>& points, int i, int j, const Eigen::Vector2d& p)
{
    const double sign = i < j ? 1.0 : -1.0;
    const Eigen::Vector2d& a = points[std::min(i, j)];
    const Eigen::Vector2d& b = points[std::max(i, j)];
    return sign * ((b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x()));
};

// Directed edge i -> j.
inline std::uint64_t edge_key(int i, int j)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) | static_cast<std::uint32_t>(j);
};
} /* namespace detail */

/**
 * Rasterises every uv triangle at texel centres. A texel centre belongs to a triangle when it lies
 * strictly inside it, or on an edge it shares with a neighbouring triangle (one that traverses the edge in
 * the opposite direction). Where several
 * triangles claim a texel, the lower triangle index keeps it.
 */
inline IsomapLayout build_isomap_layout(const model::PcaShapeModel& model, int resolution)
{
    if (resolution < 1)
    {
        throw core::ValidationError("resolution", "must be at least 1");
    }
    if (static_cast<int>(model.uv.size()) != model.num_vertices())
    {
        throw core::ValidationError("uv", "needs one texture coordinate per vertex");
    }
    IsomapLayout layout;
    layout.resolution = resolution;
    const auto texels = static_cast<std::size_t>(resolution) * resolution;
    layout.triangle.assign(texels, -1);
    layout.barycentrics.assign(texels, Eigen::Vector3d::Zero());

    // Texel units: a texel centre sits at (col + 0.5, row + 0.5).
    std::vector<Eigen::Vector2d> points(model.uv.size());
    std::transform(model.uv.begin(), model.uv.end(), points.begin(),
                   [resolution](const Eigen::Vector2d& uv) { return Eigen::Vector2d(uv * resolution); });
    std::vector<double> areas(model.triangles.size());
    std::unordered_set<std::uint64_t> directed_edges;
    for (std::size_t t = 0; t < model.triangles.size(); ++t)
    {
        const auto& tri = model.triangles[t];
        areas[t] = detail::edge_function(points, tri[0], tri[1], points[tri[2]]);
        if (areas[t] == 0.0 || !std::isfinite(areas[t]))
        {
            continue;
        }
        for (int k = 0; k < 3; ++k)
        {
            directed_edges.insert(detail::edge_key(tri[k], tri[(k + 1) % 3]));
        }
    }

    for (std::size_t t = 0; t < model.triangles.size(); ++t)
    {
        const auto& tri = model.triangles[t];
        const Eigen::Vector2d& a = points[tri[0]];
        const Eigen::Vector2d& b = points[tri[1]];
        const Eigen::Vector2d& c = points[tri[2]];
        const double area = areas[t];
        if (area == 0.0 || !std::isfinite(area))
        {
            ++layout.degenerate_triangles;
            continue;
        }
        // Edge k is opposite vertex k; it is shared when a neighbour traverses it in reverse.
        std::array<bool, 3> shared{};
        for (int k = 0; k < 3; ++k)
        {
            shared[k] = directed_edges.contains(detail::edge_key(tri[(k + 2) % 3], tri[(k + 1) % 3]));
        }
        const int c0 = std::max(0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}) - 0.5)));
        const int c1 = std::min(resolution - 1, static_cast<int>(std::ceil(std::max({a.x(), b.x(), c.x()}) - 0.5)));
        const int r0 = std::max(0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}) - 0.5)));
        const int r1 = std::min(resolution - 1, static_cast<int>(std::ceil(std::max({a.y(), b.y(), c.y()}) - 0.5)));
        for (int r = r0; r <= r1; ++r)
        {
            for (int col = c0; col <= c1; ++col)
            {
                const std::size_t i = layout.index(r, col);
                if (layout.triangle[i] >= 0)
                {
                    continue;
                }
                const Eigen::Vector2d p(col + 0.5, r + 0.5);
                const Eigen::Vector3d w(detail::edge_function(points, tri[1], tri[2], p) / area,
                                        detail::edge_function(points, tri[2], tri[0], p) / area,
                                        detail::edge_function(points, tri[0], tri[1], p) / area);
                bool inside = true;
                for (int k = 0; k < 3; ++k)
                {
                    inside = inside && (w(k) > 0.0 || (w(k) == 0.0 && shared[k]));
                }
                if (inside)
                {
                    layout.triangle[i] = static_cast<int>(t);
                    layout.barycentrics[i] = w / w.sum();
                }
            }
        }
    }
    return layout;
};

} /* namespace texture */
} /* namespace vidface */

#endif /* VIDFACE_TEXTURE_ISOMAP_LAYOUT_HPP */
