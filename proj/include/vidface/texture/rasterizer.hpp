/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/texture/rasterizer.hpp
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

#ifndef VIDFACE_TEXTURE_RASTERIZER_HPP
#define VIDFACE_TEXTURE_RASTERIZER_HPP

#include "vidface/camera/affine_camera.hpp"
#include "vidface/model/PcaShapeModel.hpp"

#include "Eigen/Core"
#include "Eigen/Geometry"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace vidface {
namespace texture {

/**
 * Barycentric coordinates of \p p with respect to the 2D triangle (a, b, c). Returns nothing if the
 * triangle has zero area. Coordinates may be negative for points outside.
 */
inline std::optional<Eigen::Vector3d> barycentric(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                                  const Eigen::Vector2d& c, const Eigen::Vector2d& p)
{
    const double area = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if (area == 0.0 || !std::isfinite(area))
    {
        return std::nullopt;
    }
    const double w0 = (b.x() - p.x()) * (c.y() - p.y()) - (c.x() - p.x()) * (b.y() - p.y());
    const double w1 = (c.x() - p.x()) * (a.y() - p.y()) - (a.x() - p.x()) * (c.y() - p.y());
    const double w2 = area - w0 - w1;
    return Eigen::Vector3d(w0 / area, w1 / area, w2 / area);
};

// Outward unit normal of a counter-clockwise triangle; zero for degenerate triangles.
inline Eigen::Vector3d triangle_normal(const model::MeshInstance& mesh, const model::Triangle& t)
{
    const Eigen::Vector3d n =
        (mesh.vertex(t[1]) - mesh.vertex(t[0])).cross(mesh.vertex(t[2]) - mesh.vertex(t[0]));
    const double length = n.norm();
    return length > 0.0 ? Eigen::Vector3d(n / length) : Eigen::Vector3d::Zero();
};

/**
 * Vertices of a mesh projected by an affine camera, with their affine depth (distance along the
 * camera's depth axis; larger is farther away).
 */
struct ProjectedMesh
{
    std::vector<Eigen::Vector2d> points;
    std::vector<double> depths;
};

inline ProjectedMesh project_mesh(const model::MeshInstance& mesh, const camera::AffineCamera& camera)
{
    ProjectedMesh out;
    const Eigen::Vector3d axis = camera.depth_axis();
    out.points.reserve(mesh.num_vertices());
    out.depths.reserve(mesh.num_vertices());
    for (int i = 0; i < mesh.num_vertices(); ++i)
    {
        const Eigen::Vector3d v = mesh.vertex(i);
        out.points.push_back(camera.project(v));
        out.depths.push_back(axis.dot(v));
    }
    return out;
};

/**
 * Per-pixel nearest depth and the index of the triangle that produced it (-1 where nothing was drawn).
 */
struct DepthBuffer
{
    int width = 0;
    int height = 0;
    std::vector<double> depth;
    std::vector<int> triangle;

    DepthBuffer(int width, int height)
        : width(width), height(height),
          depth(static_cast<std::size_t>(width) * height, std::numeric_limits<double>::infinity()),
          triangle(static_cast<std::size_t>(width) * height, -1){};

    std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width + col; };
};

/**
 * @brief Z-buffer rasterisation of a projected mesh at pixel centres.
 *
 * A pixel is covered when its centre lies inside or on the edge of the projected triangle. On equal
 * depth the triangle drawn first, i.e. the lower index, is kept. Triangles whose flag in \p skip is set
 * are not drawn.
 */
inline DepthBuffer rasterize(const ProjectedMesh& projected, const std::vector<model::Triangle>& triangles,
                             int width, int height, const std::vector<bool>& skip = {})
{
    DepthBuffer buffer(width, height);
    for (std::size_t t = 0; t < triangles.size(); ++t)
    {
        if (!skip.empty() && skip[t])
        {
            continue;
        }
        const auto& tri = triangles[t];
        const Eigen::Vector2d& a = projected.points[tri[0]];
        const Eigen::Vector2d& b = projected.points[tri[1]];
        const Eigen::Vector2d& c = projected.points[tri[2]];
        const double min_x = std::min({a.x(), b.x(), c.x()});
        const double max_x = std::max({a.x(), b.x(), c.x()});
        const double min_y = std::min({a.y(), b.y(), c.y()});
        const double max_y = std::max({a.y(), b.y(), c.y()});
        if (!(max_x >= 0.0 && max_y >= 0.0 && min_x <= width - 1.0 && min_y <= height - 1.0))
        {
            continue;
        }
        const int c0 = std::max(0, static_cast<int>(std::ceil(min_x)));
        const int c1 = std::min(width - 1, static_cast<int>(std::floor(max_x)));
        const int r0 = std::max(0, static_cast<int>(std::ceil(min_y)));
        const int r1 = std::min(height - 1, static_cast<int>(std::floor(max_y)));
        for (int r = r0; r <= r1; ++r)
        {
            for (int col = c0; col <= c1; ++col)
            {
                const auto w = barycentric(a, b, c, Eigen::Vector2d(col, r));
                if (!w || (w->array() < 0.0).any())
                {
                    continue;
                }
                const double z = (*w)(0) * projected.depths[tri[0]] + (*w)(1) * projected.depths[tri[1]] +
                                 (*w)(2) * projected.depths[tri[2]];
                const std::size_t i = buffer.index(r, col);
                if (z < buffer.depth[i])
                {
                    buffer.depth[i] = z;
                    buffer.triangle[i] = static_cast<int>(t);
                }
            }
        }
    }
    return buffer;
};

} /* namespace texture */
} /* namespace vidface */

#endif /* VIDFACE_TEXTURE_RASTERIZER_HPP */
