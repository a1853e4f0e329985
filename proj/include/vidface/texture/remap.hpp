/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/texture/remap.hpp
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

#ifndef VIDFACE_TEXTURE_REMAP_HPP
#define VIDFACE_TEXTURE_REMAP_HPP

#include "vidface/camera/affine_camera.hpp"
#include "vidface/core/Image.hpp"
#include "vidface/core/exceptions.hpp"
#include "vidface/model/PcaShapeModel.hpp"
#include "vidface/texture/isomap_layout.hpp"
#include "vidface/texture/rasterizer.hpp"

#include "Eigen/Core"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vidface {
namespace texture {

/**
 * @brief One frame's colour observations in isomap space.
 *
 * \c weight is zero exactly where the texel was not observed; \c colour is black there.
 */
struct FrameTexture
{
    int resolution = 0;
    core::Image3f colour;
    core::Image1f weight;
    int frame_index = 0;

    std::size_t num_observed() const
    {
        return static_cast<std::size_t>(
            std::count_if(weight.data().begin(), weight.data().end(), [](float w) { return w > 0.0f; }));
    };
};

inline Eigen::Vector3d surface_point(const model::MeshInstance& mesh, const model::Triangle& t,
                                     const Eigen::Vector3d& w)
{
    return w(0) * mesh.vertex(t[0]) + w(1) * mesh.vertex(t[1]) + w(2) * mesh.vertex(t[2]);
};

// Diagonal of the axis-aligned bounding box of all vertices.
inline double bounding_box_diagonal(const model::MeshInstance& mesh)
{
    if (mesh.num_vertices() == 0)
    {
        return 0.0;
    }
    const auto points = Eigen::Map<const Eigen::Matrix3Xd>(mesh.vertices.data(), 3, mesh.num_vertices());
    return (points.rowwise().maxCoeff() - points.rowwise().minCoeff()).norm();
};

/**
 * @brief Per-texel view weights with self-occlusion.
 *
 * For a covered texel on triangle T, omega = clamp(<towards_camera, n_T>, 0, 1) with n_T the outward
 * unit normal of T. The texel's surface point is projected to image position p; omega is set to 0 when
 * p falls outside the width x height frame, or when the point is hidden behind another triangle.
 *
 * Hidden-ness is decided with a frame-resolution z-buffer of all triangles. Let q be the pixel centre
 * nearest p and F the triangle visible at q. If F differs from T, the texel is occluded when both
 * depth_T(q) > depth(q) + tol and depth(p) > depth_F(p) + tol, where depth_X(.) is the depth of the
 * plane of X, and tol = 1e-4 times the mesh bounding-box diagonal.
 */
inline core::Image1f compute_texel_weights(const model::MeshInstance& mesh,
                                           const std::vector<model::Triangle>& triangles,
                                           const camera::AffineCamera& camera, const IsomapLayout& layout,
                                           int width, int height)
{
    const int res = layout.resolution;
    core::Image1f weights(res, res, 0.0f);
    const Eigen::Vector3d towards = camera.towards_camera();
    std::vector<double> facing(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t)
    {
        facing[t] = std::clamp(towards.dot(triangle_normal(mesh, triangles[t])), 0.0, 1.0);
    }
    const ProjectedMesh projected = project_mesh(mesh, camera);
    const DepthBuffer buffer = rasterize(projected, triangles, width, height);
    const double tolerance = 1e-4 * bounding_box_diagonal(mesh);
    const Eigen::Vector3d axis = camera.depth_axis();

    auto plane_depth = [&](int t, const Eigen::Vector2d& at) -> std::optional<double> {
        const auto& tri = triangles[t];
        const auto w = barycentric(projected.points[tri[0]], projected.points[tri[1]], projected.points[tri[2]], at);
        if (!w)
        {
            return std::nullopt;
        }
        return (*w)(0) * projected.depths[tri[0]] + (*w)(1) * projected.depths[tri[1]] +
               (*w)(2) * projected.depths[tri[2]];
    };

    for (std::size_t i = 0; i < layout.triangle.size(); ++i)
    {
        const int t = layout.triangle[i];
        if (t < 0 || facing[t] <= 0.0)
        {
            continue;
        }
        const Eigen::Vector3d point = surface_point(mesh, triangles[t], layout.barycentrics[i]);
        const Eigen::Vector2d p = camera.project(point);
        const double col = std::round(p.x());
        const double row = std::round(p.y());
        if (!(col >= 0.0 && row >= 0.0 && col <= width - 1.0 && row <= height - 1.0))
        {
            continue;
        }
        const std::size_t pixel = buffer.index(static_cast<int>(row), static_cast<int>(col));
        const int front = buffer.triangle[pixel];
        if (front >= 0 && front != t)
        {
            const auto own_at_pixel = plane_depth(t, Eigen::Vector2d(col, row));
            const auto front_at_point = plane_depth(front, p);
            const bool behind_pixel = !own_at_pixel || *own_at_pixel > buffer.depth[pixel] + tolerance;
            const bool behind_front = !front_at_point || axis.dot(point) > *front_at_point + tolerance;
            if (behind_pixel && behind_front)
            {
                continue;
            }
        }
        weights.data()[i] = static_cast<float>(facing[t]);
    }
    return weights;
};

/**
 * @brief Samples a frame into isomap space.
 *
 * Every covered texel is mapped to its surface point on \p mesh, projected with \p camera and the frame
 * colour there is read with bilinear interpolation. Texels with zero weight keep colour 0. The layout
 * sets the output resolution, so super-resolved remapping uses a layout built at resolution * s.
 */
inline FrameTexture remap_frame(const core::Image3f& frame, const model::MeshInstance& mesh,
                                const std::vector<model::Triangle>& triangles, const camera::AffineCamera& camera,
                                const IsomapLayout& layout, int frame_index = 0)
{
    const int res = layout.resolution;
    FrameTexture out;
    out.resolution = res;
    out.frame_index = frame_index;
    out.colour = core::Image3f(res, res, core::Rgb{0.0f, 0.0f, 0.0f});
    out.weight = compute_texel_weights(mesh, triangles, camera, layout, frame.width(), frame.height());
    for (std::size_t i = 0; i < layout.triangle.size(); ++i)
    {
        if (out.weight.data()[i] <= 0.0f)
        {
            continue;
        }
        const Eigen::Vector3d point = surface_point(mesh, triangles[layout.triangle[i]], layout.barycentrics[i]);
        const Eigen::Vector2d p = camera.project(point);
        out.colour.data()[i] = core::sample_bilinear(frame, p.x(), p.y());
    }
    return out;
};

} /* namespace texture */
} /* namespace vidface */

#endif /* VIDFACE_TEXTURE_REMAP_HPP */
