/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/texture/render.hpp
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

#ifndef VIDFACE_TEXTURE_RENDER_HPP
#define VIDFACE_TEXTURE_RENDER_HPP

#include "vidface/camera/affine_camera.hpp"
#include "vidface/core/Image.hpp"
#include "vidface/model/PcaShapeModel.hpp"
#include "vidface/texture/rasterizer.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <vector>

namespace vidface {
namespace texture {

struct RenderedView
{
    core::Image3f colour;
    core::Image<std::uint8_t> mask; ///< 1 where the face was drawn
};

// Bilinear lookup in a texture map at uv in [0, 1]^2, with texel centres at ((col + 0.5) / w, (row + 0.5) / h).
inline core::Rgb sample_texture(const core::Image3f& texture, const Eigen::Vector2d& uv)
{
    return core::sample_bilinear(texture, uv.x() * texture.width() - 0.5, uv.y() * texture.height() - 0.5);
};

/**
 * @brief Software rendering of a textured mesh under an affine camera.
 *
 * Back-facing triangles are culled and the rest are z-buffered at pixel centres. Texture coordinates are
 * interpolated with the screen-space barycentrics of the visible triangle, which is exact under an
 * affine projection, and the texture is sampled bilinearly. Pixels not covered keep \p background.
 */
inline RenderedView render_mesh(const model::MeshInstance& mesh, const std::vector<model::Triangle>& triangles,
                                const std::vector<Eigen::Vector2d>& uv, const core::Image3f& texture,
                                const camera::AffineCamera& camera, int width, int height,
                                const core::Rgb& background = {0.0f, 0.0f, 0.0f})
{
    RenderedView view{core::Image3f(height, width, background), core::Image<std::uint8_t>(height, width, 0)};
    const Eigen::Vector3d towards = camera.towards_camera();
    std::vector<bool> culled(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t)
    {
        culled[t] = !(towards.dot(triangle_normal(mesh, triangles[t])) > 0.0);
    }
    const ProjectedMesh projected = project_mesh(mesh, camera);
    const DepthBuffer buffer = rasterize(projected, triangles, width, height, culled);
    for (int r = 0; r < height; ++r)
    {
        for (int c = 0; c < width; ++c)
        {
            const int t = buffer.triangle[buffer.index(r, c)];
            if (t < 0)
            {
                continue;
            }
            const auto& tri = triangles[t];
            const Eigen::Vector3d w = *barycentric(projected.points[tri[0]], projected.points[tri[1]],
                                                   projected.points[tri[2]], Eigen::Vector2d(c, r));
            const Eigen::Vector2d st = w(0) * uv[tri[0]] + w(1) * uv[tri[1]] + w(2) * uv[tri[2]];
            view.colour(r, c) = sample_texture(texture, st);
            view.mask(r, c) = 1;
        }
    }
    return view;
};

/**
 * Renders the model instance (alpha, psi) with a texture map. psi = 0 gives the expression-neutral face.
 */
inline RenderedView render_view(const model::PcaShapeModel& model, const model::BlendshapeSet& blendshapes,
                                const model::ShapeCoefficients& alpha, const model::ExpressionCoefficients& psi,
                                const core::Image3f& texture, const camera::AffineCamera& camera, int width,
                                int height, const core::Rgb& background = {0.0f, 0.0f, 0.0f})
{
    const auto mesh = model::generate_shape_with_expression(model, blendshapes, alpha, psi);
    return render_mesh(mesh, model.triangles, model.uv, texture, camera, width, height, background);
};

} /* namespace texture */
} /* namespace vidface */

#endif /* VIDFACE_TEXTURE_RENDER_HPP */
