/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/fitting/contour_correspondence.hpp
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

#ifndef VIDFACE_FITTING_CONTOUR_CORRESPONDENCE_HPP
#define VIDFACE_FITTING_CONTOUR_CORRESPONDENCE_HPP

#include "vidface/camera/affine_camera.hpp"
#include "vidface/core/exceptions.hpp"
#include "vidface/fitting/landmarks.hpp"
#include "vidface/model/PcaShapeModel.hpp"

#include <limits>
#include <map>
#include <string>
#include <vector>

namespace vidface {
namespace fitting {

enum class ContourSide { Right, Left };

/**
 * Which half of the face outline faces the camera. The rows of the camera's top-left 2x3 block are
 * orthonormalised (Gram-Schmidt); if (r1 x r2) has a non-negative x component, the camera sees the model's
 * -x side, i.e. the subject's right cheek, and the right outline is used.
 */
inline ContourSide front_facing_side(const camera::AffineCamera& camera)
{
    return camera.depth_axis().x() >= 0.0 ? ContourSide::Right : ContourSide::Left;
};

struct ContourCorrespondences
{
    ContourSide side = ContourSide::Right;
    std::map<std::string, int> assignments; ///< Landmark id -> chosen outline vertex
    std::vector<std::string> excluded;      ///< Contour landmarks on the far side, not used for fitting
};

/**
 * Finds the candidate vertex with the smallest squared reprojection distance to \p point. Ties go to the
 * smaller vertex index.
 */
inline int closest_projected_vertex(const camera::AffineCamera& camera, const model::MeshInstance& mesh,
                                    const std::vector<int>& candidates, const Eigen::Vector2d& point)
{
    int best_vertex = -1;
    double best_distance = std::numeric_limits<double>::infinity();
    for (int v : candidates)
    {
        const double d = (camera.project(mesh.vertex(v)) - point).squaredNorm();
        if (d < best_distance || (d == best_distance && v < best_vertex))
        {
            best_distance = d;
            best_vertex = v;
        }
    }
    return best_vertex;
};

/**
 * @brief Matches the front-facing 2D contour landmarks to the model outline.
 *
 * For every contour landmark on the camera-facing side (see front_facing_side()), the outline candidate
 * whose projection under the current camera and mesh is closest is chosen. Contour landmarks on the other
 * side are returned in \c excluded.
 *
 * Throws core::ConfigurationError if a contour landmark is present but its side has no candidates.
 */
inline ContourCorrespondences refine_contour(const camera::AffineCamera& camera, const model::MeshInstance& mesh,
                                             const LandmarkSet& landmarks, const LandmarkVertexMapping& mapping)
{
    ContourCorrespondences result;
    result.side = front_facing_side(camera);
    const bool right = result.side == ContourSide::Right;
    const auto& near_ids = right ? mapping.contour_landmarks_right : mapping.contour_landmarks_left;
    const auto& far_ids = right ? mapping.contour_landmarks_left : mapping.contour_landmarks_right;
    const auto& candidates = right ? mapping.contour_right : mapping.contour_left;

    for (const auto& id : near_ids)
    {
        const Landmark* landmark = landmarks.find(id);
        if (!landmark)
        {
            continue;
        }
        if (candidates.empty())
        {
            throw core::ConfigurationError("refine_contour: no outline candidates for the camera-facing side");
        }
        result.assignments[id] = closest_projected_vertex(camera, mesh, candidates, landmark->position);
    }
    for (const auto& id : far_ids)
    {
        if (landmarks.find(id))
        {
            result.excluded.push_back(id);
        }
    }
    return result;
};

} /* namespace fitting */
} /* namespace vidface */

#endif /* VIDFACE_FITTING_CONTOUR_CORRESPONDENCE_HPP */
