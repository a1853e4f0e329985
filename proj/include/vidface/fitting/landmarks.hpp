/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/fitting/landmarks.hpp
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

#ifndef VIDFACE_FITTING_LANDMARKS_HPP
#define VIDFACE_FITTING_LANDMARKS_HPP

#include "vidface/core/exceptions.hpp"

#include "Eigen/Core"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace vidface {
namespace fitting {

struct Landmark
{
    std::string id;
    Eigen::Vector2d position;       ///< Pixel coordinates
    std::optional<double> variance; ///< sigma^2 of the detector, defaults to 1 in the fitting
};

/**
 * An ordered list of 2D landmarks with unique ids.
 */
struct LandmarkSet
{
    std::vector<Landmark> entries;

    std::size_t size() const noexcept { return entries.size(); };
    bool empty() const noexcept { return entries.empty(); };

    const Landmark* find(const std::string& id) const
    {
        const auto it = std::find_if(entries.begin(), entries.end(), [&id](const Landmark& l) { return l.id == id; });
        return it == entries.end() ? nullptr : &*it;
    };

    // Throws std::invalid_argument if ids repeat, positions are non-finite or variances non-positive.
    void validate() const
    {
        std::set<std::string> seen;
        for (const auto& l : entries)
        {
            if (!seen.insert(l.id).second)
            {
                throw std::invalid_argument("duplicate landmark id '" + l.id + "'");
            }
            if (!l.position.allFinite())
            {
                throw std::invalid_argument("landmark '" + l.id + "' has a non-finite position");
            }
            if (l.variance && !(*l.variance > 0.0))
            {
                throw std::invalid_argument("landmark '" + l.id + "' has a non-positive variance");
            }
        }
    };

    // Positions as a flat [x0, y0, x1, y1, ...] vector.
    Eigen::VectorXd flattened() const
    {
        Eigen::VectorXd v(2 * entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i)
        {
            v.segment<2>(2 * i) = entries[i].position;
        }
        return v;
    };
};

inline std::vector<std::string> ibug_contour_right_ids()
{
    return {"1", "2", "3", "4", "5", "6", "7", "8"};
};
inline std::vector<std::string> ibug_contour_left_ids()
{
    return {"10", "11", "12", "13", "14", "15", "16", "17"};
};

/**
 * @brief Correspondences between 2D landmarks and model vertices.
 *
 * \c pairs are fixed correspondences. Contour landmarks have no fixed vertex; they are matched against the
 * outline candidates of their side at fitting time. "Right" refers to the subject's right, which lies on
 * the model's -x side and appears on the left of a frontal image (ibug 1-8).
 */
struct LandmarkVertexMapping
{
    std::map<std::string, int> pairs;
    std::vector<int> contour_right;
    std::vector<int> contour_left;
    std::vector<std::string> contour_landmarks_right = ibug_contour_right_ids();
    std::vector<std::string> contour_landmarks_left = ibug_contour_left_ids();

    std::optional<int> vertex(const std::string& landmark_id) const
    {
        const auto it = pairs.find(landmark_id);
        if (it == pairs.end())
        {
            return std::nullopt;
        }
        return it->second;
    };

    bool is_contour_landmark(const std::string& landmark_id) const
    {
        return std::find(contour_landmarks_right.begin(), contour_landmarks_right.end(), landmark_id) !=
                   contour_landmarks_right.end() ||
               std::find(contour_landmarks_left.begin(), contour_landmarks_left.end(), landmark_id) !=
                   contour_landmarks_left.end();
    };

    void validate(int num_vertices) const
    {
        std::set<int> fixed;
        for (const auto& [id, v] : pairs)
        {
            if (v < 0 || v >= num_vertices)
            {
                throw core::ValidationError("pairs", "vertex " + std::to_string(v) + " of landmark '" + id +
                                                         "' out of range");
            }
            fixed.insert(v);
        }
        for (const auto* list : {&contour_right, &contour_left})
        {
            for (int v : *list)
            {
                if (v < 0 || v >= num_vertices)
                {
                    throw core::ValidationError("contour", "vertex " + std::to_string(v) + " out of range");
                }
                if (fixed.count(v))
                {
                    throw core::ValidationError("contour", "vertex " + std::to_string(v) +
                                                               " is also a fixed correspondence");
                }
            }
        }
    };
};

/**
 * Reads a landmark file with one `id x y [variance]` record per line. Empty lines and lines starting
 * with '#' are ignored.
 */
inline LandmarkSet read_landmarks(const std::string& filename)
{
    std::ifstream in(filename);
    if (!in)
    {
        throw core::FileNotFound(filename);
    }
    LandmarkSet landmarks;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line))
    {
        ++line_number;
        if (line.empty() || line[0] == '#')
        {
            continue;
        }
        std::istringstream fields(line);
        Landmark l;
        double x, y;
        if (!(fields >> l.id >> x >> y))
        {
            throw core::ParseError(filename + ":" + std::to_string(line_number) + ": expected 'id x y [variance]'");
        }
        l.position = {x, y};
        double variance;
        if (fields >> variance)
        {
            l.variance = variance;
        }
        landmarks.entries.push_back(std::move(l));
    }
    landmarks.validate();
    return landmarks;
};

inline void write_landmarks(const std::string& filename, const LandmarkSet& landmarks)
{
    std::ofstream out(filename);
    out << std::setprecision(17);
    for (const auto& l : landmarks.entries)
    {
        out << l.id << " " << l.position.x() << " " << l.position.y();
        if (l.variance)
        {
            out << " " << *l.variance;
        }
        out << "\n";
    }
};

namespace detail {
template <typename T>
std::vector<T> read_list(std::istringstream& fields)
{
    std::vector<T> values;
    T value;
    while (fields >> value)
    {
        values.push_back(value);
    }
    return values;
};
} /* namespace detail */

/**
 * Reads a mapping file: `landmark_id vertex_id` lines, plus `contour_right: v v v ...` and
 * `contour_left: ...` candidate lists. Optional `contour_landmarks_right:` / `contour_landmarks_left:` lines
 * override which landmark ids are contour points (ibug 1-8 and 10-17 by default).
 */
inline LandmarkVertexMapping read_mapping(const std::string& filename)
{
    std::ifstream in(filename);
    if (!in)
    {
        throw core::FileNotFound(filename);
    }
    LandmarkVertexMapping mapping;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line))
    {
        ++line_number;
        if (line.empty() || line[0] == '#')
        {
            continue;
        }
        std::istringstream fields(line);
        std::string key;
        fields >> key;
        if (key == "contour_right:")
        {
            mapping.contour_right = detail::read_list<int>(fields);
        } else if (key == "contour_left:")
        {
            mapping.contour_left = detail::read_list<int>(fields);
        } else if (key == "contour_landmarks_right:")
        {
            mapping.contour_landmarks_right = detail::read_list<std::string>(fields);
        } else if (key == "contour_landmarks_left:")
        {
            mapping.contour_landmarks_left = detail::read_list<std::string>(fields);
        } else
        {
            int vertex;
            if (!(fields >> vertex))
            {
                throw core::ParseError(filename + ":" + std::to_string(line_number) +
                                       ": expected 'landmark_id vertex_id'");
            }
            mapping.pairs[key] = vertex;
        }
    }
    return mapping;
};

inline void write_mapping(const std::string& filename, const LandmarkVertexMapping& mapping)
{
    std::ofstream out(filename);
    for (const auto& [id, v] : mapping.pairs)
    {
        out << id << " " << v << "\n";
    }
    const auto write_list = [&out](const std::string& key, const auto& list) {
        out << key;
        for (const auto& v : list)
        {
            out << " " << v;
        }
        out << "\n";
    };
    write_list("contour_right:", mapping.contour_right);
    write_list("contour_left:", mapping.contour_left);
    write_list("contour_landmarks_right:", mapping.contour_landmarks_right);
    write_list("contour_landmarks_left:", mapping.contour_landmarks_left);
};

} /* namespace fitting */
} /* namespace vidface */

#endif /* VIDFACE_FITTING_LANDMARKS_HPP */
