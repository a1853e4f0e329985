/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/tracker/io.hpp
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

#ifndef VIDFACE_TRACKER_IO_HPP
#define VIDFACE_TRACKER_IO_HPP

#include "vidface/core/exceptions.hpp"
#include "vidface/model/io.hpp"
#include "vidface/tracker/cascade.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace vidface {
namespace tracker {

inline constexpr int cascade_file_version = 1;

inline nlohmann::json to_json(const HogConfig& c)
{
    return {{"cells", c.cells},           {"bins", c.bins},           {"patch_pixels", c.patch_pixels},
            {"patch_factor", c.patch_factor}, {"eye_left", c.eye_left}, {"eye_right", c.eye_right},
            {"epsilon", c.epsilon},       {"min_patch_side", c.min_patch_side}};
};

inline HogConfig hog_config_from_json(const nlohmann::json& j)
{
    HogConfig c;
    c.cells = j.at("cells").get<int>();
    c.bins = j.at("bins").get<int>();
    c.patch_pixels = j.at("patch_pixels").get<int>();
    c.patch_factor = j.at("patch_factor").get<double>();
    c.eye_left = j.at("eye_left").get<int>();
    c.eye_right = j.at("eye_right").get<int>();
    c.epsilon = j.at("epsilon").get<double>();
    c.min_patch_side = j.value("min_patch_side", c.min_patch_side);
    return c;
};

inline nlohmann::json to_json(const RegressorCascade& cascade)
{
    nlohmann::json j;
    j["version"] = cascade_file_version;
    j["K"] = cascade.num_landmarks();
    j["feature_config"] = to_json(cascade.feature_config);
    j["mean_landmarks"] =
        std::vector<double>(cascade.mean_landmarks.data(), cascade.mean_landmarks.data() + cascade.mean_landmarks.size());
    auto stages = nlohmann::json::array();
    for (const auto& s : cascade.stages)
    {
        stages.push_back({{"rows", s.A.rows()},
                          {"cols", s.A.cols()},
                          {"A", model::detail::to_row_major(s.A)},
                          {"b", std::vector<double>(s.b.data(), s.b.data() + s.b.size())}});
    }
    j["stages"] = std::move(stages);
    return j;
};

inline RegressorCascade cascade_from_json(const nlohmann::json& j)
{
    RegressorCascade cascade;
    try
    {
        const int version = j.at("version").get<int>();
        if (version != cascade_file_version)
        {
            throw core::SchemaVersionMismatch(version, cascade_file_version);
        }
        cascade.feature_config = hog_config_from_json(j.at("feature_config"));
        cascade.mean_landmarks = model::detail::to_vector(j.at("mean_landmarks").get<std::vector<double>>());
        if (j.at("K").get<int>() != cascade.num_landmarks())
        {
            throw core::ValidationError("K", "does not match the length of mean_landmarks");
        }
        for (const auto& s : j.at("stages"))
        {
            RegressorStage stage;
            stage.A = model::detail::from_row_major(s.at("A").get<std::vector<double>>(), s.at("rows").get<Eigen::Index>(),
                                                    s.at("cols").get<Eigen::Index>(), "stages.A");
            stage.b = model::detail::to_vector(s.at("b").get<std::vector<double>>());
            cascade.stages.push_back(std::move(stage));
        }
    } catch (const nlohmann::json::exception& e)
    {
        throw core::ParseError(std::string("malformed cascade file: ") + e.what());
    }
    cascade.validate();
    return cascade;
};

/**
 * Cascades are stored as MessagePack: the same document as to_json(), in a compact binary encoding.
 */
inline void save_cascade(const std::string& filename, const RegressorCascade& cascade)
{
    std::ofstream out(filename, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("could not open '" + filename + "' for writing");
    }
    const auto bytes = nlohmann::json::to_msgpack(to_json(cascade));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
};

inline RegressorCascade load_cascade(const std::string& filename)
{
    if (!std::filesystem::exists(filename))
    {
        throw core::FileNotFound(filename);
    }
    std::ifstream in(filename, std::ios::binary);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json j;
    try
    {
        j = nlohmann::json::from_msgpack(bytes);
    } catch (const nlohmann::json::exception& e)
    {
        throw core::ParseError("could not parse '" + filename + "': " + e.what());
    }
    return cascade_from_json(j);
};

} /* namespace tracker */
} /* namespace vidface */

#endif /* VIDFACE_TRACKER_IO_HPP */
