/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/pipeline/config.hpp
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

#ifndef VIDFACE_PIPELINE_CONFIG_HPP
#define VIDFACE_PIPELINE_CONFIG_HPP

#include "vidface/core/exceptions.hpp"
#include "vidface/texture/fusion.hpp"
#include "vidface/tracker/cascade.hpp"

#include "nlohmann/json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

namespace vidface {
namespace pipeline {

inline constexpr int config_file_version = 1;

/**
 * @brief Settings of a video reconstruction run.
 *
 * Ranges checked by validate():
 * - isomap_resolution in [1, 8192]
 * - super_resolution in [1, 8], used by median fusion only
 * - lambda finite and >= 0
 * - max_alternations in [1, 1000] and fit_iterations in [1, 100]
 * - snapshot_interval >= 0, where 0 disables snapshots
 * - face_box, if given, with positive width and height
 */
struct PipelineConfig
{
    std::string model_path;
    std::string cascade_path;
    std::string mapping_path;
    int isomap_resolution = 512;
    texture::FusionMode fusion = texture::FusionMode::Average;
    int super_resolution = 2;
    double lambda = 1.0;
    int max_alternations = 10;
    int fit_iterations = 3;
    std::string output_dir;
    int snapshot_interval = 0;
    std::optional<tracker::FaceBox> face_box; ///< initialises tracking on the first frame

    // Resolution of the fused isomap: isomap_resolution, times super_resolution in median mode.
    int fused_resolution() const
    {
        return fusion == texture::FusionMode::Median ? isomap_resolution * super_resolution : isomap_resolution;
    };

    void validate(bool check_files = true) const
    {
        if (isomap_resolution < 1 || isomap_resolution > 8192)
        {
            throw core::ValidationError("isomap_resolution", "must lie in [1, 8192]");
        }
        if (super_resolution < 1 || super_resolution > 8)
        {
            throw core::ValidationError("super_resolution", "must lie in [1, 8]");
        }
        if (!std::isfinite(lambda) || lambda < 0.0)
        {
            throw core::ValidationError("lambda", "must be finite and non-negative");
        }
        if (max_alternations < 1 || max_alternations > 1000)
        {
            throw core::ValidationError("max_alternations", "must lie in [1, 1000]");
        }
        if (fit_iterations < 1 || fit_iterations > 100)
        {
            throw core::ValidationError("fit_iterations", "must lie in [1, 100]");
        }
        if (snapshot_interval < 0)
        {
            throw core::ValidationError("snapshot_interval", "must be non-negative");
        }
        if (face_box && !(face_box->width > 0.0 && face_box->height > 0.0 && std::isfinite(face_box->x) &&
                          std::isfinite(face_box->y) && std::isfinite(face_box->width) &&
                          std::isfinite(face_box->height)))
        {
            throw core::ValidationError("face_box", "needs a finite position and a positive size");
        }
        if (check_files)
        {
            for (const auto& [field, path] :
                 {std::pair{"model", model_path}, {"cascade", cascade_path}, {"mapping", mapping_path}})
            {
                if (path.empty())
                {
                    throw core::ValidationError(field, "path is required");
                }
                if (!std::filesystem::exists(path))
                {
                    throw core::FileNotFound(path);
                }
            }
        }
    };
};

inline nlohmann::json to_json(const tracker::FaceBox& box)
{
    return {{"x", box.x}, {"y", box.y}, {"width", box.width}, {"height", box.height}};
};

inline tracker::FaceBox face_box_from_json(const nlohmann::json& j)
{
    return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("width").get<double>(),
            j.at("height").get<double>()};
};

inline nlohmann::json to_json(const PipelineConfig& config)
{
    nlohmann::json j = {{"version", config_file_version},
                        {"model", config.model_path},
                        {"cascade", config.cascade_path},
                        {"mapping", config.mapping_path},
                        {"isomap_resolution", config.isomap_resolution},
                        {"fusion", texture::to_string(config.fusion)},
                        {"super_resolution", config.super_resolution},
                        {"lambda", config.lambda},
                        {"max_alternations", config.max_alternations},
                        {"fit_iterations", config.fit_iterations},
                        {"output_dir", config.output_dir},
                        {"snapshot_interval", config.snapshot_interval}};
    if (config.face_box)
    {
        j["face_box"] = to_json(*config.face_box);
    }
    return j;
};

/**
 * Reads a config object. Missing optional keys keep their defaults; relative paths are resolved against
 * \p base_dir. Does not validate.
 */
inline PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {})
{
    PipelineConfig config;
    try
    {
        const int version = j.at("version").get<int>();
        if (version != config_file_version)
        {
            throw core::SchemaVersionMismatch(version, config_file_version);
        }
        const auto resolve = [&base_dir](const std::string& p) {
            if (p.empty() || std::filesystem::path(p).is_absolute() || base_dir.empty())
            {
                return p;
            }
            return (base_dir / p).lexically_normal().string();
        };
        config.model_path = resolve(j.value("model", std::string{}));
        config.cascade_path = resolve(j.value("cascade", std::string{}));
        config.mapping_path = resolve(j.value("mapping", std::string{}));
        config.output_dir = resolve(j.value("output_dir", std::string{}));
        config.isomap_resolution = j.value("isomap_resolution", config.isomap_resolution);
        if (j.contains("fusion"))
        {
            config.fusion = texture::fusion_mode_from_string(j.at("fusion").get<std::string>());
        }
        config.super_resolution = j.value("super_resolution", config.super_resolution);
        config.lambda = j.value("lambda", config.lambda);
        config.max_alternations = j.value("max_alternations", config.max_alternations);
        config.fit_iterations = j.value("fit_iterations", config.fit_iterations);
        config.snapshot_interval = j.value("snapshot_interval", config.snapshot_interval);
        if (j.contains("face_box"))
        {
            config.face_box = face_box_from_json(j.at("face_box"));
        }
    } catch (const nlohmann::json::exception& e)
    {
        throw core::ParseError(std::string("invalid pipeline config: ") + e.what());
    } catch (const std::invalid_argument& e)
    {
        throw core::ValidationError("fusion", e.what());
    }
    return config;
};

inline PipelineConfig load_config(const std::string& filename)
{
    if (!std::filesystem::exists(filename))
    {
        throw core::FileNotFound(filename);
    }
    std::ifstream in(filename);
    nlohmann::json j;
    try
    {
        in >> j;
    } catch (const nlohmann::json::parse_error& e)
    {
        throw core::ParseError("could not parse '" + filename + "': " + e.what());
    }
    return config_from_json(j, std::filesystem::path(filename).parent_path());
};

inline void save_config(const std::string& filename, const PipelineConfig& config)
{
    std::ofstream out(filename);
    if (!out)
    {
        throw std::runtime_error("cannot write '" + filename + "'");
    }
    out << to_json(config).dump(2) << '\n';
};

} /* namespace pipeline */
} /* namespace vidface */

#endif /* VIDFACE_PIPELINE_CONFIG_HPP */
