/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/pipeline/sequence_io.hpp
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

#ifndef VIDFACE_PIPELINE_SEQUENCE_IO_HPP
#define VIDFACE_PIPELINE_SEQUENCE_IO_HPP

#include "vidface/core/exceptions.hpp"
#include "vidface/core/image_io.hpp"
#include "vidface/fitting/landmarks.hpp"
#include "vidface/pipeline/records.hpp"
#include "vidface/pipeline/synthetic_sequence.hpp"

#include "nlohmann/json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace vidface {
namespace pipeline {

inline constexpr int ground_truth_file_version = 1;

inline std::string frame_name(std::size_t index)
{
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "frame_%05zu", index);
    return buffer;
};

/**
 * Writes a sequence as
 * - frames/frame_NNNNN.png
 * - landmarks/frame_NNNNN.pts, lines of "id x y"
 * - ground_truth.json with alpha, the per-frame psi and the per-frame cameras
 */
inline void save_sequence(const std::filesystem::path& directory, const SyntheticSequence& sequence)
{
    std::filesystem::create_directories(directory / "frames");
    std::filesystem::create_directories(directory / "landmarks");
    nlohmann::json truth = {{"version", ground_truth_file_version},
                            {"alpha", detail::to_std(sequence.alpha)},
                            {"psis", nlohmann::json::array()},
                            {"cameras", nlohmann::json::array()}};
    for (std::size_t k = 0; k < sequence.frames.size(); ++k)
    {
        core::write_png((directory / "frames" / (frame_name(k) + ".png")).string(), sequence.frames[k]);
        fitting::write_landmarks((directory / "landmarks" / (frame_name(k) + ".pts")).string(),
                                 sequence.landmarks[k]);
        truth["psis"].push_back(detail::to_std(sequence.psis[k]));
        truth["cameras"].push_back(to_json(sequence.cameras[k]));
    }
    std::ofstream out(directory / "ground_truth.json");
    if (!out)
    {
        throw std::runtime_error("cannot write '" + (directory / "ground_truth.json").string() + "'");
    }
    out << truth.dump(2) << '\n';
};

/**
 * All *.pts files of a directory, sorted by name.
 */
inline std::vector<fitting::LandmarkSet> read_landmark_directory(const std::filesystem::path& directory)
{
    if (!std::filesystem::is_directory(directory))
    {
        throw core::FileNotFound(directory.string());
    }
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(directory))
    {
        if (entry.is_regular_file() && entry.path().extension() == ".pts")
        {
            paths.push_back(entry.path());
        }
    }
    std::sort(paths.begin(), paths.end());
    std::vector<fitting::LandmarkSet> sets;
    for (const auto& p : paths)
    {
        sets.push_back(fitting::read_landmarks(p.string()));
    }
    return sets;
};

} /* namespace pipeline */
} /* namespace vidface */

#endif /* VIDFACE_PIPELINE_SEQUENCE_IO_HPP */
