/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/pipeline/records.hpp
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

#ifndef VIDFACE_PIPELINE_RECORDS_HPP
#define VIDFACE_PIPELINE_RECORDS_HPP

#include "vidface/camera/affine_camera.hpp"
#include "vidface/core/exceptions.hpp"
#include "vidface/fitting/fitting.hpp"
#include "vidface/fitting/landmarks.hpp"

#include "Eigen/Core"
#include "nlohmann/json.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vidface {
namespace pipeline {

/**
 * Everything the pipeline produced for one frame. A skipped frame carries its reason and no fit.
 */
struct FrameRecord
{
    int frame = 0;
    bool skipped = false;
    std::string skip_reason;
    fitting::LandmarkSet landmarks;
    std::optional<fitting::FitResult> fit;
    std::map<std::string, double> timings_ms; ///< per stage: track, fit, remap, fuse, total
};

namespace detail {
inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; };

inline Eigen::VectorXd from_std(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
};
} /* namespace detail */

inline nlohmann::json to_json(const camera::AffineCamera& camera)
{
    std::vector<double> rows;
    for (int r = 0; r < 2; ++r)
    {
        for (int c = 0; c < 4; ++c)
        {
            rows.push_back(camera.matrix()(r, c));
        }
    }
    return rows;
};

inline camera::AffineCamera camera_from_json(const nlohmann::json& j)
{
    const auto rows = j.get<std::vector<double>>();
    if (rows.size() != 8)
    {
        throw core::ValidationError("camera", "expected the 8 entries of the top two rows");
    }
    Eigen::Matrix<double, 2, 4> top;
    for (int r = 0; r < 2; ++r)
    {
        for (int c = 0; c < 4; ++c)
        {
            top(r, c) = rows[4 * r + c];
        }
    }
    return camera::AffineCamera(top);
};

inline nlohmann::json to_json(const fitting::LandmarkSet& landmarks)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& l : landmarks.entries)
    {
        nlohmann::json e = {{"id", l.id}, {"x", l.position.x()}, {"y", l.position.y()}};
        if (l.variance)
        {
            e["variance"] = *l.variance;
        }
        out.push_back(e);
    }
    return out;
};

inline fitting::LandmarkSet landmarks_from_json(const nlohmann::json& j)
{
    fitting::LandmarkSet set;
    for (const auto& e : j)
    {
        fitting::Landmark l{e.at("id").get<std::string>(),
                            Eigen::Vector2d(e.at("x").get<double>(), e.at("y").get<double>()), std::nullopt};
        if (e.contains("variance"))
        {
            l.variance = e.at("variance").get<double>();
        }
        set.entries.push_back(std::move(l));
    }
    return set;
};

inline nlohmann::json to_json(const fitting::FitResult& fit)
{
    return {{"alpha", detail::to_std(fit.alpha)},
            {"psi", detail::to_std(fit.psi)},
            {"camera", to_json(fit.camera)},
            {"residuals", fit.residuals},
            {"contour_assignments", fit.contour_assignments},
            {"alternations", fit.alternations},
            {"converged", fit.converged}};
};

inline fitting::FitResult fit_result_from_json(const nlohmann::json& j)
{
    fitting::FitResult fit;
    fit.alpha = detail::from_std(j.at("alpha").get<std::vector<double>>());
    fit.psi = detail::from_std(j.at("psi").get<std::vector<double>>());
    fit.camera = camera_from_json(j.at("camera"));
    fit.residuals = j.at("residuals").get<std::vector<double>>();
    fit.contour_assignments = j.at("contour_assignments").get<std::map<std::string, int>>();
    fit.alternations = j.at("alternations").get<int>();
    fit.converged = j.at("converged").get<bool>();
    return fit;
};

/**
 * JSON object for one frame. Timings are left out unless \p with_timings is set, since they differ
 * between otherwise identical runs.
 */
inline nlohmann::json to_json(const FrameRecord& record, bool with_timings = true)
{
    nlohmann::json j = {{"frame", record.frame}, {"skipped", record.skipped}, {"landmarks", to_json(record.landmarks)}};
    if (record.skipped)
    {
        j["skip_reason"] = record.skip_reason;
    }
    if (record.fit)
    {
        j["fit"] = to_json(*record.fit);
    }
    if (with_timings)
    {
        j["timings_ms"] = record.timings_ms;
    }
    return j;
};

inline FrameRecord frame_record_from_json(const nlohmann::json& j)
{
    try
    {
        FrameRecord record;
        record.frame = j.at("frame").get<int>();
        record.skipped = j.at("skipped").get<bool>();
        record.skip_reason = j.value("skip_reason", std::string{});
        record.landmarks = landmarks_from_json(j.at("landmarks"));
        if (j.contains("fit"))
        {
            record.fit = fit_result_from_json(j.at("fit"));
        }
        if (j.contains("timings_ms"))
        {
            record.timings_ms = j.at("timings_ms").get<std::map<std::string, double>>();
        }
        return record;
    } catch (const nlohmann::json::exception& e)
    {
        throw core::ParseError(std::string("invalid frame record: ") + e.what());
    }
};

// One JSON document per line.
inline std::vector<FrameRecord> read_frame_records(const std::string& filename)
{
    std::ifstream in(filename);
    if (!in)
    {
        throw core::FileNotFound(filename);
    }
    std::vector<FrameRecord> records;
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty())
        {
            continue;
        }
        try
        {
            records.push_back(frame_record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::parse_error& e)
        {
            throw core::ParseError("could not parse a line of '" + filename + "': " + e.what());
        }
    }
    return records;
};

} /* namespace pipeline */
} /* namespace vidface */

#endif /* VIDFACE_PIPELINE_RECORDS_HPP */
