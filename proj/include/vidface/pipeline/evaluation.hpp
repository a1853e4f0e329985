/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/pipeline/evaluation.hpp
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

#ifndef VIDFACE_PIPELINE_EVALUATION_HPP
#define VIDFACE_PIPELINE_EVALUATION_HPP

#include "vidface/core/exceptions.hpp"
#include "vidface/fitting/landmarks.hpp"

#include "nlohmann/json.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace vidface {
namespace pipeline {

// ibug ids of the outer eye corners.
inline const std::string outer_eye_corner_right = "37";
inline const std::string outer_eye_corner_left = "46";

/**
 * Distance between the outer eye corners of a landmark set.
 */
inline double inter_eye_distance(const fitting::LandmarkSet& landmarks)
{
    const auto* right = landmarks.find(outer_eye_corner_right);
    const auto* left = landmarks.find(outer_eye_corner_left);
    if (right == nullptr || left == nullptr)
    {
        throw core::ValidationError("landmarks", "outer eye corners 37 and 46 are required");
    }
    const double d = (right->position - left->position).norm();
    if (!(d > 0.0))
    {
        throw core::DegenerateConfiguration("outer eye corners coincide");
    }
    return d;
};

struct EvaluationReport
{
    std::size_t frames = 0;
    std::size_t landmarks = 0;           ///< landmark pairs compared
    double mean_error = 0.0;             ///< as a fraction of the ground-truth IED
    double median_error = 0.0;
    double max_error = 0.0;
    std::vector<double> per_frame_error; ///< mean per frame
};

/**
 * @brief Landmark error relative to the inter-eye distance of the ground truth.
 *
 * Each predicted landmark is compared with the ground-truth landmark of the same id; ids missing from
 * either side are ignored. Errors are Euclidean distances divided by the ground-truth IED of the frame,
 * so 0.05 means 5 % of the IED.
 */
inline EvaluationReport evaluate_landmarks(const std::vector<fitting::LandmarkSet>& predicted,
                                           const std::vector<fitting::LandmarkSet>& ground_truth)
{
    if (predicted.size() != ground_truth.size())
    {
        throw core::ValidationError("predictions", "need one landmark set per ground-truth frame");
    }
    EvaluationReport report;
    report.frames = predicted.size();
    std::vector<double> errors;
    for (std::size_t f = 0; f < predicted.size(); ++f)
    {
        const double ied = inter_eye_distance(ground_truth[f]);
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& p : predicted[f].entries)
        {
            const auto* g = ground_truth[f].find(p.id);
            if (g == nullptr)
            {
                continue;
            }
            const double e = (p.position - g->position).norm() / ied;
            errors.push_back(e);
            sum += e;
            ++count;
        }
        report.per_frame_error.push_back(count > 0 ? sum / count : 0.0);
    }
    report.landmarks = errors.size();
    if (errors.empty())
    {
        return report;
    }
    double total = 0.0;
    for (double e : errors)
    {
        total += e;
    }
    report.mean_error = total / errors.size();
    report.max_error = *std::max_element(errors.begin(), errors.end());
    std::sort(errors.begin(), errors.end());
    const std::size_t n = errors.size();
    report.median_error = n % 2 == 1 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
    return report;
};

inline nlohmann::json to_json(const EvaluationReport& report)
{
    return {{"frames", report.frames},
            {"landmarks", report.landmarks},
            {"mean_error", report.mean_error},
            {"median_error", report.median_error},
            {"max_error", report.max_error},
            {"per_frame_error", report.per_frame_error}};
};

} /* namespace pipeline */
} /* namespace vidface */

#endif /* VIDFACE_PIPELINE_EVALUATION_HPP */
