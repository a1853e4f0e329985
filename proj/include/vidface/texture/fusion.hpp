/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/texture/fusion.hpp
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

#ifndef VIDFACE_TEXTURE_FUSION_HPP
#define VIDFACE_TEXTURE_FUSION_HPP

#include "vidface/core/Image.hpp"
#include "vidface/texture/remap.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace vidface {
namespace texture {

enum class FusionMode { Average, Median };

inline std::string to_string(FusionMode mode) { return mode == FusionMode::Average ? "average" : "median"; };

inline FusionMode fusion_mode_from_string(const std::string& name)
{
    if (name == "average")
    {
        return FusionMode::Average;
    }
    if (name == "median")
    {
        return FusionMode::Median;
    }
    throw std::invalid_argument("unknown fusion mode '" + name + "' (expected average or median)");
};

/**
 * A colour observation and its weight.
 */
struct Observation
{
    float value;
    float weight;
};

/**
 * @brief Weighted median of scalar observations.
 *
 * Returns the observed value c minimising sum_i w_i |c - c_i|. That is the smallest value whose
 * cumulative weight, in ascending order of value, reaches half of the total; when a whole interval
 * minimises the objective this picks its lower end. Observations must be non-empty with positive
 * weights.
 */
inline float weighted_median(std::vector<Observation> observations)
{
    if (observations.empty())
    {
        throw std::invalid_argument("weighted median of an empty set");
    }
    std::sort(observations.begin(), observations.end(),
              [](const Observation& a, const Observation& b) { return a.value < b.value; });
    double total = 0.0;
    for (const auto& o : observations)
    {
        total += o.weight;
    }
    double cumulative = 0.0;
    for (const auto& o : observations)
    {
        cumulative += o.weight;
        if (2.0 * cumulative >= total)
        {
            return o.value;
        }
    }
    return observations.back().value;
};

/**
 * Result of fusion: colours plus a mask that is 1 where at least one frame observed the texel.
 */
struct FusedTexture
{
    core::Image3f colour;
    core::Image<std::uint8_t> observed;

    std::size_t num_observed() const
    {
        return static_cast<std::size_t>(std::count(observed.data().begin(), observed.data().end(), 1));
    };
};

/**
 * @brief Accumulates frame textures into one isomap.
 *
 * Average mode keeps running sums of weight * colour and of weight per texel, so adding a frame costs
 * one pass over the texels. Median mode keeps every frame's observed texels and fuses them per channel
 * with weighted_median() when queried. Frames must match the buffer's resolution; for super-resolved
 * median fusion, remap with a layout built at the super-resolved size.
 */
class TextureFusionBuffer
{
public:
    TextureFusionBuffer(FusionMode mode, int resolution) : mode_(mode), resolution_(resolution)
    {
        if (resolution < 1)
        {
            throw std::invalid_argument("fusion buffer resolution must be at least 1");
        }
        if (mode == FusionMode::Average)
        {
            const auto texels = static_cast<std::size_t>(resolution) * resolution;
            weighted_sum_.assign(3 * texels, 0.0);
            weight_sum_.assign(texels, 0.0);
        }
    };

    FusionMode mode() const noexcept { return mode_; };
    int resolution() const noexcept { return resolution_; };
    int num_frames() const noexcept { return num_frames_; };

    void add(const FrameTexture& frame)
    {
        if (frame.resolution != resolution_ || frame.colour.width() != resolution_ ||
            frame.weight.width() != resolution_ || frame.colour.height() != resolution_ ||
            frame.weight.height() != resolution_)
        {
            throw std::invalid_argument("frame texture resolution " + std::to_string(frame.resolution) +
                                        " does not match fusion buffer resolution " + std::to_string(resolution_));
        }
        const auto& weights = frame.weight.data();
        const auto& colours = frame.colour.data();
        if (mode_ == FusionMode::Average)
        {
            for (std::size_t i = 0; i < weights.size(); ++i)
            {
                const double w = weights[i];
                if (w > 0.0)
                {
                    for (int c = 0; c < 3; ++c)
                    {
                        weighted_sum_[3 * i + c] += w * colours[i][c];
                    }
                    weight_sum_[i] += w;
                }
            }
        }
        else
        {
            SparseFrame sparse;
            for (std::size_t i = 0; i < weights.size(); ++i)
            {
                if (weights[i] > 0.0f)
                {
                    sparse.texels.push_back(static_cast<std::uint32_t>(i));
                    sparse.colours.push_back(colours[i]);
                    sparse.weights.push_back(weights[i]);
                }
            }
            frames_.push_back(std::move(sparse));
        }
        ++num_frames_;
    };

    FusedTexture fused() const
    {
        FusedTexture out{core::Image3f(resolution_, resolution_, core::Rgb{0.0f, 0.0f, 0.0f}),
                         core::Image<std::uint8_t>(resolution_, resolution_, 0)};
        if (mode_ == FusionMode::Average)
        {
            for (std::size_t i = 0; i < weight_sum_.size(); ++i)
            {
                if (weight_sum_[i] > 0.0)
                {
                    for (int c = 0; c < 3; ++c)
                    {
                        out.colour.data()[i][c] = static_cast<float>(weighted_sum_[3 * i + c] / weight_sum_[i]);
                    }
                    out.observed.data()[i] = 1;
                }
            }
            return out;
        }
        // Walk all frames' sorted texel lists in step.
        std::vector<std::size_t> cursor(frames_.size(), 0);
        std::array<std::vector<Observation>, 3> channels;
        const auto texels = static_cast<std::uint32_t>(resolution_) * static_cast<std::uint32_t>(resolution_);
        for (std::uint32_t i = 0; i < texels; ++i)
        {
            for (auto& channel : channels)
            {
                channel.clear();
            }
            for (std::size_t f = 0; f < frames_.size(); ++f)
            {
                const auto& frame = frames_[f];
                if (cursor[f] < frame.texels.size() && frame.texels[cursor[f]] == i)
                {
                    for (int c = 0; c < 3; ++c)
                    {
                        channels[c].push_back({frame.colours[cursor[f]][c], frame.weights[cursor[f]]});
                    }
                    ++cursor[f];
                }
            }
            if (!channels[0].empty())
            {
                for (int c = 0; c < 3; ++c)
                {
                    out.colour.data()[i][c] = weighted_median(channels[c]);
                }
                out.observed.data()[i] = 1;
            }
        }
        return out;
    };

    /**
     * Per-texel sum of weights; in median mode the sum over the stored observations.
     */
    core::Image1f total_weight() const
    {
        core::Image1f out(resolution_, resolution_, 0.0f);
        if (mode_ == FusionMode::Average)
        {
            std::transform(weight_sum_.begin(), weight_sum_.end(), out.data().begin(),
                           [](double w) { return static_cast<float>(w); });
            return out;
        }
        for (const auto& frame : frames_)
        {
            for (std::size_t k = 0; k < frame.texels.size(); ++k)
            {
                out.data()[frame.texels[k]] += frame.weights[k];
            }
        }
        return out;
    };

private:
    struct SparseFrame
    {
        std::vector<std::uint32_t> texels;
        std::vector<core::Rgb> colours;
        std::vector<float> weights;
    };

    FusionMode mode_;
    int resolution_;
    int num_frames_ = 0;
    std::vector<double> weighted_sum_;
    std::vector<double> weight_sum_;
    std::vector<SparseFrame> frames_;
};

} /* namespace texture */
} /* namespace vidface */

#endif /* VIDFACE_TEXTURE_FUSION_HPP */
