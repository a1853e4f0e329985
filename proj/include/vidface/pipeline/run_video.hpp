/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/pipeline/run_video.hpp
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

#ifndef VIDFACE_PIPELINE_RUN_VIDEO_HPP
#define VIDFACE_PIPELINE_RUN_VIDEO_HPP

#include "vidface/core/Image.hpp"
#include "vidface/core/exceptions.hpp"
#include "vidface/core/image_io.hpp"
#include "vidface/fitting/fitting.hpp"
#include "vidface/fitting/landmarks.hpp"
#include "vidface/model/PcaShapeModel.hpp"
#include "vidface/model/io.hpp"
#include "vidface/pipeline/config.hpp"
#include "vidface/pipeline/records.hpp"
#include "vidface/texture/fusion.hpp"
#include "vidface/texture/isomap_layout.hpp"
#include "vidface/texture/remap.hpp"
#include "vidface/tracker/cascade.hpp"
#include "vidface/tracker/io.hpp"

#include "Eigen/Core"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vidface {
namespace pipeline {

/**
 * Ordered frames of a video. Implementations for other inputs, such as a live camera, plug in here.
 */
class FrameSource
{
public:
    virtual ~FrameSource() = default;
    virtual std::size_t size() const = 0;
    virtual core::Image3f frame(std::size_t index) const = 0;
};

class InMemoryFrameSource : public FrameSource
{
public:
    explicit InMemoryFrameSource(std::vector<core::Image3f> frames) : frames_(std::move(frames)){};
    std::size_t size() const override { return frames_.size(); };
    core::Image3f frame(std::size_t index) const override { return frames_.at(index); };

private:
    std::vector<core::Image3f> frames_;
};

/**
 * PNG files read one at a time, in the given order.
 */
class ImageSequenceSource : public FrameSource
{
public:
    explicit ImageSequenceSource(std::vector<std::string> paths) : paths_(std::move(paths))
    {
        for (const auto& p : paths_)
        {
            if (!std::filesystem::exists(p))
            {
                throw core::FileNotFound(p);
            }
        }
    };

    // All *.png files of a directory, sorted by name.
    static ImageSequenceSource from_directory(const std::string& directory)
    {
        if (!std::filesystem::is_directory(directory))
        {
            throw core::FileNotFound(directory);
        }
        std::vector<std::string> paths;
        for (const auto& entry : std::filesystem::directory_iterator(directory))
        {
            if (entry.is_regular_file() && entry.path().extension() == ".png")
            {
                paths.push_back(entry.path().string());
            }
        }
        std::sort(paths.begin(), paths.end());
        return ImageSequenceSource(std::move(paths));
    };

    std::size_t size() const override { return paths_.size(); };
    core::Image3f frame(std::size_t index) const override { return core::read_png(paths_.at(index)); };

private:
    std::vector<std::string> paths_;
};

/**
 * The loaded model files a run needs.
 */
struct PipelineInputs
{
    model::PcaShapeModel shape;
    model::BlendshapeSet blendshapes;
    tracker::RegressorCascade cascade;
    fitting::LandmarkVertexMapping mapping;
};

inline PipelineInputs load_inputs(const PipelineConfig& config)
{
    config.validate();
    auto model_file = model::load_model(config.model_path);
    PipelineInputs inputs{std::move(model_file.shape), std::move(model_file.blendshapes),
                          tracker::load_cascade(config.cascade_path), fitting::read_mapping(config.mapping_path)};
    inputs.mapping.validate(inputs.shape.num_vertices());
    return inputs;
};

struct VideoResult
{
    std::vector<FrameRecord> records;
    texture::FusedTexture fused;
    core::Image1f total_weight;
    model::ShapeCoefficients mean_alpha;    ///< over fitted frames
    model::ExpressionCoefficients mean_psi; ///< over fitted frames
    model::MeshInstance mesh;               ///< model instance at (mean_alpha, mean_psi)
    int fused_frames = 0;
};

/**
 * Landmark set in ibug order with ids "1", "2", ... from an interleaved vector.
 */
inline fitting::LandmarkSet landmarks_from_vector(const Eigen::VectorXd& v)
{
    fitting::LandmarkSet set;
    for (Eigen::Index i = 0; i < v.size() / 2; ++i)
    {
        set.entries.push_back({std::to_string(i + 1), v.segment<2>(2 * i), std::nullopt});
    }
    return set;
};

// Why a tracked landmark vector cannot be used, or empty when it can.
inline std::string degenerate_reason(const Eigen::VectorXd& landmarks, int width, int height)
{
    constexpr double min_side = 2.0;
    if (!landmarks.allFinite())
    {
        return "non-finite landmarks";
    }
    const tracker::FaceBox box = tracker::bounding_box(landmarks);
    if (box.width < min_side || box.height < min_side)
    {
        return "degenerate landmark bounding box";
    }
    if (box.x + box.width < 0.0 || box.y + box.height < 0.0 || box.x > width - 1 || box.y > height - 1)
    {
        return "landmark bounding box outside the frame";
    }
    return {};
};

namespace detail {
inline double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
};

inline std::string numbered(const std::string& stem, int index, const std::string& extension)
{
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "_%05d", index);
    return stem + buffer + extension;
};

inline void write_isomap(const std::filesystem::path& path, const texture::FusedTexture& fused)
{
    core::write_png(path.string(), fused.colour, fused.observed);
};
} /* namespace detail */

/**
 * @brief Reconstructs a textured face from a video.
 *
 * For every frame: tracks the landmarks (the first frame and any frame after a skip with no earlier
 * success start from config.face_box, the others from the previous tracked landmarks), fits the model,
 * remaps the frame into the isomap and adds it to the fusion buffer. A frame whose tracked landmarks
 * are degenerate, or whose fit throws, is recorded as skipped and not fused.
 *
 * If config.output_dir is set, the run writes there:
 * - frames.jsonl, one FrameRecord per line without timings, written as frames finish
 * - timings.jsonl, the per-stage timings of each frame
 * - snapshots/isomap_NNNNN.png after every snapshot_interval frames, if the interval is positive
 * - isomap.png (RGBA, alpha marks observed texels) and isomap_weight.png (16-bit mean weight)
 * - mesh.obj, the model at the mean identity and mean expression of the fitted frames
 */
inline VideoResult run_video(const PipelineConfig& config, const PipelineInputs& inputs, const FrameSource& source)
{
    config.validate(false);
    if (source.size() == 0)
    {
        throw core::ValidationError("frames", "the video has no frames");
    }
    if (inputs.cascade.num_landmarks() < 1)
    {
        throw core::ValidationError("cascade", "has no landmarks");
    }
    const int resolution = config.fused_resolution();
    const texture::IsomapLayout layout = texture::build_isomap_layout(inputs.shape, resolution);
    texture::TextureFusionBuffer buffer(config.fusion, resolution);
    fitting::FitOptions options;
    options.lambda = config.lambda;
    options.max_alternations = config.max_alternations;
    options.outer_iterations = config.fit_iterations;

    std::ofstream frames_out;
    std::ofstream timings_out;
    std::filesystem::path out_dir;
    if (!config.output_dir.empty())
    {
        out_dir = config.output_dir;
        std::filesystem::create_directories(out_dir);
        if (config.snapshot_interval > 0)
        {
            std::filesystem::create_directories(out_dir / "snapshots");
        }
        frames_out.open(out_dir / "frames.jsonl");
        timings_out.open(out_dir / "timings.jsonl");
        if (!frames_out || !timings_out)
        {
            throw std::runtime_error("cannot write to output directory '" + out_dir.string() + "'");
        }
    }

    VideoResult result;
    result.mean_alpha = Eigen::VectorXd::Zero(inputs.shape.num_components());
    result.mean_psi = Eigen::VectorXd::Zero(inputs.blendshapes.num_blendshapes());
    std::optional<Eigen::VectorXd> previous;
    for (std::size_t f = 0; f < source.size(); ++f)
    {
        const auto start = std::chrono::steady_clock::now();
        FrameRecord record;
        record.frame = static_cast<int>(f);
        const core::Image3f frame = source.frame(f);

        auto stage = std::chrono::steady_clock::now();
        const Eigen::VectorXd tracked =
            tracker::track_video_step(inputs.cascade, core::to_grayscale(frame), previous, config.face_box);
        record.timings_ms["track"] = detail::elapsed_ms(stage);
        record.landmarks = landmarks_from_vector(tracked);
        record.skip_reason = degenerate_reason(tracked, frame.width(), frame.height());

        if (record.skip_reason.empty())
        {
            stage = std::chrono::steady_clock::now();
            try
            {
                record.fit = fitting::fit_frame(inputs.shape, inputs.blendshapes, record.landmarks, inputs.mapping,
                                                options);
                if (!record.fit->alpha.allFinite() || !record.fit->psi.allFinite())
                {
                    record.fit.reset();
                    record.skip_reason = "fit produced non-finite coefficients";
                }
            } catch (const std::exception& e)
            {
                record.skip_reason = std::string("fit failed: ") + e.what();
            }
            record.timings_ms["fit"] = detail::elapsed_ms(stage);
        }
        record.skipped = !record.skip_reason.empty();

        if (!record.skipped)
        {
            previous = tracked;
            const auto& fit = *record.fit;
            const auto mesh =
                model::generate_shape_with_expression(inputs.shape, inputs.blendshapes, fit.alpha, fit.psi);
            stage = std::chrono::steady_clock::now();
            const auto frame_texture =
                texture::remap_frame(frame, mesh, inputs.shape.triangles, fit.camera, layout, record.frame);
            record.timings_ms["remap"] = detail::elapsed_ms(stage);
            stage = std::chrono::steady_clock::now();
            buffer.add(frame_texture);
            record.timings_ms["fuse"] = detail::elapsed_ms(stage);
            result.mean_alpha += fit.alpha;
            result.mean_psi += fit.psi;
            ++result.fused_frames;
        } else
        {
            std::clog << "frame " << f << " skipped: " << record.skip_reason << '\n';
        }

        if (!out_dir.empty() && config.snapshot_interval > 0 && (f + 1) % config.snapshot_interval == 0)
        {
            detail::write_isomap(out_dir / "snapshots" / detail::numbered("isomap", record.frame, ".png"),
                                 buffer.fused());
        }
        record.timings_ms["total"] = detail::elapsed_ms(start);
        if (frames_out.is_open())
        {
            frames_out << to_json(record, false).dump() << '\n' << std::flush;
            timings_out << nlohmann::json{{"frame", record.frame}, {"timings_ms", record.timings_ms}}.dump() << '\n'
                        << std::flush;
        }
        result.records.push_back(std::move(record));
    }

    if (result.fused_frames > 0)
    {
        result.mean_alpha /= result.fused_frames;
        result.mean_psi /= result.fused_frames;
    }
    result.mesh =
        model::generate_shape_with_expression(inputs.shape, inputs.blendshapes, result.mean_alpha, result.mean_psi);
    result.fused = buffer.fused();
    result.total_weight = buffer.total_weight();
    if (!out_dir.empty())
    {
        detail::write_isomap(out_dir / "isomap.png", result.fused);
        core::Image1f mean_weight = result.total_weight;
        for (auto& w : mean_weight.data())
        {
            w = result.fused_frames > 0 ? w / static_cast<float>(result.fused_frames) : 0.0f;
        }
        core::write_png_gray16((out_dir / "isomap_weight.png").string(), mean_weight);
        model::write_obj((out_dir / "mesh.obj").string(), inputs.shape, result.mesh);
    }
    return result;
};

} /* namespace pipeline */
} /* namespace vidface */

#endif /* VIDFACE_PIPELINE_RUN_VIDEO_HPP */
