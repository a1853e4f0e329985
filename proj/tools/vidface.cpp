/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: tools/vidface.cpp
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
#include "vidface/core/exceptions.hpp"
#include "vidface/core/image_io.hpp"
#include "vidface/fitting/fitting.hpp"
#include "vidface/fitting/landmarks.hpp"
#include "vidface/model/io.hpp"
#include "vidface/pipeline/config.hpp"
#include "vidface/pipeline/evaluation.hpp"
#include "vidface/pipeline/records.hpp"
#include "vidface/pipeline/run_video.hpp"
#include "vidface/pipeline/sequence_io.hpp"
#include "vidface/pipeline/synthetic_face.hpp"
#include "vidface/pipeline/synthetic_sequence.hpp"
#include "vidface/texture/fusion.hpp"
#include "vidface/texture/isomap_layout.hpp"
#include "vidface/texture/remap.hpp"
#include "vidface/texture/render.hpp"
#include "vidface/tracker/cascade.hpp"
#include "vidface/tracker/io.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

using namespace vidface;
namespace fs = std::filesystem;

namespace {

struct SynthOptions
{
    std::string out;
    int frames = 20;
    int width = 640;
    int height = 480;
    double scale = 1.5;
    double yaw_from = -30.0;
    double yaw_to = 30.0;
    double pitch = 0.0;
    double expression_amplitude = 0.8;
    double identity_stddev = 0.7;
    int texture_resolution = 512;
    int isomap_resolution = 512;
    int training_images = 0;
    std::uint32_t seed = 1;
};

void write_json(const fs::path& path, const nlohmann::json& j)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw core::FileNotFound(path.string());
    }
    try
    {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e)
    {
        throw core::ParseError("could not parse '" + path.string() + "': " + e.what());
    }
}

void write_training_corpus(const fs::path& directory, const std::vector<tracker::TrainingSample>& samples)
{
    fs::create_directories(directory / "images");
    fs::create_directories(directory / "landmarks");
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const auto& gray = samples[i].image;
        core::Image3f rgb(gray.height(), gray.width());
        for (std::size_t p = 0; p < gray.data().size(); ++p)
        {
            rgb.data()[p] = {gray.data()[p], gray.data()[p], gray.data()[p]};
        }
        const auto name = pipeline::frame_name(i);
        core::write_png((directory / "images" / (name + ".png")).string(), rgb);
        fitting::write_landmarks((directory / "landmarks" / (name + ".pts")).string(),
                                 pipeline::landmarks_from_vector(samples[i].landmarks));
    }
}

int run_synth(const SynthOptions& o)
{
    const fs::path out = o.out;
    fs::create_directories(out);
    pipeline::SyntheticFaceConfig face_config;
    face_config.texture_resolution = o.texture_resolution;
    const auto face = pipeline::make_synthetic_face(face_config);

    std::mt19937 rng(o.seed);
    std::normal_distribution<double> normal(0.0, o.identity_stddev);
    Eigen::VectorXd alpha(face.model.shape.num_components());
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
    {
        alpha(i) = normal(rng);
    }
    const auto cameras =
        pipeline::yaw_sweep(o.frames, o.yaw_from, o.yaw_to, o.scale, {0.5 * o.width, 0.5 * o.height}, o.pitch);
    const auto psis =
        pipeline::expression_schedule(o.frames, face.model.blendshapes.num_blendshapes(), o.expression_amplitude);
    const auto sequence = pipeline::generate_synthetic_sequence(face, alpha, psis, cameras, o.width, o.height);

    model::save_model((out / "model.json").string(), face.model.shape, face.model.blendshapes);
    fitting::write_mapping((out / "mapping.txt").string(), face.mapping);
    core::write_png((out / "texture.png").string(), face.texture);
    pipeline::save_sequence(out, sequence);

    pipeline::PipelineConfig config;
    config.model_path = "model.json";
    config.cascade_path = "cascade.msgpack";
    config.mapping_path = "mapping.txt";
    config.output_dir = "output";
    config.isomap_resolution = o.isomap_resolution;
    if (!sequence.landmarks.empty())
    {
        config.face_box = tracker::bounding_box(sequence.landmarks[0].flattened());
    }
    pipeline::save_config((out / "config.json").string(), config);

    if (o.training_images > 0)
    {
        pipeline::CorpusConfig corpus;
        corpus.num_images = o.training_images;
        corpus.width = o.width;
        corpus.height = o.height;
        corpus.min_scale = 0.85 * o.scale;
        corpus.max_scale = 1.15 * o.scale;
        corpus.seed = o.seed + 1;
        write_training_corpus(out / "training", pipeline::generate_training_corpus(face, corpus));
    }
    std::cout << "wrote " << o.frames << " frames, model, mapping and config to " << out.string() << '\n';
    return 0;
}

struct TrainOptions
{
    std::string images;
    std::string landmarks;
    int synthetic = 0;
    std::string out = "cascade.msgpack";
    int stages = 5;
    int per_sample = 10;
    double translation = 0.05;
    double scale = 0.10;
    std::optional<double> lambda;
    int width = 640;
    int height = 480;
    std::uint32_t seed = 0;
};

std::vector<tracker::TrainingSample> load_training_samples(const std::string& images, const std::string& landmarks)
{
    const auto frames = pipeline::ImageSequenceSource::from_directory(images);
    const auto sets = pipeline::read_landmark_directory(landmarks);
    if (frames.size() != sets.size())
    {
        throw core::ValidationError("training data", std::to_string(frames.size()) + " images but " +
                                                         std::to_string(sets.size()) + " landmark files");
    }
    std::vector<tracker::TrainingSample> samples;
    for (std::size_t i = 0; i < frames.size(); ++i)
    {
        samples.push_back({core::to_grayscale(frames.frame(i)), sets[i].flattened()});
        if (samples.back().landmarks.size() != samples.front().landmarks.size())
        {
            throw core::ValidationError("training data", "landmark files differ in landmark count");
        }
    }
    return samples;
}

int run_train(const TrainOptions& o)
{
    std::vector<tracker::TrainingSample> samples;
    if (o.synthetic > 0)
    {
        pipeline::CorpusConfig corpus;
        corpus.num_images = o.synthetic;
        corpus.width = o.width;
        corpus.height = o.height;
        corpus.seed = o.seed + 7;
        samples = pipeline::generate_training_corpus(pipeline::make_synthetic_face(), corpus);
    } else
    {
        if (o.images.empty() || o.landmarks.empty())
        {
            throw core::ConfigurationError("train-tracker needs --images and --landmarks, or --synthetic N");
        }
        samples = load_training_samples(o.images, o.landmarks);
    }
    tracker::TrainingOptions options;
    options.num_stages = o.stages;
    options.perturbation.per_sample = o.per_sample;
    options.perturbation.translation = o.translation;
    options.perturbation.scale = o.scale;
    options.perturbation.seed = o.seed;
    options.ridge_lambda = o.lambda;
    tracker::TrainingReport report;
    const auto cascade = tracker::train(samples, options, &report);
    tracker::save_cascade(o.out, cascade);
    std::cout << "trained " << cascade.stages.size() << " stages on " << samples.size() << " images\n";
    for (std::size_t s = 0; s < report.stage_errors.size(); ++s)
    {
        std::cout << "  mean landmark error after stage " << s << ": " << report.stage_errors[s] << " px\n";
    }
    return 0;
}

struct FitImageOptions
{
    std::string model;
    std::string mapping;
    std::string landmarks;
    std::string image;
    std::string out;
    int resolution = 512;
    double lambda = 1.0;
    int max_alternations = 10;
    int fit_iterations = 3;
};

int run_fit_image(const FitImageOptions& o)
{
    const auto model_file = model::load_model(o.model);
    const auto mapping = fitting::read_mapping(o.mapping);
    mapping.validate(model_file.shape.num_vertices());
    const auto landmarks = fitting::read_landmarks(o.landmarks);
    fitting::FitOptions options;
    options.lambda = o.lambda;
    options.max_alternations = o.max_alternations;
    options.outer_iterations = o.fit_iterations;
    const auto fit = fitting::fit_frame(model_file.shape, model_file.blendshapes, landmarks, mapping, options);
    const auto mesh =
        model::generate_shape_with_expression(model_file.shape, model_file.blendshapes, fit.alpha, fit.psi);

    const fs::path out = o.out;
    fs::create_directories(out);
    pipeline::FrameRecord record;
    record.landmarks = landmarks;
    record.fit = fit;
    write_json(out / "fit.json", pipeline::to_json(record, false));
    model::write_obj((out / "mesh.obj").string(), model_file.shape, mesh);
    if (!o.image.empty())
    {
        const auto frame = core::read_png(o.image);
        const auto layout = texture::build_isomap_layout(model_file.shape, o.resolution);
        const auto remapped = texture::remap_frame(frame, mesh, model_file.shape.triangles, fit.camera, layout);
        texture::TextureFusionBuffer buffer(texture::FusionMode::Average, o.resolution);
        buffer.add(remapped);
        const auto fused = buffer.fused();
        core::write_png((out / "isomap.png").string(), fused.colour, fused.observed);
    }
    std::cout << "fitted " << landmarks.size() << " landmarks in " << fit.alternations << " alternations, cost "
              << (fit.residuals.empty() ? 0.0 : fit.residuals.back()) << '\n';
    return 0;
}

struct TrackOptions
{
    std::string config;
    std::string frames;
    std::string output;
    std::optional<std::vector<double>> face_box;
    std::optional<std::string> fusion;
    std::optional<int> super_resolution;
    std::optional<int> snapshot_interval;
};

int run_track(const TrackOptions& o)
{
    auto config = pipeline::load_config(o.config);
    const fs::path base = fs::path(o.config).parent_path();
    if (!o.output.empty())
    {
        config.output_dir = o.output;
    }
    if (o.face_box)
    {
        if (o.face_box->size() != 4)
        {
            throw core::ValidationError("face_box", "expects x y width height");
        }
        const auto& b = *o.face_box;
        config.face_box = tracker::FaceBox{b[0], b[1], b[2], b[3]};
    }
    if (o.fusion)
    {
        config.fusion = texture::fusion_mode_from_string(*o.fusion);
    }
    if (o.super_resolution)
    {
        config.super_resolution = *o.super_resolution;
    }
    if (o.snapshot_interval)
    {
        config.snapshot_interval = *o.snapshot_interval;
    }
    if (config.output_dir.empty())
    {
        throw core::ConfigurationError("no output directory: set output_dir in the config or pass --output");
    }
    const std::string frames = o.frames.empty() ? (base / "frames").string() : o.frames;
    const auto inputs = pipeline::load_inputs(config);
    const auto source = pipeline::ImageSequenceSource::from_directory(frames);
    const auto result = pipeline::run_video(config, inputs, source);
    std::size_t skipped = 0;
    double total_ms = 0.0;
    for (const auto& r : result.records)
    {
        skipped += r.skipped ? 1 : 0;
        total_ms += r.timings_ms.at("total");
    }
    std::cout << "processed " << result.records.size() << " frames (" << skipped << " skipped) in " << total_ms
              << " ms; fused isomap has " << result.fused.num_observed() << " observed texels\n"
              << "results in " << config.output_dir << '\n';
    return 0;
}

struct FuseOptions
{
    std::string config;
    std::string frames;
    std::string records;
    std::string mode = "average";
    int super_resolution = 2;
    std::optional<int> resolution;
    std::string out = "isomap.png";
    std::string weight_out;
};

int run_fuse(const FuseOptions& o)
{
    auto config = pipeline::load_config(o.config);
    config.fusion = texture::fusion_mode_from_string(o.mode);
    config.super_resolution = o.super_resolution;
    if (o.resolution)
    {
        config.isomap_resolution = *o.resolution;
    }
    config.validate(false);
    const auto model_file = model::load_model(config.model_path);
    const fs::path base = fs::path(o.config).parent_path();
    const std::string frames_dir = o.frames.empty() ? (base / "frames").string() : o.frames;
    const std::string records_path =
        o.records.empty() ? (fs::path(config.output_dir) / "frames.jsonl").string() : o.records;
    const auto source = pipeline::ImageSequenceSource::from_directory(frames_dir);
    const auto records = pipeline::read_frame_records(records_path);

    const int resolution = config.fused_resolution();
    const auto layout = texture::build_isomap_layout(model_file.shape, resolution);
    texture::TextureFusionBuffer buffer(config.fusion, resolution);
    for (const auto& record : records)
    {
        if (record.skipped || !record.fit)
        {
            continue;
        }
        if (record.frame < 0 || static_cast<std::size_t>(record.frame) >= source.size())
        {
            throw core::ValidationError("records", "frame " + std::to_string(record.frame) + " has no image");
        }
        const auto mesh = model::generate_shape_with_expression(model_file.shape, model_file.blendshapes,
                                                                record.fit->alpha, record.fit->psi);
        buffer.add(texture::remap_frame(source.frame(record.frame), mesh, model_file.shape.triangles,
                                        record.fit->camera, layout, record.frame));
    }
    const auto fused = buffer.fused();
    core::write_png(o.out, fused.colour, fused.observed);
    if (!o.weight_out.empty())
    {
        core::Image1f weight = buffer.total_weight();
        for (auto& w : weight.data())
        {
            w = buffer.num_frames() > 0 ? w / static_cast<float>(buffer.num_frames()) : 0.0f;
        }
        core::write_png_gray16(o.weight_out, weight);
    }
    std::cout << texture::to_string(config.fusion) << " fusion of " << buffer.num_frames() << " frames at "
              << resolution << " x " << resolution << ": " << fused.num_observed() << " observed texels -> " << o.out
              << '\n';
    return 0;
}

struct RenderOptions
{
    std::string model;
    std::string texture;
    std::string records;
    std::optional<int> frame;
    bool neutral = false;
    std::optional<double> yaw;
    double pitch = 0.0;
    double roll = 0.0;
    double scale = 1.5;
    int width = 640;
    int height = 480;
    std::string out = "render.png";
};

int run_render(const RenderOptions& o)
{
    const auto model_file = model::load_model(o.model);
    const auto texture = core::read_png(o.texture);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(model_file.shape.num_components());
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(model_file.blendshapes.num_blendshapes());
    std::optional<camera::AffineCamera> frame_camera;
    if (!o.records.empty())
    {
        const auto records = pipeline::read_frame_records(o.records);
        int fitted = 0;
        for (const auto& r : records)
        {
            if (!r.fit || (o.frame && r.frame != *o.frame))
            {
                continue;
            }
            alpha += r.fit->alpha;
            psi += r.fit->psi;
            frame_camera = r.fit->camera;
            ++fitted;
        }
        if (fitted == 0)
        {
            throw core::ValidationError("records", o.frame ? "frame " + std::to_string(*o.frame) + " was not fitted"
                                                           : std::string("no fitted frames"));
        }
        alpha /= fitted;
        psi /= fitted;
    }
    if (o.neutral)
    {
        psi.setZero();
    }
    const camera::AffineCamera cam =
        (o.frame && frame_camera && !o.yaw)
            ? *frame_camera
            : camera::camera_from_pose(o.scale, o.yaw.value_or(0.0), o.pitch, o.roll, {0.5 * o.width, 0.5 * o.height});
    const auto view =
        texture::render_view(model_file.shape, model_file.blendshapes, alpha, psi, texture, cam, o.width, o.height);
    core::write_png(o.out, view.colour, view.mask);
    std::cout << "rendered " << o.width << " x " << o.height << " view -> " << o.out << '\n';
    return 0;
}

struct EvalOptions
{
    std::string predicted;
    std::string ground_truth;
    bool json = false;
};

int run_eval(const EvalOptions& o)
{
    std::vector<fitting::LandmarkSet> predicted;
    if (fs::is_directory(o.predicted))
    {
        predicted = pipeline::read_landmark_directory(o.predicted);
    } else
    {
        for (const auto& r : pipeline::read_frame_records(o.predicted))
        {
            predicted.push_back(r.landmarks);
        }
    }
    const auto truth = pipeline::read_landmark_directory(o.ground_truth);
    const auto report = pipeline::evaluate_landmarks(predicted, truth);
    if (o.json)
    {
        std::cout << pipeline::to_json(report).dump(2) << '\n';
    } else
    {
        std::cout << "frames: " << report.frames << "\nlandmarks: " << report.landmarks
                  << "\nmean error: " << report.mean_error << " IED (" << 100.0 * report.mean_error << " %)"
                  << "\nmedian error: " << report.median_error << " IED\nmax error: " << report.max_error << " IED\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Textured 3D face reconstruction from monocular video"};
    app.require_subcommand(1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic model, mapping, video and ground truth");
    synth_cmd->add_option("--out,-o", synth.out, "Output directory")->required();
    synth_cmd->add_option("--frames", synth.frames, "Number of frames")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--width", synth.width, "Frame width")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--height", synth.height, "Frame height")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--scale", synth.scale, "Camera scale in pixels per model unit")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--yaw-from", synth.yaw_from, "First yaw angle in degrees");
    synth_cmd->add_option("--yaw-to", synth.yaw_to, "Last yaw angle in degrees");
    synth_cmd->add_option("--pitch", synth.pitch, "Pitch angle in degrees");
    synth_cmd->add_option("--expression-amplitude", synth.expression_amplitude, "Largest expression coefficient");
    synth_cmd->add_option("--texture-resolution", synth.texture_resolution, "Resolution of the face texture")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--isomap-resolution", synth.isomap_resolution, "Isomap resolution written to the config")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--training-images", synth.training_images, "Also write a tracker training corpus");
    synth_cmd->add_option("--seed", synth.seed, "Seed of the identity and training corpus");

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train-tracker", "Train a cascaded-regression landmark tracker");
    train_cmd->add_option("--images", train.images, "Directory of training PNGs");
    train_cmd->add_option("--landmarks", train.landmarks, "Directory of matching .pts files");
    train_cmd->add_option("--synthetic", train.synthetic, "Train on N generated images instead");
    train_cmd->add_option("--out,-o", train.out, "Cascade file to write");
    train_cmd->add_option("--stages", train.stages, "Number of regressor stages")->check(CLI::PositiveNumber);
    train_cmd->add_option("--perturbations", train.per_sample, "Perturbed initialisations per image")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--translation", train.translation, "Initialisation shift as a fraction of face size");
    train_cmd->add_option("--scale-jitter", train.scale, "Initialisation scale jitter");
    train_cmd->add_option("--lambda", train.lambda, "Ridge regularisation (default: scaled to the features)");
    train_cmd->add_option("--width", train.width, "Width of generated images");
    train_cmd->add_option("--height", train.height, "Height of generated images");
    train_cmd->add_option("--seed", train.seed, "Perturbation seed");

    FitImageOptions fit;
    auto* fit_cmd = app.add_subcommand("fit-image", "Fit shape, expression and camera to one image's landmarks");
    fit_cmd->add_option("--model", fit.model, "Model file")->required();
    fit_cmd->add_option("--mapping", fit.mapping, "Landmark-to-vertex mapping")->required();
    fit_cmd->add_option("--landmarks", fit.landmarks, "Landmark file")->required();
    fit_cmd->add_option("--image", fit.image, "Image to extract an isomap from");
    fit_cmd->add_option("--out,-o", fit.out, "Output directory")->required();
    fit_cmd->add_option("--resolution", fit.resolution, "Isomap resolution")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--lambda", fit.lambda, "Shape regularisation")->check(CLI::NonNegativeNumber);
    fit_cmd->add_option("--max-alternations", fit.max_alternations, "Shape/expression rounds")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--fit-iterations", fit.fit_iterations, "Camera/contour rounds")->check(CLI::PositiveNumber);

    TrackOptions track;
    auto* track_cmd = app.add_subcommand("track-video", "Track, fit, remap and fuse a frame sequence");
    track_cmd->add_option("--config,-c", track.config, "Pipeline config")->required();
    track_cmd->add_option("--frames", track.frames, "Directory of frame PNGs (default: frames/ next to the config)");
    track_cmd->add_option("--output,-o", track.output, "Output directory (overrides the config)");
    track_cmd->add_option("--face-box", track.face_box, "Face box of the first frame: x y width height")
        ->expected(4);
    track_cmd->add_option("--fusion", track.fusion, "average or median");
    track_cmd->add_option("--super-resolution", track.super_resolution, "Isomap upscaling for median fusion");
    track_cmd->add_option("--snapshot-interval", track.snapshot_interval, "Write the running isomap every N frames");

    FuseOptions fuse;
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse the frames of a tracked video into one isomap");
    fuse_cmd->add_option("--config,-c", fuse.config, "Pipeline config")->required();
    fuse_cmd->add_option("--frames", fuse.frames, "Directory of frame PNGs (default: frames/ next to the config)");
    fuse_cmd->add_option("--records", fuse.records, "frames.jsonl (default: in the config's output directory)");
    fuse_cmd->add_option("--mode", fuse.mode, "average or median")->check(CLI::IsMember({"average", "median"}));
    fuse_cmd->add_option("--super-resolution,-s", fuse.super_resolution, "Isomap upscaling for median fusion");
    fuse_cmd->add_option("--resolution", fuse.resolution, "Isomap resolution (default: from the config)");
    fuse_cmd->add_option("--out,-o", fuse.out, "Isomap PNG to write");
    fuse_cmd->add_option("--weight-out", fuse.weight_out, "16-bit mean weight map to write");

    RenderOptions render;
    auto* render_cmd = app.add_subcommand("render", "Render the textured model in a new pose or expression");
    render_cmd->add_option("--model", render.model, "Model file")->required();
    render_cmd->add_option("--texture", render.texture, "Isomap PNG")->required();
    render_cmd->add_option("--records", render.records, "frames.jsonl whose fits give the coefficients");
    render_cmd->add_option("--frame", render.frame, "Use this frame's coefficients and camera");
    render_cmd->add_flag("--neutral", render.neutral, "Remove the expression");
    render_cmd->add_option("--yaw", render.yaw, "Yaw in degrees");
    render_cmd->add_option("--pitch", render.pitch, "Pitch in degrees");
    render_cmd->add_option("--roll", render.roll, "Roll in degrees");
    render_cmd->add_option("--scale", render.scale, "Pixels per model unit")->check(CLI::PositiveNumber);
    render_cmd->add_option("--width", render.width, "Image width")->check(CLI::PositiveNumber);
    render_cmd->add_option("--height", render.height, "Image height")->check(CLI::PositiveNumber);
    render_cmd->add_option("--out,-o", render.out, "PNG to write");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Landmark error relative to the inter-eye distance");
    eval_cmd->add_option("--predicted", eval.predicted, "frames.jsonl or a directory of .pts files")->required();
    eval_cmd->add_option("--ground-truth", eval.ground_truth, "Directory of ground-truth .pts files")->required();
    eval_cmd->add_flag("--json", eval.json, "Print a JSON report");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (synth_cmd->parsed())
        {
            return run_synth(synth);
        }
        if (train_cmd->parsed())
        {
            return run_train(train);
        }
        if (fit_cmd->parsed())
        {
            return run_fit_image(fit);
        }
        if (track_cmd->parsed())
        {
            return run_track(track);
        }
        if (fuse_cmd->parsed())
        {
            return run_fuse(fuse);
        }
        if (render_cmd->parsed())
        {
            return run_render(render);
        }
        if (eval_cmd->parsed())
        {
            return run_eval(eval);
        }
    } catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
