/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/tracker/cascade.hpp
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

#ifndef VIDFACE_TRACKER_CASCADE_HPP
#define VIDFACE_TRACKER_CASCADE_HPP

#include "vidface/core/Image.hpp"
#include "vidface/core/exceptions.hpp"
#include "vidface/tracker/hog.hpp"

#include "Eigen/Core"
#include "Eigen/Cholesky"
#include "Eigen/QR"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace vidface {
namespace tracker {

/**
 * Axis-aligned face box in image coordinates: top-left corner (x, y) plus width and height.
 */
struct FaceBox
{
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;

    double centre_x() const { return x + 0.5 * width; };
    double centre_y() const { return y + 0.5 * height; };
};

// Bounding box of an interleaved landmark vector.
inline FaceBox bounding_box(const Eigen::VectorXd& landmarks)
{
    const int k = static_cast<int>(landmarks.size() / 2);
    if (k == 0)
    {
        throw core::ValidationError("landmarks", "empty landmark vector");
    }
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    for (int i = 0; i < k; ++i)
    {
        min_x = std::min(min_x, landmarks(2 * i));
        max_x = std::max(max_x, landmarks(2 * i));
        min_y = std::min(min_y, landmarks(2 * i + 1));
        max_y = std::max(max_y, landmarks(2 * i + 1));
    }
    return {min_x, min_y, max_x - min_x, max_y - min_y};
};

/**
 * Places canonical landmarks (bounding box centred at the origin with unit width) into \p box: the
 * result is centred in the box and scaled to its width.
 */
inline Eigen::VectorXd align_to_box(const Eigen::VectorXd& canonical, const FaceBox& box)
{
    Eigen::VectorXd out(canonical.size());
    for (Eigen::Index i = 0; i < canonical.size() / 2; ++i)
    {
        out(2 * i) = box.centre_x() + box.width * canonical(2 * i);
        out(2 * i + 1) = box.centre_y() + box.width * canonical(2 * i + 1);
    }
    return out;
};

/**
 * Maps landmarks into the canonical frame: bounding box centred at the origin, unit width.
 */
inline Eigen::VectorXd normalise_to_unit_box(const Eigen::VectorXd& landmarks)
{
    const FaceBox box = bounding_box(landmarks);
    if (!(box.width > 0.0))
    {
        throw core::DegenerateConfiguration("landmark bounding box has zero width");
    }
    Eigen::VectorXd out(landmarks.size());
    for (Eigen::Index i = 0; i < landmarks.size() / 2; ++i)
    {
        out(2 * i) = (landmarks(2 * i) - box.centre_x()) / box.width;
        out(2 * i + 1) = (landmarks(2 * i + 1) - box.centre_y()) / box.width;
    }
    return out;
};

struct RegressorStage
{
    Eigen::MatrixXd A; ///< 2K x feature length
    Eigen::VectorXd b; ///< 2K
};

/**
 * @brief Cascade of linear regressors theta <- theta + A_n f(I, theta) + b_n.
 *
 * Landmark vectors are interleaved (x0, y0, x1, y1, ...). \c mean_landmarks is in the canonical frame
 * of normalise_to_unit_box().
 */
struct RegressorCascade
{
    std::vector<RegressorStage> stages;
    HogConfig feature_config;
    Eigen::VectorXd mean_landmarks;

    int num_landmarks() const { return static_cast<int>(mean_landmarks.size() / 2); };

    void validate() const
    {
        feature_config.validate();
        if (stages.empty())
        {
            throw core::ValidationError("stages", "a cascade needs at least one stage");
        }
        if (mean_landmarks.size() == 0 || mean_landmarks.size() % 2 != 0)
        {
            throw core::ValidationError("mean_landmarks", "must hold 2K values with K >= 1");
        }
        const auto rows = mean_landmarks.size();
        const auto cols = feature_config.feature_length(num_landmarks());
        for (const auto& stage : stages)
        {
            if (stage.A.rows() != rows || stage.A.cols() != cols || stage.b.size() != rows)
            {
                throw core::ValidationError("stages", "stage dimensions do not match 2K x feature length");
            }
        }
    };
};

/**
 * Runs every stage of the cascade starting from \p initial_landmarks.
 */
inline Eigen::VectorXd predict(const RegressorCascade& cascade, const core::Image1f& frame,
                               const Eigen::VectorXd& initial_landmarks)
{
    if (initial_landmarks.size() != cascade.mean_landmarks.size())
    {
        throw core::ValidationError("initial_landmarks", "length must be 2K");
    }
    Eigen::VectorXd theta = initial_landmarks;
    for (const auto& stage : cascade.stages)
    {
        theta += stage.A * extract_features(frame, theta, cascade.feature_config) + stage.b;
    }
    return theta;
};

/**
 * Initialisation for one video frame: the mean landmarks aligned to the bounding box of the previous
 * frame's landmarks if present, otherwise to \p face_box.
 */
inline Eigen::VectorXd initialise(const RegressorCascade& cascade, const std::optional<Eigen::VectorXd>& previous,
                                  const std::optional<FaceBox>& face_box)
{
    if (previous)
    {
        return align_to_box(cascade.mean_landmarks, bounding_box(*previous));
    }
    if (face_box)
    {
        return align_to_box(cascade.mean_landmarks, *face_box);
    }
    throw core::MissingInitialization();
};

inline Eigen::VectorXd track_video_step(const RegressorCascade& cascade, const core::Image1f& frame,
                                        const std::optional<Eigen::VectorXd>& previous,
                                        const std::optional<FaceBox>& face_box)
{
    return predict(cascade, frame, initialise(cascade, previous, face_box));
};

struct TrainingSample
{
    core::Image1f image;
    Eigen::VectorXd landmarks; ///< ground truth, interleaved
};

/**
 * Perturbed initialisations: the mean landmarks aligned to the ground-truth bounding box, then shifted
 * by up to \c translation times the face size in x and y and scaled by 1 +/- \c scale, all uniform.
 * Face size is the larger side of the ground-truth bounding box.
 */
struct PerturbationConfig
{
    double translation = 0.05;
    double scale = 0.10;
    int per_sample = 10;
    std::uint32_t seed = 0;
};

struct TrainingOptions
{
    PerturbationConfig perturbation;
    int num_stages = 5;
    std::optional<double> ridge_lambda; ///< default: 1e-3 times the mean squared feature norm of each stage
    HogConfig feature_config;
};

struct TrainingReport
{
    /// Mean point-to-point landmark error in pixels over all training pairs: entry 0 before the first
    /// stage, entry n after stage n.
    std::vector<double> stage_errors;
    std::vector<double> ridge_lambdas;
};

/**
 * Mean Euclidean landmark distance between two interleaved landmark vectors.
 */
inline double mean_point_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    const int k = static_cast<int>(a.size() / 2);
    double sum = 0.0;
    for (int i = 0; i < k; ++i)
    {
        sum += (a.segment<2>(2 * i) - b.segment<2>(2 * i)).norm();
    }
    return sum / k;
};

/**
 * @brief Ridge regression with an unpenalised bias.
 *
 * Minimises |A F + b 1^T - Y|_F^2 + lambda |A|_F^2 for features F (d x n) and targets Y (m x n). The bias
 * absorbs the means, so the problem reduces to the centred data; it is solved in whichever of the primal
 * (d x d) or dual (n x n) forms is smaller. With lambda = 0 the centred features must have full column
 * rank d, otherwise RankDeficient is thrown.
 */
inline RegressorStage fit_ridge(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double lambda)
{
    if (features.cols() != targets.cols() || features.cols() == 0)
    {
        throw core::ValidationError("training", "feature and target counts differ or are zero");
    }
    if (lambda < 0.0)
    {
        throw core::ValidationError("ridge_lambda", "must be non-negative");
    }
    const Eigen::VectorXd f_mean = features.rowwise().mean();
    const Eigen::VectorXd y_mean = targets.rowwise().mean();
    const Eigen::MatrixXd fc = features.colwise() - f_mean;
    const Eigen::MatrixXd yc = targets.colwise() - y_mean;
    const auto d = fc.rows();
    const auto n = fc.cols();

    RegressorStage stage;
    if (lambda == 0.0)
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fc.transpose());
        if (qr.rank() < d)
        {
            throw core::RankDeficient("feature matrix is rank deficient and ridge_lambda is 0",
                                      static_cast<int>(qr.rank()), static_cast<int>(d));
        }
        stage.A = qr.solve(yc.transpose()).transpose();
    }
    else if (d <= n)
    {
        Eigen::MatrixXd gram = fc * fc.transpose();
        gram.diagonal().array() += lambda;
        stage.A = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(fc * yc.transpose()).transpose();
    }
    else
    {
        Eigen::MatrixXd gram = fc.transpose() * fc;
        gram.diagonal().array() += lambda;
        stage.A = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(yc.transpose()).transpose() * fc.transpose();
    }
    stage.b = y_mean - stage.A * f_mean;
    return stage;
};

/**
 * Mean of the training shapes in the canonical frame, renormalised to a unit-width centred box.
 */
inline Eigen::VectorXd mean_shape(const std::vector<TrainingSample>& samples)
{
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(samples.front().landmarks.size());
    for (const auto& s : samples)
    {
        sum += normalise_to_unit_box(s.landmarks);
    }
    return normalise_to_unit_box(sum / static_cast<double>(samples.size()));
};

/**
 * Trains a cascade on \p samples. Training pairs are generated once, in sample order, then every stage
 * is fitted on the current estimates and applied to them before the next stage is fitted.
 */
inline RegressorCascade train(const std::vector<TrainingSample>& samples, const TrainingOptions& options,
                              TrainingReport* report = nullptr)
{
    if (samples.empty())
    {
        throw core::ValidationError("samples", "training needs at least one sample");
    }
    if (options.num_stages < 1)
    {
        throw core::ValidationError("num_stages", "must be at least 1");
    }
    if (options.perturbation.per_sample < 1)
    {
        throw core::ValidationError("perturbation.per_sample", "must be at least 1");
    }
    options.feature_config.validate();
    const auto size = samples.front().landmarks.size();
    for (const auto& s : samples)
    {
        if (s.landmarks.size() != size || size == 0 || size % 2 != 0)
        {
            throw core::ValidationError("samples", "all samples need the same non-empty 2K landmark vector");
        }
    }

    RegressorCascade cascade;
    cascade.feature_config = options.feature_config;
    cascade.mean_landmarks = mean_shape(samples);

    std::mt19937 rng(options.perturbation.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<int> owner;
    std::vector<Eigen::VectorXd> estimates;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const FaceBox box = bounding_box(samples[i].landmarks);
        const double face_size = std::max(box.width, box.height);
        for (int p = 0; p < options.perturbation.per_sample; ++p)
        {
            const double dx = options.perturbation.translation * face_size * unit(rng);
            const double dy = options.perturbation.translation * face_size * unit(rng);
            const double s = 1.0 + options.perturbation.scale * unit(rng);
            const FaceBox jittered{box.centre_x() + dx - 0.5 * s * box.width, box.centre_y() + dy - 0.5 * s * box.height,
                                   s * box.width, s * box.height};
            estimates.push_back(align_to_box(cascade.mean_landmarks, jittered));
            owner.push_back(static_cast<int>(i));
        }
    }

    const auto n = static_cast<Eigen::Index>(estimates.size());
    auto mean_error = [&] {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
        {
            sum += mean_point_error(estimates[j], samples[owner[j]].landmarks);
        }
        return sum / n;
    };

    TrainingReport local;
    local.stage_errors.push_back(mean_error());
    const int feature_length = options.feature_config.feature_length(static_cast<int>(size / 2));
    for (int stage_index = 0; stage_index < options.num_stages; ++stage_index)
    {
        Eigen::MatrixXd features(feature_length, n);
        Eigen::MatrixXd targets(size, n);
        for (Eigen::Index j = 0; j < n; ++j)
        {
            features.col(j) = extract_features(samples[owner[j]].image, estimates[j], options.feature_config);
            targets.col(j) = samples[owner[j]].landmarks - estimates[j];
        }
        const double lambda =
            options.ridge_lambda ? *options.ridge_lambda : 1e-3 * features.colwise().squaredNorm().mean();
        RegressorStage stage = fit_ridge(features, targets, lambda);
        for (Eigen::Index j = 0; j < n; ++j)
        {
            estimates[j] += stage.A * features.col(j) + stage.b;
        }
        cascade.stages.push_back(std::move(stage));
        local.ridge_lambdas.push_back(lambda);
        local.stage_errors.push_back(mean_error());
    }
    if (report)
    {
        *report = std::move(local);
    }
    return cascade;
};

} /* namespace tracker */
} /* namespace vidface */

#endif /* VIDFACE_TRACKER_CASCADE_HPP */
