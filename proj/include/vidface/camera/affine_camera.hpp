/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/camera/affine_camera.hpp
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

#ifndef VIDFACE_CAMERA_AFFINE_CAMERA_HPP
#define VIDFACE_CAMERA_AFFINE_CAMERA_HPP

#include "vidface/core/exceptions.hpp"

#include "Eigen/Core"
#include "Eigen/Geometry"
#include "Eigen/SVD"

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace vidface {
namespace camera {

/**
 * @brief An affine camera: a 3x4 matrix whose last row is (0, 0, 0, 1).
 *
 * Image coordinates follow the usual raster convention (x right, y down). With that convention the
 * rows r1, r2 of the top-left 2x3 block span the image plane and r1 x r2 points away from the camera.
 */
class AffineCamera
{
public:
    using Matrix = Eigen::Matrix<double, 3, 4>;

    AffineCamera() : matrix_(Matrix::Zero()) { matrix_(2, 3) = 1.0; };

    /**
     * Builds a camera from the top two rows. The last row is set to (0, 0, 0, 1).
     */
    explicit AffineCamera(const Eigen::Matrix<double, 2, 4>& top_rows) : AffineCamera()
    {
        matrix_.topRows<2>() = top_rows;
    };

    // Orthographic projection scale * R(0:2, :) * X + t, with R a rotation.
    static AffineCamera scaled_orthographic(double scale, const Eigen::Matrix3d& rotation,
                                            const Eigen::Vector2d& translation)
    {
        Eigen::Matrix<double, 2, 4> top;
        top.leftCols<3>() = scale * rotation.topRows<2>();
        top.col(3) = translation;
        return AffineCamera(top);
    };

    const Matrix& matrix() const noexcept { return matrix_; };

    Eigen::Vector2d project(const Eigen::Vector3d& point) const
    {
        return matrix_.topLeftCorner<2, 3>() * point + matrix_.topRightCorner<2, 1>();
    };

    /**
     * Unit vector pointing from the scene towards the camera, i.e. -(r1 x r2) normalised.
     */
    Eigen::Vector3d towards_camera() const
    {
        return -depth_axis();
    };

    /**
     * Unit vector along which depth increases (away from the camera). This is the third row of a
     * right-handed completion of the orthonormalised camera rows.
     */
    Eigen::Vector3d depth_axis() const
    {
        const Eigen::Vector3d r1 = matrix_.block<1, 3>(0, 0).transpose();
        const Eigen::Vector3d r2 = matrix_.block<1, 3>(1, 0).transpose();
        const Eigen::Vector3d e1 = r1.normalized();
        const Eigen::Vector3d e2 = (r2 - r2.dot(e1) * e1).normalized();
        return e1.cross(e2);
    };

private:
    Matrix matrix_;
};

/**
 * A scaled orthographic camera looking at a model whose front faces +z (x right, y up), rotated by the
 * given head pose in degrees. Positive yaw turns the face towards its left, i.e. towards image +x.
 */
inline AffineCamera camera_from_pose(double scale, double yaw, double pitch, double roll,
                                     const Eigen::Vector2d& translation)
{
    constexpr double deg = 3.14159265358979323846 / 180.0;
    // Model y is up and image y is down; the camera looks along model -z.
    const Eigen::Matrix3d frontal = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
    const Eigen::Matrix3d pose = (Eigen::AngleAxisd(roll * deg, Eigen::Vector3d::UnitZ()) *
                                  Eigen::AngleAxisd(pitch * deg, Eigen::Vector3d::UnitX()) *
                                  Eigen::AngleAxisd(yaw * deg, Eigen::Vector3d::UnitY()))
                                     .toRotationMatrix();
    return AffineCamera::scaled_orthographic(scale, frontal * pose, translation);
};

/**
 * Projects a homogeneous 3D point. The result is the first two entries of C * X.
 */
inline Eigen::Vector2d project(const AffineCamera& camera, const Eigen::Vector4d& point)
{
    if (!point.allFinite())
    {
        throw std::invalid_argument("project: non-finite point");
    }
    return (camera.matrix() * point).head<2>();
};

/**
 * Similarity transforms that move the centroid of a point set to the origin and scale it to an RMS
 * distance of sqrt(2) (image points) or sqrt(3) (model points).
 */
struct SimilarityNormalization
{
    Eigen::Matrix3d transform2d; ///< T
    Eigen::Matrix4d transform3d; ///< U
};

namespace detail {
template <int Dim>
Eigen::Matrix<double, Dim + 1, Dim + 1> normalizing_similarity(std::span<const Eigen::Matrix<double, Dim, 1>> points,
                                                               double target_rms)
{
    using Vec = Eigen::Matrix<double, Dim, 1>;
    if (points.empty())
    {
        throw core::InsufficientCorrespondences(0, 2);
    }
    Vec centroid = Vec::Zero();
    for (const auto& p : points)
    {
        centroid += p;
    }
    centroid /= static_cast<double>(points.size());
    double sum_sq = 0.0;
    for (const auto& p : points)
    {
        sum_sq += (p - centroid).squaredNorm();
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(points.size()));
    if (!(rms > 0.0) || !std::isfinite(rms))
    {
        throw core::DegenerateConfiguration("all points coincide; cannot normalise");
    }
    const double scale = target_rms / rms;
    Eigen::Matrix<double, Dim + 1, Dim + 1> transform = Eigen::Matrix<double, Dim + 1, Dim + 1>::Identity();
    transform.template topLeftCorner<Dim, Dim>() *= scale;
    transform.template topRightCorner<Dim, 1>() = -scale * centroid;
    return transform;
};
} /* namespace detail */

inline SimilarityNormalization normalize_points(std::span<const Eigen::Vector2d> points2d,
                                                std::span<const Eigen::Vector3d> points3d)
{
    return {detail::normalizing_similarity<2>(points2d, std::sqrt(2.0)),
            detail::normalizing_similarity<3>(points3d, std::sqrt(3.0))};
};

/**
 * The Gold Standard algorithm for estimating an affine camera from 2D-3D correspondences (Hartley &
 * Zisserman, Multiple View Geometry, Algorithm 7.2).
 *
 * Both point sets are normalised with normalize_points(), the 8 free entries of the normalised camera are
 * found by linear least squares, and the result is denormalised with C = T^-1 * C~ * U. The system is solved
 * with an SVD; singular values below 1e-10 times the largest count as zero, and a rank below 8 raises
 * core::DegenerateConfiguration carrying the rank.
 *
 * Requires >= 4 correspondences.
 */
inline AffineCamera estimate_affine_camera(std::span<const Eigen::Vector2d> image_points,
                                           std::span<const Eigen::Vector3d> model_points)
{
    if (image_points.size() != model_points.size())
    {
        throw std::invalid_argument("estimate_affine_camera: number of image and model points differ");
    }
    if (image_points.size() < 4)
    {
        throw core::InsufficientCorrespondences(image_points.size(), 4);
    }
    const SimilarityNormalization normalization = normalize_points(image_points, model_points);
    const auto num_points = static_cast<Eigen::Index>(image_points.size());

    // Each correspondence gives two rows: [X~^T 0] and [0 X~^T], with target x~.
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(2 * num_points, 8);
    Eigen::VectorXd target(2 * num_points);
    for (Eigen::Index i = 0; i < num_points; ++i)
    {
        const Eigen::Vector4d model_h = normalization.transform3d * model_points[i].homogeneous();
        const Eigen::Vector3d image_h = normalization.transform2d * image_points[i].homogeneous();
        design.block<1, 4>(2 * i, 0) = model_h.transpose();
        design.block<1, 4>(2 * i + 1, 4) = model_h.transpose();
        target.segment<2>(2 * i) = image_h.head<2>();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const int rank = static_cast<int>(svd.rank());
    if (rank < 8)
    {
        throw core::DegenerateConfiguration("estimate_affine_camera: rank-deficient design matrix (rank " +
                                                std::to_string(rank) + " < 8)",
                                            rank);
    }
    const Eigen::VectorXd entries = svd.solve(target);

    Eigen::Matrix<double, 3, 4> normalized = Eigen::Matrix<double, 3, 4>::Zero();
    normalized.row(0) = entries.head<4>().transpose();
    normalized.row(1) = entries.tail<4>().transpose();
    normalized(2, 3) = 1.0;

    Eigen::Matrix<double, 3, 4> denormalized =
        normalization.transform2d.inverse() * normalized * normalization.transform3d;
    // Exact affine last row.
    denormalized.row(2) << 0.0, 0.0, 0.0, 1.0;
    return AffineCamera(Eigen::Matrix<double, 2, 4>(denormalized.topRows<2>()));
};

} /* namespace camera */
} /* namespace vidface */

#endif /* VIDFACE_CAMERA_AFFINE_CAMERA_HPP */
