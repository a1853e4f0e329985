/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/model/PcaShapeModel.hpp
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

#ifndef VIDFACE_MODEL_PCASHAPEMODEL_HPP
#define VIDFACE_MODEL_PCASHAPEMODEL_HPP

#include "vidface/core/exceptions.hpp"

#include "Eigen/Core"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace vidface {
namespace model {

using Triangle = std::array<int, 3>;

/**
 * @brief A PCA shape model (mean, orthonormal basis, standard deviations) together with the mesh topology
 * and texture coordinates of the reference mesh.
 *
 * Shapes are stored interleaved, i.e. as [x_0, y_0, z_0, x_1, ...], so the vector has 3N entries for N
 * vertices. A shape is generated as mean + basis * diag(stddevs) * alpha. The stddevs are the square roots
 * of the PCA eigenvalues; nothing else is stored.
 */
struct PcaShapeModel
{
    Eigen::VectorXd mean;            ///< 3N
    Eigen::MatrixXd basis;           ///< 3N x M, orthonormal columns
    Eigen::VectorXd stddevs;         ///< M, all > 0
    std::vector<Triangle> triangles; ///< Counter-clockwise seen from outside the face
    std::vector<Eigen::Vector2d> uv; ///< N, in [0, 1]^2; v points down in the texture map

    int num_vertices() const noexcept { return static_cast<int>(mean.size() / 3); };
    int num_components() const noexcept { return static_cast<int>(basis.cols()); };
};

/**
 * Expression blendshapes: each column is a 3N displacement added on top of the identity shape. They are
 * not scaled by any standard deviation.
 */
struct BlendshapeSet
{
    Eigen::MatrixXd displacements; ///< 3N x L

    int num_blendshapes() const noexcept { return static_cast<int>(displacements.cols()); };
};

using ShapeCoefficients = Eigen::VectorXd;
using ExpressionCoefficients = Eigen::VectorXd;

struct MeshInstance
{
    Eigen::VectorXd vertices; ///< 3N, interleaved like PcaShapeModel::mean

    int num_vertices() const noexcept { return static_cast<int>(vertices.size() / 3); };
    Eigen::Vector3d vertex(int index) const { return vertices.segment<3>(3 * index); };
};

/**
 * Checks every invariant of the model and, if given, of the blendshapes. Throws core::ValidationError
 * naming the first offending field.
 */
inline void validate(const PcaShapeModel& model, const BlendshapeSet* blendshapes = nullptr)
{
    using core::ValidationError;
    if (model.mean.size() % 3 != 0 || model.mean.size() == 0)
    {
        throw ValidationError("mean", "length must be a positive multiple of 3");
    }
    const Eigen::Index rows = model.mean.size();
    const int num_vertices = model.num_vertices();
    if (model.basis.rows() != rows)
    {
        throw ValidationError("basis", "row count " + std::to_string(model.basis.rows()) + " != 3N = " +
                                           std::to_string(rows));
    }
    if (model.stddevs.size() != model.basis.cols())
    {
        throw ValidationError("stddevs", "length must equal the number of basis columns");
    }
    if (!model.mean.allFinite() || !model.basis.allFinite())
    {
        throw ValidationError("mean", "non-finite entries in mean or basis");
    }
    for (Eigen::Index i = 0; i < model.stddevs.size(); ++i)
    {
        if (!(model.stddevs(i) > 0.0) || !std::isfinite(model.stddevs(i)))
        {
            throw ValidationError("stddevs", "entry " + std::to_string(i) + " is not positive");
        }
    }
    const Eigen::MatrixXd gram = model.basis.transpose() * model.basis;
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    if (gram.size() > 0 && (gram - identity).cwiseAbs().maxCoeff() > 1e-8)
    {
        throw ValidationError("basis", "columns are not orthonormal");
    }
    for (const auto& tri : model.triangles)
    {
        for (int idx : tri)
        {
            if (idx < 0 || idx >= num_vertices)
            {
                throw ValidationError("triangles", "vertex index " + std::to_string(idx) + " out of range");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
        {
            throw ValidationError("triangles", "degenerate triangle with repeated indices");
        }
    }
    if (static_cast<int>(model.uv.size()) != num_vertices)
    {
        throw ValidationError("uv", "expected one texture coordinate per vertex");
    }
    for (const auto& uv : model.uv)
    {
        if (!(uv.x() >= 0.0 && uv.x() <= 1.0 && uv.y() >= 0.0 && uv.y() <= 1.0))
        {
            throw ValidationError("uv", "coordinates must lie in [0, 1]");
        }
    }
    if (blendshapes && blendshapes->displacements.cols() > 0 && blendshapes->displacements.rows() != rows)
    {
        throw ValidationError("blendshapes", "row count must equal 3N");
    }
};

/**
 * Generates a shape instance: mean + sum_i alpha_i * stddev_i * basis_i.
 */
inline MeshInstance generate_shape(const PcaShapeModel& model, const ShapeCoefficients& alpha)
{
    if (alpha.size() != model.num_components())
    {
        throw std::invalid_argument("generate_shape: expected " + std::to_string(model.num_components()) +
                                    " shape coefficients, got " + std::to_string(alpha.size()));
    }
    return {model.mean + model.basis * alpha.cwiseProduct(model.stddevs)};
};

/**
 * Generates a shape instance with expressions: the identity shape plus sum_j psi_j * B_j.
 */
inline MeshInstance generate_shape_with_expression(const PcaShapeModel& model, const BlendshapeSet& blendshapes,
                                                   const ShapeCoefficients& alpha,
                                                   const ExpressionCoefficients& psi)
{
    if (psi.size() != blendshapes.num_blendshapes())
    {
        throw std::invalid_argument("generate_shape_with_expression: expected " +
                                    std::to_string(blendshapes.num_blendshapes()) +
                                    " expression coefficients, got " + std::to_string(psi.size()));
    }
    MeshInstance mesh = generate_shape(model, alpha);
    if (psi.size() > 0)
    {
        if (blendshapes.displacements.rows() != mesh.vertices.size())
        {
            throw std::invalid_argument("generate_shape_with_expression: blendshapes do not match the model");
        }
        mesh.vertices += blendshapes.displacements * psi;
    }
    return mesh;
};

/**
 * A sub-selection of model rows in homogeneous coordinates, see landmark_basis_submatrix().
 */
struct HomogeneousSubmodel
{
    Eigen::MatrixXd basis; ///< 4K x M, basis columns scaled by their stddev, every 4th row zero
    Eigen::VectorXd mean;  ///< 4K, every 4th entry one
};

/**
 * Selects the rows of the given vertices from the model and brings them into homogeneous form.
 *
 * For each vertex, the three basis rows are copied with column j multiplied by stddevs(j), followed by a
 * row of zeros. The mean gets a 1 as fourth component. Then basis * alpha + mean equals the homogeneous
 * vertices of generate_shape(model, alpha).
 */
inline HomogeneousSubmodel landmark_basis_submatrix(const PcaShapeModel& model, const std::vector<int>& vertex_ids)
{
    const auto num_landmarks = static_cast<Eigen::Index>(vertex_ids.size());
    HomogeneousSubmodel sub{Eigen::MatrixXd::Zero(4 * num_landmarks, model.num_components()),
                            Eigen::VectorXd::Zero(4 * num_landmarks)};
    for (Eigen::Index k = 0; k < num_landmarks; ++k)
    {
        const int id = vertex_ids[k];
        if (id < 0 || id >= model.num_vertices())
        {
            throw std::invalid_argument("landmark_basis_submatrix: vertex id " + std::to_string(id) +
                                        " out of range");
        }
        sub.basis.middleRows<3>(4 * k) = model.basis.middleRows<3>(3 * id) * model.stddevs.asDiagonal();
        sub.mean.segment<3>(4 * k) = model.mean.segment<3>(3 * id);
        sub.mean(4 * k + 3) = 1.0;
    }
    return sub;
};

/**
 * Same as landmark_basis_submatrix() for the blendshapes (no scaling).
 */
inline Eigen::MatrixXd blendshape_submatrix(const BlendshapeSet& blendshapes, const std::vector<int>& vertex_ids)
{
    const auto num_landmarks = static_cast<Eigen::Index>(vertex_ids.size());
    Eigen::MatrixXd sub = Eigen::MatrixXd::Zero(4 * num_landmarks, blendshapes.num_blendshapes());
    if (blendshapes.num_blendshapes() == 0)
    {
        return sub;
    }
    const int num_vertices = static_cast<int>(blendshapes.displacements.rows() / 3);
    for (Eigen::Index k = 0; k < num_landmarks; ++k)
    {
        const int id = vertex_ids[k];
        if (id < 0 || id >= num_vertices)
        {
            throw std::invalid_argument("blendshape_submatrix: vertex id " + std::to_string(id) +
                                        " out of range");
        }
        sub.middleRows<3>(4 * k) = blendshapes.displacements.middleRows<3>(3 * id);
    }
    return sub;
};

} /* namespace model */
} /* namespace vidface */

#endif /* VIDFACE_MODEL_PCASHAPEMODEL_HPP */
