/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/model/io.hpp
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

#ifndef VIDFACE_MODEL_IO_HPP
#define VIDFACE_MODEL_IO_HPP

#include "vidface/core/exceptions.hpp"
#include "vidface/model/PcaShapeModel.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

namespace vidface {
namespace model {

inline constexpr int model_file_version = 1;

struct ModelFile
{
    PcaShapeModel shape;
    BlendshapeSet blendshapes;
};

namespace detail {
inline std::vector<double> to_row_major(const Eigen::MatrixXd& m)
{
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
        {
            values.push_back(m(r, c));
        }
    }
    return values;
};

inline Eigen::MatrixXd from_row_major(const std::vector<double>& values, Eigen::Index rows, Eigen::Index cols,
                                      const std::string& field)
{
    if (static_cast<Eigen::Index>(values.size()) != rows * cols)
    {
        throw core::ValidationError(field, "expected " + std::to_string(rows * cols) + " values, found " +
                                               std::to_string(values.size()));
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
    {
        for (Eigen::Index c = 0; c < cols; ++c)
        {
            m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
        }
    }
    return m;
};

inline Eigen::VectorXd to_vector(const std::vector<double>& values)
{
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
};
} /* namespace detail */

inline nlohmann::json to_json(const PcaShapeModel& shape, const BlendshapeSet& blendshapes)
{
    nlohmann::json j;
    j["version"] = model_file_version;
    j["N"] = shape.num_vertices();
    j["M"] = shape.num_components();
    j["L"] = blendshapes.num_blendshapes();
    j["mean"] = std::vector<double>(shape.mean.data(), shape.mean.data() + shape.mean.size());
    j["stddevs"] = std::vector<double>(shape.stddevs.data(), shape.stddevs.data() + shape.stddevs.size());
    j["basis"] = detail::to_row_major(shape.basis);
    j["triangles"] = shape.triangles;
    auto uv = nlohmann::json::array();
    for (const auto& t : shape.uv)
    {
        uv.push_back({t.x(), t.y()});
    }
    j["uv"] = std::move(uv);
    j["blendshapes"] = detail::to_row_major(blendshapes.displacements);
    return j;
};

/**
 * Parses and validates a model from its JSON form. Throws core::ParseError on missing or mistyped
 * fields, core::SchemaVersionMismatch, or core::ValidationError for inconsistent dimensions.
 */
inline ModelFile model_from_json(const nlohmann::json& j)
{
    ModelFile file;
    try
    {
        const int version = j.at("version").get<int>();
        if (version != model_file_version)
        {
            throw core::SchemaVersionMismatch(version, model_file_version);
        }
        const int num_vertices = j.at("N").get<int>();
        const int num_components = j.at("M").get<int>();
        const int num_blendshapes = j.at("L").get<int>();
        if (num_vertices <= 0 || num_components < 0 || num_blendshapes < 0)
        {
            throw core::ValidationError("N", "dimensions must be non-negative and N positive");
        }
        const auto mean = j.at("mean").get<std::vector<double>>();
        if (static_cast<int>(mean.size()) != 3 * num_vertices)
        {
            throw core::ValidationError("mean", "length must equal 3N");
        }
        file.shape.mean = detail::to_vector(mean);
        const auto stddevs = j.at("stddevs").get<std::vector<double>>();
        if (static_cast<int>(stddevs.size()) != num_components)
        {
            throw core::ValidationError("stddevs", "length must equal M");
        }
        file.shape.stddevs = detail::to_vector(stddevs);
        file.shape.basis =
            detail::from_row_major(j.at("basis").get<std::vector<double>>(), 3 * num_vertices, num_components, "basis");
        file.shape.triangles = j.at("triangles").get<std::vector<Triangle>>();
        for (const auto& t : j.at("uv"))
        {
            const auto pair = t.get<std::array<double, 2>>();
            file.shape.uv.emplace_back(pair[0], pair[1]);
        }
        file.blendshapes.displacements = detail::from_row_major(j.at("blendshapes").get<std::vector<double>>(),
                                                                3 * num_vertices, num_blendshapes, "blendshapes");
    } catch (const nlohmann::json::exception& e)
    {
        throw core::ParseError(std::string("malformed model file: ") + e.what());
    }
    validate(file.shape, &file.blendshapes);
    return file;
};

inline ModelFile load_model(const std::string& filename)
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
    return model_from_json(j);
};

inline void save_model(const std::string& filename, const PcaShapeModel& shape, const BlendshapeSet& blendshapes)
{
    std::ofstream out(filename);
    if (!out)
    {
        throw std::runtime_error("could not open '" + filename + "' for writing");
    }
    out << to_json(shape, blendshapes).dump();
};

/**
 * Writes a mesh as Wavefront OBJ with texture coordinates. OBJ's v axis points up, so v is flipped.
 */
inline void write_obj(const std::string& filename, const PcaShapeModel& model, const MeshInstance& mesh)
{
    std::ofstream out(filename);
    if (!out)
    {
        throw std::runtime_error("could not open '" + filename + "' for writing");
    }
    out << std::setprecision(9);
    for (int i = 0; i < mesh.num_vertices(); ++i)
    {
        const Eigen::Vector3d v = mesh.vertex(i);
        out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    }
    for (const auto& uv : model.uv)
    {
        out << "vt " << uv.x() << " " << 1.0 - uv.y() << "\n";
    }
    for (const auto& t : model.triangles)
    {
        // OBJ indices are 1-based.
        out << "f " << t[0] + 1 << "/" << t[0] + 1 << " " << t[1] + 1 << "/" << t[1] + 1 << " " << t[2] + 1 << "/"
            << t[2] + 1 << "\n";
    }
};

} /* namespace model */
} /* namespace vidface */

#endif /* VIDFACE_MODEL_IO_HPP */
