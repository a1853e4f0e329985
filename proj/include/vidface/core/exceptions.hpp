/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/core/exceptions.hpp
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

#ifndef VIDFACE_CORE_EXCEPTIONS_HPP
#define VIDFACE_CORE_EXCEPTIONS_HPP

#include <stdexcept>
#include <string>

namespace vidface {
namespace core {

/**
 * Fewer point correspondences were given than an estimator needs.
 */
class InsufficientCorrespondences : public std::invalid_argument
{
public:
    InsufficientCorrespondences(std::size_t given, std::size_t required)
        : std::invalid_argument("insufficient correspondences: got " + std::to_string(given) + ", need at least " +
                                std::to_string(required)),
          given(given), required(required){};
    std::size_t given;
    std::size_t required;
};

/**
 * The input points do not determine the estimate, e.g. all points coincide, or the design matrix of a
 * least-squares problem is rank deficient. \c rank is the numerical rank found (or -1 if not applicable).
 */
class DegenerateConfiguration : public std::runtime_error
{
public:
    explicit DegenerateConfiguration(const std::string& what, int rank = -1)
        : std::runtime_error(what), rank(rank){};
    int rank;
};

// Raised when an unregularised least-squares system is underdetermined.
class RankDeficient : public std::runtime_error
{
public:
    RankDeficient(const std::string& what, int rank, int columns)
        : std::runtime_error(what), rank(rank), columns(columns){};
    int rank;
    int columns;
};

class FileNotFound : public std::runtime_error
{
public:
    explicit FileNotFound(const std::string& path) : std::runtime_error("file not found: " + path), path(path){};
    std::string path;
};

class SchemaVersionMismatch : public std::runtime_error
{
public:
    SchemaVersionMismatch(int found, int expected)
        : std::runtime_error("unsupported schema version " + std::to_string(found) + " (expected " +
                             std::to_string(expected) + ")"),
          found(found), expected(expected){};
    int found;
    int expected;
};

// Malformed or truncated file contents.
class ParseError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/**
 * A parsed object violates one of its invariants. \c field names the offending field.
 */
class ValidationError : public std::runtime_error
{
public:
    ValidationError(const std::string& field, const std::string& message)
        : std::runtime_error(field + ": " + message), field(field){};
    std::string field;
};

class ConfigurationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class MissingInitialization : public std::invalid_argument
{
public:
    MissingInitialization()
        : std::invalid_argument("tracking needs either the previous frame's landmarks or a face box"){};
};

} /* namespace core */
} /* namespace vidface */

#endif /* VIDFACE_CORE_EXCEPTIONS_HPP */
