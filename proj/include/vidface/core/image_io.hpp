/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/core/image_io.hpp
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

#ifndef VIDFACE_CORE_IMAGE_IO_HPP
#define VIDFACE_CORE_IMAGE_IO_HPP

#include "vidface/core/Image.hpp"
#include "vidface/core/exceptions.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vidface {
namespace core {

namespace detail {
inline std::uint8_t to_u8(float v)
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
};
inline void write_png(const std::string& filename, png_uint_32 format, int width, int height, const void* buffer)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, filename.c_str(), 0, buffer, 0, nullptr))
    {
        throw std::runtime_error("could not write PNG '" + filename + "': " + image.message);
    }
};
} /* namespace detail */

/**
 * Reads a PNG file into an RGB image with channels in [0, 1]. Grey and alpha inputs are converted.
 */
inline Image3f read_png(const std::string& filename)
{
    if (!std::filesystem::exists(filename))
    {
        throw FileNotFound(filename);
    }
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, filename.c_str()))
    {
        throw ParseError("could not read PNG '" + filename + "': " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr))
    {
        png_image_free(&image);
        throw ParseError("could not decode PNG '" + filename + "': " + image.message);
    }
    Image3f result(static_cast<int>(image.height), static_cast<int>(image.width));
    for (std::size_t i = 0; i < result.data().size(); ++i)
    {
        for (int c = 0; c < 3; ++c)
        {
            result.data()[i][c] = buffer[3 * i + c] / 255.0f;
        }
    }
    return result;
};

inline void write_png(const std::string& filename, const Image3f& image)
{
    std::vector<std::uint8_t> buffer(image.data().size() * 3);
    for (std::size_t i = 0; i < image.data().size(); ++i)
    {
        for (int c = 0; c < 3; ++c)
        {
            buffer[3 * i + c] = detail::to_u8(image.data()[i][c]);
        }
    }
    detail::write_png(filename, PNG_FORMAT_RGB, image.width(), image.height(), buffer.data());
};

/**
 * Writes an RGBA PNG. The alpha channel is 255 where \p observed is true and 0 elsewhere.
 */
inline void write_png(const std::string& filename, const Image3f& image, const Image<std::uint8_t>& observed)
{
    std::vector<std::uint8_t> buffer(image.data().size() * 4);
    for (std::size_t i = 0; i < image.data().size(); ++i)
    {
        for (int c = 0; c < 3; ++c)
        {
            buffer[4 * i + c] = detail::to_u8(image.data()[i][c]);
        }
        buffer[4 * i + 3] = observed.data()[i] ? 255 : 0;
    }
    detail::write_png(filename, PNG_FORMAT_RGBA, image.width(), image.height(), buffer.data());
};

// 16-bit greyscale, for weight maps in [0, 1].
inline void write_png_gray16(const std::string& filename, const Image1f& image)
{
    std::vector<std::uint16_t> buffer(image.data().size());
    std::transform(image.data().begin(), image.data().end(), buffer.begin(), [](float v) {
        return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 65535.0f));
    });
    detail::write_png(filename, PNG_FORMAT_LINEAR_Y, image.width(), image.height(), buffer.data());
};

} /* namespace core */
} /* namespace vidface */

#endif /* VIDFACE_CORE_IMAGE_IO_HPP */
