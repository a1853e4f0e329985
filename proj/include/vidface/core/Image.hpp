/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/core/Image.hpp
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

#ifndef VIDFACE_CORE_IMAGE_HPP
#define VIDFACE_CORE_IMAGE_HPP

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace vidface {
namespace core {

using Rgb = std::array<float, 3>;

/**
 * @brief A row-major 2D grid of pixels.
 *
 * Pixel (row, col) has its centre at image coordinates (x, y) = (col, row), i.e. the image origin is the
 * centre of the top-left pixel and y points down.
 */
template <typename PixelType>
class Image
{
public:
    Image() = default;
    Image(int height, int width, PixelType fill = PixelType{})
        : height_(height), width_(width), data_(static_cast<std::size_t>(height) * width, fill){};

    int height() const noexcept { return height_; };
    int width() const noexcept { return width_; };
    bool empty() const noexcept { return data_.empty(); };

    PixelType& operator()(int row, int col) noexcept
    {
        assert(row >= 0 && row < height_ && col >= 0 && col < width_);
        return data_[static_cast<std::size_t>(row) * width_ + col];
    };
    const PixelType& operator()(int row, int col) const noexcept
    {
        assert(row >= 0 && row < height_ && col >= 0 && col < width_);
        return data_[static_cast<std::size_t>(row) * width_ + col];
    };

    // Edge-replicating access.
    const PixelType& clamped(int row, int col) const noexcept
    {
        return (*this)(std::clamp(row, 0, height_ - 1), std::clamp(col, 0, width_ - 1));
    };

    std::vector<PixelType>& data() noexcept { return data_; };
    const std::vector<PixelType>& data() const noexcept { return data_; };

    bool operator==(const Image& other) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<PixelType> data_;
};

using Image1f = Image<float>;
using Image3f = Image<Rgb>;

namespace detail {
inline float lerp(float a, float b, float t) { return a + (b - a) * t; };
inline Rgb lerp(const Rgb& a, const Rgb& b, float t)
{
    return {lerp(a[0], b[0], t), lerp(a[1], b[1], t), lerp(a[2], b[2], t)};
};
} /* namespace detail */

/**
 * Bilinear sample at continuous image coordinates (x, y), replicating edge pixels outside the grid.
 */
template <typename PixelType>
PixelType sample_bilinear(const Image<PixelType>& image, double x, double y)
{
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const float tx = static_cast<float>(x - fx);
    const float ty = static_cast<float>(y - fy);
    const auto top = detail::lerp(image.clamped(y0, x0), image.clamped(y0, x0 + 1), tx);
    const auto bottom = detail::lerp(image.clamped(y0 + 1, x0), image.clamped(y0 + 1, x0 + 1), tx);
    return detail::lerp(top, bottom, ty);
};

inline Image1f to_grayscale(const Image3f& image)
{
    Image1f gray(image.height(), image.width());
    for (std::size_t i = 0; i < image.data().size(); ++i)
    {
        const auto& p = image.data()[i];
        gray.data()[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
    }
    return gray;
};

} /* namespace core */
} /* namespace vidface */

#endif /* VIDFACE_CORE_IMAGE_HPP */
