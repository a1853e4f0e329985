/*
 * vidface - 3D face reconstruction and texture fusion from monocular video.
 *
 * File: include/vidface/fitting/nnls.hpp
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

#ifndef VIDFACE_FITTING_NNLS_HPP
#define VIDFACE_FITTING_NNLS_HPP

#include "Eigen/Core"
#include "Eigen/QR"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vidface {
namespace fitting {

/**
 * @brief Non-negative least squares: minimises ||A x - b||^2 subject to x >= 0.
 *
 * Active-set method of Lawson & Hanson (Solving Least Squares Problems, 1974, chapter 23). Variables move
 * from the active (clamped at zero) set to the passive set one at a time, by largest negative gradient;
 * whenever the unconstrained solution on the passive set leaves the feasible region, we step back to the
 * boundary and release the variables that hit zero.
 *
 * Every returned entry is >= 0 exactly.
 */
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b)
{
    if (A.rows() != b.size())
    {
        throw std::invalid_argument("nnls: A and b have different row counts");
    }
    const Eigen::Index n = A.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (n == 0)
    {
        return x;
    }
    std::vector<bool> passive(n, false);

    // Gradient tolerance. Dual values below this count as zero.
    const double scale = std::max({1.0, A.cwiseAbs().maxCoeff() * b.cwiseAbs().maxCoeff(), A.squaredNorm()});
    const double tolerance = 1e3 * std::numeric_limits<double>::epsilon() * scale;

    const auto solve_passive = [&]() {
        std::vector<Eigen::Index> indices;
        for (Eigen::Index j = 0; j < n; ++j)
        {
            if (passive[j])
            {
                indices.push_back(j);
            }
        }
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
        if (indices.empty())
        {
            return full;
        }
        Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(indices.size()));
        for (std::size_t k = 0; k < indices.size(); ++k)
        {
            sub.col(static_cast<Eigen::Index>(k)) = A.col(indices[k]);
        }
        const Eigen::VectorXd z = sub.colPivHouseholderQr().solve(b);
        for (std::size_t k = 0; k < indices.size(); ++k)
        {
            full(indices[k]) = z(static_cast<Eigen::Index>(k));
        }
        return full;
    };

    // Variables whose entry would not move the solution (round-off in the dual). Cleared whenever x moves.
    std::vector<bool> rejected(n, false);
    const Eigen::Index max_outer = 30 * n;
    for (Eigen::Index outer = 0; outer < max_outer; ++outer)
    {
        const Eigen::VectorXd dual = A.transpose() * (b - A * x); // negative gradient of 0.5 ||Ax - b||^2
        Eigen::Index entering = -1;
        double best = tolerance;
        for (Eigen::Index j = 0; j < n; ++j)
        {
            if (!passive[j] && !rejected[j] && dual(j) > best)
            {
                best = dual(j);
                entering = j;
            }
        }
        if (entering < 0)
        {
            break;
        }
        passive[entering] = true;

        bool moved = true;
        for (Eigen::Index inner = 0; inner <= n; ++inner)
        {
            const Eigen::VectorXd z = solve_passive();
            if (inner == 0 && z(entering) <= 0.0)
            {
                passive[entering] = false;
                rejected[entering] = true;
                moved = false;
                break;
            }
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j)
            {
                feasible = feasible && (!passive[j] || z(j) > 0.0);
            }
            if (feasible)
            {
                x = z;
                break;
            }
            // Step from x towards z until the first passive variable reaches zero, and release it.
            double step = 1.0;
            Eigen::Index blocking = -1;
            for (Eigen::Index j = 0; j < n; ++j)
            {
                if (passive[j] && z(j) <= 0.0)
                {
                    const double candidate = x(j) / (x(j) - z(j));
                    if (candidate < step || blocking < 0)
                    {
                        step = std::min(step, candidate);
                        blocking = j;
                    }
                }
            }
            x += step * (z - x);
            x(blocking) = 0.0;
            for (Eigen::Index j = 0; j < n; ++j)
            {
                if (passive[j] && x(j) <= 0.0)
                {
                    x(j) = 0.0;
                    passive[j] = false;
                }
            }
        }
        if (moved)
        {
            std::fill(rejected.begin(), rejected.end(), false);
        }
    }
    return x.cwiseMax(0.0);
};

} /* namespace fitting */
} /* namespace vidface */

#endif /* VIDFACE_FITTING_NNLS_HPP */
