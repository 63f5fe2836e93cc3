#pragma once

#include "emvj/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace emvj {

struct NelderMeadOptions {
    int max_iters = 5000;
    double x_tol = 1e-10;        ///< stop when the simplex diameter drops below this
    double f_tol = 1e-14;        ///< ... or the spread of vertex values does
    double initial_scale = 0.1;  ///< initial edge along axis i: scale * max(|x0_i|, 1)
};

struct NelderMeadResult {
    std::vector<double> argmin;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Downhill simplex minimization (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Non-finite objective values are treated as +infinity.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                                    const std::vector<double>& x0, const NelderMeadOptions& opts = {})
{
    const std::size_t n = x0.size();
    detail::require(n >= 1, "nelder_mead: empty start point");
    auto eval = [&](const std::vector<double>& x) {
        const double f = objective(x);
        return std::isfinite(f) ? f : HUGE_VAL;
    };

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opts.initial_scale * std::max(std::abs(x0[i]), 1.0);
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) f[i] = eval(simplex[i]);
    detail::require(f[0] < HUGE_VAL, "nelder_mead: objective not finite at x0");

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        s2.reserve(n + 1);
        f2.reserve(n + 1);
        for (std::size_t i : order) {
            s2.push_back(std::move(simplex[i]));
            f2.push_back(f[i]);
        }
        simplex = std::move(s2);
        f = std::move(f2);
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(simplex[i][k] - simplex[0][k]));
        return d;
    };
    auto along = [&](const std::vector<double>& centroid, const std::vector<double>& worst, double coef) {
        std::vector<double> x(n);
        for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + coef * (worst[k] - centroid[k]);
        return x;
    };

    NelderMeadResult res;
    sort_simplex();
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        // Both tests must pass: a spread-only test stops early when distinct
        // vertices tie exactly, e.g. symmetric points around a 1-D minimum.
        if (diameter() < opts.x_tol && f[n] - f[0] < opts.f_tol) {
            res.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

        const auto xr = along(centroid, simplex[n], -1.0);
        const double fr = eval(xr);
        if (fr < f[0]) {
            const auto xe = along(centroid, simplex[n], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[n] = xe;
                f[n] = fe;
            } else {
                simplex[n] = xr;
                f[n] = fr;
            }
        } else if (fr < f[n - 1]) {
            simplex[n] = xr;
            f[n] = fr;
        } else {
            // Outside contraction if the reflection beat the worst point, inside otherwise.
            const bool outside = fr < f[n];
            const auto xc = along(centroid, simplex[n], outside ? -0.5 : 0.5);
            const double fc = eval(xc);
            if (fc < (outside ? fr : f[n])) {
                simplex[n] = xc;
                f[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t k = 0; k < n; ++k)
                        simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
                    f[i] = eval(simplex[i]);
                }
            }
        }
        sort_simplex();
    }
    res.argmin = simplex[0];
    res.value = f[0];
    res.iterations = it;
    return res;
}

} // namespace emvj
