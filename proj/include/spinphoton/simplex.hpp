#pragma once

/// Bound-constrained Nelder-Mead simplex descent.

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace spinphoton {

struct SimplexOptions {
    int max_evaluations = 10000;
    double tolerance = 1e-12;  ///< stop when f_worst - f_best < tolerance * (1 + |f_best|)
    double initial_step = 0.05; ///< fraction of each box width
    int restarts = 2;           ///< fresh simplices built around the incumbent after convergence
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    int iterations = 0;
    bool converged = false;
};

/// Minimises f over the box [lower, upper]. Trial points are clipped into the
/// box, so every evaluated point is feasible.
template <class Objective>
SimplexResult minimize_simplex(Objective&& f, std::vector<double> x0, const std::vector<double>& lower,
                               const std::vector<double>& upper, const SimplexOptions& opt = {}) {
    const std::size_t n = x0.size();
    if (lower.size() != n || upper.size() != n) throw Error("simplex bounds have the wrong dimension");
    for (std::size_t i = 0; i < n; ++i)
        if (!(lower[i] <= x0[i] && x0[i] <= upper[i])) throw Error("initial point out of bounds");

    SimplexResult res;
    auto clip = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    };
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    res.x = x0;
    res.value = eval(x0);
    if (!std::isfinite(res.value)) throw Error("non-finite objective at the initial point");
    if (n == 0) {
        res.converged = true;
        return res;
    }

    for (int round = 0; round <= opt.restarts; ++round) {
        std::vector<std::vector<double>> pts(n + 1, res.x);
        std::vector<double> vals(n + 1, res.value);
        for (std::size_t i = 0; i < n; ++i) {
            const double step = opt.initial_step * (upper[i] - lower[i]);
            pts[i + 1][i] += (pts[i + 1][i] + step <= upper[i]) ? step : -step;
            clip(pts[i + 1]);
            vals[i + 1] = eval(pts[i + 1]);
        }

        bool converged = false;
        std::vector<std::size_t> order(n + 1);
        std::vector<double> centroid(n), trial(n), trial2(n);
        while (res.evaluations < opt.max_evaluations) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
            const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
            if (vals[worst] - vals[best] < opt.tolerance * (1.0 + std::abs(vals[best]))) {
                converged = true;
                break;
            }
            ++res.iterations;

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t k = 0; k <= n; ++k)
                if (k != worst)
                    for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);

            auto along = [&](double t, std::vector<double>& out) {
                for (std::size_t i = 0; i < n; ++i) out[i] = centroid[i] + t * (pts[worst][i] - centroid[i]);
                clip(out);
            };

            along(-1.0, trial);
            const double f_r = eval(trial);
            if (f_r < vals[best]) {
                along(-2.0, trial2);
                const double f_e = eval(trial2);
                if (f_e < f_r) {
                    pts[worst] = trial2;
                    vals[worst] = f_e;
                } else {
                    pts[worst] = trial;
                    vals[worst] = f_r;
                }
                continue;
            }
            if (f_r < vals[second]) {
                pts[worst] = trial;
                vals[worst] = f_r;
                continue;
            }
            // Outside or inside contraction.
            along(f_r < vals[worst] ? -0.5 : 0.5, trial2);
            const double f_c = eval(trial2);
            if (f_c < std::min(f_r, vals[worst])) {
                pts[worst] = trial2;
                vals[worst] = f_c;
                continue;
            }
            // Shrink towards the best vertex.
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == best) continue;
                for (std::size_t i = 0; i < n; ++i) pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
                vals[k] = eval(pts[k]);
            }
        }

        const auto it = std::min_element(vals.begin(), vals.end());
        const double previous = res.value;
        if (*it < res.value) {
            res.value = *it;
            res.x = pts[static_cast<std::size_t>(it - vals.begin())];
        }
        res.converged = converged;
        if (!converged) break;
        // A restart that finds nothing new confirms the minimum.
        if (round > 0 && previous - res.value <= opt.tolerance * (1.0 + std::abs(res.value))) break;
    }
    return res;
}

} // namespace spinphoton
