#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sdq/branching.hpp"
#include "sdq/errors.hpp"
#include "sdq/model.hpp"

namespace sdq {

// Busy-period Laplace-Stieltjes transforms (g_1(theta),...,g_K(theta)) over a
// theta grid, with per-point iteration counts and fixed-point defects.
struct LstGrid {
    Vec thetas;
    Mat g;                        // K x |grid|
    std::vector<long long> iterations;
    Vec residual;
    double tol = 0.0;

    double value(int cls, std::size_t point) const { return g(cls, point); }
};

struct LstOptions {
    double tol = 1e-12;
    long long max_iter = 1000000;
};

inline Vec geometric_grid(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        throw std::invalid_argument("geometric_grid: need 0 < lo < hi and >= 2 points");
    Vec g(points);
    double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) g[i] = lo * std::exp(step * i);
    return g;
}

// Solves g_i(theta) = psi_i(theta + lbar_i - sum_j lambda_ij g_j(theta)) by the
// monotone iteration started from g_i = psi_i(theta + lbar_i), the probability
// transform of a service with no arrivals. Iterates increase towards the
// minimal non-negative non-increasing solution; every iterate stays in (0,1]
// and keeps the psi argument >= theta, so the transforms are always evaluated
// in-domain. theta = 0 is answered as the limit g = 1, valid under rho <= 1.
inline LstGrid solve_fixed_point(const ModelSpec& spec, const Vec& thetas,
                                 const LstOptions& opts = {}) {
    require_structural(spec, "solve_fixed_point");
    OffspringMatrix om = offspring_matrix(spec);
    if (om.rho > 1.0 + 1e-9)
        throw StabilityViolation("solve_fixed_point: requires rho(M) <= 1, got rho = " +
                                 std::to_string(om.rho));
    const int k = spec.k;
    Vec lbar(k, 0.0);
    for (int i = 0; i < k; ++i) lbar[i] = spec.lambda_bar(i);

    // Transforms evaluated by quadrature carry ~1e-11 noise; chasing changes
    // below that can cycle instead of settling, so the stopping tolerance is
    // floored there for such models (the composed guarantee is still <= 1e-8).
    double eff_tol = opts.tol;
    for (int i = 0; i < k; ++i) {
        ServiceKind kind = spec.service[i].kind();
        if (kind == ServiceKind::Pareto || kind == ServiceKind::Lognormal ||
            kind == ServiceKind::Weibull)
            eff_tol = std::max(eff_tol, 3e-11);
    }

    LstGrid grid;
    grid.thetas = thetas;
    grid.tol = eff_tol;
    grid.g = Mat(k, thetas.size());
    grid.iterations.assign(thetas.size(), 0);
    grid.residual.assign(thetas.size(), 0.0);

    Vec g(k), next(k);
    for (std::size_t p = 0; p < thetas.size(); ++p) {
        const double theta = thetas[p];
        if (theta < 0.0) throw std::domain_error("solve_fixed_point: theta must be >= 0");
        if (theta == 0.0) {
            for (int i = 0; i < k; ++i) grid.g(i, p) = 1.0;
            continue;
        }
        for (int i = 0; i < k; ++i) g[i] = spec.service[i].lst(theta + lbar[i]);
        auto apply = [&](const Vec& cur, Vec& out) {
            for (int i = 0; i < k; ++i) {
                double arg = theta + lbar[i];
                for (int j = 0; j < k; ++j) arg -= spec.lambda(i, j) * cur[j];
                out[i] = spec.service[i].lst(std::max(arg, 0.0));
            }
        };
        long long it = 0;
        double change = 0.0;
        for (; it < opts.max_iter; ++it) {
            apply(g, next);
            change = 0.0;
            for (int i = 0; i < k; ++i) {
                if (next[i] < g[i] - 1e-9)
                    throw IllConditioned("solve_fixed_point: iteration lost monotonicity");
                change = std::max(change, std::fabs(next[i] - g[i]));
            }
            g = next;
            if (change < eff_tol) break;
        }
        if (it >= opts.max_iter)
            throw NonConvergence("solve_fixed_point: iteration cap at theta = " +
                                     std::to_string(theta),
                                 change);
        apply(g, next);
        double defect = 0.0;
        for (int i = 0; i < k; ++i) defect = std::max(defect, std::fabs(next[i] - g[i]));
        for (int i = 0; i < k; ++i) grid.g(i, p) = g[i];
        grid.iterations[p] = it + 1;
        grid.residual[p] = defect;
    }
    return grid;
}

// The K=2, lambda_11 = lambda_22 = 0, exponential-service network has an
// explicit radical solution; used as an independent oracle for the fixed point.
inline std::pair<double, double> closed_form_k2(double mu1, double mu2, double lam12,
                                                double lam21, double theta) {
    if (!(mu1 > 0.0) || !(mu2 > 0.0) || !(lam12 > 0.0) || !(lam21 > 0.0))
        throw std::invalid_argument("closed_form_k2: parameters must be > 0");
    if (theta < 0.0) throw std::domain_error("closed_form_k2: theta must be >= 0");
    const double bracket =
        mu1 * mu2 + lam12 * lam21 + theta * theta + theta * (mu1 + mu2 + lam12 + lam21);
    const double delta = bracket * bracket - 4.0 * mu1 * mu2 * lam12 * lam21;
    if (delta < 0.0) throw std::domain_error("closed_form_k2: negative discriminant");
    const double root = std::sqrt(delta);
    const double cross = (mu1 + theta + lam12) * (mu2 + theta + lam21);
    double g1 = (mu1 * lam21 - mu2 * lam12 + cross - root) / (2.0 * lam21 * (mu1 + theta + lam12));
    double g2 = (-mu1 * lam21 + mu2 * lam12 + cross - root) / (2.0 * lam12 * (mu2 + theta + lam21));
    return {g1, g2};
}

// g_{i,s}(theta) = exp(-s (theta + lbar_i - sum_j lambda_ij g_j(theta))):
// the transform of a busy period whose initiator has remaining service s.
inline Vec conditional_lst(const ModelSpec& spec, int cls, double s, const LstGrid& grid) {
    if (s < 0.0) throw std::domain_error("conditional_lst: s must be >= 0");
    Vec out(grid.thetas.size(), 1.0);
    const double lbar = spec.lambda_bar(cls);
    for (std::size_t p = 0; p < grid.thetas.size(); ++p) {
        double arg = grid.thetas[p] + lbar;
        for (int j = 0; j < spec.k; ++j) arg -= spec.lambda(cls, j) * grid.g(j, p);
        out[p] = std::exp(-s * arg);
    }
    return out;
}

// Busy period from initial state x = (x_1,...,x_K): the independent sum of
// x_i busy periods per class, so the transform is the product of powers.
inline Vec initial_state_lst(const ModelSpec& spec, const std::vector<long long>& counts,
                             const LstGrid& grid) {
    if (counts.size() != static_cast<std::size_t>(spec.k))
        throw std::invalid_argument("initial_state_lst: counts must have K entries");
    Vec out(grid.thetas.size(), 1.0);
    for (std::size_t p = 0; p < grid.thetas.size(); ++p) {
        double v = 1.0;
        for (int i = 0; i < spec.k; ++i) {
            if (counts[i] < 0) throw std::invalid_argument("initial_state_lst: counts must be >= 0");
            for (long long c = 0; c < counts[i]; ++c) v *= grid.g(i, p);
        }
        out[p] = v;
    }
    return out;
}

// Mean busy periods from the transform: -g_i'(0+) by one-sided differences
// D(h) = (1 - g(h))/h on a halving ladder with Richardson extrapolation.
struct MomentEstimate {
    Vec mean_busy;
    Vec error_estimate;
};

inline MomentEstimate moments_from_lst(const ModelSpec& spec, const LstOptions& base_opts = {}) {
    require_structural(spec, "moments_from_lst");
    OffspringMatrix om = offspring_matrix(spec);
    if (!(om.rho < 1.0))
        throw StabilityViolation("moments_from_lst: requires rho(M) < 1, got rho = " +
                                 std::to_string(om.rho));
    const int k = spec.k;
    LstOptions opts = base_opts;
    opts.tol = std::min(base_opts.tol, 1e-13);

    // bootstrap pass to place the ladder where theta * E[B] ~ 1e-2
    LstGrid coarse = solve_fixed_point(spec, {1e-2}, opts);
    double scale = 1.0;
    for (int i = 0; i < k; ++i)
        scale = std::max(scale, (1.0 - coarse.g(i, 0)) / 1e-2);
    const double h0 = 1e-2 / scale;

    const int ladder = 4;
    Vec hs(ladder);
    for (int l = 0; l < ladder; ++l) hs[l] = h0 / static_cast<double>(1 << l);
    LstGrid grid = solve_fixed_point(spec, hs, opts);

    MomentEstimate est;
    est.mean_busy.assign(k, 0.0);
    est.error_estimate.assign(k, 0.0);
    for (int i = 0; i < k; ++i) {
        Vec col(ladder);
        for (int l = 0; l < ladder; ++l) col[l] = (1.0 - grid.g(i, l)) / hs[l];
        // Richardson table for a first-order one-sided difference
        Vec prev = col;
        double last = col.back(), second_last = col.back();
        for (int level = 1; level < ladder; ++level) {
            Vec cur(ladder - level);
            double w = std::pow(2.0, level);
            for (std::size_t m = 0; m + level < static_cast<std::size_t>(ladder); ++m)
                cur[m] = (w * prev[m + 1] - prev[m]) / (w - 1.0);
            second_last = prev.back();
            last = cur.back();
            prev = cur;
        }
        est.mean_busy[i] = last;
        est.error_estimate[i] = std::fabs(last - second_last) + grid.tol / hs.back();
    }
    return est;
}

} // namespace sdq
