#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sdq/errors.hpp"
#include "sdq/linalg.hpp"
#include "sdq/service.hpp"

namespace sdq {

// Complete queue description. lambda(i,j) is the class-j arrival rate while a
// class-i job is in service; lambda0[j] applies while the server idles.
struct ModelSpec {
    int k = 0;
    Mat lambda;                                // K x K
    Vec lambda0;                               // K
    std::vector<ServiceDistribution> service;  // K

    double lambda_bar(int i) const {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += lambda(i, j);
        return s;
    }
};

struct Violation {
    std::string field;
    std::string message;
    // Structural violations poison every analysis; the single non-structural
    // one (lambda0 all zero) only rules out restart-from-empty sampling.
    bool structural = true;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    bool structural_ok() const {
        for (const auto& v : violations)
            if (v.structural) return false;
        return true;
    }
};

inline ValidationResult validate(const ModelSpec& spec) {
    ValidationResult r;
    auto add = [&](const std::string& field, const std::string& msg, bool structural = true) {
        r.violations.push_back({field, msg, structural});
    };
    if (spec.k < 1) {
        add("k", "class count must be >= 1");
        return r;
    }
    const std::size_t k = static_cast<std::size_t>(spec.k);
    if (spec.lambda.rows() != k || spec.lambda.cols() != k)
        add("lambda", "arrival-rate matrix must be K x K");
    if (spec.lambda0.size() != k) add("lambda0", "idle-rate vector must have K entries");
    if (spec.service.size() != k) add("service", "need one service distribution per class");
    if (!r.ok()) return r; // dimensions broken; element checks would be misleading

    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (!(spec.lambda(i, j) >= 0.0) || !std::isfinite(spec.lambda(i, j)))
                add("lambda", "rate (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                  ") must be finite and >= 0");
    bool any0 = false;
    for (std::size_t j = 0; j < k; ++j) {
        if (!(spec.lambda0[j] >= 0.0) || !std::isfinite(spec.lambda0[j]))
            add("lambda0", "idle rate " + std::to_string(j + 1) + " must be finite and >= 0");
        else if (spec.lambda0[j] > 0.0)
            any0 = true;
    }
    if (!any0)
        add("lambda0", "system cannot restart from empty (all idle-state rates are zero)",
            /*structural=*/false);
    for (std::size_t i = 0; i < k; ++i) {
        std::string why = spec.service[i].invalid_reason();
        if (!why.empty()) add("service[" + std::to_string(i + 1) + "]", why);
    }
    return r;
}

inline void require_structural(const ModelSpec& spec, const char* who) {
    ValidationResult r = validate(spec);
    if (!r.structural_ok())
        throw std::invalid_argument(std::string(who) + ": model spec is invalid: " +
                                    r.violations.front().message);
}

// G = diag(mu_i)
inline Mat service_rate_matrix(const ModelSpec& spec) {
    Mat g(spec.k, spec.k);
    for (int i = 0; i < spec.k; ++i) g(i, i) = spec.service[i].rate();
    return g;
}

// Mean offspring matrix M_ij = lambda_ij * m_i: expected class-j arrivals
// during one class-i service.
struct OffspringMatrix {
    Mat m;
    double rho = 0.0;
    bool irreducible = false;
};

namespace detail {

inline bool strongly_connected(const Mat& m) {
    const std::size_t n = m.rows();
    // reachability with paths of length >= 1 (so a 1x1 zero matrix is reducible)
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) reach[i][j] = m(i, j) > 0.0;
    for (std::size_t mid = 0; mid < n; ++mid)
        for (std::size_t i = 0; i < n; ++i)
            if (reach[i][mid])
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[mid][j]) reach[i][j] = true;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!reach[i][j]) return false;
    return true;
}

} // namespace detail

inline OffspringMatrix offspring_matrix(const ModelSpec& spec) {
    require_structural(spec, "offspring_matrix");
    OffspringMatrix om;
    om.m = Mat(spec.k, spec.k);
    for (int i = 0; i < spec.k; ++i) {
        double mi = spec.service[i].mean();
        for (int j = 0; j < spec.k; ++j) om.m(i, j) = spec.lambda(i, j) * mi;
    }
    om.rho = spectral_radius(om.m);
    om.irreducible = detail::strongly_connected(om.m);
    return om;
}

// H = G M G^{-1}; entrywise H_ij = lambda_ij * m_j. Same spectrum as M.
inline Mat h_matrix(const ModelSpec& spec) {
    require_structural(spec, "h_matrix");
    Mat h(spec.k, spec.k);
    for (int j = 0; j < spec.k; ++j) {
        double mj = spec.service[j].mean();
        for (int i = 0; i < spec.k; ++i) h(i, j) = spec.lambda(i, j) * mj;
    }
    return h;
}

// Coefficients of the fluid Lyapunov function: row vector e^T (I-H^T)^{-1} G^{-1}.
// The drain time from fluid level q is the dot product with q. Only defined
// for rho < 1, where I-H is a non-singular M-matrix.
inline Vec drain_coefficients(const ModelSpec& spec) {
    Mat h = h_matrix(spec);
    const std::size_t n = h.rows();
    Mat i_minus_h = Mat::identity(n) - h;
    Vec v = solve_linear(i_minus_h, Vec(n, 1.0)); // v = (I-H)^{-1} e
    Vec c(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) c[j] = v[j] * spec.service[j].mean();
    return c;
}

enum class Verdict { Stable, Boundary, Unstable };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "Stable";
        case Verdict::Boundary: return "Boundary";
        case Verdict::Unstable: return "Unstable";
    }
    return "?";
}

struct StabilityReport {
    double rho = 0.0;
    double epsilon = 0.0;
    Verdict verdict = Verdict::Stable;
    // e^T (I-H^T)^{-1} G^{-1}, present iff verdict == Stable
    std::optional<Vec> drain_coefficients;
    // Hypothesis bookkeeping so callers can state which result backs the verdict:
    // weak instability needs every row of M positive somewhere; the boundary
    // weak-stability result needs irreducibility.
    bool rows_all_positive = false;
    bool irreducible = false;
};

inline StabilityReport classify(const ModelSpec& spec, double epsilon = 1e-9) {
    require_structural(spec, "classify");
    OffspringMatrix om = offspring_matrix(spec);
    StabilityReport rep;
    rep.rho = om.rho;
    rep.epsilon = epsilon;
    rep.irreducible = om.irreducible;
    rep.rows_all_positive = true;
    for (int i = 0; i < spec.k; ++i) {
        bool any = false;
        for (int j = 0; j < spec.k; ++j) any = any || om.m(i, j) > 0.0;
        rep.rows_all_positive = rep.rows_all_positive && any;
    }
    if (om.rho < 1.0 - epsilon) {
        rep.verdict = Verdict::Stable;
        rep.drain_coefficients = sdq::drain_coefficients(spec);
    } else if (om.rho > 1.0 + epsilon) {
        rep.verdict = Verdict::Unstable;
    } else {
        rep.verdict = Verdict::Boundary;
    }
    return rep;
}

} // namespace sdq
