#pragma once

#include <cmath>
#include <queue>

#include "sdq/errors.hpp"

namespace sdq {

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
// Gauss weights for nodes 1,3,5,7 above.
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
inline void gk15(const F& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kKronrodNodes[i]);
        fv[14 - i] = f(c + h * kKronrodNodes[i]);
    }
    fv[7] = f(c);
    double resk = kKronrodWeights[7] * fv[7];
    double resg = kGaussWeights[3] * fv[7];
    for (int i = 0; i < 7; ++i) resk += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
    for (int i = 0; i < 3; ++i) {
        int j = 2 * i + 1;
        resg += kGaussWeights[i] * (fv[j] + fv[14 - j]);
    }
    kronrod = resk * h;
    err = std::fabs((resk - resg) * h);
}

} // namespace detail

// Globally adaptive G7/K15: repeatedly bisect the panel with the largest
// error estimate until the summed estimate meets the absolute tolerance.
// Worst-first refinement resolves endpoint kinks (fractional-power densities)
// that per-panel budget splitting cannot.
template <typename F>
inline double integrate(const F& f, double a, double b, double abs_tol, int max_panels = 20000) {
    if (!(b > a)) return 0.0;
    struct Panel {
        double a, b, val, err;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    std::priority_queue<Panel> heap;
    auto make = [&](double lo, double hi) {
        Panel p{lo, hi, 0.0, 0.0};
        detail::gk15(f, lo, hi, p.val, p.err);
        return p;
    };
    Panel first = make(a, b);
    double total_val = first.val;
    double total_err = first.err;
    heap.push(first);
    int panels = 1;
    while (total_err > abs_tol) {
        Panel worst = heap.top();
        // error floor: nothing left to gain from splitting
        if (worst.err <= 1e-16 * (1.0 + std::fabs(total_val))) break;
        if (panels >= max_panels)
            throw IllConditioned("adaptive quadrature failed to reach tolerance");
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break; // interval at rounding resolution
        Panel left = make(worst.a, mid);
        Panel right = make(mid, worst.b);
        total_val += left.val + right.val - worst.val;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        ++panels;
    }
    return total_val;
}

} // namespace sdq
