#pragma once

#include <cmath>
#include <cstddef>

namespace fbsde {

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr double kGl7Nodes[4] = {
    0.0,
    0.4058451513773971669066,
    0.7415311855993944398639,
    0.9491079123427585245262,
};
inline constexpr double kGl7Weights[4] = {
    0.4179591836734693877551,
    0.3818300505051189449504,
    0.2797053914892766679015,
    0.1294849661688696932706,
};
inline constexpr double kGl15Nodes[8] = {
    0.0,
    0.2011940939974345223006,
    0.3941513470775633698972,
    0.5709721726085388475372,
    0.7244177313601700474162,
    0.8482065834104272162006,
    0.9372733924007059043078,
    0.9879925180204854284896,
};
inline constexpr double kGl15Weights[8] = {
    0.2025782419255612728806,
    0.1984314853271115764561,
    0.1861610000155622110268,
    0.1662692058169939335532,
    0.1395706779261543144478,
    0.1071592204671719350119,
    0.0703660474881081247093,
    0.0307532419961172683546,
};

template <class F>
double gauss_pair(const F& f, double a, double b, double& coarse) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fine = kGl15Weights[0] * f(mid);
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGl15Nodes[i];
        fine += kGl15Weights[i] * (f(mid - dx) + f(mid + dx));
    }
    coarse = kGl7Weights[0] * f(mid);
    for (int i = 1; i < 4; ++i) {
        const double dx = half * kGl7Nodes[i];
        coarse += kGl7Weights[i] * (f(mid - dx) + f(mid + dx));
    }
    coarse *= half;
    return fine * half;
}

template <class F>
double integrate_segment(const F& f, double a, double b, double tol, int depth) {
    double coarse = 0.0;
    const double fine = gauss_pair(f, a, b, coarse);
    if (depth >= 30 || std::abs(fine - coarse) <= tol) return fine;
    const double mid = 0.5 * (a + b);
    return integrate_segment(f, a, mid, 0.5 * tol, depth + 1) +
           integrate_segment(f, mid, b, 0.5 * tol, depth + 1);
}

} // namespace detail

// Adaptive Gauss-Legendre quadrature (7/15 pair, interval bisection) to an
// absolute tolerance. Orientation-aware: a > b yields the negated integral.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, abs_tol);
    return detail::integrate_segment(f, a, b, abs_tol, 0);
}

} // namespace fbsde
