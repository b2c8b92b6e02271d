#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the routine it is meant to check.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "hemato/hopf.hpp"
#include "hemato/linstab.hpp"
#include "hemato/model.hpp"

namespace oracle {

using cplx = std::complex<double>;

/// Worked-example parameters near the first Hopf point, k = 2 exp(-0.527).
inline constexpr double kBeta0 = 1.77;
inline constexpr double kN = 12.0;
inline constexpr double kDelta = 0.05;
inline const double kK = 2.0 * std::exp(-0.527);
inline constexpr double kGamma = 1.48067;

inline hemato::ModelParameters worked(double r) {
    return hemato::ModelParameters::from_gamma(kBeta0, kN, kDelta, kGamma, r);
}

inline double beta(double x, double beta0, double n) { return beta0 / (1.0 + std::pow(x, n)); }

/// Central differences of order m = 1..3 (second-order accurate).
inline double central_difference(const std::function<double(double)>& f, double x, int m, double h) {
    switch (m) {
        case 1: return (f(x + h) - f(x - h)) / (2.0 * h);
        case 2: return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        case 3: return (f(x + 2 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2 * h)) / (2.0 * h * h * h);
    }
    throw std::invalid_argument("order");
}

/// One Richardson step on top of the central stencil, fourth-order accurate.
inline double derivative(const std::function<double(double)>& f, double x, int m, double h) {
    return (4.0 * central_difference(f, x, m, 0.5 * h) - central_difference(f, x, m, h)) / 3.0;
}

/// Plain bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// r at which A(r) = 1 with beta0, n, delta, gamma fixed.
inline double r_max(double beta0, double delta, double gamma) {
    auto f = [&](double r) {
        const double k = 2.0 * std::exp(-gamma * r);
        return beta0 * (k - 1.0) / delta - 1.0;
    };
    double hi = 1.0;
    while (f(hi) > 0.0) hi *= 2.0;
    return bisect(f, 0.0, hi);
}

/// Root of omega cos(omega r) + p sin(omega r) on (0, pi/r), needs 1 + p r > 0.
inline double omega0(double p, double r) {
    auto f = [&](double w) { return w * std::cos(w * r) + p * std::sin(w * r); };
    return bisect(f, 1e-14, std::numbers::pi / r);
}

/// Principal branch of the complex Lambert W, by Halley iteration.
inline cplx lambert_w0(cplx z) {
    const double e = std::numbers::e;
    cplx w;
    if (std::abs(z + 1.0 / e) < 1.0) {
        // branch-point series; on the real cut start in the upper half-plane
        cplx p = std::sqrt(2.0 * (e * z + 1.0));
        if (z.imag() == 0.0 && e * z.real() + 1.0 < 0.0) p = cplx(0.0, std::abs(p.imag()));
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else if (std::abs(z) < 1.0) {
        w = z;
    } else {
        const cplx l1 = std::log(z);
        w = l1 - std::log(l1);
    }
    for (int i = 0; i < 100; ++i) {
        const cplx ew = std::exp(w);
        const cplx f = w * ew - z;
        const cplx wp1 = w + 1.0;
        const cplx step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(w))) break;
    }
    return w;
}

/// Rightmost root of lambda + p = q exp(-lambda r): W0(q r e^{p r}) / r - p.
inline cplx rightmost_root(double p, double q, double r) {
    return lambert_w0(cplx(q * r * std::exp(p * r))) / r - p;
}

/// Composite Simpson version of the Hopf pairing.
template <class Psi, class Phi>
cplx pairing_simpson(Psi&& psi, Phi&& phi, const hemato::HopfPoint& hp, int intervals = 20000) {
    const double r = hp.r_star;
    const double h = r / intervals;
    cplx sum{};
    for (int i = 0; i <= intervals; ++i) {
        const double z = -r + i * h;
        const double wgt = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += wgt * cplx(psi(z + r)) * cplx(phi(z));
    }
    return cplx(psi(0.0)) * cplx(phi(0.0)) + hp.q_star * sum * h / 3.0;
}

/// d lambda / d r at r*, gamma fixed, by tracking the critical root.
inline cplx crossing_speed(const hemato::HopfPoint& hp, double h = 1e-5) {
    auto root_at = [&](double r) {
        const auto prm = hp.params.with_r(r);
        const auto rep = hemato::equilibria(prm);
        const hemato::CharacteristicTriple tr{prm.delta + *rep.B1_at_x2, prm.k * *rep.B1_at_x2, r};
        return hemato::char_root_newton({0.0, hp.omega_star}, tr);
    };
    return (root_at(hp.r_star + h) - root_at(hp.r_star - h)) / (2.0 * h);
}

}  // namespace oracle
