#pragma once

// Linear stability of the equilibria through the characteristic equation
//
//   lambda + p = q exp(-lambda r),   p = delta + B1,  q = k B1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hemato/errors.hpp"
#include "hemato/model.hpp"

namespace hemato {

using cplx = std::complex<double>;

struct CharacteristicTriple {
    double p = 0.0;
    double q = 0.0;
    double r = 0.0;

    static CharacteristicTriple from_b1(const ModelParameters& params, double B1) {
        return {params.delta + B1, params.k * B1, params.r};
    }
};

/// Triple at the positive equilibrium x2.
inline CharacteristicTriple characteristic_triple(const ModelParameters& params) {
    const auto rep = equilibria(params);
    if (!rep.B1_at_x2) throw NoPositiveEquilibrium();
    return CharacteristicTriple::from_b1(params, *rep.B1_at_x2);
}

inline cplx char_value(cplx lambda, const CharacteristicTriple& tr) {
    return lambda + tr.p - tr.q * std::exp(-lambda * tr.r);
}

/// T(y) = y cot y on (0, pi), T(0) = 1. Strictly decreasing.
inline double T_eval(double y) {
    if (!(y >= 0.0 && y < std::numbers::pi)) throw DomainError("T: argument outside [0, pi)");
    if (y == 0.0) return 1.0;
    return y * std::cos(y) / std::sin(y);
}

/// Inverse of T on [0, pi), by bisection.
inline double T_inv(double v) {
    if (!(v <= 1.0)) throw DomainError("T^-1: argument must not exceed 1");
    if (v == 1.0) return 0.0;

    double lo = 0.0;
    // T -> -inf as y -> pi; pull hi toward pi until T(hi) <= v.
    double gap = 1.0;
    double hi = std::numbers::pi - gap;
    while (T_eval(hi) > v) {
        gap *= 0.5;
        hi = std::numbers::pi - gap;
        if (gap < 1e-300) return hi;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double t = T_eval(mid);
        if (std::abs(t - v) < 1e-13) return mid;
        if (t > v)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14) break;
    }
    return 0.5 * (lo + hi);
}

/// The solution omega0 in (0, pi/r) of omega cot(omega r) = -p.
inline double omega0(const CharacteristicTriple& tr) {
    if (!(tr.r > 0.0)) throw DomainError("omega0: r must be positive");
    const double arg = -tr.p * tr.r;
    if (arg > 1.0) throw NoSolution("omega0: -p r > 1, no solution in (0, pi/r)");
    return T_inv(arg) / tr.r;
}

enum class Equilibrium { x1, x2 };

enum class CaseLabel { X1, IA, IB, IBoundaryP0, II, B1Zero };

enum class Status { stable, unstable, marginal };

inline const char* to_string(CaseLabel c) {
    switch (c) {
        case CaseLabel::X1: return "X1";
        case CaseLabel::IA: return "I.A";
        case CaseLabel::IB: return "I.B";
        case CaseLabel::IBoundaryP0: return "I.boundary_p0";
        case CaseLabel::II: return "II";
        case CaseLabel::B1Zero: return "B1_zero";
    }
    return "?";
}

inline const char* to_string(Status s) {
    switch (s) {
        case Status::stable: return "stable";
        case Status::unstable: return "unstable";
        case Status::marginal: return "marginal";
    }
    return "?";
}

struct StabilityVerdict {
    Equilibrium target = Equilibrium::x1;
    CaseLabel case_label = CaseLabel::X1;
    Status status = Status::stable;
    std::optional<double> omega0;
    /// Bounds on r from the case criterion, evaluated at the current p, q
    /// and omega0 (case I.A / I.B / p = 0).
    std::optional<std::pair<double, double>> stable_window;
    std::string notes;
};

/// Absolute tolerance on the defining quantity of every boundary locus.
inline constexpr double kMarginalTol = 1e-9;

inline StabilityVerdict classify_x1(const ModelParameters& params) {
    StabilityVerdict v;
    v.target = Equilibrium::x1;
    v.case_label = CaseLabel::X1;
    const double s = params.A() - 1.0;
    if (std::abs(s) < kMarginalTol) {
        v.status = Status::marginal;
        v.notes = "lambda = 0 is a characteristic root; x2 branches off";
    } else if (s < 0.0) {
        v.status = Status::stable;
        v.notes = "x1 is the only equilibrium";
    } else {
        v.status = Status::unstable;
        v.notes = "x2 exists; x1 has a positive real root";
    }
    return v;
}

inline StabilityVerdict classify_x2(const ModelParameters& params) {
    const auto rep = equilibria(params);
    if (!rep.B1_at_x2) throw NoPositiveEquilibrium();
    const double B1 = *rep.B1_at_x2;
    const auto tr = CharacteristicTriple::from_b1(params, B1);
    const double p = tr.p;
    const double q = tr.q;
    const double r = tr.r;

    StabilityVerdict v;
    v.target = Equilibrium::x2;

    if (std::abs(B1) < kMarginalTol) {
        v.case_label = CaseLabel::B1Zero;
        v.status = Status::stable;
        v.notes = "characteristic equation reduces to lambda = -delta";
        return v;
    }
    if (B1 > 0.0) {
        v.case_label = CaseLabel::II;
        v.status = Status::stable;
        v.notes = "B1 > 0: stable for every delay";
        return v;
    }

    if (std::abs(p) < kMarginalTol) {
        v.case_label = CaseLabel::IBoundaryP0;
        const double lhs = -q * r;
        const double half_pi = 0.5 * std::numbers::pi;
        if (r > 0.0) v.omega0 = half_pi / r;
        v.stable_window = std::pair{0.0, half_pi / -q};
        if (std::abs(lhs - half_pi) < kMarginalTol) {
            v.status = Status::marginal;
            v.notes = "-q r = pi/2: Hopf point";
        } else {
            v.status = lhs < half_pi ? Status::stable : Status::unstable;
            v.notes = "stable iff -q r < pi/2";
        }
        return v;
    }

    if (p < 0.0) {
        v.case_label = CaseLabel::IA;
        if (!(std::abs(p) < std::abs(q))) {
            v.status = Status::unstable;
            v.notes = "|p| >= |q|: a real root is nonnegative";
            return v;
        }
        const double upper = 1.0 / std::abs(p);
        if (r * std::abs(p) >= 1.0 - kMarginalTol) {
            v.status = Status::unstable;
            v.notes = "r |p| >= 1";
            return v;
        }
        if (r == 0.0) {
            v.status = q - p < 0.0 ? Status::stable : Status::unstable;
            v.notes = "r = 0: single root lambda = q - p";
            return v;
        }
        const double w0 = omega0(tr);
        v.omega0 = w0;
        const double phase = std::acos(p / q);
        v.stable_window = std::pair{phase / w0, upper};
        // omega0 r - arccos(p/q) is the boundary function g at this delay
        const double g = w0 * r - phase;
        if (std::abs(g) < kMarginalTol) {
            v.status = Status::marginal;
            v.notes = "r = arccos(p/q)/omega0: Hopf frontier";
        } else {
            v.status = g > 0.0 ? Status::stable : Status::unstable;
            v.notes = "stable iff arccos(p/q)/omega0 < r < 1/|p|";
        }
        return v;
    }

    v.case_label = CaseLabel::IB;
    if (p > std::abs(q)) {
        v.status = Status::stable;
        v.notes = "p > |q|: stable for every delay";
        return v;
    }
    if (r == 0.0) {
        v.status = Status::stable;
        v.notes = "r = 0: single root lambda = q - p < 0";
        return v;
    }
    const double w0 = omega0(tr);
    v.omega0 = w0;
    const double phase = std::acos(std::clamp(p / q, -1.0, 1.0));
    v.stable_window = std::pair{0.0, phase / w0};
    const double g = w0 * r - phase;
    if (std::abs(g) < kMarginalTol) {
        v.status = Status::marginal;
        v.notes = "r = arccos(p/q)/omega0: Hopf frontier";
    } else {
        v.status = g < 0.0 ? Status::stable : Status::unstable;
        v.notes = "stable iff r < arccos(p/q)/omega0";
    }
    return v;
}

/// g(r) = T^-1(-(delta + B1(r)) r) - arccos((delta + B1(r)) / (k(r) B1(r))),
/// with beta0, n, delta, gamma taken from params and k, B1 following r.
inline double g_of_r(double r, const ModelParameters& params) {
    if (!(r > 0.0)) throw DomainError("g(r): r must be positive");
    const auto at_r = params.with_r(r);
    const auto tr = characteristic_triple(at_r);
    const double t_arg = -tr.p * r;
    if (t_arg > 1.0) throw DomainError("g(r): T^-1 argument -(delta+B1) r exceeds 1");
    const double ratio = tr.p / tr.q;
    if (!(std::abs(ratio) <= 1.0)) throw DomainError("g(r): arccos argument |p/q| exceeds 1");
    return T_inv(t_arg) - std::acos(ratio);
}

/// Newton polish of a characteristic root, with residual-based step halving.
inline cplx char_root_newton(cplx guess, const CharacteristicTriple& tr) {
    if (!std::isfinite(guess.real()) || !std::isfinite(guess.imag()))
        throw NonConvergence("char_root_newton: non-finite guess", guess);
    cplx z = guess;
    cplx f = char_value(z, tr);
    for (int it = 0; it < 60; ++it) {
        if (std::abs(f) < 1e-12) return z;
        const cplx df = 1.0 + tr.q * tr.r * std::exp(-z * tr.r);
        if (df == 0.0) break;
        cplx step = f / df;
        cplx trial = z - step;
        cplx ftrial = char_value(trial, tr);
        for (int h = 0; h < 20 && !(std::abs(ftrial) < std::abs(f)); ++h) {
            step *= 0.5;
            trial = z - step;
            ftrial = char_value(trial, tr);
        }
        z = trial;
        f = ftrial;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
    }
    if (std::abs(f) < 1e-12) return z;
    throw NonConvergence("char_root_newton: no convergence in 60 iterations", z);
}

/// Heuristic rightmost characteristic root: Newton from a grid of guesses
/// mu + i omega, mu in [-window, window], omega in [0, 4 pi / r].
inline cplx rightmost_root_estimate(const CharacteristicTriple& tr, double window) {
    if (!(tr.r > 0.0)) throw DomainError("rightmost_root_estimate: r must be positive");
    constexpr int n_mu = 9;
    constexpr int n_omega = 41;
    const double omega_max = 4.0 * std::numbers::pi / tr.r;

    std::vector<cplx> roots;
    for (int i = 0; i < n_mu; ++i) {
        const double mu = -window + 2.0 * window * i / (n_mu - 1);
        for (int j = 0; j < n_omega; ++j) {
            const double om = omega_max * j / (n_omega - 1);
            try {
                const cplx z = char_root_newton({mu, om}, tr);
                // roots come in conjugate pairs; keep the upper half-plane copy
                const cplx zc{z.real(), std::abs(z.imag())};
                const bool seen = std::any_of(roots.begin(), roots.end(),
                                              [&](cplx w) { return std::abs(w - zc) < 1e-8; });
                if (!seen) roots.push_back(zc);
            } catch (const NonConvergence&) {
            }
        }
    }
    if (roots.empty())
        throw NonConvergence("rightmost_root_estimate: no root found", cplx{});
    return *std::max_element(roots.begin(), roots.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

}  // namespace hemato
