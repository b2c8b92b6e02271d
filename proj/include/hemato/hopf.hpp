#pragma once

// Hopf points of the positive equilibrium and the normal form of the
// equation restricted to the center manifold.
//
// All normal-form quantities are evaluated at the bifurcation point itself
// (mu = 0), where the critical roots are +-i omega*.

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <tuple>
#include <utility>

#include "hemato/errors.hpp"
#include "hemato/linstab.hpp"
#include "hemato/model.hpp"

namespace hemato {

struct HopfPoint {
    double r_star;
    double omega_star;
    double p_star;
    double q_star;
    /// Parameters at the bifurcation: r = r*, with gamma and k consistent.
    ModelParameters params;
    double x2_star;
    double B1_star;
};

namespace detail {

inline HopfPoint make_hopf_point(const ModelParameters& params, double omega) {
    const auto rep = equilibria(params);
    if (!rep.x2) throw NoPositiveEquilibrium();
    const auto tr = CharacteristicTriple::from_b1(params, *rep.B1_at_x2);
    return HopfPoint{params.r, omega, tr.p, tr.q, params, *rep.x2, *rep.B1_at_x2};
}

}  // namespace detail

inline CharacteristicTriple triple_of(const HopfPoint& hp) {
    return {hp.p_star, hp.q_star, hp.r_star};
}

/// Hopf point from (n, beta0, delta, k): omega* = sqrt(q^2 - p^2),
/// r* = arccos(p/q)/omega*, gamma* = -ln(k/2)/r*.
inline HopfPoint hopf_from_pqk(double n, double beta0, double delta, double k) {
    if (!(std::isfinite(k) && k > 0.0 && k < 2.0)) throw InvalidParameter("k must lie in (0, 2)");
    if (!(std::isfinite(beta0) && beta0 > 0.0)) throw InvalidParameter("beta0 must be positive");
    if (!(std::isfinite(delta) && delta > 0.0)) throw InvalidParameter("delta must be positive");
    if (!(std::isfinite(n) && n > 1.0)) throw InvalidParameter("n must exceed 1");
    const double A = beta0 * (k - 1.0) / delta;
    if (!(A - 1.0 > 0.0)) throw NoPositiveEquilibrium();
    const double B1 = b1_closed_form(beta0, n, A);
    const double p = delta + B1;
    const double q = k * B1;
    if (!(std::abs(q) > std::abs(p)))
        throw NoImaginaryCrossing("|k B1| <= |delta + B1|: no pure imaginary root");
    const double omega = std::sqrt(q * q - p * p);
    const double r = std::acos(p / q) / omega;
    return detail::make_hopf_point(ModelParameters::from_k(beta0, n, delta, k, r), omega);
}

namespace detail {

inline std::optional<double> try_g(double r, const ModelParameters& params) {
    try {
        return g_of_r(r, params);
    } catch (const DomainError&) {
        return std::nullopt;
    } catch (const NoPositiveEquilibrium&) {
        return std::nullopt;
    }
}

// Moves `bad` (where g is undefined) toward `good` until g is defined and
// has the sign opposite to g(good), or the gap closes. Returns the new end.
inline std::pair<double, double> pull_into_domain(double good, double g_good, double bad,
                                                  const ModelParameters& params) {
    double ok = good;
    double g_ok = g_good;
    for (int it = 0; it < 80 && std::abs(bad - ok) > 1e-13 * std::abs(bad); ++it) {
        const double mid = 0.5 * (ok + bad);
        if (const auto gm = try_g(mid, params)) {
            ok = mid;
            g_ok = *gm;
            if (std::signbit(g_ok) != std::signbit(g_good)) break;
        } else {
            bad = mid;
        }
    }
    return {ok, g_ok};
}

}  // namespace detail

/// Root of g(r) inside the bracket, with beta0, n, delta, gamma fixed.
/// A bracket end where g is undefined (x2 absent, r |p| > 1 or |p/q| > 1)
/// is first pulled back toward the other end, to where g is defined.
inline HopfPoint find_hopf_r(const ModelParameters& params, std::pair<double, double> bracket) {
    double a = bracket.first;
    double b = bracket.second;
    if (!(a > 0.0 && b > a)) throw BracketError("find_hopf_r: bracket must satisfy 0 < lo < hi");
    auto ga_opt = detail::try_g(a, params);
    auto gb_opt = detail::try_g(b, params);
    if (!ga_opt && !gb_opt) g_of_r(a, params);  // rethrows the domain error
    if (!gb_opt) std::tie(b, gb_opt) = detail::pull_into_domain(a, *ga_opt, b, params);
    if (!ga_opt) std::tie(a, ga_opt) = detail::pull_into_domain(b, *gb_opt, a, params);
    double ga = *ga_opt;
    double gb = *gb_opt;
    if (ga == 0.0) b = a, gb = ga;
    if (gb != 0.0 && std::signbit(ga) == std::signbit(gb))
        throw BracketError("find_hopf_r: g has the same sign at both bracket ends");

    // secant step when it lands inside and the bracket keeps shrinking, else bisect
    double root = b;
    double groot = gb;
    double last_width = b - a;
    for (int it = 0; it < 200 && std::abs(groot) >= 1e-11; ++it) {
        double s = b - gb * (b - a) / (gb - ga);
        const bool inside = s > a && s < b;
        if (!inside || (b - a) > 0.5 * last_width) s = 0.5 * (a + b);
        last_width = b - a;
        const double gs = g_of_r(s, params);
        if (std::signbit(gs) == std::signbit(ga)) {
            a = s;
            ga = gs;
        } else {
            b = s;
            gb = gs;
        }
        root = s;
        groot = gs;
        if (b - a < 4.0 * std::numeric_limits<double>::epsilon() * b) break;
    }
    const auto at_root = params.with_r(root);
    return detail::make_hopf_point(at_root, omega0(characteristic_triple(at_root)));
}

struct CrossingSpeed {
    double mu_prime;
    double omega_prime;
};

/// d/dr of the critical root lambda = mu + i omega at r*, by implicit
/// differentiation of the real and imaginary parts of the characteristic
/// equation. k = 2 exp(-gamma r) and B1(k) follow r.
inline CrossingSpeed transversality(const HopfPoint& hp) {
    const auto& prm = hp.params;
    const double r = hp.r_star;
    const double w = hp.omega_star;
    const double q = hp.q_star;
    const double k = prm.k;
    const double n = prm.n;
    const double A = prm.A();

    const double dk = -prm.gamma * k;
    const double dB1_dA = prm.beta0 * ((n - 1.0) / (A * A) - 2.0 * n / (A * A * A));
    const double dB1 = dB1_dA * (prm.beta0 / prm.delta) * dk;
    const double dp = dB1;
    const double dq = dk * hp.B1_star + k * dB1;

    const double c = std::cos(w * r);
    const double s = std::sin(w * r);
    // F1 = mu + p - q e^{-mu r} cos(omega r), F2 = omega + q e^{-mu r} sin(omega r)
    const double f1_mu = 1.0 + q * r * c;
    const double f1_w = q * r * s;
    const double f1_r = dp - dq * c + q * w * s;
    const double f2_mu = -q * r * s;
    const double f2_w = 1.0 + q * r * c;
    const double f2_r = dq * s + q * w * c;

    const double det = f1_mu * f2_w - f1_w * f2_mu;
    if (std::abs(det) < 1e-12) throw DegenerateCrossing("transversality: singular 2x2 system");
    return {(-f1_r * f2_w + f1_w * f2_r) / det, (-f1_mu * f2_r + f2_mu * f1_r) / det};
}

/// Psi1(0) = (1 + (p - i omega) r) / ([1 + p r]^2 + omega^2 r^2).
inline cplx psi1_zero(const HopfPoint& hp) {
    const double p = hp.p_star;
    const double w = hp.omega_star;
    const double r = hp.r_star;
    const double den = (1.0 + p * r) * (1.0 + p * r) + w * w * r * r;
    if (!(den > 0.0)) throw NumericalFailure("psi1_zero: vanishing denominator");
    return cplx{1.0 + p * r, -w * r} / den;
}

/// <psi, phi> = psi(0) phi(0) + k B1 int_{-r}^0 psi(z + r) phi(z) dz,
/// composite 16-point Gauss-Legendre, panels doubled from 4 until two
/// successive values differ by less than 1e-11.
template <class Psi, class Phi>
cplx bilinear_pairing(Psi&& psi, Phi&& phi, const HopfPoint& hp) {
    using rule = boost::math::quadrature::gauss<double, 16>;
    const double r = hp.r_star;
    auto integrand = [&](double z) -> cplx { return cplx(psi(z + r)) * cplx(phi(z)); };
    auto composite = [&](int panels) {
        cplx sum{};
        const double h = r / panels;
        for (int i = 0; i < panels; ++i) {
            const double lo = -r + i * h;
            sum += rule::integrate(integrand, lo, lo + h);
        }
        return sum;
    };
    int panels = 4;
    cplx prev = composite(panels);
    while (panels < 4096) {
        panels *= 2;
        const cplx next = composite(panels);
        const bool done = std::abs(next - prev) < 1e-11;
        prev = next;
        if (done) break;
    }
    return cplx(psi(0.0)) * cplx(phi(0.0)) + hp.q_star * prev;
}

/// Closed-form entries e_ij = <psi_i, phi_j> at mu = 0.
struct PairingMatrix {
    cplx e11, e12, e21, e22;

    cplx det() const { return e11 * e22 - e12 * e21; }
};

inline PairingMatrix pairing_matrix(const HopfPoint& hp) {
    const double p = hp.p_star;
    const double w = hp.omega_star;
    const double r = hp.r_star;
    return {0.0, {1.0 + p * r, -w * r}, {1.0 + p * r, w * r}, 0.0};
}

struct FCoefficients {
    cplx f20, f11, f02, f21;
};

/// Taylor coefficients of the nonlinear term on the center manifold. The w
/// arguments only enter f21 and may be zero when only second order is needed.
inline FCoefficients f_coefficients(const TaylorCoefficients& tc, const HopfPoint& hp, cplx w20_0,
                                    cplx w20_mr, cplx w11_0, cplx w11_mr) {
    const double k = hp.params.k;
    const double wr = hp.omega_star * hp.r_star;
    const double B2 = tc[2];
    const double B3 = tc[3];
    const cplx e1 = std::polar(1.0, -wr);  // phi(-r)
    const cplx e2 = std::polar(1.0, -2.0 * wr);

    FCoefficients f;
    f.f20 = -B2 * (1.0 - k * e2);
    f.f11 = B2 * (k - 1.0);
    f.f02 = -B2 * (1.0 - k * std::conj(e2));
    f.f21 = B2 * (-2.0 * w11_0 - w20_0 + 2.0 * k * e1 * w11_mr + k * std::conj(e1) * w20_mr) -
            B3 * (1.0 - k * e1);
    return f;
}

/// w20 and w11 at s = 0 and s = -r.
struct WBoundaryValues {
    cplx w20_0, w20_mr, w11_0, w11_mr;
};

/// Residuals of the four defining relations (integrated ODE and boundary
/// condition, for w20 and for w11).
struct WResiduals {
    double w20_integrated, w20_boundary, w11_integrated, w11_boundary;

    double max() const {
        return std::max({w20_integrated, w20_boundary, w11_integrated, w11_boundary});
    }
};

namespace detail {

// Right-hand sides of the two relations for each of w20, w11.
struct WSystem {
    cplx a20_rhs, b20_rhs, a11_rhs, b11_rhs;
};

inline WSystem w_system(cplx g20, cplx g11, cplx g02, cplx f20, cplx f11, const HopfPoint& hp) {
    const double w = hp.omega_star;
    const double wr = w * hp.r_star;
    const cplx I{0.0, 1.0};
    const cplx e1 = std::polar(1.0, wr);
    const cplx e3 = std::polar(1.0, 3.0 * wr);
    const cplx g02c = std::conj(g02);
    const cplx g11c = std::conj(g11);
    WSystem s;
    s.a20_rhs = I * g20 / w * (1.0 - e1) + I * g02c / (3.0 * w) * (1.0 - e3);
    s.b20_rhs = f20 - g20 - g02c;
    s.a11_rhs = -I / w * g11 * (1.0 - std::conj(e1)) + I / w * g11c * (1.0 - e1);
    s.b11_rhs = f11 - g11 - g11c;
    return s;
}

}  // namespace detail

/// Solves, for w20:
///   w20(0) - e^{2 i omega r} w20(-r) = (i g20/omega)(1 - e^{i omega r}) + (i conj(g02)/(3 omega))(1 - e^{3 i omega r})
///   (2 i omega + p) w20(0) - q w20(-r) = f20 - g20 - conj(g02)
/// and for w11:
///   w11(0) - w11(-r) = -(i/omega) g11 (1 - e^{-i omega r}) + (i/omega) conj(g11) (1 - e^{i omega r})
///   p w11(0) - q w11(-r) = f11 - g11 - conj(g11)
inline WBoundaryValues w_boundary_values(cplx g20, cplx g11, cplx g02, cplx f20, cplx f11,
                                         const HopfPoint& hp) {
    const double p = hp.p_star;
    const double q = hp.q_star;
    const double w = hp.omega_star;
    const cplx e2 = std::polar(1.0, 2.0 * w * hp.r_star);
    const auto s = detail::w_system(g20, g11, g02, f20, f11, hp);
    const double scale = std::abs(p) + std::abs(q) + w;

    // [1, -e2; 2iw + p, -q] [w0; wm] = [a; b]
    const cplx m21{p, 2.0 * w};
    const cplx det20 = -q + e2 * m21;
    if (std::abs(det20) < 1e-12 * scale)
        throw ResonanceError("w20 system singular: 2 i omega* is a characteristic root");
    const double det11 = p - q;
    if (std::abs(det11) < 1e-12 * scale)
        throw ResonanceError("w11 system singular: 0 is a characteristic root");

    WBoundaryValues v;
    v.w20_0 = (-q * s.a20_rhs + e2 * s.b20_rhs) / det20;
    v.w20_mr = (s.b20_rhs - m21 * s.a20_rhs) / det20;
    v.w11_0 = (-q * s.a11_rhs + s.b11_rhs) / det11;
    v.w11_mr = (s.b11_rhs - p * s.a11_rhs) / det11;
    return v;
}

inline WResiduals w_residuals(const WBoundaryValues& v, cplx g20, cplx g11, cplx g02, cplx f20,
                              cplx f11, const HopfPoint& hp) {
    const double p = hp.p_star;
    const double q = hp.q_star;
    const double w = hp.omega_star;
    const cplx e2 = std::polar(1.0, 2.0 * w * hp.r_star);
    const auto s = detail::w_system(g20, g11, g02, f20, f11, hp);
    return {std::abs(v.w20_0 - e2 * v.w20_mr - s.a20_rhs),
            std::abs(cplx{p, 2.0 * w} * v.w20_0 - q * v.w20_mr - s.b20_rhs),
            std::abs(v.w11_0 - v.w11_mr - s.a11_rhs),
            std::abs(p * v.w11_0 - q * v.w11_mr - s.b11_rhs)};
}

struct WClosedForm {
    WBoundaryValues values;
    cplx c;
    double c1;
};

/// The same boundary values from the explicit elimination with constants
/// c and c1 = 1/(B1 + delta - k B1). Kept as an independent cross-check.
inline WClosedForm w_boundary_closed_form(cplx g20, cplx g11, cplx g02, cplx f20, cplx f11,
                                          const HopfPoint& hp) {
    const double p = hp.p_star;  // B1 + delta
    const double q = hp.q_star;  // k B1
    const double w = hp.omega_star;
    const double r = hp.r_star;
    const cplx I{0.0, 1.0};
    const double c2 = std::cos(2.0 * w * r);
    const double s2 = std::sin(2.0 * w * r);
    const cplx e1 = std::exp(I * (w * r));
    const cplx e2 = std::exp(I * (2.0 * w * r));
    const cplx e3 = std::exp(I * (3.0 * w * r));
    const cplx g02c = std::conj(g02);
    const cplx g11c = std::conj(g11);

    WClosedForm out;
    out.c = cplx{-q + p * c2 - 2.0 * w * s2, -(2.0 * w * c2 + p * s2)} /
            (q * q + p * p + 4.0 * w * w - 2.0 * q * p * c2 + 4.0 * q * w * s2);
    out.c1 = 1.0 / (p - q);

    auto& v = out.values;
    v.w20_0 = out.c * (e2 * f20 + g20 * (-q * I / w + q * I / w * e1 - e2) +
                       g02c * (-q * I / (3.0 * w) + q * I / (3.0 * w) * e3 - e2));
    v.w20_mr = out.c * (f20 + g20 * (1.0 - 2.0 * e1 - p / w * I * (1.0 - e1)) -
                        g02c / 3.0 * (1.0 + 2.0 * e3 + p / w * I * (1.0 - e3)));
    const cplx mix = g11 * (1.0 - std::conj(e1)) - g11c * (1.0 - e1);
    v.w11_0 = out.c1 * (f11 - g11 - g11c + q * I / w * mix);
    v.w11_mr = out.c1 * (f11 - g11 - g11c + p * I / w * mix);
    return out;
}

/// l1 = Re(i g20 g11 + omega g21) / (2 omega^2).
inline double lyapunov_l1(cplx g20, cplx g11, cplx g21, double omega) {
    const cplx I{0.0, 1.0};
    return (I * g20 * g11 + omega * g21).real() / (2.0 * omega * omega);
}

enum class Criticality { supercritical, subcritical, degenerate };

inline const char* to_string(Criticality c) {
    switch (c) {
        case Criticality::supercritical: return "supercritical";
        case Criticality::subcritical: return "subcritical";
        case Criticality::degenerate: return "degenerate";
    }
    return "?";
}

inline constexpr double kDegenerateL1 = 1e-9;

inline Criticality classify_criticality(double l1) {
    if (std::abs(l1) < kDegenerateL1) return Criticality::degenerate;
    return l1 < 0.0 ? Criticality::supercritical : Criticality::subcritical;
}

/// Side of r* on which the cycle exists: +1 for r > r*, -1 for r < r*, 0 if
/// undecided. The cycle lives where mu(r) and -l1 have the same sign.
inline int cycle_side(double l1, double mu_prime) {
    if (std::abs(l1) < kDegenerateL1 || mu_prime == 0.0) return 0;
    return (l1 < 0.0) == (mu_prime > 0.0) ? 1 : -1;
}

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

struct NormalFormData {
    TaylorCoefficients taylor;
    cplx psi1_zero;
    cplx f20, f11, f02, f21;
    cplx g20, g11, g02, g21;
    cplx w20_at_0, w20_at_minus_r, w11_at_0, w11_at_minus_r;
    /// Boundary values from the explicit elimination formulas.
    WBoundaryValues w_closed_form;
    WResiduals w_residuals;
    cplx c;
    double c1;
    /// Coefficient of u|u|^2 in the Poincare normal form; Re = l1 omega*.
    cplx cubic_coefficient;
    double l1;
    int s;
    double mu_prime;
    double omega_prime;
    Criticality criticality;
    int cycle_side;
};

/// Normal-form data from second-order g values and a complete set of
/// coefficients; split out so the criticality rule can be exercised alone.
inline void finish_normal_form(NormalFormData& nf, double omega) {
    const cplx I{0.0, 1.0};
    nf.cubic_coefficient = I / (2.0 * omega) *
                               (nf.g20 * nf.g11 - 2.0 * std::norm(nf.g11) - std::norm(nf.g02) / 3.0) +
                           nf.g21 / 2.0;
    nf.l1 = lyapunov_l1(nf.g20, nf.g11, nf.g21, omega);
    nf.s = std::abs(nf.l1) < kDegenerateL1 ? 0 : sign_of(nf.l1);
    nf.criticality = classify_criticality(nf.l1);
    nf.cycle_side = cycle_side(nf.l1, nf.mu_prime);
}

inline NormalFormData criticality_report(const HopfPoint& hp) {
    NormalFormData nf{};
    nf.taylor = taylor_coefficients(hp.params);
    nf.psi1_zero = psi1_zero(hp);

    const auto second = f_coefficients(nf.taylor, hp, 0.0, 0.0, 0.0, 0.0);
    nf.f20 = second.f20;
    nf.f11 = second.f11;
    nf.f02 = second.f02;
    nf.g20 = nf.psi1_zero * nf.f20;
    nf.g11 = nf.psi1_zero * nf.f11;
    nf.g02 = nf.psi1_zero * nf.f02;

    const auto w = w_boundary_values(nf.g20, nf.g11, nf.g02, nf.f20, nf.f11, hp);
    nf.w20_at_0 = w.w20_0;
    nf.w20_at_minus_r = w.w20_mr;
    nf.w11_at_0 = w.w11_0;
    nf.w11_at_minus_r = w.w11_mr;
    nf.w_residuals = w_residuals(w, nf.g20, nf.g11, nf.g02, nf.f20, nf.f11, hp);
    const auto closed = w_boundary_closed_form(nf.g20, nf.g11, nf.g02, nf.f20, nf.f11, hp);
    nf.w_closed_form = closed.values;
    nf.c = closed.c;
    nf.c1 = closed.c1;

    nf.f21 = f_coefficients(nf.taylor, hp, w.w20_0, w.w20_mr, w.w11_0, w.w11_mr).f21;
    nf.g21 = nf.psi1_zero * nf.f21;

    const auto speed = transversality(hp);
    nf.mu_prime = speed.mu_prime;
    nf.omega_prime = speed.omega_prime;
    finish_normal_form(nf, hp.omega_star);
    return nf;
}

/// First-order unfolding parameter beta(r) = mu'(r*) (r - r*) / omega*.
inline double normal_form_beta(const NormalFormData& nf, const HopfPoint& hp, double r) {
    return nf.mu_prime * (r - hp.r_star) / hp.omega_star;
}

struct PredictedCycle {
    /// Half peak-to-trough of x(t): 2|u| with |u|^2 = -mu(r) / Re(c).
    double amplitude;
    double period;
};

/// Leading-order cycle near r*, or nullopt on the side where none exists.
inline std::optional<PredictedCycle> predicted_cycle(const NormalFormData& nf, const HopfPoint& hp,
                                                     double r) {
    const double dr = r - hp.r_star;
    const double mu = nf.mu_prime * dr;
    const double re = nf.cubic_coefficient.real();
    if (re == 0.0 || !(-mu / re > 0.0)) return std::nullopt;
    const double u2 = -mu / re;
    const double omega = hp.omega_star + nf.omega_prime * dr + nf.cubic_coefficient.imag() * u2;
    return PredictedCycle{2.0 * std::sqrt(u2), 2.0 * std::numbers::pi / omega};
}

}  // namespace hemato
