#pragma once

// Delayed hematopoiesis model
//
//   x'(t) = -[beta(x(t)) + delta] x(t) + k beta(x(t-r)) x(t-r),
//   beta(x) = beta0 / (1 + x^n),   k = 2 exp(-gamma r).
//
// Parameters, the production nonlinearity and its derivatives, both
// equilibria and the Taylor coefficients of beta(x) x at the positive one.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hemato/errors.hpp"

namespace hemato {

inline double derive_k(double gamma, double r) {
    if (!std::isfinite(gamma) || !std::isfinite(r))
        throw InvalidParameter("derive_k: non-finite gamma or r");
    return 2.0 * std::exp(-gamma * r);
}

/// Model parameters. gamma and k are always both populated and consistent.
class ModelParameters {
public:
    /// (gamma, r) given, k derived.
    static ModelParameters from_gamma(double beta0, double n, double delta, double gamma, double r) {
        ModelParameters p;
        p.beta0 = beta0;
        p.n = n;
        p.delta = delta;
        p.gamma = gamma;
        p.r = r;
        p.validate_base();
        if (!(std::isfinite(gamma) && gamma > 0.0))
            throw InvalidParameter("gamma must be positive");
        p.k = derive_k(gamma, r);
        return p;
    }

    /// (k, r) given, gamma derived as -ln(k/2)/r. Needs r > 0.
    static ModelParameters from_k(double beta0, double n, double delta, double k, double r) {
        ModelParameters p;
        p.beta0 = beta0;
        p.n = n;
        p.delta = delta;
        p.k = k;
        p.r = r;
        p.validate_base();
        if (!(std::isfinite(k) && k > 0.0 && k < 2.0))
            throw InvalidParameter("k must lie in (0, 2) when gamma is derived from it");
        if (!(r > 0.0))
            throw InvalidParameter("gamma cannot be derived from k when r = 0");
        p.gamma = -std::log(k / 2.0) / r;
        return p;
    }

    /// Same beta0, n, delta, gamma at a different delay; k follows r.
    ModelParameters with_r(double new_r) const {
        return from_gamma(beta0, n, delta, gamma, new_r);
    }

    /// A = beta0 (k - 1) / delta; x2 exists iff A > 1.
    double A() const { return beta0 * (k - 1.0) / delta; }

    bool x2_exists() const { return A() - 1.0 > 0.0; }

    double beta0 = 0.0;
    double n = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double r = 0.0;
    double k = 0.0;

private:
    ModelParameters() = default;

    void validate_base() const {
        if (!(std::isfinite(beta0) && beta0 > 0.0)) throw InvalidParameter("beta0 must be positive");
        if (!(std::isfinite(n) && n > 1.0)) throw InvalidParameter("n must exceed 1");
        if (!(std::isfinite(delta) && delta > 0.0)) throw InvalidParameter("delta must be positive");
        if (!(std::isfinite(r) && r >= 0.0)) throw InvalidParameter("r must be nonnegative");
    }
};

namespace detail {

// c * x^e with the conventions 0 * anything = 0 and x^0 = 1, so that the
// closed-form derivative terms stay finite at x = 0 when they should.
inline double monomial(double c, double x, double e) {
    if (c == 0.0) return 0.0;
    if (e == 0.0) return c;
    if (x == 0.0) return e > 0.0 ? 0.0 : c * std::numeric_limits<double>::infinity();
    return c * std::pow(x, e);
}

}  // namespace detail

/// beta^(m)(x) for m = 0..max_order (max_order <= 3), closed form.
inline std::vector<double> beta_derivatives(double x, const ModelParameters& params, int max_order) {
    if (max_order < 0 || max_order > 3)
        throw DomainError("beta_derivatives: order must be in 0..3");
    if (!(x >= 0.0)) throw DomainError("beta_derivatives: x must be nonnegative");

    using detail::monomial;
    const double b0 = params.beta0;
    const double n = params.n;
    const double s = 1.0 + std::pow(x, n);
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double s4 = s3 * s;

    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(max_order) + 1);
    d.push_back(b0 / s);
    if (max_order >= 1) d.push_back(-monomial(b0 * n, x, n - 1.0) / s2);
    if (max_order >= 2) {
        d.push_back(-monomial(b0 * n * (n - 1.0), x, n - 2.0) / s2 +
                    monomial(2.0 * b0 * n * n, x, 2.0 * n - 2.0) / s3);
    }
    if (max_order >= 3) {
        d.push_back(-monomial(b0 * n * (n - 1.0) * (n - 2.0), x, n - 3.0) / s2 +
                    monomial(6.0 * b0 * n * n * (n - 1.0), x, 2.0 * n - 3.0) / s3 -
                    monomial(6.0 * b0 * n * n * n, x, 3.0 * n - 3.0) / s4);
    }
    return d;
}

/// B1 at x2 in closed form: beta0 [n - (n-1) A] / A^2.
inline double b1_closed_form(double beta0, double n, double A) {
    return beta0 * (n - (n - 1.0) * A) / (A * A);
}

struct EquilibriumReport {
    double x1 = 0.0;
    std::optional<double> x2;
    double A = 0.0;
    double B1_at_x1 = 0.0;
    std::optional<double> B1_at_x2;
    /// x2 exists iff r < r_max. Nonpositive when delta >= beta0.
    double r_max = 0.0;
    /// B1(x2) changes sign at r = r_n.
    double r_n = 0.0;
};

inline EquilibriumReport equilibria(const ModelParameters& params) {
    EquilibriumReport rep;
    rep.A = params.A();
    rep.B1_at_x1 = params.beta0;
    const double ratio = params.delta / params.beta0;
    rep.r_max = -std::log(0.5 * (1.0 + ratio)) / params.gamma;
    rep.r_n = -std::log(0.5 * (ratio * params.n / (params.n - 1.0) + 1.0)) / params.gamma;
    if (rep.A - 1.0 > 0.0) {
        rep.x2 = std::pow(rep.A - 1.0, 1.0 / params.n);
        rep.B1_at_x2 = b1_closed_form(params.beta0, params.n, rep.A);
    }
    return rep;
}

/// Taylor coefficients of beta(x) x at x2:
/// B[m] = beta^(m)(x2) x2 + m beta^(m-1)(x2), m = 1..3.
struct TaylorCoefficients {
    std::array<double, 3> B{};

    double operator[](int m) const { return B.at(static_cast<std::size_t>(m - 1)); }
};

inline TaylorCoefficients taylor_coefficients(const ModelParameters& params,
                                              const EquilibriumReport& report) {
    if (!report.x2) throw NoPositiveEquilibrium();
    const double x2 = *report.x2;
    const auto d = beta_derivatives(x2, params, 3);
    TaylorCoefficients tc;
    for (int m = 1; m <= 3; ++m)
        tc.B[static_cast<std::size_t>(m - 1)] = d[static_cast<std::size_t>(m)] * x2 + m * d[static_cast<std::size_t>(m - 1)];
    return tc;
}

inline TaylorCoefficients taylor_coefficients(const ModelParameters& params) {
    return taylor_coefficients(params, equilibria(params));
}

/// Right-hand side of the model for current state x and delayed state xd.
/// Solutions stay nonnegative; |x| only keeps x^n finite for roundoff-level
/// negative values when n is not an integer.
inline double model_rhs(double x, double xd, const ModelParameters& params) {
    const double bx = params.beta0 / (1.0 + std::pow(std::abs(x), params.n));
    const double bd = params.beta0 / (1.0 + std::pow(std::abs(xd), params.n));
    return -(bx + params.delta) * x + params.k * bd * xd;
}

}  // namespace hemato
