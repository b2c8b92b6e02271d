#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hemato/model.hpp"
#include "oracles.hpp"

using namespace hemato;

namespace {

ModelParameters worked_k() {
    return ModelParameters::from_k(oracle::kBeta0, oracle::kN, oracle::kDelta, oracle::kK, 0.3559207407);
}

}  // namespace

TEST(DeriveK, ExponentialLaw) {
    EXPECT_DOUBLE_EQ(derive_k(3.7, 0.0), 2.0);
    EXPECT_NEAR(derive_k(1.0, std::log(2.0)), 1.0, 1e-15);
    const double r = 0.3559207407;
    EXPECT_NEAR(derive_k(0.527 / r, r), 2.0 * std::exp(-0.527), 1e-15);
    // gamma rounded to six digits
    EXPECT_NEAR(derive_k(1.48067, r), 1.180746972, 2e-6);
}

TEST(DeriveK, RejectsNonFinite) {
    EXPECT_THROW(derive_k(std::nan(""), 1.0), InvalidParameter);
    EXPECT_THROW(derive_k(1.0, INFINITY), InvalidParameter);
}

TEST(Parameters, BothModesAgree) {
    const auto a = ModelParameters::from_gamma(1.77, 12, 0.05, 1.48067, 0.36);
    const auto b = ModelParameters::from_k(1.77, 12, 0.05, a.k, 0.36);
    EXPECT_NEAR(b.gamma, a.gamma, 1e-13);
    EXPECT_DOUBLE_EQ(a.k, 2.0 * std::exp(-a.gamma * a.r));
    const auto c = b.with_r(0.4);
    EXPECT_DOUBLE_EQ(c.gamma, b.gamma);
    EXPECT_DOUBLE_EQ(c.k, derive_k(b.gamma, 0.4));
}

TEST(Parameters, Validation) {
    EXPECT_THROW(ModelParameters::from_gamma(0.0, 12, 0.05, 1.0, 0.3), InvalidParameter);
    EXPECT_THROW(ModelParameters::from_gamma(1.77, 1.0, 0.05, 1.0, 0.3), InvalidParameter);
    EXPECT_THROW(ModelParameters::from_gamma(1.77, 12, -0.05, 1.0, 0.3), InvalidParameter);
    EXPECT_THROW(ModelParameters::from_gamma(1.77, 12, 0.05, 0.0, 0.3), InvalidParameter);
    EXPECT_THROW(ModelParameters::from_gamma(1.77, 12, 0.05, 1.0, -0.1), InvalidParameter);
    EXPECT_THROW(ModelParameters::from_k(1.77, 12, 0.05, 2.0, 0.3), InvalidParameter);
    EXPECT_THROW(ModelParameters::from_k(1.77, 12, 0.05, 1.2, 0.0), InvalidParameter);
    EXPECT_NO_THROW(ModelParameters::from_gamma(1.77, 12, 0.05, 1.0, 0.0));
}

TEST(Beta, ValuesAtZero) {
    const auto p = worked_k();
    const auto d = beta_derivatives(0.0, p, 3);
    EXPECT_DOUBLE_EQ(d[0], p.beta0);
    EXPECT_DOUBLE_EQ(d[1], 0.0);
    EXPECT_DOUBLE_EQ(d[2], 0.0);
    EXPECT_DOUBLE_EQ(d[3], 0.0);
    const auto q = ModelParameters::from_gamma(1.0, 2.0, 0.1, 1.0, 0.2);
    EXPECT_DOUBLE_EQ(beta_derivatives(0.0, q, 1)[1], 0.0);
}

TEST(Beta, OrderAndDomainChecks) {
    const auto p = worked_k();
    EXPECT_THROW(beta_derivatives(1.0, p, 4), DomainError);
    EXPECT_THROW(beta_derivatives(-1.0, p, 1), DomainError);
    EXPECT_EQ(beta_derivatives(1.0, p, 0).size(), 1u);
}

TEST(Beta, DerivativesMatchFiniteDifferences) {
    const auto p = worked_k();
    auto f = [&](double x) { return oracle::beta(x, p.beta0, p.n); };
    for (double x : {1.150859618, 0.5, 0.9, 1.3}) {
        const auto d = beta_derivatives(x, p, 3);
        for (int m = 1; m <= 3; ++m) {
            const double h = m == 1 ? 1e-5 : (m == 2 ? 1e-4 : 1e-3);
            const double fd = oracle::derivative(f, x, m, h);
            EXPECT_NEAR(d[static_cast<std::size_t>(m)], fd, 1e-5 * std::max(1.0, std::abs(fd)))
                << "x = " << x << ", order " << m;
        }
    }
}

TEST(Beta, StationarityIdentity) {
    const auto p = worked_k();
    const auto rep = equilibria(p);
    ASSERT_TRUE(rep.x2);
    EXPECT_NEAR(beta_derivatives(*rep.x2, p, 0)[0], p.delta / (p.k - 1.0), 1e-13);
}

TEST(Equilibria, WorkedExample) {
    const auto rep = equilibria(worked_k());
    ASSERT_TRUE(rep.x2);
    EXPECT_NEAR(*rep.x2, 1.150859618, 1e-8);
    EXPECT_NEAR(*rep.B1_at_x2, -2.524121872, 1e-8);
    EXPECT_DOUBLE_EQ(rep.x1, 0.0);
    EXPECT_DOUBLE_EQ(rep.B1_at_x1, 1.77);
}

TEST(Equilibria, LiteralRoundedK) {
    // the rounded k of the worked example moves x2 by ~6e-8
    const auto p = ModelParameters::from_k(1.77, 12, 0.05, 1.180746972, 0.3559207407);
    const auto rep = equilibria(p);
    EXPECT_NEAR(*rep.x2, 1.150859618, 1e-6);
    EXPECT_NEAR(*rep.B1_at_x2, -2.524121872, 1e-5);
}

TEST(Equilibria, AbsentWhenKAtMostOne) {
    for (double k : {0.5, 0.9, 1.0}) {
        const auto rep = equilibria(ModelParameters::from_k(1.77, 12, 0.05, k, 0.5));
        EXPECT_FALSE(rep.x2);
        EXPECT_FALSE(rep.B1_at_x2);
    }
}

TEST(Equilibria, ThresholdAtAEqualsOne) {
    // A = 1 exactly: beta0 (k - 1) = delta with k = 1.5
    const auto p = ModelParameters::from_k(0.1, 12, 0.05, 1.5, 0.5);
    EXPECT_DOUBLE_EQ(p.A(), 1.0);
    EXPECT_FALSE(equilibria(p).x2);
}

TEST(Equilibria, RMaxMatchesBisection) {
    const auto p = oracle::worked(0.3);
    const auto rep = equilibria(p);
    const double ref = oracle::r_max(p.beta0, p.delta, p.gamma);
    EXPECT_NEAR(rep.r_max, ref, 1e-12);
    EXPECT_NEAR(p.with_r(rep.r_max).A() - 1.0, 0.0, 1e-10);
}

TEST(Equilibria, ExistenceFlipsOnceAcrossRMax) {
    const auto p = oracle::worked(0.3);
    const double rmax = equilibria(p).r_max;
    int flips = 0;
    bool prev = p.with_r(0.0).x2_exists();
    EXPECT_TRUE(prev);
    for (int i = 0; i < 400; ++i) {
        const double r = 2.0 * rmax * (i + 0.5) / 400.0;
        const bool now = p.with_r(r).x2_exists();
        EXPECT_EQ(now, r < rmax) << r;
        flips += now != prev;
        prev = now;
    }
    EXPECT_EQ(flips, 1);
}

TEST(Equilibria, RnZeroesB1) {
    const auto p = oracle::worked(0.3);
    const auto rep = equilibria(p);
    ASSERT_GT(rep.r_n, 0.0);
    ASSERT_LT(rep.r_n, rep.r_max);
    const auto at = equilibria(p.with_r(rep.r_n));
    EXPECT_NEAR(*at.B1_at_x2, 0.0, 1e-9);
}

TEST(Equilibria, RandomStationarityAndClosedForm) {
    std::mt19937_64 rng(20261014);
    std::uniform_real_distribution<double> b0(0.3, 4.0), nn(1.5, 20.0), dd(0.01, 0.5), kk(1.01, 1.99),
        rr(0.01, 2.0);
    int draws = 0;
    while (draws < 100) {
        const auto p = ModelParameters::from_k(b0(rng), nn(rng), dd(rng), kk(rng), rr(rng));
        const auto rep = equilibria(p);
        if (!rep.x2) continue;
        ++draws;
        const double x2 = *rep.x2;
        const double res = -(oracle::beta(x2, p.beta0, p.n) + p.delta) * x2 + p.k * oracle::beta(x2, p.beta0, p.n) * x2;
        EXPECT_LT(std::abs(res), 1e-12);
        EXPECT_LT(std::abs(model_rhs(x2, x2, p)), 1e-12);
        EXPECT_LT(std::abs((p.k - 1.0) * oracle::beta(x2, p.beta0, p.n) - p.delta), 1e-12 * p.delta * 10);
        const auto d = beta_derivatives(x2, p, 1);
        const double b1 = d[1] * x2 + d[0];
        EXPECT_NEAR(*rep.B1_at_x2, b1, 1e-9 * std::max(1.0, std::abs(b1)));
    }
}

TEST(Taylor, MatchesFiniteDifferencesOfBetaX) {
    const auto p = worked_k();
    const auto rep = equilibria(p);
    const auto tc = taylor_coefficients(p, rep);
    auto F = [&](double x) { return oracle::beta(x, p.beta0, p.n) * x; };
    EXPECT_NEAR(tc[1], b1_closed_form(p.beta0, p.n, rep.A), 1e-9 * std::abs(tc[1]));
    EXPECT_NEAR(tc[1], -2.524121872, 1e-8);
    const double h[3] = {1e-5, 1e-4, 1e-3};
    for (int m = 1; m <= 3; ++m) {
        const double fd = oracle::derivative(F, *rep.x2, m, h[m - 1]);
        EXPECT_NEAR(tc[m], fd, 1e-5 * std::abs(fd)) << m;
    }
}

TEST(Taylor, B1VanishesAtCriticalA) {
    // A = n / (n - 1)
    const double n = 12.0, delta = 0.05, k = 1.5;
    const double beta0 = n / (n - 1.0) * delta / (k - 1.0);
    const auto p = ModelParameters::from_k(beta0, n, delta, k, 0.5);
    EXPECT_NEAR(taylor_coefficients(p)[1], 0.0, 1e-14);
}

TEST(Taylor, RequiresPositiveEquilibrium) {
    const auto p = ModelParameters::from_k(1.77, 12, 0.05, 0.9, 0.5);
    EXPECT_THROW(taylor_coefficients(p), NoPositiveEquilibrium);
}
