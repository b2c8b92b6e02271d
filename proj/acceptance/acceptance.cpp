// Acceptance run: every criterion at its stated tolerance, one PASS/FAIL
// line each, followed by indented detail lines. Exit status is the number
// of failed criteria (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hemato/ddesim.hpp"
#include "hemato/hopf.hpp"
#include "hemato/linstab.hpp"
#include "hemato/model.hpp"
#include "oracles.hpp"

using namespace hemato;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& what) {
    std::printf("%s  criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
    if (!ok) ++failures;
}

template <class... Args>
void detail(const char* fmt, Args... args) {
    std::printf("      ");
    std::printf(fmt, args...);
    std::printf("\n");
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

HopfPoint worked_hopf() { return hopf_from_pqk(oracle::kN, oracle::kBeta0, oracle::kDelta, oracle::kK); }

void equilibrium() {
    const auto p = ModelParameters::from_k(oracle::kBeta0, oracle::kN, oracle::kDelta, oracle::kK, 0.3559207407);
    const auto rep = equilibria(p);
    const bool ok = rep.x2 && within(*rep.x2, 1.150859618, 1e-8) && within(*rep.B1_at_x2, -2.524121872, 1e-8);
    verdict(1, ok, "equilibrium x2 and B1 within 1e-8");
    detail("k = 2 exp(-0.527) = %.12f", p.k);
    detail("x2 = %.12f (target 1.150859618)", rep.x2.value_or(NAN));
    detail("B1 = %.12f (target -2.524121872)", rep.B1_at_x2.value_or(NAN));
    const auto lit = equilibria(ModelParameters::from_k(1.77, 12, 0.05, 1.180746972, 0.3559207407));
    detail("info: with the rounded k = 1.180746972, x2 = %.12f (off %.2e), B1 = %.12f (off %.2e)", *lit.x2,
           *lit.x2 - 1.150859618, *lit.B1_at_x2, *lit.B1_at_x2 + 2.524121872);
}

void hopf_strategy() {
    const auto hp = worked_hopf();
    const bool ok = within(hp.omega_star, 1.661686238, 1e-8) && within(hp.r_star, 0.3559207407, 1e-9) &&
                    within(hp.params.gamma, 1.48067, 1e-4);
    verdict(2, ok, "Hopf point by the strategy route");
    detail("omega* = %.12f (target 1.661686238 +- 1e-8)", hp.omega_star);
    detail("r*     = %.12f (target 0.3559207407 +- 1e-9)", hp.r_star);
    detail("gamma* = %.12f (target 1.48067 +- 1e-4)", hp.params.gamma);
}

void hopf_g_root() {
    const auto hp = worked_hopf();
    const auto params = oracle::worked(0.3);
    const auto g = find_hopf_r(params, {0.30, 0.40});
    const double res = g_of_r(g.r_star, params);
    const bool ok = within(g.r_star, hp.r_star, 1e-6) && std::abs(res) < 1e-11;
    verdict(3, ok, "Hopf point by the g-root route, gamma = 1.48067, bracket (0.30, 0.40)");
    detail("r* = %.12f, offset from strategy route %.3e (tol 1e-6)", g.r_star, g.r_star - hp.r_star);
    detail("|g(r*)| = %.3e (tol 1e-11)", std::abs(res));
}

void transversality_check() {
    const auto hp = worked_hopf();
    const auto cs = transversality(hp);
    const cplx fd = oracle::crossing_speed(hp);
    const double rel = std::abs(cs.mu_prime - fd.real()) / std::abs(fd.real());
    const bool ok = std::abs(cs.mu_prime - 25.66) <= 0.005 * 25.66 && rel <= 1e-3;
    verdict(4, ok, "transversality mu'(r*)");
    detail("mu' = %.8f (target 25.66 +- 0.5%%)", cs.mu_prime);
    detail("root-tracking difference gives %.8f, relative gap %.2e (tol 1e-3)", fd.real(), rel);
}

void lyapunov() {
    const auto nf = criticality_report(worked_hopf());
    const double rel = std::abs(nf.l1 + 43.71063) / 43.71063;
    const bool ok = rel <= 1e-3 && nf.criticality == Criticality::supercritical;
    verdict(5, ok, "first Lyapunov coefficient and criticality");
    detail("l1 = %.8f (target -43.71063, relative gap %.2e, tol 1e-3)", nf.l1, rel);
    detail("criticality: %s", to_string(nf.criticality));
}

void g_slope() {
    const auto hp = worked_hopf();
    const double h = 1e-6;
    const double slope = (g_of_r(hp.r_star + h, hp.params) - g_of_r(hp.r_star - h, hp.params)) / (2.0 * h);
    verdict(6, std::abs(slope + 20.236) <= 0.005 * 20.236, "slope of g at r*");
    detail("dg/dr = %.6f (target -20.236 +- 0.5%%)", slope);
}

void simulation() {
    const auto below = oracle::worked(0.35);
    const auto above = oracle::worked(0.36);
    const auto mb = orbit_metrics(integrate(below, HistoryFunction::cosine(0.35), 200.0, 200));
    const auto ma = orbit_metrics(integrate(above, HistoryFunction::cosine(0.36), 200.0, 200));

    bool decaying = mb.envelope.size() < 2;
    if (!decaying) {
        decaying = true;
        for (std::size_t i = 1; i < mb.envelope.size(); ++i)
            decaying = decaying && mb.envelope[i] <= mb.envelope[i - 1] * (1.0 + 1e-6) + 1e-12;
    }
    const bool eq_ok = mb.kind == OrbitKind::equilibrium && decaying;

    const cplx root = rightmost_root_estimate(characteristic_triple(above), 5.0);
    const double linear_period = 2.0 * std::numbers::pi / root.imag();
    const bool cyc_ok = ma.kind == OrbitKind::cycle;
    const bool per_ok = ma.period && std::abs(*ma.period - linear_period) <= 0.05 * linear_period;

    verdict(7, eq_ok && cyc_ok && per_ok, "simulation: decay at r = 0.35, cycle at r = 0.36 with period near 2 pi/omega(r)");
    detail("r = 0.35: kind %s, envelope decaying %s, distance to x2 %.2e", to_string(mb.kind), decaying ? "yes" : "no",
           mb.distance_to_x2);
    detail("r = 0.36: kind %s, amplitude %.6f", to_string(ma.kind), ma.amplitude);
    detail("r = 0.36: period %.6f vs 2 pi/omega(r) = %.6f (omega(r) = %.6f), gap %+.1f%% (tol 5%%)",
           ma.period.value_or(NAN), linear_period, root.imag(), 100.0 * (ma.period.value_or(NAN) / linear_period - 1.0));
    const auto hp = worked_hopf();
    const auto nf = criticality_report(hp);
    if (const auto pc = predicted_cycle(nf, hp, 0.36))
        detail("info: normal form with amplitude-dependent frequency predicts period %.4f, amplitude %.4f",
               pc->period, pc->amplitude);
}

void scaling() {
    const auto hp = worked_hopf();
    double ratio = NAN;
    std::string err;
    try {
        ratio = amplitude_scaling(hp, 2e-3, 400.0);
    } catch (const std::exception& e) {
        err = e.what();
    }
    verdict(8, ratio >= 1.6 && ratio <= 2.4, "amplitude(r*+8e-3)/amplitude(r*+2e-3) in [1.6, 2.4]");
    if (!err.empty())
        detail("error: %s", err.c_str());
    else
        detail("ratio = %.4f", ratio);
    try {
        detail("info: closer to r*, amplitude(r*+2e-3)/amplitude(r*+5e-4) = %.4f", amplitude_scaling(hp, 5e-4, 1500.0));
    } catch (const std::exception& e) {
        detail("info: small-offset probe failed: %s", e.what());
    }
}

void properties() {
    bool all = true;
    auto part = [&](bool ok, const char* fmt, auto... args) {
        all = all && ok;
        std::printf("      [%s] ", ok ? "ok" : "fail");
        std::printf(fmt, args...);
        std::printf("\n");
    };
    std::vector<std::string> lines;

    // stationarity
    {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> b0(0.3, 4.0), nn(1.5, 20.0), dd(0.01, 0.5), kk(1.01, 1.99),
            rr(0.01, 2.0);
        int draws = 0;
        double worst = 0.0;
        while (draws < 100) {
            const auto p = ModelParameters::from_k(b0(rng), nn(rng), dd(rng), kk(rng), rr(rng));
            const auto rep = equilibria(p);
            if (!rep.x2) continue;
            ++draws;
            worst = std::max(worst, std::abs(model_rhs(*rep.x2, *rep.x2, p)));
        }
        part(worst < 1e-12, "stationarity residual over 100 draws: max %.2e (tol 1e-12)", worst);
    }
    // T roundtrip
    {
        double worst = 0.0;
        for (int i = 0; i <= 31; ++i) worst = std::max(worst, std::abs(T_inv(T_eval(0.1 * i)) - 0.1 * i));
        part(worst < 1e-10, "T_inv(T(y)) roundtrip on 0..3.1: max %.2e (tol 1e-10)", worst);
    }
    // pairing normalization, w residuals and closed forms at several Hopf points
    {
        const std::tuple<double, double, double, double> pts[] = {
            {12.0, 1.77, 0.05, oracle::kK}, {10.0, 2.0, 0.1, 1.3}, {8.0, 1.2, 0.08, 1.6}, {20.0, 3.0, 0.2, 1.4}};
        double norm_worst = 0.0, res_worst = 0.0, closed_worst = 0.0;
        for (const auto& [n, b0, d, k] : pts) {
            const auto hp = hopf_from_pqk(n, b0, d, k);
            const double w = hp.omega_star;
            const cplx I{0.0, 1.0};
            auto phi1 = [&](double s) { return std::exp(I * w * s); };
            auto phi2 = [&](double s) { return std::exp(-I * w * s); };
            const auto E = pairing_matrix(hp);
            const cplx scale = -E.e12 / E.det();
            auto Psi1 = [&](double z) { return scale * std::exp(-I * w * z); };
            norm_worst = std::max({norm_worst, std::abs(bilinear_pairing(Psi1, phi1, hp) - 1.0),
                                   std::abs(bilinear_pairing(Psi1, phi2, hp))});
            const auto nf = criticality_report(hp);
            res_worst = std::max(res_worst, nf.w_residuals.max());
            auto rel = [](cplx a, cplx b) { return std::abs(a - b) / std::abs(b); };
            closed_worst = std::max({closed_worst, rel(nf.w20_at_0, nf.w_closed_form.w20_0),
                                     rel(nf.w20_at_minus_r, nf.w_closed_form.w20_mr),
                                     rel(nf.w11_at_0, nf.w_closed_form.w11_0),
                                     rel(nf.w11_at_minus_r, nf.w_closed_form.w11_mr)});
        }
        part(norm_worst < 1e-8, "pairing normalization at 4 Hopf points: max deviation %.2e (tol 1e-8)", norm_worst);
        part(res_worst < 1e-10, "w20/w11 relation residuals: max %.2e (tol 1e-10)", res_worst);
        part(closed_worst < 1e-9, "linear solve vs closed forms with c, c1: max relative gap %.2e (tol 1e-9)",
             closed_worst);
    }
    // classifier vs rightmost-root oracle
    {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> b0(0.5, 4.0), nn(2.0, 20.0), dd(0.01, 0.5), kk(1.05, 1.95),
            rr(0.01, 3.0);
        int checked = 0, agree = 0;
        for (int tries = 0; tries < 20000 && checked < 100; ++tries) {
            const auto p = ModelParameters::from_k(b0(rng), nn(rng), dd(rng), kk(rng), rr(rng));
            if (!p.x2_exists()) continue;
            const auto tr = characteristic_triple(p);
            const auto v = classify_x2(p);
            if (v.status == Status::marginal) continue;
            const cplx lw = oracle::rightmost_root(tr.p, tr.q, tr.r);
            if (std::abs(lw.real()) < 1e-6 || std::abs(tr.p) < 1e-6 ||
                std::abs(std::abs(tr.p) - std::abs(tr.q)) < 1e-6 || std::abs(tr.r * std::abs(tr.p) - 1.0) < 1e-6)
                continue;
            ++checked;
            agree += (v.status == Status::stable) == (lw.real() < 0.0);
        }
        part(checked >= 50 && agree == checked, "classifier vs Lambert-W rightmost root: %d/%d agree (need >= 50)",
             agree, checked);
    }
    // step halving
    {
        const auto p = oracle::worked(0.36);
        const auto h = HistoryFunction::cosine(p.r);
        const auto a = integrate(p, h, 20.0, 100);
        const auto b = integrate(p, h, 20.0, 200);
        const auto c = integrate(p, h, 20.0, 400);
        auto diff = [](const Trajectory& lo, const Trajectory& hi) {
            double d = 0.0;
            for (std::size_t i = 0; i < lo.x.size() && 2 * i < hi.x.size(); ++i)
                d = std::max(d, std::abs(lo.x[i] - hi.x[2 * i]));
            return d;
        };
        const double ratio = diff(a, b) / diff(b, c);
        part(ratio >= 8.0, "RK4 step-halving contraction N = 100 -> 200 -> 400: %.2f (need >= 8)", ratio);
    }
    verdict(9, all, "property suites");
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    const std::pair<void (*)(), const char*> steps[] = {
        {equilibrium, "1"}, {hopf_strategy, "2"}, {hopf_g_root, "3"},   {transversality_check, "4"}, {lyapunov, "5"},
        {g_slope, "6"},     {simulation, "7"},    {scaling, "8"},       {properties, "9"},
    };
    for (const auto& [fn, id] : steps) {
        try {
            fn();
        } catch (const std::exception& e) {
            std::printf("FAIL  criterion %s: threw %s\n", id, e.what());
            ++failures;
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of 9 criteria failed (%.1f s)\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
