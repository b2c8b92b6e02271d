#pragma once

// Config parsing and command dispatch for the hemato command-line tool.
//
// Config format: one `key = value` per line, `#` starts a comment.
// Keys: beta0, n, delta, r, and exactly one of gamma or k.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "hemato/ddesim.hpp"
#include "hemato/errors.hpp"
#include "hemato/hopf.hpp"
#include "hemato/linstab.hpp"
#include "hemato/model.hpp"

namespace hemato::cli {

enum class Command { validate, equilibria, stability, hopf, normal_form, simulate, sweep, scaling };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::validate: return "validate";
        case Command::equilibria: return "equilibria";
        case Command::stability: return "stability";
        case Command::hopf: return "hopf";
        case Command::normal_form: return "normal-form";
        case Command::simulate: return "simulate";
        case Command::sweep: return "sweep";
        case Command::scaling: return "scaling";
    }
    return "?";
}

/// Raw parameter values as given; exactly one of gamma, k is set.
struct ParamSpec {
    double beta0 = 0.0;
    double n = 0.0;
    double delta = 0.0;
    double r = 0.0;
    std::optional<double> gamma;
    std::optional<double> k;

    ModelParameters build() const {
        if (gamma) return ModelParameters::from_gamma(beta0, n, delta, *gamma, r);
        return ModelParameters::from_k(beta0, n, delta, *k, r);
    }
};

/// Evenly spaced r values, endpoints included.
struct RGrid {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;

    std::vector<double> values() const {
        std::vector<double> v;
        v.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i)
            v.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
        return v;
    }
};

struct RunConfig {
    ParamSpec spec;
    ModelParameters params;
    Command command = Command::validate;
    std::optional<std::string> output_path;
    double t_end = kDefaultTEnd;
    int steps_per_delay = kDefaultStepsPerDelay;
    std::optional<std::pair<double, double>> bracket;
    double delta_r = 2e-3;
    std::optional<RGrid> r_grid;
    std::size_t stride = 1;
    double transient_fraction = 0.5;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    std::string buf(s);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::string format(double v, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::string csv(double v) { return format(v, 17); }

inline std::string format(cplx z, int digits = 10) {
    return format(z.real(), digits) + (z.imag() < 0.0 ? " - " : " + ") +
           format(std::abs(z.imag()), digits) + "i";
}

}  // namespace detail

inline RunConfig make_config(const ParamSpec& spec) {
    RunConfig cfg{spec, spec.build(), Command::validate, std::nullopt, kDefaultTEnd, kDefaultStepsPerDelay,
                  std::nullopt, 2e-3, std::nullopt};
    return cfg;
}

/// Parses the `key = value` config text; diagnostics carry the line number.
inline RunConfig parse_config(std::string_view text) {
    static constexpr std::array<std::string_view, 6> keys{"beta0", "n", "delta", "gamma", "k", "r"};
    std::map<std::string, std::pair<double, int>, std::less<>> seen;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, "expected `key = value`");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::parse_double(line.substr(eq + 1));
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(line_no, "unknown key `" + std::string(key) + "`");
        if (seen.contains(key)) throw ConfigError(line_no, "duplicate key `" + std::string(key) + "`");
        if (!value) throw ConfigError(line_no, "value of `" + std::string(key) + "` is not a finite number");

        const double v = *value;
        const bool ok = (key == "beta0" || key == "delta" || key == "gamma") ? v > 0.0
                        : key == "n"                                        ? v > 1.0
                        : key == "r"                                        ? v >= 0.0
                                                                            : (v > 0.0 && v <= 2.0);
        if (!ok) throw ConfigError(line_no, "value of `" + std::string(key) + "` is out of range");
        if ((key == "gamma" && seen.contains("k")) || (key == "k" && seen.contains("gamma")))
            throw ConfigError(line_no, "both gamma and k given; supply exactly one");
        seen.emplace(std::string(key), std::pair{v, line_no});
    }

    std::string missing;
    for (auto key : {"beta0", "n", "delta", "r"})
        if (!seen.contains(key)) missing += missing.empty() ? key : std::string(", ") + key;
    if (!seen.contains("gamma") && !seen.contains("k"))
        missing += missing.empty() ? "gamma|k" : ", gamma|k";
    if (!missing.empty()) throw ConfigError(0, "missing keys: " + missing);

    ParamSpec spec;
    spec.beta0 = seen.at("beta0").first;
    spec.n = seen.at("n").first;
    spec.delta = seen.at("delta").first;
    spec.r = seen.at("r").first;
    if (auto it = seen.find("gamma"); it != seen.end()) spec.gamma = it->second.first;
    if (auto it = seen.find("k"); it != seen.end()) spec.k = it->second.first;
    try {
        return make_config(spec);
    } catch (const InvalidParameter& e) {
        const int line = spec.k ? seen.at("k").second : 0;
        throw ConfigError(line, e.what());
    }
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file `" + path + "`");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Parameter values given on the command line.
struct Overrides {
    std::optional<double> beta0, n, delta, gamma, k, r;
};

/// Flags replace file values. A new r on a k-based config keeps gamma (as
/// derived from the file) and lets k follow, unless --k is also given.
inline void apply_overrides(RunConfig& cfg, const Overrides& o) {
    if (o.gamma && o.k) throw ConfigError(0, "both --gamma and --k given; supply exactly one");
    ParamSpec s = cfg.spec;
    if (o.beta0) s.beta0 = *o.beta0;
    if (o.n) s.n = *o.n;
    if (o.delta) s.delta = *o.delta;
    if (o.gamma) {
        s.gamma = o.gamma;
        s.k.reset();
    } else if (o.k) {
        s.k = o.k;
        s.gamma.reset();
    } else if (o.r && s.k) {
        s.gamma = cfg.params.gamma;
        s.k.reset();
    }
    if (o.r) s.r = *o.r;
    try {
        cfg.params = s.build();
    } catch (const InvalidParameter& e) {
        throw ConfigError(0, e.what());
    }
    cfg.spec = s;
}

// ---------------------------------------------------------------------------
// reports

inline void print_params(std::ostream& os, const ModelParameters& p) {
    using detail::format;
    os << "parameters\n"
       << "  beta0 = " << format(p.beta0) << "\n"
       << "  n     = " << format(p.n) << "\n"
       << "  delta = " << format(p.delta) << "\n"
       << "  gamma = " << format(p.gamma) << "\n"
       << "  r     = " << format(p.r) << "\n"
       << "  k     = " << format(p.k) << "\n";
}

inline void print_equilibria(std::ostream& os, const ModelParameters& p) {
    using detail::format;
    const auto rep = equilibria(p);
    os << "equilibria\n"
       << "  A        = " << format(rep.A) << "\n"
       << "  x1       = 0\n"
       << "  B1(x1)   = " << format(rep.B1_at_x1) << "\n";
    if (rep.x2) {
        os << "  x2       = " << format(*rep.x2) << "\n"
           << "  B1(x2)   = " << format(*rep.B1_at_x2) << "\n";
    } else {
        os << "  x2       = absent\n";
    }
    os << "  r_max    = " << format(rep.r_max) << "\n"
       << "  r_n      = " << format(rep.r_n) << "\n";
}

inline void print_verdict(std::ostream& os, const char* name, const StabilityVerdict& v) {
    using detail::format;
    os << name << ": " << hemato::to_string(v.status) << " (case " << hemato::to_string(v.case_label) << ")\n";
    if (v.omega0) os << "  omega0 = " << format(*v.omega0) << "\n";
    if (v.stable_window)
        os << "  window = (" << format(v.stable_window->first) << ", " << format(v.stable_window->second) << ")\n";
    if (!v.notes.empty()) os << "  " << v.notes << "\n";
}

/// Rows `r,case,status,g_of_r,re_rightmost` with gamma fixed.
inline void write_stability_csv(std::ostream& os, const ModelParameters& params, const RGrid& grid) {
    using detail::csv;
    os << "r,case,status,g_of_r,re_rightmost\n";
    for (double r : grid.values()) {
        const auto at = params.with_r(r);
        os << csv(r) << ',';
        if (!at.x2_exists()) {
            os << "absent,none,nan,nan\n";
            continue;
        }
        const auto v = classify_x2(at);
        double g = std::nan("");
        try {
            g = g_of_r(r, params);
        } catch (const DomainError&) {
        }
        double re = std::nan("");
        if (r > 0.0) {
            const auto tr = characteristic_triple(at);
            re = rightmost_root_estimate(tr, std::abs(tr.p) + std::abs(tr.q) + 1.0).real();
        }
        os << hemato::to_string(v.case_label) << ',' << hemato::to_string(v.status) << ',' << csv(g) << ','
           << csv(re) << '\n';
    }
}

struct SweepRow {
    double r;
    OrbitMetrics metrics;
};

/// One integration per r (gamma fixed), run concurrently; rows come back in
/// grid order.
inline std::vector<SweepRow> orbit_sweep(const ModelParameters& params, const RGrid& grid, double t_end,
                                         int steps_per_delay, double transient_fraction) {
    const auto rs = grid.values();
    std::vector<std::future<SweepRow>> jobs;
    jobs.reserve(rs.size());
    for (double r : rs) {
        jobs.push_back(std::async(std::launch::async, [=, &params] {
            const auto at = params.with_r(r);
            const auto traj = integrate(at, HistoryFunction::cosine(r), t_end, steps_per_delay);
            return SweepRow{r, orbit_metrics(traj, transient_fraction)};
        }));
    }
    std::vector<SweepRow> rows;
    rows.reserve(rs.size());
    for (auto& j : jobs) rows.push_back(j.get());
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.r < b.r; });
    return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    using detail::csv;
    os << "r,kind,amplitude,period\n";
    for (const auto& row : rows)
        os << csv(row.r) << ',' << hemato::to_string(row.metrics.kind) << ',' << csv(row.metrics.amplitude) << ','
           << csv(row.metrics.period.value_or(std::nan(""))) << '\n';
}

inline void print_hopf_point(std::ostream& os, const HopfPoint& hp) {
    using detail::format;
    const cplx res = char_value({0.0, hp.omega_star}, triple_of(hp));
    os << "  r*      = " << format(hp.r_star, 12) << "\n"
       << "  omega*  = " << format(hp.omega_star, 12) << "\n"
       << "  gamma*  = " << format(hp.params.gamma, 12) << "\n"
       << "  k*      = " << format(hp.params.k, 12) << "\n"
       << "  x2*     = " << format(hp.x2_star, 12) << "\n"
       << "  B1*     = " << format(hp.B1_star, 12) << "\n"
       << "  p*, q*  = " << format(hp.p_star, 12) << ", " << format(hp.q_star, 12) << "\n"
       << "  |char(i omega*)| = " << format(std::abs(res), 3) << "\n";
}

inline HopfPoint strategy_hopf(const ModelParameters& p) {
    return hopf_from_pqk(p.n, p.beta0, p.delta, p.k);
}

inline void print_normal_form(std::ostream& os, const HopfPoint& hp, const NormalFormData& nf) {
    using detail::format;
    const auto& wc = nf.w_closed_form;
    os << "normal form at r* = " << format(hp.r_star, 12) << "\n"
       << "  B1, B2, B3 = " << format(nf.taylor[1]) << ", " << format(nf.taylor[2]) << ", "
       << format(nf.taylor[3]) << "\n"
       << "  Psi1(0) = " << format(nf.psi1_zero) << "\n"
       << "  f20 = " << format(nf.f20) << "\n"
       << "  f11 = " << format(nf.f11) << "\n"
       << "  f02 = " << format(nf.f02) << "\n"
       << "  f21 = " << format(nf.f21) << "\n"
       << "  g20 = " << format(nf.g20) << "\n"
       << "  g11 = " << format(nf.g11) << "\n"
       << "  g02 = " << format(nf.g02) << "\n"
       << "  g21 = " << format(nf.g21) << "\n"
       << "  w20(0)  = " << format(nf.w20_at_0) << "   closed form " << format(wc.w20_0) << "\n"
       << "  w20(-r) = " << format(nf.w20_at_minus_r) << "   closed form " << format(wc.w20_mr) << "\n"
       << "  w11(0)  = " << format(nf.w11_at_0) << "   closed form " << format(wc.w11_0) << "\n"
       << "  w11(-r) = " << format(nf.w11_at_minus_r) << "   closed form " << format(wc.w11_mr) << "\n"
       << "  w relation residual (max) = " << format(nf.w_residuals.max(), 3) << "\n"
       << "  c  = " << format(nf.c) << "\n"
       << "  c1 = " << format(nf.c1) << "\n"
       << "  cubic coefficient = " << format(nf.cubic_coefficient) << "\n"
       << "  l1 = " << format(nf.l1) << "\n"
       << "  s  = " << nf.s << "\n"
       << "  mu'(r*)    = " << format(nf.mu_prime) << "\n"
       << "  omega'(r*) = " << format(nf.omega_prime) << "\n"
       << "  criticality: " << hemato::to_string(nf.criticality) << "\n";
    if (nf.cycle_side != 0)
        os << "  cycle exists for r " << (nf.cycle_side > 0 ? ">" : "<") << " r*"
           << (nf.criticality == Criticality::supercritical ? " (stable)" : " (unstable)") << "\n";
}

/// 2 for invalid input or parameters, 3 for numerical failures and anything
/// unexpected.
inline int exit_code(const std::exception& e) {
    if (const auto* he = dynamic_cast<const Error*>(&e))
        return he->category() == ErrorCategory::invalid_input ? 2 : 3;
    return 3;
}

/// Runs the configured command. 0 = success, 2 = invalid input or
/// parameters, 3 = numerical failure.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto with_output = [&](auto&& write) {
        if (cfg.output_path) {
            std::ofstream f(*cfg.output_path, std::ios::binary);
            if (!f) throw ConfigError(0, "cannot open output file `" + *cfg.output_path + "`");
            write(f);
        } else {
            write(out);
        }
    };
    try {
        const auto& p = cfg.params;
        switch (cfg.command) {
            case Command::validate:
                print_params(out, p);
                print_equilibria(out, p);
                out << "config ok\n";
                break;
            case Command::equilibria:
                print_equilibria(out, p);
                break;
            case Command::stability: {
                print_verdict(out, "x1", classify_x1(p));
                if (p.x2_exists())
                    print_verdict(out, "x2", classify_x2(p));
                else
                    out << "x2: absent\n";
                if (cfg.r_grid) with_output([&](std::ostream& os) { write_stability_csv(os, p, *cfg.r_grid); });
                break;
            }
            case Command::hopf: {
                const auto hp = strategy_hopf(p);
                out << "strategy route (n, beta0, delta, k)\n";
                print_hopf_point(out, hp);
                const double r = hp.r_star;
                const auto bracket = cfg.bracket.value_or(std::pair{0.9 * r, 1.1 * r});
                const auto hp2 = find_hopf_r(hp.params, bracket);
                out << "g-root route (gamma = gamma*, bracket " << detail::format(bracket.first) << ", "
                    << detail::format(bracket.second) << ")\n";
                print_hopf_point(out, hp2);
                out << "  g(r*)   = " << detail::format(g_of_r(hp2.r_star, hp.params), 3) << "\n"
                    << "route difference |dr*| = " << detail::format(std::abs(hp2.r_star - hp.r_star), 3) << "\n";
                break;
            }
            case Command::normal_form: {
                const auto hp = strategy_hopf(p);
                print_normal_form(out, hp, criticality_report(hp));
                break;
            }
            case Command::simulate: {
                const auto traj = integrate(p, HistoryFunction::cosine(p.r), cfg.t_end, cfg.steps_per_delay);
                with_output([&](std::ostream& os) { write_trajectory_csv(os, traj, cfg.stride); });
                if (cfg.output_path) {
                    const auto om = orbit_metrics(traj, cfg.transient_fraction);
                    out << "wrote " << traj.t.size() << " nodes to " << *cfg.output_path << "\n"
                        << "orbit: " << hemato::to_string(om.kind) << ", amplitude " << detail::format(om.amplitude)
                        << ", period " << (om.period ? detail::format(*om.period) : std::string("n/a")) << "\n";
                }
                break;
            }
            case Command::sweep: {
                if (!cfg.r_grid) throw ConfigError(0, "sweep needs --r-grid lo:hi:count");
                const auto rows = orbit_sweep(p, *cfg.r_grid, cfg.t_end, cfg.steps_per_delay, cfg.transient_fraction);
                with_output([&](std::ostream& os) { write_sweep_csv(os, rows); });
                break;
            }
            case Command::scaling: {
                const auto hp = strategy_hopf(p);
                const double ratio = amplitude_scaling(hp, cfg.delta_r, std::max(cfg.t_end, 400.0), cfg.steps_per_delay);
                out << "amplitude(r* + " << detail::format(4.0 * cfg.delta_r) << ") / amplitude(r* + "
                    << detail::format(cfg.delta_r) << ") = " << detail::format(ratio) << "\n"
                    << "square-root law predicts 2\n";
                break;
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e);
    }
    return 0;
}

}  // namespace hemato::cli
