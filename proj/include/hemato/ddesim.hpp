#pragma once

// Method-of-steps integration of the model with fixed-step RK4 on a grid
// aligned with the delay, plus orbit diagnostics on the result.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hemato/errors.hpp"
#include "hemato/hopf.hpp"
#include "hemato/linstab.hpp"
#include "hemato/model.hpp"

namespace hemato {

struct HistoryFunction {
    std::function<double(double)> evaluator;
    std::string description;

    double operator()(double s) const { return evaluator(s); }

    /// phi(s) = cos(pi s / (2 r)).
    static HistoryFunction cosine(double r) {
        return {[r](double s) { return std::cos(std::numbers::pi * s / (2.0 * r)); },
                "cos(pi s / 2r)"};
    }

    static HistoryFunction constant(double value) {
        return {[value](double) { return value; }, "constant " + std::to_string(value)};
    }

    /// center + eps cos(pi s / (2 r)).
    static HistoryFunction perturbed_cosine(double center, double eps, double r) {
        return {[=](double s) { return center + eps * std::cos(std::numbers::pi * s / (2.0 * r)); },
                "x2 + eps cos(pi s / 2r)"};
    }
};

struct Trajectory {
    std::vector<double> t;
    std::vector<double> x;
    /// Right-hand side at each node, used for Hermite interpolation.
    std::vector<double> dx;
    double step;
    int steps_per_delay;
    ModelParameters params;
};

inline constexpr int kDefaultStepsPerDelay = 200;
inline constexpr double kDefaultTEnd = 200.0;

/// Classical RK4 with h = r / steps_per_delay. Delayed values at full steps
/// are grid nodes (or the history); half-step delayed values use the cubic
/// Hermite interpolant through the stored (x, dx) of the bracketing cell.
inline Trajectory integrate(const ModelParameters& params, const HistoryFunction& history,
                            double t_end, int steps_per_delay = kDefaultStepsPerDelay) {
    if (!(params.r > 0.0)) throw InvalidParameter("integrate: r must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidParameter("integrate: t_end must be positive");
    if (steps_per_delay < 50) throw InvalidParameter("integrate: steps_per_delay must be >= 50");

    const int m = steps_per_delay;
    const double r = params.r;
    const double h = r / m;
    const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));

    Trajectory tr{{}, {}, {}, h, m, params};
    tr.t.reserve(n_steps + 1);
    tr.x.reserve(n_steps + 1);
    tr.dx.reserve(n_steps + 1);

    // x(t_i - r) for node i
    auto delayed_node = [&](std::size_t i) {
        if (i < static_cast<std::size_t>(m)) return history(static_cast<double>(i) * h - r);
        return tr.x[i - static_cast<std::size_t>(m)];
    };
    // x(t_i + h/2 - r)
    auto delayed_mid = [&](std::size_t i) {
        if (i + 1 <= static_cast<std::size_t>(m)) return history((static_cast<double>(i) + 0.5) * h - r);
        const std::size_t j = i - static_cast<std::size_t>(m);
        return 0.5 * (tr.x[j] + tr.x[j + 1]) + 0.125 * h * (tr.dx[j] - tr.dx[j + 1]);
    };

    tr.t.push_back(0.0);
    tr.x.push_back(history(0.0));
    tr.dx.push_back(model_rhs(tr.x[0], delayed_node(0), params));
    if (!std::isfinite(tr.x[0]) || !std::isfinite(tr.dx[0])) throw BlowUp(0.0);

    for (std::size_t i = 0; i < n_steps; ++i) {
        const double xi = tr.x[i];
        const double d_mid = delayed_mid(i);
        const double d_end = delayed_node(i + 1);
        const double k1 = tr.dx[i];
        const double k2 = model_rhs(xi + 0.5 * h * k1, d_mid, params);
        const double k3 = model_rhs(xi + 0.5 * h * k2, d_mid, params);
        const double k4 = model_rhs(xi + h * k3, d_end, params);
        const double xn = xi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double tn = static_cast<double>(i + 1) * h;
        const double dn = model_rhs(xn, d_end, params);
        if (!std::isfinite(xn) || !std::isfinite(dn)) throw BlowUp(tn);
        tr.t.push_back(tn);
        tr.x.push_back(xn);
        tr.dx.push_back(dn);
    }
    return tr;
}

/// Writes `t,x` CSV with 17 significant digits, every `stride`-th node.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, std::size_t stride = 1) {
    if (stride == 0) stride = 1;
    os << "t,x\n";
    char buf[64];
    for (std::size_t i = 0; i < tr.t.size(); i += stride) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", tr.t[i], tr.x[i]);
        os << buf;
    }
}

struct Extremum {
    double t;
    double x;
    bool is_max;
};

/// Local extrema of x at nodes with index >= first, by 3-point comparison,
/// refined through the vertex of the interpolating parabola.
inline std::vector<Extremum> find_extrema(const Trajectory& tr, std::size_t first = 0) {
    std::vector<Extremum> out;
    const auto& x = tr.x;
    const double h = tr.step;
    for (std::size_t i = std::max<std::size_t>(first, 1); i + 1 < x.size(); ++i) {
        const bool is_max = x[i] > x[i - 1] && x[i] >= x[i + 1];
        const bool is_min = x[i] < x[i - 1] && x[i] <= x[i + 1];
        if (!is_max && !is_min) continue;
        const double curv = x[i - 1] - 2.0 * x[i] + x[i + 1];
        double off = 0.0;
        if (curv != 0.0) off = std::clamp(0.5 * (x[i - 1] - x[i + 1]) / curv, -0.5, 0.5);
        out.push_back({tr.t[i] + off * h, x[i] - 0.25 * (x[i - 1] - x[i + 1]) * off, is_max});
    }
    return out;
}

enum class OrbitKind { equilibrium, cycle, undetermined };

inline const char* to_string(OrbitKind k) {
    switch (k) {
        case OrbitKind::equilibrium: return "equilibrium";
        case OrbitKind::cycle: return "cycle";
        case OrbitKind::undetermined: return "undetermined";
    }
    return "?";
}

struct OrbitMetrics {
    OrbitKind kind = OrbitKind::undetermined;
    /// Half peak-to-trough, averaged over the last (up to five) pairs.
    double amplitude = 0.0;
    /// Mean spacing of successive maxima.
    std::optional<double> period;
    /// max |x - x2| over the last tenth of the trajectory.
    double distance_to_x2 = 0.0;
    /// Half peak-to-trough for each successive max/min pair in the window.
    std::vector<double> envelope;
};

inline constexpr double kAmplitudeFloor = 1e-6;
inline constexpr double kCycleSpread = 0.05;

inline OrbitMetrics orbit_metrics(const Trajectory& tr, double transient_fraction = 0.5) {
    if (!(transient_fraction > 0.0 && transient_fraction < 1.0))
        throw InvalidParameter("orbit_metrics: transient_fraction must lie in (0, 1)");
    OrbitMetrics om;
    if (tr.x.size() < 3) return om;

    const auto rep = equilibria(tr.params);
    const double center = rep.x2.value_or(0.0);

    const double t_end = tr.t.back();
    const auto first = static_cast<std::size_t>(
        std::lower_bound(tr.t.begin(), tr.t.end(), transient_fraction * t_end) - tr.t.begin());
    const auto tail = static_cast<std::size_t>(
        std::lower_bound(tr.t.begin(), tr.t.end(), 0.9 * t_end) - tr.t.begin());
    for (std::size_t i = tail; i < tr.x.size(); ++i)
        om.distance_to_x2 = std::max(om.distance_to_x2, std::abs(tr.x[i] - center));

    const auto [lo, hi] = std::minmax_element(tr.x.begin() + static_cast<std::ptrdiff_t>(first), tr.x.end());
    const double range = *hi - *lo;

    const auto ext = find_extrema(tr, first);
    // pair each maximum with the following minimum
    std::vector<double> maxima_t;
    for (std::size_t i = 0; i < ext.size(); ++i) {
        if (ext[i].is_max) maxima_t.push_back(ext[i].t);
        if (ext[i].is_max && i + 1 < ext.size() && !ext[i + 1].is_max)
            om.envelope.push_back(0.5 * (ext[i].x - ext[i + 1].x));
    }
    const std::size_t n_tail = std::min<std::size_t>(5, om.envelope.size());
    if (n_tail > 0) {
        double sum = 0.0;
        for (std::size_t i = om.envelope.size() - n_tail; i < om.envelope.size(); ++i) sum += om.envelope[i];
        om.amplitude = sum / static_cast<double>(n_tail);
    } else {
        om.amplitude = 0.5 * range;
    }
    if (maxima_t.size() >= 2)
        om.period = (maxima_t.back() - maxima_t.front()) / static_cast<double>(maxima_t.size() - 1);

    if (range < kAmplitudeFloor) {
        om.kind = OrbitKind::equilibrium;
        return om;
    }
    if (ext.size() < 10 || om.envelope.size() < 2) {
        om.kind = OrbitKind::undetermined;
        return om;
    }

    const auto [emin, emax] = std::minmax_element(om.envelope.begin(), om.envelope.end());
    double mean = 0.0;
    for (double e : om.envelope) mean += e;
    mean /= static_cast<double>(om.envelope.size());
    if (om.amplitude > kAmplitudeFloor && (*emax - *emin) < kCycleSpread * mean) {
        om.kind = OrbitKind::cycle;
        return om;
    }

    bool decreasing = true;
    for (std::size_t i = 1; i < om.envelope.size(); ++i) {
        // roundoff-level wiggle once the orbit has settled
        if (om.envelope[i] > om.envelope[i - 1] * (1.0 + 1e-6) + 1e-12) {
            decreasing = false;
            break;
        }
    }
    om.kind = decreasing ? OrbitKind::equilibrium : OrbitKind::undetermined;
    return om;
}

/// amplitude(r* + 4 delta_r) / amplitude(r* + delta_r) with gamma* fixed;
/// close to 2 near a supercritical Hopf point.
inline double amplitude_scaling(const HopfPoint& hp, double delta_r, double t_end = 400.0,
                                int steps_per_delay = kDefaultStepsPerDelay) {
    if (!(delta_r > 0.0)) throw InvalidParameter("amplitude_scaling: delta_r must be positive");
    double amp[2];
    const double offsets[2] = {delta_r, 4.0 * delta_r};
    for (int i = 0; i < 2; ++i) {
        const auto prm = hp.params.with_r(hp.r_star + offsets[i]);
        if (!prm.x2_exists()) throw InvalidParameter("amplitude_scaling: r* + 4 delta_r exceeds r_max");
        const auto traj = integrate(prm, HistoryFunction::cosine(prm.r), t_end, steps_per_delay);
        const auto om = orbit_metrics(traj, 0.5);
        if (om.kind != OrbitKind::cycle)
            throw Inconclusive("amplitude_scaling: run at r = " + std::to_string(prm.r) +
                               " is not a cycle (" + to_string(om.kind) + ")");
        amp[i] = om.amplitude;
    }
    return amp[1] / amp[0];
}

}  // namespace hemato
