// hemato: analysis of the delayed hematopoiesis model from the command line.
//
//   hemato <command> --config FILE [overrides] [options]

#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "hemato/cli.hpp"

namespace {

std::optional<hemato::cli::RGrid> parse_grid(const std::string& s) {
    const auto a = s.find(':');
    const auto b = s.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) return std::nullopt;
    try {
        std::size_t used = 0;
        hemato::cli::RGrid g;
        g.lo = std::stod(s.substr(0, a));
        g.hi = std::stod(s.substr(a + 1, b - a - 1));
        const std::string cnt = s.substr(b + 1);
        g.count = std::stoi(cnt, &used);
        if (used != cnt.size() || g.count < 1 || !(g.hi >= g.lo) || !(g.lo > 0.0)) return std::nullopt;
        return g;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

int main(int argc, char** argv) {
    using hemato::cli::Command;

    CLI::App app{"Stability, Hopf and normal-form analysis of the delayed hematopoiesis model"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::string> out_path;
    hemato::cli::Overrides ov;
    std::optional<double> t_end;
    std::optional<int> steps;
    std::optional<std::pair<double, double>> bracket;
    std::optional<double> delta_r;
    std::optional<std::string> grid_text;
    std::optional<std::size_t> stride;
    std::optional<double> transient;

    app.add_option("-c,--config", config_path, "parameter file (key = value)")->required();
    app.add_option("-o,--out", out_path, "write CSV here instead of stdout");
    app.add_option("--beta0", ov.beta0, "override beta0");
    app.add_option("--n", ov.n, "override n");
    app.add_option("--delta", ov.delta, "override delta");
    app.add_option("--gamma", ov.gamma, "override gamma");
    app.add_option("--k", ov.k, "override k");
    app.add_option("--r", ov.r, "override the delay r (gamma kept)");
    app.add_option("--t-end", t_end, "integration horizon")->check(CLI::PositiveNumber);
    app.add_option("--steps-per-delay", steps, "RK4 steps per delay interval")->check(CLI::Range(50, 1000000));
    app.add_option("--bracket", bracket, "r bracket lo,hi for the g-root search")->delimiter(',');
    app.add_option("--delta-r", delta_r, "offset from r* for the scaling test")->check(CLI::PositiveNumber);
    app.add_option("--r-grid", grid_text, "r grid lo:hi:count");
    app.add_option("--stride", stride, "write every stride-th node")->check(CLI::PositiveNumber);
    app.add_option("--transient", transient, "fraction of the run discarded before orbit metrics")
        ->check(CLI::Range(0.0, 1.0));

    const std::pair<const char*, Command> commands[] = {
        {"validate", Command::validate},     {"equilibria", Command::equilibria},
        {"stability", Command::stability},   {"hopf", Command::hopf},
        {"normal-form", Command::normal_form}, {"simulate", Command::simulate},
        {"sweep", Command::sweep},           {"scaling", Command::scaling},
    };
    const char* help[] = {
        "check the config and print parameters",
        "print both equilibria, r_max and r_n",
        "classify x1 and x2; CSV over --r-grid",
        "Hopf point by both routes",
        "center-manifold normal form and l1",
        "integrate and write the t,x CSV",
        "orbit metrics CSV over --r-grid",
        "amplitude ratio at r*+4dr vs r*+dr",
    };
    Command chosen = Command::validate;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        auto* sub = app.add_subcommand(commands[i].first, help[i]);
        const Command c = commands[i].second;
        sub->callback([&chosen, c] { chosen = c; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        auto cfg = hemato::cli::load_config(config_path);
        hemato::cli::apply_overrides(cfg, ov);
        cfg.command = chosen;
        cfg.output_path = out_path;
        if (t_end) cfg.t_end = *t_end;
        if (steps) cfg.steps_per_delay = *steps;
        if (bracket) {
            if (!(bracket->first > 0.0 && bracket->second > bracket->first))
                throw hemato::ConfigError(0, "--bracket needs 0 < lo < hi");
            cfg.bracket = bracket;
        }
        if (delta_r) cfg.delta_r = *delta_r;
        if (grid_text) {
            cfg.r_grid = parse_grid(*grid_text);
            if (!cfg.r_grid) throw hemato::ConfigError(0, "--r-grid expects lo:hi:count with 0 < lo <= hi, count >= 1");
        }
        if (stride) cfg.stride = *stride;
        if (transient) {
            if (!(*transient > 0.0 && *transient < 1.0)) throw hemato::ConfigError(0, "--transient must lie in (0, 1)");
            cfg.transient_fraction = *transient;
        }
        return hemato::cli::run(cfg, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hemato::cli::exit_code(e);
    }
}
