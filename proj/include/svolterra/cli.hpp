#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svolterra/csv.hpp"
#include "svolterra/engine.hpp"
#include "svolterra/experiments.hpp"
#include "svolterra/fractional.hpp"
#include "svolterra/path_independence.hpp"
#include "svolterra/selftest.hpp"
#include "svolterra/spde.hpp"

namespace sve {

namespace cli_detail {

// kernel spec grammar: powerlaw:alpha=0.25 | fbm-simple:H=0.25,C=1 |
// fbm-exact:H=0.25 (the Greek letter is accepted for alpha)
inline SingularKernel parse_kernel(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string variant = spec.substr(0, colon);
    double alpha = 0.25, H = 0.25, C = 1.0;
    if (colon != std::string::npos) {
        std::string rest = spec.substr(colon + 1);
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("kernel spec: expected key=value in '" + item + "'");
            std::string key = item.substr(0, eq);
            const double value = std::stod(item.substr(eq + 1));
            if (key == "alpha" || key == "a" || key == "\xce\xb1")
                alpha = value;
            else if (key == "H" || key == "h")
                H = value;
            else if (key == "C" || key == "c")
                C = value;
            else
                throw std::invalid_argument("kernel spec: unknown key '" + key + "'");
        }
    }
    if (variant == "powerlaw" || variant == "power-law")
        return SingularKernel::power_law(alpha);
    if (variant == "fbm-simple") return SingularKernel::fbm_simple(H, C);
    if (variant == "fbm-exact") return SingularKernel::fbm_exact(H);
    throw std::invalid_argument("kernel spec: unknown variant '" + variant +
                                "' (want powerlaw | fbm-simple | fbm-exact)");
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(static_cast<std::size_t>(std::stoull(item)));
    return out;
}

inline std::string join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

} // namespace cli_detail

// Command-line surface; exit 0 on success, 2 on parameter errors, 3 on
// numerical errors.
inline int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"stochastic Volterra equation simulation and verification toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config")->description("key=value file; command-line flags take precedence");

    std::string kernel_spec = "powerlaw:alpha=0.25";
    std::string fixture_name = "lipschitz";
    double T = 1.0, p = 6.0, x0 = 0.5;
    std::size_t n = 512, paths = 1000, workers = 1, zprobes = 41;
    std::uint64_t seed = 1;
    std::string out_dir = ".";

    app.add_option("--kernel", kernel_spec,
                   "kernel spec: powerlaw:alpha=A | fbm-simple:H=H,C=C | fbm-exact:H=H");
    app.add_option("--fixture", fixture_name,
                   "coefficient fixture: lipschitz | holder | deterministic | additive | frozen");
    app.add_option("--T", T, "time horizon");
    app.add_option("--n", n, "time steps");
    app.add_option("--paths", paths, "Monte Carlo paths");
    app.add_option("--p", p, "moment order");
    app.add_option("--seed", seed, "base seed; path k uses a fixed sub-seed mix(seed, k)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "worker threads (results are worker-count independent)");
    app.add_option("--x0", x0, "initial value");
    app.add_option("--z-probes", zprobes, "number of z probes for residual scans");

    auto* sim = app.add_subcommand("simulate", "solve one path and write t,value CSV");
    std::size_t mollify_m = 0;
    sim->add_option("--mollify-m", mollify_m, "mollify coefficients at width 1/m (0 = off)");

    auto* field_cmd = app.add_subcommand("field", "solve the trace and write a field snapshot at T");
    std::size_t field_points = 257;
    field_cmd->add_option("--points", field_points, "snapshot points across the spatial span");

    auto* verify = app.add_subcommand("verify-pi",
                                   "derive (g1,g2) from v and scan the characterizing system");

    auto* moment = app.add_subcommand("mc-moment", "Monte Carlo moment table at dyadic times");

    auto* holder = app.add_subcommand("mc-holder", "Holder-modulus table and log-log slope");
    std::string lags_spec;
    holder->add_option("--lags", lags_spec, "comma-separated lags (default T/16,T/8,T/4)");

    auto* conv = app.add_subcommand("convergence", "coupled grid-refinement study");
    std::string levels_spec = "256,512,1024";
    conv->add_option("--levels", levels_spec, "comma-separated dyadic levels");

    auto* self = app.add_subcommand("selftest", "run the cross-module invariant suite");

    std::vector<const char*> argv;
    argv.push_back("svolterra");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        SingularKernel kernel = cli_detail::parse_kernel(kernel_spec);
        ExperimentConfig cfg;
        cfg.kernel = kernel;
        cfg.fixture_name = fixture_name;
        cfg.T = T;
        cfg.n = n;
        cfg.n_paths = paths;
        cfg.p = p;
        cfg.seed = seed;
        cfg.x0 = x0;
        cfg.workers = workers;
        cfg.z_probe_count = zprobes;
        std::filesystem::create_directories(out_dir);

        if (sim->parsed()) {
            TimeGrid grid(T, n);
            BrownianDriver driver(seed, grid);
            CoefficientPair coeffs = cfg.coefficients();
            if (mollify_m > 0)
                coeffs = CoefficientPair(mollify(coeffs.b, mollify_m),
                                         mollify(coeffs.sigma, mollify_m), coeffs.name);
            SamplePath path = euler_solve(kernel, coeffs, driver, [x0](double) { return x0; });
            write_path_csv(cli_detail::join(out_dir, "path.csv"), path);
            std::cout << "wrote " << cli_detail::join(out_dir, "path.csv") << "\n";
            return 0;
        }

        if (field_cmd->parsed()) {
            const double alpha = kernel.singularity_exponent();
            ThetaHeatKernel heat = ThetaHeatKernel::from_alpha(alpha);
            TimeGrid grid(T, n);
            BrownianDriver driver(seed, grid);
            FieldSolution sol =
                solve_trace(heat, InitialCondition::constant(x0), cfg.coefficients(), driver);
            const double R = 8.0 * std::pow(T, alpha) * std::max(1.0, heat.theta());
            CsvTable table;
            table.header = {"x", "value"};
            for (std::size_t i = 0; i < field_points; ++i) {
                const double x = -R + 2.0 * R * static_cast<double>(i) /
                                          static_cast<double>(field_points - 1);
                table.rows.push_back({x, field_evaluate(sol, grid.n, x)});
            }
            write_csv(cli_detail::join(out_dir, "field.csv"), table);
            write_sidecar(cli_detail::join(out_dir, "field.meta"),
                          {{"t", format_double(T)},
                           {"theta", format_double(heat.theta())},
                           {"seed", std::to_string(seed)}});
            std::cout << "wrote " << cli_detail::join(out_dir, "field.csv") << "\n";
            return 0;
        }

        if (verify->parsed()) {
            TimeGrid grid(T, n);
            BrownianDriver driver(seed, grid);
            CoefficientPair coeffs = cfg.coefficients();
            const double alpha = kernel.singularity_exponent();
            ThetaHeatKernel heat = ThetaHeatKernel::from_alpha(alpha);
            // the fBm-simple kernel carries its C into the coefficients
            CoefficientPair effective = coeffs;
            if (kernel.variant() == SingularKernel::Variant::fbm_simple &&
                kernel.scale() != 1.0) {
                const double C = kernel.scale();
                auto bs = coeffs.b, ss = coeffs.sigma;
                effective = CoefficientPair(
                    HolderCoefficient([bs, C](double t, double x) { return C * bs(t, x); },
                                      bs.gamma, C * bs.L, bs.decreasing_in_x, "C*" + bs.name),
                    HolderCoefficient([ss, C](double t, double x) { return C * ss(t, x); },
                                      ss.gamma, C * ss.L, ss.decreasing_in_x, "C*" + ss.name),
                    coeffs.name);
            }
            SamplePath path = euler_solve(kernel, coeffs, driver, [x0](double) { return x0; });
            CandidateV v = candidate_exp_sin();
            AdditiveFunctional af = derive_g_from_v(v, effective, heat.c_theta());
            ResidualReport rep = residual_scan(v, af, effective, heat.c_theta(), path, driver,
                                               default_z_probes(path, zprobes));
            rep.to_csv(cli_detail::join(out_dir, "residuals.csv"));
            std::ofstream sum(cli_detail::join(out_dir, "summary.txt"), std::ios::binary);
            sum << rep.summary();
            std::cout << rep.summary();
            return 0;
        }

        if (moment->parsed()) {
            auto rows = mc_moment(cfg);
            CsvTable table;
            table.header = {"t", "p", "estimate", "stderr"};
            for (const auto& r : rows) table.rows.push_back({r.t, r.p, r.estimate, r.stderr_});
            write_csv(cli_detail::join(out_dir, "moments.csv"), table);
            std::cout << "wrote " << cli_detail::join(out_dir, "moments.csv") << "\n";
            return 0;
        }

        if (holder->parsed()) {
            std::vector<double> lags = lags_spec.empty()
                                           ? std::vector<double>{T / 16.0, T / 8.0, T / 4.0}
                                           : cli_detail::parse_double_list(lags_spec);
            auto res = mc_holder_modulus(cfg, lags);
            CsvTable table;
            table.header = {"delta", "p", "estimate"};
            for (const auto& r : res.rows) table.rows.push_back({r.lag, r.p, r.estimate});
            write_csv(cli_detail::join(out_dir, "holder.csv"), table);
            std::ofstream sum(cli_detail::join(out_dir, "holder_summary.txt"), std::ios::binary);
            sum << "slope=" << format_double(res.slope) << "\n"
                << "predicted_floor=" << format_double(res.predicted_floor) << "\n";
            std::cout << "slope " << format_double(res.slope) << ", predicted exponent floor "
                      << format_double(res.predicted_floor) << "\n";
            return 0;
        }

        if (conv->parsed()) {
            auto levels = cli_detail::parse_size_list(levels_spec);
            auto res = convergence_study(cfg, levels);
            CsvTable table;
            table.header = {"n", "gap_to_next"};
            for (const auto& r : res.rows)
                table.rows.push_back({static_cast<double>(r.n), r.gap});
            write_csv(cli_detail::join(out_dir, "convergence.csv"), table);
            std::ofstream sum(cli_detail::join(out_dir, "convergence_summary.txt"),
                              std::ios::binary);
            sum << "slope=" << format_double(res.slope) << "\n";
            std::cout << "slope " << format_double(res.slope) << "\n";
            return 0;
        }

        if (self->parsed()) {
            auto entries = run_selftest();
            bool all_ok = true;
            for (const auto& e : entries) {
                std::cout << (e.ok ? "ok   " : "FAIL ") << e.name << " (" << e.detail << ")\n";
                all_ok = all_ok && e.ok;
            }
            if (!all_ok) return 3;
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

} // namespace sve
