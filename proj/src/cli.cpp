#include "vorwave/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>

#include "vorwave/errors.hpp"
#include "vorwave/serialization.hpp"

namespace vorwave {

namespace {

namespace fs = std::filesystem;

void print_row(const char* name, const std::string& value) {
    std::printf("%-22s %s\n", name, value.c_str());
}

std::string opt_word(const std::optional<double>& x) {
    return x ? format_double(*x) : std::string("none");
}

// ----- dispersion ---------------------------------------------------------------------------

int do_dispersion(const RunConfig& config) {
    const DispersionSummary s = summarize_dispersion(config.params, config.mode_n);
    print_row("lambda_plus", format_double(s.lambda_plus));
    print_row("lambda_minus", format_double(s.lambda_minus));
    print_row("m_plus", format_double(s.m_plus));
    print_row("m_minus", format_double(s.m_minus));
    print_row("criterion_lhs", format_double(s.criterion_lhs));
    print_row("criterion_rhs", format_double(s.criterion_rhs));
    print_row("criterion", s.criterion_holds ? "holds" : "fails");
    print_row("k_star", opt_word(s.k_star));
    print_row("gamma_star", opt_word(s.gamma_star));
    print_row("laminar_stagnation_y", s.laminar_stagnation_y
                                          ? format_double(*s.laminar_stagnation_y)
                                          : std::string("no stagnation"));
    write_dispersion_file(config.output_dir / "dispersion.json", s);
    return 0;
}

// ----- bifurcate ----------------------------------------------------------------------------

int do_bifurcate(const RunConfig& config) {
    BifurcationSet set;
    set.params = config.params;
    set.points = find_bifurcation_points(config.params, config.mode_n, config.solver);
    for (const BifurcationPoint& pt : set.points) {
        std::printf("mode %d side %-5s lambda_star %-24s flux %-24s sigma_min %s\n", pt.mode,
                    to_string(pt.side), format_double(pt.lambda_star).c_str(),
                    format_double(pt.flux).c_str(), format_double(pt.sigma_min).c_str());
    }
    write_bifurcation_file(config.output_dir / "bifurcation.json", set);
    return 0;
}

// ----- trace --------------------------------------------------------------------------------

int do_trace(const RunConfig& config, const std::string& side_word, int n_points) {
    const BranchSide side = side_word == "plus" ? BranchSide::plus : BranchSide::minus;
    const std::vector<BifurcationPoint> points =
        find_bifurcation_points(config.params, config.mode_n, config.solver);
    const size_t slot = 2 * static_cast<size_t>(config.mode_n - 1) +
                        (side == BranchSide::plus ? 0 : 1);
    const Branch branch = trace_branch(config.params, points[slot], n_points, config.solver);

    const fs::path file = config.output_dir / ("branch_" + side_word + ".jsonl");
    write_branch_file(file, branch);
    std::printf("wrote %zu states to %s\n", branch.points.size(), file.string().c_str());
    if (!branch.fold_indices.empty()) {
        std::printf("folds at indices:");
        for (int i : branch.fold_indices) std::printf(" %d", i);
        std::printf("\n");
    }
    if (static_cast<int>(branch.points.size()) < n_points) {
        std::fprintf(stderr, "trace stopped early: %s\n", branch.truncation_reason.c_str());
        return 3;
    }
    return 0;
}

// ----- reconstruct --------------------------------------------------------------------------

int do_reconstruct(const RunConfig& config, const std::string& branch_file, int index,
                   bool emit_gnuplot) {
    const std::vector<BranchPoint> points = read_branch_file(branch_file, config.params);
    if (index < 0 || index >= static_cast<int>(points.size())) {
        std::fprintf(stderr, "index %d out of range: %s holds %zu states\n", index, branch_file.c_str(),
                     points.size());
        return 2;
    }
    WaveState state = points[static_cast<size_t>(index)].state;
    if (config.grid.nx > 0 && config.grid.nx != state.w.n_points())
        state.w = state.w.resampled(config.grid.nx / 2);

    const StripField field = stream_function(state, conformal_map(state, 0.0, config.grid.ny));
    const SurfaceCurve curve = surface_geometry(state, 0.0);
    const StagnationReport report = find_stagnation(field);

    const std::string tag = std::to_string(index);
    write_field_file(config.output_dir / ("field_" + tag + ".json"), field);
    write_stagnation_file(config.output_dir / ("stagnation_" + tag + ".json"), report);
    const fs::path surface_file = config.output_dir / ("surface_" + tag + ".csv");
    write_surface_csv(surface_file, curve);
    if (emit_gnuplot) {
        const std::string script = "set datafile separator ','\n"
                                   "set key off\n"
                                   "set xlabel 'X'\n"
                                   "set ylabel 'Y'\n"
                                   "plot 'surface_" +
                                   tag + ".csv' skip 1 using 1:2 with lines\n";
        std::FILE* out = std::fopen((config.output_dir / ("surface_" + tag + ".gp")).c_str(), "wb");
        if (out) {
            std::fputs(script.c_str(), out);
            std::fclose(out);
        }
    }
    std::printf("grid %d x %d, stagnation points %zu, critical layer %s\n", field.nx, field.ny,
                report.points.size(), report.has_critical_layer ? "yes" : "no");
    return 0;
}

// ----- sweep --------------------------------------------------------------------------------

int do_sweep(const RunConfig& config, double h_min, double h_max, int h_count,
             bool emit_gnuplot) {
    const SurfaceSweep sweep =
        sweep_surface(config.params, h_min, h_max, h_count, config.solver, 0);
    write_sweep_csv(config.output_dir / "sweep.csv", sweep);
    if (emit_gnuplot) {
        const std::string script =
            "set datafile separator ','\n"
            "set xlabel 'h'\n"
            "set ylabel 'm'\n"
            "plot 'sweep.csv' skip 4 using 1:2 with lines title 'm_plus', \\\n"
            "     'sweep.csv' skip 4 using 1:3 with lines title 'm_minus'\n";
        std::FILE* out = std::fopen((config.output_dir / "sweep.gp").c_str(), "wb");
        if (out) {
            std::fputs(script.c_str(), out);
            std::fclose(out);
        }
    }
    print_row("h_star", opt_word(sweep.h_star));
    print_row("h_star_residual", format_double(sweep.h_star_residual));
    print_row("h_criterion", opt_word(sweep.h_criterion));
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"spectral solver for periodic traveling gravity water waves with constant vorticity"};
    app.name("vorwave");
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_file, out_dir, side = "plus", branch_file;
    int modes = 0, n_points = 20, index = 0, h_count = 100;
    double seed = 0.0, h_min = 0.1, h_max = 5.0;
    bool emit_gnuplot = false;

    CLI::Option* config_opt =
        app.add_option("--config", config_file, "JSON run configuration file");
    CLI::Option* out_opt = app.add_option("--out", out_dir, "output directory (overrides config)");
    CLI::Option* modes_opt =
        app.add_option("--modes", modes, "cosine modes carried by the solver (overrides config)");
    CLI::Option* seed_opt = app.add_option(
        "--seed-amplitude", seed, "initial branch step in amplitude (overrides config ds)");
    app.add_flag("--emit-gnuplot", emit_gnuplot, "write companion gnuplot scripts for CSV files");

    CLI::App* dispersion_cmd = app.add_subcommand(
        "dispersion", "laminar wave speeds, bifurcating fluxes and stagnation thresholds");
    CLI::App* bifurcate_cmd =
        app.add_subcommand("bifurcate", "locate bifurcation points for modes 1..mode_n");
    CLI::App* trace_cmd = app.add_subcommand("trace", "follow a branch of nontrivial waves");
    trace_cmd->add_option("--side", side, "branch side: plus or minus")
        ->check(CLI::IsMember({"plus", "minus"}));
    trace_cmd->add_option("--points", n_points, "number of states to record")
        ->check(CLI::PositiveNumber);
    CLI::App* reconstruct_cmd =
        app.add_subcommand("reconstruct", "rebuild the flow field under a traced state");
    reconstruct_cmd->add_option("--branch", branch_file, "branch file produced by trace")
        ->required();
    reconstruct_cmd->add_option("--index", index, "state index within the branch file");
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "bifurcation loci over a range of mean depths");
    sweep_cmd->add_option("--h-min", h_min, "first depth")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--h-max", h_max, "last depth")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--h-count", h_count, "number of depth samples")
        ->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig config;
        if (config_opt->count()) config = load_run_config(config_file);
        if (out_opt->count()) config.output_dir = out_dir;
        if (modes_opt->count()) config.solver.n_modes = modes;
        if (seed_opt->count()) config.solver.ds = seed;
        config.validate();
        fs::create_directories(config.output_dir);

        if (*dispersion_cmd) return do_dispersion(config);
        if (*bifurcate_cmd) return do_bifurcate(config);
        if (*trace_cmd) return do_trace(config, side, n_points);
        if (*reconstruct_cmd) return do_reconstruct(config, branch_file, index, emit_gnuplot);
        if (*sweep_cmd) return do_sweep(config, h_min, h_max, h_count, emit_gnuplot);
        std::fprintf(stderr, "no command selected\n");
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const RejectedStateError& e) {
        std::fprintf(stderr, "state rejected (%s): %s\n", e.condition.c_str(), e.what());
        return 4;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "solver divergence: %s\n", e.what());
        return 3;
    } catch (const SingularJacobianError& e) {
        std::fprintf(stderr, "singular linearization: %s\n", e.what());
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "filesystem error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace vorwave
