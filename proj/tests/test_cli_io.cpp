#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vorwave/cli.hpp"
#include "vorwave/errors.hpp"
#include "vorwave/serialization.hpp"

using namespace vorwave;

namespace fs = std::filesystem;

namespace {

const PhysicalParams kVortex{2.0, 1.0, 1.0, 1.0};

SolverConfig fast_config() {
    SolverConfig config;
    config.n_modes = 32;
    config.ds = 5e-3;
    return config;
}

// Fresh scratch directory per test, wiped on entry so reruns are clean.
fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("vorwave_io_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string vortex_config_json(const fs::path& out_dir, int ny = 48) {
    return "{\n"
           "  \"params\": {\"gamma\": 2.0, \"g\": 1.0, \"k\": 1.0, \"h\": 1.0},\n"
           "  \"solver\": {\"n_modes\": 32, \"ds\": 0.005},\n"
           "  \"mode_n\": 1,\n"
           "  \"output_dir\": \"" +
           out_dir.string() + "\",\n  \"grid\": {\"nx\": 0, \"ny\": " + std::to_string(ny) +
           "}\n}\n";
}

fs::path write_file(const fs::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    out << content;
    return file;
}

Branch traced_minus_branch(int n_points) {
    const SolverConfig config = fast_config();
    const auto points = find_bifurcation_points(kVortex, 1, config);
    return trace_branch(kVortex, points[1], n_points, config);
}

}  // namespace

TEST_CASE("seventeen digit doubles survive a text round trip") {
    const std::vector<double> samples = {0.0,
                                         1.0 / 3.0,
                                         3.141592653589793,
                                         -2.2250738585072014e-308,
                                         1e300,
                                         0.1 + 0.2,
                                         -0.9198772881569286,
                                         2.220446049250313e-16};
    for (double x : samples) {
        const std::string text = format_double(x);
        CHECK(std::strtod(text.c_str(), nullptr) == x);
    }
    CHECK(format_double(-0.0) == "-0");
    CHECK_THROWS_AS(format_double(std::nan("")), Error);
    CHECK_THROWS_AS(format_double(HUGE_VAL), Error);
}

TEST_CASE("run config parsing: defaults, full files, and round trips") {
    const RunConfig defaults = parse_run_config("{}");
    CHECK(defaults.params.gamma == 0.0);
    CHECK(defaults.params.h == 1.0);
    CHECK(defaults.solver.n_modes == 128);
    CHECK(defaults.mode_n == 1);
    CHECK(defaults.grid.nx == 0);
    CHECK(defaults.grid.ny == 64);
    CHECK(defaults.output_dir == fs::path("."));

    const std::string full =
        "{\"params\": {\"gamma\": 2.0, \"g\": 2.5, \"k\": 0.5, \"h\": 3.0},"
        " \"solver\": {\"newton_tol\": 1e-10, \"max_newton_iters\": 12, \"ds\": 0.002,"
        " \"n_modes\": 64}, \"mode_n\": 2, \"output_dir\": \"waves/out\","
        " \"grid\": {\"nx\": 256, \"ny\": 33}}";
    const RunConfig c = parse_run_config(full);
    CHECK(c.params.gamma == 2.0);
    CHECK(c.params.g == 2.5);
    CHECK(c.params.k == 0.5);
    CHECK(c.params.h == 3.0);
    CHECK(c.solver.newton_tol == 1e-10);
    CHECK(c.solver.max_newton_iters == 12);
    CHECK(c.solver.ds == 0.002);
    CHECK(c.solver.n_modes == 64);
    CHECK(c.mode_n == 2);
    CHECK(c.output_dir == fs::path("waves/out"));
    CHECK(c.grid.nx == 256);
    CHECK(c.grid.ny == 33);

    const RunConfig back = parse_run_config(run_config_json(c));
    CHECK(back.params.gamma == c.params.gamma);
    CHECK(back.params.g == c.params.g);
    CHECK(back.params.k == c.params.k);
    CHECK(back.params.h == c.params.h);
    CHECK(back.solver.newton_tol == c.solver.newton_tol);
    CHECK(back.solver.max_newton_iters == c.solver.max_newton_iters);
    CHECK(back.solver.ds == c.solver.ds);
    CHECK(back.solver.n_modes == c.solver.n_modes);
    CHECK(back.mode_n == c.mode_n);
    CHECK(back.output_dir == c.output_dir);
    CHECK(back.grid.nx == c.grid.nx);
    CHECK(back.grid.ny == c.grid.ny);
}

TEST_CASE("run config rejection names the offending key") {
    const auto rejects_naming = [](const std::string& text, const std::string& key) {
        try {
            parse_run_config(text);
            FAIL_CHECK("expected rejection of ", text);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(key) != std::string::npos);
        }
    };
    rejects_naming("{\"bogus\": 1}", "bogus");
    rejects_naming("{\"params\": {\"mass\": 1}}", "params.mass");
    rejects_naming("{\"solver\": {\"steps\": 3}}", "solver.steps");
    rejects_naming("{\"grid\": {\"nz\": 8}}", "grid.nz");

    CHECK_THROWS_AS(parse_run_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"mode_n\": 1.5}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"params\": {\"gamma\": \"two\"}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"params\": {\"h\": -1}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"solver\": {\"ds\": 1.0}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"grid\": {\"ny\": 1}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"grid\": {\"nx\": 7}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"mode_n\": 0}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"mode_n\": 200}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"output_dir\": \"\"}"), ConfigError);
}

TEST_CASE("dispersion summary matches the solver and survives its file") {
    const fs::path dir = temp_dir("dispersion");
    const DispersionSummary s = summarize_dispersion(kVortex, 1);
    CHECK(std::abs(s.lambda_plus - 0.3966889762453989) <= 1e-15);
    CHECK(std::abs(s.lambda_minus + 1.9198772881569286) <= 1e-15);
    CHECK(std::abs(s.m_plus - 1.396688976245399) <= 1e-15);
    CHECK(std::abs(s.m_minus + 0.9198772881569286) <= 1e-15);
    CHECK(std::abs(s.criterion_lhs - 0.7615941559557649) <= 1e-15);
    CHECK(s.criterion_rhs == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(s.criterion_holds);
    REQUIRE(s.laminar_stagnation_y.has_value());
    CHECK(std::abs(*s.laminar_stagnation_y - 0.0400613559215357) <= 1e-12);

    write_dispersion_file(dir / "dispersion.json", s);
    const DispersionSummary r = read_dispersion_file(dir / "dispersion.json");
    CHECK(r.params.gamma == s.params.gamma);
    CHECK(r.params.g == s.params.g);
    CHECK(r.params.k == s.params.k);
    CHECK(r.params.h == s.params.h);
    CHECK(r.mode_n == s.mode_n);
    CHECK(r.lambda_plus == s.lambda_plus);
    CHECK(r.lambda_minus == s.lambda_minus);
    CHECK(r.m_plus == s.m_plus);
    CHECK(r.m_minus == s.m_minus);
    CHECK(r.criterion_lhs == s.criterion_lhs);
    CHECK(r.criterion_rhs == s.criterion_rhs);
    CHECK(r.criterion_holds == s.criterion_holds);
    CHECK(r.k_star == s.k_star);
    CHECK(r.gamma_star == s.gamma_star);
    CHECK(r.laminar_stagnation_y == s.laminar_stagnation_y);

    // without vorticity neither threshold nor a still layer exists
    const DispersionSummary still = summarize_dispersion(PhysicalParams{}, 1);
    CHECK_FALSE(still.criterion_holds);
    CHECK_FALSE(still.k_star.has_value());
    CHECK_FALSE(still.gamma_star.has_value());
    CHECK_FALSE(still.laminar_stagnation_y.has_value());
    write_dispersion_file(dir / "still.json", still);
    const DispersionSummary still_back = read_dispersion_file(dir / "still.json");
    CHECK_FALSE(still_back.k_star.has_value());
    CHECK_FALSE(still_back.gamma_star.has_value());
    CHECK_FALSE(still_back.laminar_stagnation_y.has_value());
}

TEST_CASE("bifurcation points survive their file") {
    const fs::path dir = temp_dir("bifurcation");
    BifurcationSet set;
    set.params = kVortex;
    set.points = find_bifurcation_points(kVortex, 2, fast_config());
    REQUIRE(set.points.size() == 4);

    write_bifurcation_file(dir / "bifurcation.json", set);
    const BifurcationSet back = read_bifurcation_file(dir / "bifurcation.json");
    REQUIRE(back.points.size() == set.points.size());
    CHECK(back.params.gamma == set.params.gamma);
    for (size_t i = 0; i < set.points.size(); ++i) {
        const BifurcationPoint& a = set.points[i];
        const BifurcationPoint& b = back.points[i];
        CHECK(b.mode == a.mode);
        CHECK(b.side == a.side);
        CHECK(b.lambda_star == a.lambda_star);
        CHECK(b.flux == a.flux);
        CHECK(b.sigma_min == a.sigma_min);
        CHECK(b.sigma_second == a.sigma_second);
        CHECK(b.sigma_max == a.sigma_max);
        CHECK(b.null_overlap == a.null_overlap);
        CHECK(b.transversality == a.transversality);
    }
}

TEST_CASE("branch files reload exactly and the states still solve the equation") {
    const fs::path dir = temp_dir("branch");
    const Branch branch = traced_minus_branch(5);
    REQUIRE(branch.points.size() == 5);

    const fs::path file = dir / "branch_minus.jsonl";
    write_branch_file(file, branch);
    const std::vector<BranchPoint> back = read_branch_file(file, kVortex);
    REQUIRE(back.size() == branch.points.size());
    for (size_t i = 0; i < back.size(); ++i) {
        const BranchPoint& a = branch.points[i];
        const BranchPoint& b = back[i];
        CHECK(b.s == a.s);
        CHECK(b.m == a.m);
        CHECK(b.q == a.q);
        CHECK(b.residual_norm == a.residual_norm);
        CHECK(b.state.lambda == a.state.lambda);
        CHECK(b.state.mu == a.state.mu);
        CHECK(b.state.w.n_points() == a.state.w.n_points());
        CHECK(b.state.w.cos_coeffs() == a.state.w.cos_coeffs());
        CHECK(b.state.w.mean() == 0.0);
        CHECK(b.validity.surface_above_bed == a.validity.surface_above_bed);
        CHECK(b.validity.graph == a.validity.graph);
        CHECK(b.validity.injective == a.validity.injective);
        // the reloaded state still satisfies the wave equation
        CHECK(residual(b.state).max_norm() <= 1e-10);
    }

    // writing the reloaded points again reproduces the file byte for byte
    Branch copy = branch;
    copy.points = back;
    write_branch_file(dir / "again.jsonl", copy);
    CHECK(slurp(dir / "again.jsonl") == slurp(file));
}

TEST_CASE("field, stagnation and surface files reload exactly") {
    const fs::path dir = temp_dir("field");
    const Branch branch = traced_minus_branch(3);
    const WaveState& state = branch.points[2].state;

    const StripField field = stream_function(state, conformal_map(state, 0.25, 16));
    write_field_file(dir / "field.json", field);
    const FieldRecord rec = read_field_file(dir / "field.json");
    CHECK(rec.nx == field.nx);
    CHECK(rec.ny == field.ny);
    CHECK(rec.strip_depth == kVortex.strip_depth());
    CHECK(rec.a_offset == 0.25);
    CHECK(rec.U == field.U);
    CHECK(rec.V == field.V);
    CHECK(rec.psi == field.psi);
    CHECK(rec.velocity_x == field.velocity_x);
    CHECK(rec.velocity_y == field.velocity_y);

    const StagnationReport report = find_stagnation(field);
    write_stagnation_file(dir / "stagnation.json", report);
    const StagnationReport back = read_stagnation_file(dir / "stagnation.json");
    CHECK(back.has_critical_layer == report.has_critical_layer);
    CHECK(back.laminar_line_y == report.laminar_line_y);
    CHECK(back.notes == report.notes);
    REQUIRE(back.points.size() == report.points.size());
    for (size_t i = 0; i < report.points.size(); ++i) {
        CHECK(back.points[i].x == report.points[i].x);
        CHECK(back.points[i].y == report.points[i].y);
        CHECK(back.points[i].type == report.points[i].type);
        CHECK(back.points[i].strip_x == report.points[i].strip_x);
        CHECK(back.points[i].strip_y == report.points[i].strip_y);
    }

    const SurfaceCurve curve = surface_geometry(state, 0.0);
    write_surface_csv(dir / "surface.csv", curve);
    const SurfaceRecord sback = read_surface_csv(dir / "surface.csv");
    CHECK(sback.x == curve.X);
    CHECK(sback.y == curve.Y);
    REQUIRE(static_cast<int>(sback.theta0.size()) == curve.theta0.n_points());
    for (size_t i = 0; i < sback.theta0.size(); ++i)
        CHECK(sback.theta0[i] == curve.theta0.value(static_cast<int>(i)));
}

TEST_CASE("sweep files reload exactly") {
    const fs::path dir = temp_dir("sweep");
    const SurfaceSweep sweep = sweep_surface(kVortex, 0.5, 3.0, 8, fast_config());
    REQUIRE(sweep.h_star.has_value());

    write_sweep_csv(dir / "sweep.csv", sweep);
    const SweepRecord rec = read_sweep_csv(dir / "sweep.csv");
    CHECK(rec.h_star == sweep.h_star);
    CHECK(rec.h_star_residual == sweep.h_star_residual);
    CHECK(rec.h_criterion == sweep.h_criterion);
    REQUIRE(rec.rows.size() == sweep.rows.size());
    for (size_t i = 0; i < rec.rows.size(); ++i) {
        const SweepRow& a = sweep.rows[i];
        const SweepRow& b = rec.rows[i];
        CHECK(b.h == a.h);
        CHECK(b.m_plus == a.m_plus);
        CHECK(b.m_minus == a.m_minus);
        CHECK(b.stagnation_holds == a.stagnation_holds);
        CHECK(b.h_star_bracket == a.h_star_bracket);
        CHECK(b.asym_plus == a.asym_plus);
        CHECK(b.asym_minus == a.asym_minus);
    }
}

TEST_CASE("cli dispersion run writes the summary file") {
    const fs::path dir = temp_dir("cli_dispersion");
    const fs::path config = write_file(dir / "run.json", vortex_config_json(dir / "out"));
    CHECK(run_cli({"--config", config.string(), "dispersion"}) == 0);
    const DispersionSummary s = read_dispersion_file(dir / "out" / "dispersion.json");
    CHECK(std::abs(s.lambda_minus + 1.9198772881569286) <= 1e-15);
    REQUIRE(s.k_star.has_value());
    CHECK(s.criterion_holds);
}

TEST_CASE("cli bifurcate run writes the located points") {
    const fs::path dir = temp_dir("cli_bifurcate");
    const fs::path config = write_file(dir / "run.json", vortex_config_json(dir / "out"));
    CHECK(run_cli({"--config", config.string(), "bifurcate"}) == 0);
    const BifurcationSet set = read_bifurcation_file(dir / "out" / "bifurcation.json");
    REQUIRE(set.points.size() == 2);
    CHECK(set.points[0].side == BranchSide::plus);
    CHECK(set.points[1].side == BranchSide::minus);
    CHECK(std::abs(set.points[1].lambda_star + 1.9198772881569286) <= 1e-15);
}

TEST_CASE("cli trace is deterministic and reaches s = 0.02 with valid states") {
    const fs::path dir = temp_dir("cli_trace");
    const fs::path config = write_file(dir / "run.json", vortex_config_json(dir / "a"));
    CHECK(run_cli({"--config", config.string(), "trace", "--side", "minus", "--points", "8"}) ==
          0);
    CHECK(run_cli({"--config", config.string(), "--out", (dir / "b").string(), "trace", "--side",
                   "minus", "--points", "8"}) == 0);
    const std::string bytes_a = slurp(dir / "a" / "branch_minus.jsonl");
    CHECK(bytes_a == slurp(dir / "b" / "branch_minus.jsonl"));

    const std::vector<BranchPoint> points =
        read_branch_file(dir / "a" / "branch_minus.jsonl", kVortex);
    REQUIRE(points.size() == 8);
    CHECK(points[0].s == 0.0);
    CHECK(points[0].state.w.max_norm() == 0.0);
    CHECK(points.back().s >= 0.02);
    for (const BranchPoint& pt : points) {
        CHECK(pt.validity.surface_above_bed);
        CHECK(pt.validity.graph);
        CHECK(pt.validity.injective);
    }
}

TEST_CASE("cli reconstruct at index 0 reproduces the laminar stream function") {
    const fs::path dir = temp_dir("cli_laminar");
    const fs::path config = write_file(dir / "run.json", vortex_config_json(dir / "out", 24));
    REQUIRE(run_cli({"--config", config.string(), "trace", "--side", "minus", "--points", "3"}) ==
            0);
    const fs::path branch = dir / "out" / "branch_minus.jsonl";
    CHECK(run_cli({"--config", config.string(), "reconstruct", "--branch", branch.string(),
                   "--index", "0"}) == 0);

    const FieldRecord rec = read_field_file(dir / "out" / "field_0.json");
    const LaminarFlow lam = laminar_flow(-1.9198772881569286, kVortex);
    double worst = 0.0;
    for (int r = 0; r < rec.ny; ++r)
        for (int c = 0; c < rec.nx; ++c) {
            const size_t i = static_cast<size_t>(r) * rec.nx + c;
            worst = std::max(worst, std::abs(rec.psi[i] - lam.stream_function(rec.V[i])));
        }
    CHECK(worst <= 1e-10);

    // the laminar state has a still layer but no isolated stagnation points
    const StagnationReport report = read_stagnation_file(dir / "out" / "stagnation_0.json");
    CHECK(report.points.empty());
    CHECK(report.has_critical_layer);
    REQUIRE(report.laminar_line_y.has_value());
    CHECK(std::abs(*report.laminar_line_y - 0.0400613559215357) <= 1e-8);

    // flat surface at height h, zero inclination
    const SurfaceRecord surface = read_surface_csv(dir / "out" / "surface_0.csv");
    REQUIRE(!surface.y.empty());
    for (size_t i = 0; i < surface.y.size(); ++i) {
        CHECK(std::abs(surface.y[i] - kVortex.h) <= 1e-12);
        CHECK(std::abs(surface.theta0[i]) <= 1e-12);
    }
}

TEST_CASE("cli reconstruct honours the grid and finds the cat's eye pattern") {
    const fs::path dir = temp_dir("cli_cats_eye");
    std::string config_text = vortex_config_json(dir / "out", 48);
    const size_t nx_pos = config_text.find("\"nx\": 0");
    REQUIRE(nx_pos != std::string::npos);
    config_text.replace(nx_pos, 7, "\"nx\": 128");
    const fs::path config = write_file(dir / "run.json", config_text);

    REQUIRE(run_cli({"--config", config.string(), "trace", "--side", "minus", "--points", "4"}) ==
            0);
    const fs::path branch = dir / "out" / "branch_minus.jsonl";
    CHECK(run_cli({"--config", config.string(), "reconstruct", "--branch", branch.string(),
                   "--index", "2", "--emit-gnuplot"}) == 0);

    const FieldRecord rec = read_field_file(dir / "out" / "field_2.json");
    CHECK(rec.nx == 128);
    CHECK(rec.ny == 48);

    const StagnationReport report = read_stagnation_file(dir / "out" / "stagnation_2.json");
    CHECK(report.has_critical_layer);
    CHECK(report.points.size() >= 2);

    const std::string script = slurp(dir / "out" / "surface_2.gp");
    CHECK(script.find("surface_2.csv") != std::string::npos);
}

TEST_CASE("cli sweep writes the loci table and its gnuplot companion") {
    const fs::path dir = temp_dir("cli_sweep");
    const fs::path config = write_file(dir / "run.json", vortex_config_json(dir / "out"));
    CHECK(run_cli({"--config", config.string(), "sweep", "--h-min", "0.5", "--h-max", "3.0",
                   "--h-count", "8", "--emit-gnuplot"}) == 0);
    const SweepRecord rec = read_sweep_csv(dir / "out" / "sweep.csv");
    REQUIRE(rec.rows.size() == 8);
    REQUIRE(rec.h_star.has_value());
    CHECK(rec.h_star_residual <= 1e-10);
    const std::string script = slurp(dir / "out" / "sweep.gp");
    CHECK(script.find("sweep.csv") != std::string::npos);
}

TEST_CASE("cli exit codes follow the contract") {
    const fs::path dir = temp_dir("cli_exit");

    // 2: malformed configuration, unknown keys, missing files, bad indices
    const fs::path bad = write_file(dir / "bad.json", "{\"solvr\": {}}");
    CHECK(run_cli({"--config", bad.string(), "dispersion"}) == 2);
    CHECK(run_cli({"--config", (dir / "missing.json").string(), "dispersion"}) == 2);
    CHECK(run_cli({"trace", "--side", "sideways"}) == 2);
    CHECK(run_cli({"frobnicate"}) == 2);
    CHECK(run_cli({}) == 2);
    CHECK(run_cli({"--help"}) == 0);

    const fs::path config = write_file(dir / "run.json", vortex_config_json(dir / "out", 16));
    REQUIRE(run_cli({"--config", config.string(), "trace", "--side", "minus", "--points", "2"}) ==
            0);
    const fs::path branch = dir / "out" / "branch_minus.jsonl";
    CHECK(run_cli({"--config", config.string(), "reconstruct", "--branch", branch.string(),
                   "--index", "7"}) == 2);
    CHECK(run_cli({"--config", config.string(), "reconstruct", "--branch",
                   (dir / "nowhere.jsonl").string(), "--index", "0"}) == 2);

    // 3: divergence still writes the partial branch file
    const fs::path strict = write_file(
        dir / "strict.json",
        "{\"params\": {\"gamma\": 2.0}, \"solver\": {\"n_modes\": 32, \"newton_tol\": 1e-16,"
        " \"max_newton_iters\": 4}, \"output_dir\": \"" +
            (dir / "strict_out").string() + "\"}");
    CHECK(run_cli({"--config", strict.string(), "trace", "--side", "minus", "--points", "6"}) ==
          3);
    const std::vector<BranchPoint> partial =
        read_branch_file(dir / "strict_out" / "branch_minus.jsonl", kVortex);
    CHECK(partial.size() == 1);

    // 4: a state violating surface positivity is rejected with the condition named
    const fs::path sunk = write_file(
        dir / "sunk.jsonl",
        "{\"s\":0.5,\"lambda\":-1.9,\"mu\":0,\"m\":-0.9,\"Q\":5.7,"
        "\"w\":{\"n_points\":64,\"cos\":[-2.0]},\"residual_norm\":0,"
        "\"validity\":{\"os\":false,\"gra\":true,\"injective\":true}}\n");
    CHECK(run_cli({"--config", config.string(), "reconstruct", "--branch", sunk.string(),
                   "--index", "0"}) == 4);
}
