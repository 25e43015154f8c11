#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vorwave/continuation.hpp"
#include "vorwave/field_reconstruction.hpp"

namespace vorwave {

// All numbers are written with 17 significant digits, enough to reproduce an
// IEEE double exactly, so every file round-trips through its reader with
// equality and repeated runs are byte-identical.
std::string format_double(double x);  // throws Error on non-finite input

// -------------------------------------------------------------------------
// Run configuration
// -------------------------------------------------------------------------

// Reconstruction grid: ny rows between bed and surface; nx = 0 keeps the
// horizontal resolution of the traced state, a positive even nx resamples.
struct GridSpec {
    int nx = 0;
    int ny = 64;
};

struct RunConfig {
    PhysicalParams params;
    SolverConfig solver;
    int mode_n = 1;  // bifurcation mode traced / reported
    std::filesystem::path output_dir = ".";
    GridSpec grid;

    void validate() const;  // throws ConfigError
};

// JSON schema mirrors the struct: {"params": {gamma,g,k,h}, "solver":
// {newton_tol,max_newton_iters,ds,n_modes}, "mode_n": n, "output_dir": "p",
// "grid": {nx,ny}}.  Every key is optional, unknown keys are rejected with
// the offending key named, and the result is validated before returning.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& file);
std::string run_config_json(const RunConfig& config);

// -------------------------------------------------------------------------
// Dispersion summary
// -------------------------------------------------------------------------

struct DispersionSummary {
    PhysicalParams params;
    int mode_n = 1;
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double m_plus = 0.0;
    double m_minus = 0.0;
    double criterion_lhs = 0.0;
    double criterion_rhs = 0.0;
    bool criterion_holds = false;
    std::optional<double> k_star;
    std::optional<double> gamma_star;
    std::optional<double> laminar_stagnation_y;  // height of the still layer under lambda_minus
};

DispersionSummary summarize_dispersion(const PhysicalParams& p, int mode_n);
void write_dispersion_file(const std::filesystem::path& file, const DispersionSummary& s);
DispersionSummary read_dispersion_file(const std::filesystem::path& file);

// -------------------------------------------------------------------------
// Bifurcation points
// -------------------------------------------------------------------------

struct BifurcationSet {
    PhysicalParams params;
    std::vector<BifurcationPoint> points;
};

void write_bifurcation_file(const std::filesystem::path& file, const BifurcationSet& set);
BifurcationSet read_bifurcation_file(const std::filesystem::path& file);

// -------------------------------------------------------------------------
// Branches: JSON lines, one record per accepted state
// -------------------------------------------------------------------------
// {"s":..,"lambda":..,"mu":..,"m":..,"Q":..,"w":{"n_points":..,"cos":[..]},
//  "residual_norm":..,"validity":{"os":..,"gra":..,"injective":..}}

std::string branch_record_json(const BranchPoint& point);
void write_branch_file(const std::filesystem::path& file, const Branch& branch);

// Rebuilds the states with the caller's parameters (the record stores only
// per-state data); w is reconstructed from its cosine coefficients.
std::vector<BranchPoint> read_branch_file(const std::filesystem::path& file,
                                          const PhysicalParams& params);

// -------------------------------------------------------------------------
// Reconstructed fields
// -------------------------------------------------------------------------

struct FieldRecord {
    int nx = 0;
    int ny = 0;
    double strip_depth = 0.0;
    double a_offset = 0.0;
    std::vector<double> U, V, psi, velocity_x, velocity_y;  // row-major, row 0 = bed
};

void write_field_file(const std::filesystem::path& file, const StripField& field);
FieldRecord read_field_file(const std::filesystem::path& file);

void write_stagnation_file(const std::filesystem::path& file, const StagnationReport& report);
StagnationReport read_stagnation_file(const std::filesystem::path& file);

// CSV with header X,Y,theta0; one row per surface collocation node.
struct SurfaceRecord {
    std::vector<double> x, y, theta0;
};

void write_surface_csv(const std::filesystem::path& file, const SurfaceCurve& curve);
SurfaceRecord read_surface_csv(const std::filesystem::path& file);

// -------------------------------------------------------------------------
// Depth sweep
// -------------------------------------------------------------------------
// CSV columns h,m_plus,m_minus,stp_holds,h_star_bracket,asym_plus,asym_minus
// preceded by '#' metadata lines carrying the bisected special depths.

struct SweepRecord {
    std::optional<double> h_star;       // zero of m_minus
    double h_star_residual = 0.0;       // |m_minus| there after polishing
    std::optional<double> h_criterion;  // equality depth of the stagnation criterion
    std::vector<SweepRow> rows;
};

void write_sweep_csv(const std::filesystem::path& file, const SurfaceSweep& sweep);
SweepRecord read_sweep_csv(const std::filesystem::path& file);

}  // namespace vorwave
