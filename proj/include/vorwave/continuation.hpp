#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vorwave/wave_residual.hpp"

namespace vorwave {

// Bounds for the adaptive arclength step; the step doubles after easy
// correctors (<= 4 iterations), halves after failed ones, and the trace
// truncates once it cannot shrink further.
inline constexpr double kMinArcStep = 1e-5;
inline constexpr double kMaxArcStep = 5e-2;

struct SolverConfig {
    double newton_tol = 1e-11;  // residual max-norm at accepted states
    int max_newton_iters = 25;
    double ds = 1e-3;   // initial arclength step, kept within [kMinArcStep, kMaxArcStep]
    int n_modes = 128;  // cosine modes carried by the discretization

    void validate() const;  // throws ConfigError
};

// Which quantity stays fixed while Newton corrects the rest:
//   lambda    - unknowns are (mu, a_1..a_N) at fixed wave speed;
//   amplitude - unknowns are (mu, lambda, a_j for j != amplitude mode).
enum class FixedParameter { lambda, amplitude };

struct NewtonResult {
    WaveState state;
    int iterations = 0;
    double residual_norm = 0.0;
    double condition = 0.0;  // estimated condition number of the last Jacobian
};

// Newton iteration on the even cosine subspace; zero mean and evenness of w
// are enforced by construction.  Throws DivergenceError with the residual
// history after max_newton_iters, SingularJacobianError if a Jacobian is
// numerically rank-deficient.  amplitude_mode selects which cosine
// coefficient is held when fixed == FixedParameter::amplitude.  Holding the
// amplitude at exactly zero also holds lambda: on the trivial family every
// speed is a solution, so lambda carries no information there.
NewtonResult newton_solve(const WaveState& initial, FixedParameter fixed,
                          const SolverConfig& config, int amplitude_mode = 1);

namespace detail {
// Dense solve A x = b via LU with full pivoting.  Throws
// SingularJacobianError carrying the smallest singular value when the
// factorization is rank-deficient; optionally reports a condition estimate.
Eigen::VectorXd lu_solve_or_throw(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  double* condition = nullptr);
}  // namespace detail

enum class BranchSide { plus, minus };
const char* to_string(BranchSide side);

// A simple zero crossing of the trivial-state linearization: wave speed at
// which mode n starts a nontrivial branch, together with the numerical
// evidence (singular values of the assembled linearization, overlap of its
// null vector with the cos(nx) slot, transversality scalar).
struct BifurcationPoint {
    int mode = 1;
    BranchSide side = BranchSide::plus;
    double lambda_star = 0.0;
    double flux = 0.0;  // m = lambda_star h + gamma h^2 / 2
    double sigma_min = 0.0;
    double sigma_second = 0.0;
    double sigma_max = 0.0;
    double null_overlap = 0.0;
    double transversality = 0.0;
};

// Both wave speeds for each mode n = 1..n_max (2 n_max points).  Requires
// n_max < config.n_modes so the crossing mode is resolved by the grid.
std::vector<BifurcationPoint> find_bifurcation_points(const PhysicalParams& p, int n_max,
                                                      const SolverConfig& config);

// Pointwise surface validity of a state; violating states are flagged, never
// silently dropped.
struct Validity {
    bool surface_above_bed = true;  // w > -h at every collocation point
    bool graph = true;              // 1/k + C_{kh}(w') > 0 at every collocation point
    bool injective = true;          // surface curve free of self-intersections

    bool all() const { return surface_above_bed && graph && injective; }
};

Validity check_validity(const WaveState& state);

struct BranchPoint {
    double s = 0.0;    // amplitude: the cos(mode x) coefficient of w
    double arc = 0.0;  // accumulated pseudo-arclength
    WaveState state;
    double m = 0.0;  // flux
    double q = 0.0;  // Bernoulli constant
    double residual_norm = 0.0;
    Validity validity;
};

struct Branch {
    PhysicalParams params;
    int mode_n = 1;
    double lambda_star = 0.0;
    BranchSide side = BranchSide::plus;
    std::vector<BranchPoint> points;
    std::vector<int> fold_indices;  // accepted indices where the tangent reverses in lambda
    std::string truncation_reason;  // nonempty if the trace stopped before n_points
};

// Branch of nontrivial waves rooted at `start`.  Point 0 is the trivial state
// at lambda_star; point 1 comes from a corrector holding the amplitude at the
// initial step size; later points use pseudo-arclength with a secant
// predictor and the adaptive step.  Divergence mid-branch truncates with a
// diagnostic instead of throwing.
Branch trace_branch(const PhysicalParams& p, const BifurcationPoint& start, int n_points,
                    const SolverConfig& config);

struct SweepRow {
    double h = 0.0;
    double m_plus = 0.0;
    double m_minus = 0.0;
    bool stagnation_holds = false;  // interior stagnation criterion at this depth
    bool h_star_bracket = false;    // m_minus changes sign between this row and the next
    // Deviation of m from the parabola gamma h^2 / 2, relative to the
    // parabola; the absolute difference |lambda h| grows with h, so only the
    // relative distance decays.
    double asym_plus = 0.0;
    double asym_minus = 0.0;
};

struct SurfaceSweep {
    PhysicalParams base;  // h field gives the sweep's first depth
    std::vector<SweepRow> rows;
    std::optional<double> h_star;       // depth where m_minus crosses zero
    double h_star_residual = 0.0;       // |m_minus(h_star)| after polishing
    std::optional<double> h_criterion;  // depth where the stagnation criterion is equality
    std::vector<Branch> branches;       // traced per depth cell when trace_points > 0
};

// Bifurcation loci over a depth grid: m_plus/m_minus per depth, the interior
// stagnation flag, the zero crossing h_star of m_minus (bisection plus secant
// polish), and the criterion-equality depth.  With trace_points > 0 a branch
// is traced per depth cell and side; cells run concurrently, capped by the
// VORWAVE_THREADS environment variable.
SurfaceSweep sweep_surface(const PhysicalParams& base, double h_min, double h_max, int h_count,
                           const SolverConfig& config, int trace_points = 0);

}  // namespace vorwave
