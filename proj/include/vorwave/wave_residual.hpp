#pragma once

#include <Eigen/Dense>
#include <optional>

#include "vorwave/periodic_function.hpp"
#include "vorwave/strip_operators.hpp"

namespace vorwave {

// Physical parameters of the periodic traveling-wave problem.
struct PhysicalParams {
    double gamma = 0.0;  // constant vorticity
    double g = 1.0;      // gravitational acceleration
    double k = 1.0;      // wavenumber; the spatial period is 2*pi/k
    double h = 1.0;      // mean fluid depth

    void validate() const;                        // g, k, h positive; gamma finite
    double strip_depth() const { return k * h; }  // conformal depth of the flat strip
    double period() const;                        // 2*pi/k
};

// Solver unknowns: wave-speed parameter lambda, Bernoulli shift mu, and the
// zero-mean even surface oscillation w (the free surface height is w + h in
// conformal coordinates).
struct WaveState {
    PhysicalParams params;
    double lambda = 0.0;
    double mu = 0.0;
    PeriodicFunction w = PeriodicFunction::zero(1);
};

// Parameter conversions between (flux m, Bernoulli constant Q) and the solver
// pair (lambda, mu).
double lambda_from_flux(double m, const PhysicalParams& p);
double flux_from_lambda(double lambda, const PhysicalParams& p);
double mu_from_bernoulli(double q, double lambda, const PhysicalParams& p);
double bernoulli_from_mu(double mu, double lambda, const PhysicalParams& p);

// Nonlinear residual of the surface equation at a state.  Identically zero
// exactly when (lambda, mu, w) is a traveling wave; the trivial state w = 0,
// mu = 0 solves it for every lambda, and w = 0 with a Bernoulli shift gives
// the constant -mu/k^2.
PeriodicFunction residual(const WaveState& state);

// Linearization of the residual about the trivial state (w = 0, mu = 0) at
// wave speed lambda, applied to direction (nu, f):
//     (2/k^2) ( (g - lambda*gamma) f  -  lambda^2 k C_{kh}(f') )  -  nu/k^2.
PeriodicFunction linearized_trivial(double lambda, const PhysicalParams& p, double nu,
                                    const PeriodicFunction& f);

// Eigenvalue of the trivial-state linearization on cos(nx).
double trivial_eigenvalue(int n, double lambda, const PhysicalParams& p);

// Exact directional derivative of `residual` at a fixed base state.  The
// w-dependent grid factors are computed once at construction, so applying the
// derivative to many directions (dense assembly) stays cheap.
class ResidualJacobian {
  public:
    explicit ResidualJacobian(const WaveState& base);

    const WaveState& base() const { return base_; }

    // Derivative in direction (nu for the mu slot, f for the profile).
    PeriodicFunction apply(double nu, const PeriodicFunction& f) const;

    // Derivative in the wave-speed parameter lambda.
    PeriodicFunction lambda_direction() const;

    // Dense matrix over the even basis: column 0 is the mu direction and
    // column n >= 1 the direction cos(nx); row 0 is the output mean and row
    // n >= 1 the output cos(nx) coefficient.  Size (N+1) x (N+1).
    Eigen::MatrixXd assemble() const;

  private:
    WaveState base_;
    StripDepth d_;
    PeriodicFunction dw_;   // w'
    PeriodicFunction chw_;  // C_{kh}(w')
    PeriodicFunction t_;    // 1/k + C_{kh}(w')
    PeriodicFunction s_;    // lambda/k + gamma * A
    PeriodicFunction c_;    // lambda^2 + mu - 2 g w
    PeriodicFunction p_;    // w'^2 + (1/k + C_{kh}(w'))^2
};

// Roots of the dispersion quadratic  lambda^2 n k coth(n k h) + lambda gamma - g = 0
// for mode n; always lambda_minus < 0 < lambda_plus.
struct DispersionRoots {
    double plus = 0.0;
    double minus = 0.0;
};
DispersionRoots dispersion_lambdas(int n, const PhysicalParams& p);

// Flux values m = lambda h + gamma h^2/2 at the two dispersion roots.
DispersionRoots bifurcating_flux(int n, const PhysicalParams& p);

// Derivative in lambda of the dispersion quadratic at its root; nonzero means
// the eigenvalue crosses zero transversally.
double dispersion_transversality(int n, double lambda, const PhysicalParams& p);

// Shear flow with a flat surface.  The stream function depends on the height
// Y only; an interior stagnation line exists exactly when the surface and
// bottom velocities have opposite signs, i.e. lambda (lambda + gamma h) <= 0
// (with gamma != 0 so the line is isolated).
struct LaminarFlow {
    PhysicalParams params;
    double lambda = 0.0;
    double m = 0.0;
    double q = 0.0;
    std::optional<double> stagnation_y;

    double stream_function(double y) const;  // psi(Y) = -(gamma/2) Y^2 + (m/h + gamma h/2) Y - m
    double velocity(double y) const;         // lambda + gamma (h - Y)
};
LaminarFlow laminar_flow(double lambda, const PhysicalParams& p);

// Criterion  tanh(kh)/(kh) <= gamma^2 h / (g + gamma^2 h)  deciding whether
// the slower linear wave carries an interior stagnation line.  k_star is the
// threshold wavenumber in k at fixed (gamma, h); gamma_star the threshold
// vorticity at fixed (k, h); both located by bisection.
struct StagnationCriterion {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    std::optional<double> k_star;
    std::optional<double> gamma_star;
};
StagnationCriterion stagnation_criterion(const PhysicalParams& p);

// For gamma > 0, m < 0 at k = 1: the inequality
//     tanh( sqrt(-2m/gamma) )  >  -2 m gamma / ( g + gamma sqrt(-2 m gamma) )
// holds exactly when some depth h > 0 makes (m, h) a slower-branch
// bifurcation point.  The root search looks for lambda < -sqrt(-2 gamma m)
// solving  tanh( -lambda/gamma - sqrt(lambda^2 + 2 gamma m)/gamma ) =
// lambda^2 / (g - gamma lambda), and reports the matching depth.
struct FluxCondition {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    std::optional<double> lambda_root;
    std::optional<double> depth_root;
};
FluxCondition flux_condition(double m_flux, const PhysicalParams& p);

}  // namespace vorwave
