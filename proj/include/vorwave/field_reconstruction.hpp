#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vorwave/periodic_function.hpp"
#include "vorwave/strip_operators.hpp"
#include "vorwave/wave_residual.hpp"

namespace vorwave {

// ----- reconstructed flow on the conformal strip ------------------------------------------------

// Grid fields of one reconstructed wave.  The strip [0, 2pi) x [-kh, 0] is
// sampled at nx equispaced columns (x_c = 2 pi c / nx, the state's own
// collocation grid) and ny equispaced rows; row 0 is the bed y = -kh, row
// ny-1 the surface y = 0, and arrays are row-major: index r * nx + c.
//
//   U, V        conformal map onto the fluid domain; V(.,bed) = 0 and
//               V(.,surface) = v = w + [v] hold by construction,
//               U(x + 2pi, y) = U(x, y) + 2pi/k.
//   zeta        harmonic extension of m + (gamma/2) v^2 vanishing at the bed.
//   psi         stream function in strip coordinates,
//               psi = zeta - m - (gamma/2) V^2; equals -m at the bed and 0 at
//               the surface.
//   velocity_*  physical relative velocity (psi_Y, -psi_X) pulled back to the
//               grid through the map.
//
// Everything is evaluated from closed-form vertical profiles attached to the
// state's Fourier coefficients, so the same series also powers the pointwise
// evaluators below (used by the stagnation solver).  zeta carries twice the
// mode count of w: the squared surface data is represented exactly.
struct StripField {
    WaveState state;
    double a_offset = 0.0;
    double m = 0.0;  // flux
    double q = 0.0;  // Bernoulli constant
    int nx = 0;
    int ny = 0;

    std::vector<double> U, V, zeta, psi;
    std::vector<double> velocity_x, velocity_y;

    // surface boundary data of zeta, m + (gamma/2) v^2, at doubled resolution
    PeriodicFunction beta{PeriodicFunction::zero(2)};

    double x(int c) const;
    double y(int r) const;
    double at(const std::vector<double>& a, int r, int c) const {
        return a[static_cast<size_t>(r) * static_cast<size_t>(nx) + static_cast<size_t>(c)];
    }
    bool assembled() const { return !psi.empty(); }

    // Pointwise series evaluators; (x, y) in strip coordinates, y in [-kh, 0].
    std::pair<double, double> conformal_at(double x, double y) const;
    double psi_at(double x, double y) const;
    // Throws RejectedStateError("singular-map") where the conformal factor
    // V_x^2 + V_y^2 falls below 1e-12.  velocity_at requires assembled().
    std::pair<double, double> velocity_at(double x, double y) const;
};

// ----- physical surface curve -------------------------------------------------------------------

// One period of the free surface: points (X_j, Y_j) on the collocation grid,
// X = a + x/k + C_kh(w), Y = w + [v], plus the parametrization data u' = X',
// v' = Y', the surface speed |grad psi| and the tangent angle theta0.
struct SurfaceCurve {
    std::vector<double> X, Y;
    PeriodicFunction u_prime{PeriodicFunction::zero(2)};
    PeriodicFunction v_prime{PeriodicFunction::zero(2)};
    PeriodicFunction speed{PeriodicFunction::zero(2)};
    PeriodicFunction theta0{PeriodicFunction::zero(2)};
    bool injective = true;
    // max over the grid of |(u', v') - speed (cos theta0, sin theta0)|
    double compatibility_residual = 0.0;
};

// ----- stagnation points ------------------------------------------------------------------------

enum class CriticalPointType { center, saddle };
const char* to_string(CriticalPointType type);

struct StagnationPoint {
    double x = 0.0;  // physical coordinates (X, Y), Y measured from the bed
    double y = 0.0;
    CriticalPointType type = CriticalPointType::center;
    double strip_x = 0.0;  // preimage on the strip, where velocity_at applies
    double strip_y = 0.0;
};

struct StagnationReport {
    std::vector<StagnationPoint> points;  // isolated zeros of the velocity, sorted by X
    bool has_critical_layer = false;      // horizontal velocity changes sign on some column
    std::optional<double> laminar_line_y; // stagnation line height of a laminar flow
    std::vector<std::string> notes;       // seeds dropped by the local solver, etc.
};

// ----- operations -------------------------------------------------------------------------------

// Harmonic extension of periodic boundary data from the surface of the strip
// R_d, vanishing at the bed:
//     W(x, y) = ([w]/d)(y + d) + sum_n sinh(n(y+d))/sinh(nd) (a_n cos nx + b_n sin nx).
// Returns grid_ny rows of boundary.n_points() samples, row-major, row 0 at
// the bed.  grid_ny >= 2; hyperbolic ratios are evaluated in exp-difference
// form, so large n d never overflows.
std::vector<double> harmonic_extension(const PeriodicFunction& boundary, StripDepth d,
                                       int grid_ny);

// Conformal map of the strip onto the fluid domain: V extends v = w + [v]
// harmonically, U is its conjugate plus the linear part a + x/k.  Fills U and
// V only; pass the result through stream_function for the rest.  Throws
// RejectedStateError naming the violated condition when the state fails the
// surface validity checks (positivity, injectivity, regular curve).
StripField conformal_map(const WaveState& state, double a_offset, int grid_ny);

// Fills zeta, psi and the velocity arrays of a conformal-mapped field.
// The state must be the one the field was built from.
StripField stream_function(const WaveState& state, StripField field);

// Surface curve with tangent data:
//     speed  = |m/(kh) + gamma (G_kh(v^2/2) - v G_kh(v))| / sqrt(Q - 2 g v)
//     theta0 = C_kh^{-1}(log speed - [log speed])
// and the compatibility residual of (u', v') = speed (cos theta0, sin theta0).
// Throws RejectedStateError for surface-positivity / regular-curve /
// injectivity violations and for Q - 2 g v <= 0 (stagnation at the surface,
// the tangent angle is undefined there).
SurfaceCurve surface_geometry(const WaveState& state, double a_offset);

// Zeros of the velocity field.  Laminar flows (w = 0) short-circuit: with
// vorticity and an interior stagnation height the report carries
// laminar_line_y found by bisection and no isolated points; without
// vorticity the report is empty.  Genuine waves are scanned for grid cells
// where both velocity components change sign; each seed runs a damped 2-D
// Newton iteration on the series evaluator, accepted when |velocity| <=
// 1e-9 x (grid velocity scale), deduplicated within one grid spacing, and
// classified center/saddle by the sign of the velocity Jacobian determinant.
StagnationReport find_stagnation(const StripField& field);

// Grid-based consistency residuals, centered differences in y and spectral
// derivatives in x on the stored arrays, maxima over interior rows:
//   cauchy_riemann   max of |U_x - V_y| and |U_y + V_x|
//   laplacian        |Delta psi / (V_x^2 + V_y^2) + gamma|, the flow-plane
//                    Poisson residual seen through the conformal factor
// Both decay at second order in the row spacing.
struct FieldDiagnostics {
    double cauchy_riemann = 0.0;
    double laplacian = 0.0;
};
FieldDiagnostics field_diagnostics(const StripField& field);

}  // namespace vorwave
