#pragma once

#include <vector>

#include "vorwave/fourier.hpp"

namespace vorwave {

// Parity of a grid function about x = 0.
enum class SymmetryClass { even, odd, none };

// Immutable 2pi-periodic grid function with dual storage.
//
// A function resolved to highest mode N lives on the 2N-point collocation
// grid x_j = j*pi/N, j = 0..2N-1, and is stored both as its samples and as
// the coefficients of its trigonometric interpolant
//     w(x) = mean + sum_{n=1..N} ( a_n cos(nx) + b_n sin(nx) ).
// The two representations are kept consistent by construction: every
// constructor either analyzes the samples or synthesizes them from the
// coefficients, and no mutating operations exist.
//
// Nyquist convention: sin(Nx) vanishes at every grid point, so b_N is
// identically zero and the mode-N content of a grid function is purely
// cos(Nx).  Differentiation maps a_N cos(Nx) to -N a_N sin(Nx), which is
// invisible on the grid and is therefore dropped.
class PeriodicFunction {
  public:
    // Forward-transform constructor; values.size() must be even and >= 2.
    explicit PeriodicFunction(std::vector<double> values);

    // Synthesis constructor.  cos/sin coefficient arrays hold modes
    // 1..n_modes; shorter arrays are zero-padded, longer ones rejected.
    PeriodicFunction(int n_modes, double mean_value, std::vector<double> cos_coeffs,
                     std::vector<double> sin_coeffs);

    static PeriodicFunction zero(int n_modes);
    static PeriodicFunction constant(int n_modes, double value);
    // cos_amp*cos(nx) + sin_amp*sin(nx)
    static PeriodicFunction harmonic(int n_modes, int n, double cos_amp, double sin_amp);

    int n_modes() const { return n_modes_; }
    int n_points() const { return 2 * n_modes_; }
    double grid_x(int j) const;

    const std::vector<double>& values() const { return values_; }
    double value(int j) const { return values_[static_cast<size_t>(j)]; }
    double mean() const { return spectrum_.mean; }
    double cos_coeff(int n) const;  // a_n, n = 1..N
    double sin_coeff(int n) const;  // b_n, n = 1..N
    const std::vector<double>& cos_coeffs() const { return spectrum_.cos_coeffs; }
    const std::vector<double>& sin_coeffs() const { return spectrum_.sin_coeffs; }
    const fourier::Spectrum& spectrum() const { return spectrum_; }

    // Trigonometric interpolant at an arbitrary point.
    double evaluate(double x) const;

    PeriodicFunction derivative() const;
    PeriodicFunction resampled(int n_modes) const;

    double max_norm() const;
    // sqrt(mean^2 + sum_n (a_n^2 + b_n^2))
    double coefficient_norm() const;

  private:
    struct FromSpectrumTag {};
    PeriodicFunction(FromSpectrumTag, fourier::Spectrum s);

    int n_modes_ = 0;
    std::vector<double> values_;
    fourier::Spectrum spectrum_;
};

// Pointwise algebra.  Operands of different resolution are aligned by
// resampling the coarser one (exact zero-padding).
PeriodicFunction operator+(const PeriodicFunction& u, const PeriodicFunction& v);
PeriodicFunction operator-(const PeriodicFunction& u, const PeriodicFunction& v);
PeriodicFunction operator*(double c, const PeriodicFunction& u);
PeriodicFunction operator+(const PeriodicFunction& u, double c);
PeriodicFunction operator-(const PeriodicFunction& u, double c);

// Dealiased pointwise product: both factors are evaluated on a grid twice as
// fine (4N points, resolving every mode of the exact product of two mode-N
// functions), multiplied there, and the result truncated back to mode N.
PeriodicFunction product(const PeriodicFunction& u, const PeriodicFunction& v);

double mean(const PeriodicFunction& u);

// Parity classification with absolute coefficient tolerance scaled by the
// overall coefficient norm.
SymmetryClass symmetry_of(const PeriodicFunction& u, double tol = 1e-11);

}  // namespace vorwave
