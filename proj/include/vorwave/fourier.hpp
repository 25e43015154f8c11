#pragma once

#include <vector>

namespace vorwave::fourier {

// Real trigonometric spectrum of a 2pi-periodic sample set:
//     f(x) = mean + sum_{n=1..N} ( a_n cos(nx) + b_n sin(nx) ),
// with a_n = cos_coeffs[n-1], b_n = sin_coeffs[n-1].  On a grid of 2N points
// the sine mode N vanishes identically, so sin_coeffs.back() is always zero.
struct Spectrum {
    double mean = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;

    int n_modes() const { return static_cast<int>(cos_coeffs.size()); }
};

// Forward transform of samples taken at x_j = 2*pi*j/M, M = values.size().
// M must be even and >= 2; the result holds modes 1..M/2.
Spectrum analyze(const std::vector<double>& values);

// Evaluate the trigonometric polynomial at n_points uniform grid points.
// Modes above n_points/2 are dropped (spectral truncation); missing high
// modes are zero-padded.  n_points must be even and >= 2.
std::vector<double> synthesize(const Spectrum& s, int n_points);

}  // namespace vorwave::fourier
