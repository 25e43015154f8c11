#include "vorwave/periodic_function.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vorwave/errors.hpp"

namespace vorwave {

namespace {

void check_mode_count(int n_modes) {
    if (n_modes < 1) {
        throw InvalidGridError("PeriodicFunction: n_modes must be >= 1, got " +
                               std::to_string(n_modes));
    }
}

void check_finite_coeffs(const fourier::Spectrum& s) {
    bool ok = std::isfinite(s.mean);
    for (double a : s.cos_coeffs) ok = ok && std::isfinite(a);
    for (double b : s.sin_coeffs) ok = ok && std::isfinite(b);
    if (!ok) throw InvalidGridError("PeriodicFunction: non-finite coefficient");
}

}  // namespace

PeriodicFunction::PeriodicFunction(std::vector<double> values)
    : values_(std::move(values)) {
    spectrum_ = fourier::analyze(values_);  // validates size and finiteness
    n_modes_ = spectrum_.n_modes();
}

PeriodicFunction::PeriodicFunction(FromSpectrumTag, fourier::Spectrum s)
    : n_modes_(s.n_modes()), spectrum_(std::move(s)) {
    check_mode_count(n_modes_);
    check_finite_coeffs(spectrum_);
    spectrum_.sin_coeffs.back() = 0.0;  // sin(Nx) is not representable
    values_ = fourier::synthesize(spectrum_, 2 * n_modes_);
}

PeriodicFunction::PeriodicFunction(int n_modes, double mean_value,
                                   std::vector<double> cos_coeffs,
                                   std::vector<double> sin_coeffs)
    : PeriodicFunction(FromSpectrumTag{}, [&] {
          check_mode_count(n_modes);
          const auto n = static_cast<size_t>(n_modes);
          if (cos_coeffs.size() > n || sin_coeffs.size() > n) {
              throw InvalidGridError("PeriodicFunction: coefficient array longer than n_modes");
          }
          cos_coeffs.resize(n, 0.0);
          sin_coeffs.resize(n, 0.0);
          return fourier::Spectrum{mean_value, std::move(cos_coeffs), std::move(sin_coeffs)};
      }()) {}

PeriodicFunction PeriodicFunction::zero(int n_modes) {
    return constant(n_modes, 0.0);
}

PeriodicFunction PeriodicFunction::constant(int n_modes, double value) {
    return PeriodicFunction(n_modes, value, {}, {});
}

PeriodicFunction PeriodicFunction::harmonic(int n_modes, int n, double cos_amp, double sin_amp) {
    check_mode_count(n_modes);
    if (n < 1 || n > n_modes) {
        throw InvalidGridError("PeriodicFunction::harmonic: mode " + std::to_string(n) +
                               " outside 1.." + std::to_string(n_modes));
    }
    std::vector<double> a(static_cast<size_t>(n_modes), 0.0);
    std::vector<double> b(static_cast<size_t>(n_modes), 0.0);
    a[static_cast<size_t>(n - 1)] = cos_amp;
    b[static_cast<size_t>(n - 1)] = sin_amp;
    return PeriodicFunction(n_modes, 0.0, std::move(a), std::move(b));
}

double PeriodicFunction::grid_x(int j) const {
    return std::numbers::pi * j / n_modes_;
}

double PeriodicFunction::cos_coeff(int n) const {
    if (n < 1 || n > n_modes_) throw InvalidGridError("cos_coeff: mode out of range");
    return spectrum_.cos_coeffs[static_cast<size_t>(n - 1)];
}

double PeriodicFunction::sin_coeff(int n) const {
    if (n < 1 || n > n_modes_) throw InvalidGridError("sin_coeff: mode out of range");
    return spectrum_.sin_coeffs[static_cast<size_t>(n - 1)];
}

double PeriodicFunction::evaluate(double x) const {
    double acc = spectrum_.mean;
    for (int n = 1; n <= n_modes_; ++n) {
        acc += spectrum_.cos_coeffs[static_cast<size_t>(n - 1)] * std::cos(n * x) +
               spectrum_.sin_coeffs[static_cast<size_t>(n - 1)] * std::sin(n * x);
    }
    return acc;
}

PeriodicFunction PeriodicFunction::derivative() const {
    fourier::Spectrum d;
    d.mean = 0.0;
    const auto n = static_cast<size_t>(n_modes_);
    d.cos_coeffs.assign(n, 0.0);
    d.sin_coeffs.assign(n, 0.0);
    for (int k = 1; k < n_modes_; ++k) {
        d.cos_coeffs[static_cast<size_t>(k - 1)] = k * spectrum_.sin_coeffs[static_cast<size_t>(k - 1)];
        d.sin_coeffs[static_cast<size_t>(k - 1)] = -k * spectrum_.cos_coeffs[static_cast<size_t>(k - 1)];
    }
    // d/dx of the Nyquist cosine is a pure sin(Nx): zero on this grid.
    return PeriodicFunction(FromSpectrumTag{}, std::move(d));
}

PeriodicFunction PeriodicFunction::resampled(int n_modes) const {
    check_mode_count(n_modes);
    if (n_modes == n_modes_) return *this;
    fourier::Spectrum s;
    s.mean = spectrum_.mean;
    const auto n = static_cast<size_t>(n_modes);
    s.cos_coeffs.assign(n, 0.0);
    s.sin_coeffs.assign(n, 0.0);
    const int keep = std::min(n_modes, n_modes_);
    std::copy_n(spectrum_.cos_coeffs.begin(), keep, s.cos_coeffs.begin());
    std::copy_n(spectrum_.sin_coeffs.begin(), keep, s.sin_coeffs.begin());
    return PeriodicFunction(FromSpectrumTag{}, std::move(s));
}

double PeriodicFunction::max_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double PeriodicFunction::coefficient_norm() const {
    double acc = spectrum_.mean * spectrum_.mean;
    for (double a : spectrum_.cos_coeffs) acc += a * a;
    for (double b : spectrum_.sin_coeffs) acc += b * b;
    return std::sqrt(acc);
}

namespace {

std::pair<PeriodicFunction, PeriodicFunction> aligned(const PeriodicFunction& u,
                                                      const PeriodicFunction& v) {
    const int n = std::max(u.n_modes(), v.n_modes());
    return {u.resampled(n), v.resampled(n)};
}

}  // namespace

PeriodicFunction operator+(const PeriodicFunction& u, const PeriodicFunction& v) {
    auto [a, b] = aligned(u, v);
    std::vector<double> out(a.values());
    for (size_t j = 0; j < out.size(); ++j) out[j] += b.values()[j];
    return PeriodicFunction(std::move(out));
}

PeriodicFunction operator-(const PeriodicFunction& u, const PeriodicFunction& v) {
    auto [a, b] = aligned(u, v);
    std::vector<double> out(a.values());
    for (size_t j = 0; j < out.size(); ++j) out[j] -= b.values()[j];
    return PeriodicFunction(std::move(out));
}

PeriodicFunction operator*(double c, const PeriodicFunction& u) {
    std::vector<double> out(u.values());
    for (double& v : out) v *= c;
    return PeriodicFunction(std::move(out));
}

PeriodicFunction operator+(const PeriodicFunction& u, double c) {
    std::vector<double> out(u.values());
    for (double& v : out) v += c;
    return PeriodicFunction(std::move(out));
}

PeriodicFunction operator-(const PeriodicFunction& u, double c) {
    return u + (-c);
}

PeriodicFunction product(const PeriodicFunction& u, const PeriodicFunction& v) {
    auto [a, b] = aligned(u, v);
    const int n = a.n_modes();
    const int fine = 4 * n;
    std::vector<double> ua = fourier::synthesize(a.spectrum(), fine);
    std::vector<double> vb = fourier::synthesize(b.spectrum(), fine);
    for (size_t j = 0; j < ua.size(); ++j) ua[j] *= vb[j];
    fourier::Spectrum s = fourier::analyze(ua);
    s.cos_coeffs.resize(static_cast<size_t>(n));
    s.sin_coeffs.resize(static_cast<size_t>(n));
    return PeriodicFunction(n, s.mean, std::move(s.cos_coeffs), std::move(s.sin_coeffs));
}

double mean(const PeriodicFunction& u) {
    return u.mean();
}

SymmetryClass symmetry_of(const PeriodicFunction& u, double tol) {
    const double scale = std::max(1.0, u.coefficient_norm());
    double max_sin = 0.0, max_cos = std::abs(u.mean());
    for (double a : u.cos_coeffs()) max_cos = std::max(max_cos, std::abs(a));
    for (double b : u.sin_coeffs()) max_sin = std::max(max_sin, std::abs(b));
    const bool is_even = max_sin <= tol * scale;
    const bool is_odd = max_cos <= tol * scale;
    if (is_even && !is_odd) return SymmetryClass::even;
    if (is_odd && !is_even) return SymmetryClass::odd;
    if (is_even && is_odd) return SymmetryClass::even;  // zero function: call it even
    return SymmetryClass::none;
}

}  // namespace vorwave
