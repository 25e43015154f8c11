#include "vorwave/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

#include "vorwave/errors.hpp"

namespace vorwave::fourier {

namespace {

// FFTW plan creation is not thread-safe, so plans are cached per size under a
// lock.  Plans are built with FFTW_UNALIGNED on throwaway buffers, which makes
// the new-array execute functions valid for any caller buffers; execution
// itself is thread-safe.  FFTW_ESTIMATE keeps the algorithm choice
// deterministic from run to run.
struct PlanPair {
    fftw_plan r2hc = nullptr;
    fftw_plan hc2r = nullptr;
};

const PlanPair& plans_for(int n) {
    static std::mutex mu;
    static std::map<int, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mu);
    PlanPair& p = cache[n];
    if (p.r2hc == nullptr) {
        std::vector<double> in(static_cast<size_t>(n)), out(static_cast<size_t>(n));
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        p.r2hc = fftw_plan_r2r_1d(n, in.data(), out.data(), FFTW_R2HC, flags);
        p.hc2r = fftw_plan_r2r_1d(n, in.data(), out.data(), FFTW_HC2R, flags);
    }
    return p;
}

void check_even_size(size_t m, const char* who) {
    if (m < 2 || m % 2 != 0) {
        throw InvalidGridError(std::string(who) + ": grid size must be even and >= 2, got " +
                               std::to_string(m));
    }
}

}  // namespace

Spectrum analyze(const std::vector<double>& values) {
    check_even_size(values.size(), "fourier::analyze");
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw InvalidGridError("fourier::analyze: non-finite sample");
        }
    }
    const int m = static_cast<int>(values.size());
    const int n = m / 2;
    std::vector<double> hc(static_cast<size_t>(m));
    fftw_execute_r2r(plans_for(m).r2hc, const_cast<double*>(values.data()), hc.data());

    // Halfcomplex layout: hc[0] = sum f_j, hc[k] = sum f_j cos(k x_j) for
    // k = 1..m/2, hc[m-k] = -sum f_j sin(k x_j) for k = 1..m/2-1.
    Spectrum s;
    s.mean = hc[0] / m;
    s.cos_coeffs.resize(static_cast<size_t>(n));
    s.sin_coeffs.assign(static_cast<size_t>(n), 0.0);
    for (int k = 1; k < n; ++k) {
        s.cos_coeffs[static_cast<size_t>(k - 1)] = 2.0 * hc[static_cast<size_t>(k)] / m;
        s.sin_coeffs[static_cast<size_t>(k - 1)] = -2.0 * hc[static_cast<size_t>(m - k)] / m;
    }
    // Nyquist cosine carries full weight; sin(N x_j) = 0 at every grid point.
    s.cos_coeffs[static_cast<size_t>(n - 1)] = hc[static_cast<size_t>(n)] / m;
    return s;
}

std::vector<double> synthesize(const Spectrum& s, int n_points) {
    check_even_size(static_cast<size_t>(n_points > 0 ? n_points : 0), "fourier::synthesize");
    const int m = n_points;
    const int half = m / 2;
    std::vector<double> hc(static_cast<size_t>(m), 0.0);
    hc[0] = s.mean;
    const int n_src = s.n_modes();
    for (int k = 1; k <= std::min(n_src, half); ++k) {
        const double a = s.cos_coeffs[static_cast<size_t>(k - 1)];
        const double b = s.sin_coeffs[static_cast<size_t>(k - 1)];
        if (k < half) {
            hc[static_cast<size_t>(k)] = 0.5 * a;
            hc[static_cast<size_t>(m - k)] = -0.5 * b;
        } else {
            hc[static_cast<size_t>(half)] = a;  // full-weight Nyquist cosine
        }
    }
    std::vector<double> out(static_cast<size_t>(m));
    fftw_execute_r2r(plans_for(m).hc2r, hc.data(), out.data());
    return out;
}

}  // namespace vorwave::fourier
