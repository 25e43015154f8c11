#include "vorwave/strip_operators.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "vorwave/errors.hpp"

namespace vorwave {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void require_zero_mean(const PeriodicFunction& w, const char* who) {
    const double scale = std::max(1.0, w.max_norm());
    if (std::abs(w.mean()) > 1e-12 * scale) {
        throw DomainError(std::string(who) + ": defined on zero-mean functions only, got mean " +
                          format_double(w.mean()));
    }
}

// Quarter-turn multiplier action shared by the conjugation operators:
//     a_n cos + b_n sin  ->  m_n ( a_n sin - b_n cos ).
PeriodicFunction rotate_scale(const PeriodicFunction& w, auto&& multiplier) {
    const int n_modes = w.n_modes();
    std::vector<double> a(static_cast<size_t>(n_modes)), b(static_cast<size_t>(n_modes));
    for (int n = 1; n <= n_modes; ++n) {
        const double m = multiplier(n);
        a[static_cast<size_t>(n - 1)] = -m * w.sin_coeff(n);
        b[static_cast<size_t>(n - 1)] = m * w.cos_coeff(n);
    }
    return PeriodicFunction(n_modes, 0.0, std::move(a), std::move(b));
}

}  // namespace

StripDepth::StripDepth(double depth) : value(depth) {
    if (!(std::isfinite(depth) && depth > 0.0)) {
        throw DomainError("StripDepth: depth must be positive and finite, got " +
                          format_double(depth));
    }
}

namespace strip {

double multiplier_gap(int n, double d) {
    const double s = 2.0 * n * d;
    return 2.0 * std::exp(-s) / (-std::expm1(-s));
}

double coth_multiplier(int n, double d) {
    return 1.0 + multiplier_gap(n, d);
}

KernelTable::KernelTable(int n_modes_in, StripDepth d) : n_modes(n_modes_in), depth(d.value) {
    if (n_modes < 1) throw InvalidGridError("KernelTable: n_modes must be >= 1");
    lambda.resize(static_cast<size_t>(n_modes));
    std::vector<double> sines(static_cast<size_t>(n_modes));
    for (int n = 1; n <= n_modes; ++n) {
        lambda[static_cast<size_t>(n - 1)] = multiplier_gap(n, depth);
        sines[static_cast<size_t>(n - 1)] = 2.0 * lambda[static_cast<size_t>(n - 1)];
    }
    kappa_values = fourier::synthesize(
        fourier::Spectrum{0.0, std::vector<double>(static_cast<size_t>(n_modes), 0.0), sines},
        2 * n_modes);
}

PeriodicFunction hilbert(const PeriodicFunction& w, StripDepth d) {
    require_zero_mean(w, "strip::hilbert");
    return rotate_scale(w, [&](int n) { return coth_multiplier(n, d.value); });
}

PeriodicFunction hilbert_inverse(const PeriodicFunction& w, StripDepth d) {
    require_zero_mean(w, "strip::hilbert_inverse");
    // inverse rotation: a_n cos + b_n sin -> tanh(nd) ( -a_n sin + b_n cos )
    return rotate_scale(w, [&](int n) { return -std::tanh(n * d.value); });
}

PeriodicFunction dirichlet_neumann(const PeriodicFunction& w, StripDepth d) {
    const int n_modes = w.n_modes();
    std::vector<double> a(static_cast<size_t>(n_modes)), b(static_cast<size_t>(n_modes));
    for (int n = 1; n <= n_modes; ++n) {
        const double m = n * coth_multiplier(n, d.value);
        a[static_cast<size_t>(n - 1)] = m * w.cos_coeff(n);
        b[static_cast<size_t>(n - 1)] = m * w.sin_coeff(n);
    }
    return PeriodicFunction(n_modes, w.mean() / d.value, std::move(a), std::move(b));
}

PeriodicFunction hilbert_deep(const PeriodicFunction& w) {
    require_zero_mean(w, "strip::hilbert_deep");
    return rotate_scale(w, [](int) { return 1.0; });
}

PeriodicFunction kernel_correction(const PeriodicFunction& w, const KernelTable& table) {
    require_zero_mean(w, "strip::kernel_correction");
    if (w.n_modes() != table.n_modes) {
        throw InvalidGridError("strip::kernel_correction: table resolution " +
                               std::to_string(table.n_modes) + " does not match function " +
                               std::to_string(w.n_modes()));
    }
    return rotate_scale(w, [&](int n) { return table.lambda[static_cast<size_t>(n - 1)]; });
}

PeriodicFunction kernel_correction_quadrature(const PeriodicFunction& w,
                                              const KernelTable& table) {
    require_zero_mean(w, "strip::kernel_correction_quadrature");
    if (w.n_modes() != table.n_modes) {
        throw InvalidGridError("strip::kernel_correction_quadrature: resolution mismatch");
    }
    // Trapezoidal rule for (1/2pi) int kappa(t - s) w(s) ds; the offsets
    // t_i - s_j land on the collocation grid, so this is a circular
    // convolution with the tabulated kernel samples.
    const int m = w.n_points();
    std::vector<double> out(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            const int k = (i - j + m) % m;
            acc += table.kappa_values[static_cast<size_t>(k)] * w.value(j);
        }
        out[static_cast<size_t>(i)] = acc / m;
    }
    return PeriodicFunction(std::move(out));
}

namespace {

PeriodicFunction commutator_impl(const PeriodicFunction& w, auto&& conjugate) {
    const PeriodicFunction dw = w.derivative();
    PeriodicFunction p = product(w, dw);  // (w^2/2)', zero mean up to roundoff
    const double stray = p.mean();
    const double scale = std::max(1.0, w.max_norm());
    if (std::abs(stray) > 1e-10 * scale * scale) {
        throw DomainError("strip::commutator: w w' acquired non-roundoff mean " +
                          format_double(stray));
    }
    return product(w, conjugate(dw)) - conjugate(p - stray);
}

}  // namespace

PeriodicFunction commutator(const PeriodicFunction& w, StripDepth d) {
    return commutator_impl(w, [&](const PeriodicFunction& u) { return hilbert(u, d); });
}

PeriodicFunction commutator_deep(const PeriodicFunction& w) {
    return commutator_impl(w, [](const PeriodicFunction& u) { return hilbert_deep(u); });
}

}  // namespace strip
}  // namespace vorwave
