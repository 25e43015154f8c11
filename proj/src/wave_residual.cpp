#include "vorwave/wave_residual.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>

#include "vorwave/errors.hpp"

namespace vorwave {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void PhysicalParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(std::isfinite(v) && v > 0.0)) {
            throw DomainError(std::string("PhysicalParams: ") + name +
                              " must be positive and finite, got " + format_double(v));
        }
    };
    positive(g, "g");
    positive(k, "k");
    positive(h, "h");
    if (!std::isfinite(gamma)) throw DomainError("PhysicalParams: gamma must be finite");
}

double PhysicalParams::period() const {
    return 2.0 * std::numbers::pi / k;
}

double lambda_from_flux(double m, const PhysicalParams& p) {
    p.validate();
    return m / p.h - p.gamma * p.h / 2.0;
}

double flux_from_lambda(double lambda, const PhysicalParams& p) {
    p.validate();
    return lambda * p.h + p.gamma * p.h * p.h / 2.0;
}

double mu_from_bernoulli(double q, double lambda, const PhysicalParams& p) {
    p.validate();
    return q - 2.0 * p.g * p.h - lambda * lambda;
}

double bernoulli_from_mu(double mu, double lambda, const PhysicalParams& p) {
    p.validate();
    return 2.0 * p.g * p.h + lambda * lambda + mu;
}

namespace {

// Grid factors shared by the residual and its derivative:
//   A = C(w w') - w C(w') - w/k + [w^2]/(2kh)     (zero-mean arguments to C)
//   S = lambda/k + gamma A
//   c = lambda^2 + mu - 2 g w
//   P = w'^2 + (1/k + C(w'))^2
// and the residual itself is S^2 - c P.
struct ResidualParts {
    PeriodicFunction dw, chw, t, s, c, p;
};

ResidualParts residual_parts(const WaveState& st) {
    st.params.validate();
    const double k = st.params.k;
    const StripDepth d(st.params.strip_depth());
    const double scale = std::max(1.0, st.w.max_norm());
    if (std::abs(st.w.mean()) > 1e-12 * scale) {
        throw DomainError("residual: w must have zero mean, got " + format_double(st.w.mean()));
    }

    PeriodicFunction dw = st.w.derivative();
    PeriodicFunction chw = strip::hilbert(dw, d);
    PeriodicFunction ww = product(st.w, dw);
    ww = ww - ww.mean();
    const double w2_mean = mean(product(st.w, st.w));
    PeriodicFunction a = strip::hilbert(ww, d) - product(st.w, chw) - (1.0 / k) * st.w +
                         w2_mean / (2.0 * st.params.strip_depth());
    PeriodicFunction s = st.params.gamma * a + st.lambda / k;
    PeriodicFunction c = (-2.0 * st.params.g) * st.w + (st.lambda * st.lambda + st.mu);
    PeriodicFunction t = chw + 1.0 / k;
    PeriodicFunction p = product(dw, dw) + product(t, t);
    return {std::move(dw), std::move(chw), std::move(t), std::move(s), std::move(c),
            std::move(p)};
}

}  // namespace

PeriodicFunction residual(const WaveState& state) {
    const ResidualParts parts = residual_parts(state);
    return product(parts.s, parts.s) - product(parts.c, parts.p);
}

PeriodicFunction linearized_trivial(double lambda, const PhysicalParams& p, double nu,
                                    const PeriodicFunction& f) {
    p.validate();
    const double k = p.k;
    const StripDepth d(p.strip_depth());
    const PeriodicFunction cfd = strip::hilbert(f.derivative(), d);
    return (2.0 / (k * k)) * ((p.g - lambda * p.gamma) * f - (lambda * lambda * k) * cfd) -
           nu / (k * k);
}

double trivial_eigenvalue(int n, double lambda, const PhysicalParams& p) {
    p.validate();
    const double k = p.k;
    const double coth = strip::coth_multiplier(n, p.strip_depth());
    return (2.0 / (k * k)) * (p.g - lambda * p.gamma - lambda * lambda * n * k * coth);
}

ResidualJacobian::ResidualJacobian(const WaveState& base)
    : base_(base),
      d_(base.params.strip_depth()),
      dw_(PeriodicFunction::zero(1)),
      chw_(PeriodicFunction::zero(1)),
      t_(PeriodicFunction::zero(1)),
      s_(PeriodicFunction::zero(1)),
      c_(PeriodicFunction::zero(1)),
      p_(PeriodicFunction::zero(1)) {
    ResidualParts parts = residual_parts(base);
    dw_ = std::move(parts.dw);
    chw_ = std::move(parts.chw);
    t_ = std::move(parts.t);
    s_ = std::move(parts.s);
    c_ = std::move(parts.c);
    p_ = std::move(parts.p);
}

PeriodicFunction ResidualJacobian::apply(double nu, const PeriodicFunction& f) const {
    const double k = base_.params.k;
    const double gamma = base_.params.gamma;
    const double g = base_.params.g;
    const PeriodicFunction fd = f.derivative();
    const PeriodicFunction cfd = strip::hilbert(fd, d_);

    PeriodicFunction dp = product(f, dw_) + product(base_.w, fd);  // d(w w')
    dp = dp - dp.mean();
    const PeriodicFunction da = strip::hilbert(dp, d_) - product(f, chw_) -
                                product(base_.w, cfd) - (1.0 / k) * f +
                                mean(product(base_.w, f)) / base_.params.strip_depth();

    const PeriodicFunction dc = (-2.0 * g) * f + nu;
    const PeriodicFunction dbig = 2.0 * product(dw_, fd) + 2.0 * product(t_, cfd);
    return 2.0 * gamma * product(s_, da) - product(dc, p_) - product(c_, dbig);
}

PeriodicFunction ResidualJacobian::lambda_direction() const {
    const double k = base_.params.k;
    return (2.0 / k) * s_ - (2.0 * base_.lambda) * p_;
}

Eigen::MatrixXd ResidualJacobian::assemble() const {
    const int n = base_.w.n_modes();
    Eigen::MatrixXd j(n + 1, n + 1);
    auto fill_column = [&](int col, const PeriodicFunction& out) {
        j(0, col) = out.mean();
        for (int row = 1; row <= n; ++row) j(row, col) = out.cos_coeff(row);
    };
    fill_column(0, apply(1.0, PeriodicFunction::zero(n)));
    for (int mode = 1; mode <= n; ++mode) {
        fill_column(mode, apply(0.0, PeriodicFunction::harmonic(n, mode, 1.0, 0.0)));
    }
    return j;
}

DispersionRoots dispersion_lambdas(int n, const PhysicalParams& p) {
    p.validate();
    if (n < 1) throw DomainError("dispersion_lambdas: mode must be >= 1");
    // lambda^2 n k coth(n k h) + lambda gamma - g = 0, rewritten through
    // T = tanh(n k h)/(n k) as lambda = -gamma T/2 +- sqrt(gamma^2 T^2/4 + g T).
    const double t = std::tanh(n * p.strip_depth()) / (n * p.k);
    const double half = p.gamma * t / 2.0;
    const double root = std::sqrt(half * half + p.g * t);
    return {-half + root, -half - root};
}

DispersionRoots bifurcating_flux(int n, const PhysicalParams& p) {
    const DispersionRoots lambdas = dispersion_lambdas(n, p);
    return {flux_from_lambda(lambdas.plus, p), flux_from_lambda(lambdas.minus, p)};
}

double dispersion_transversality(int n, double lambda, const PhysicalParams& p) {
    p.validate();
    return -p.gamma - 2.0 * lambda * n * p.k * strip::coth_multiplier(n, p.strip_depth());
}

double LaminarFlow::stream_function(double y) const {
    return -(params.gamma / 2.0) * y * y + (m / params.h + params.gamma * params.h / 2.0) * y - m;
}

double LaminarFlow::velocity(double y) const {
    return lambda + params.gamma * (params.h - y);
}

LaminarFlow laminar_flow(double lambda, const PhysicalParams& p) {
    p.validate();
    LaminarFlow flow;
    flow.params = p;
    flow.lambda = lambda;
    flow.m = flux_from_lambda(lambda, p);
    flow.q = bernoulli_from_mu(0.0, lambda, p);
    if (p.gamma != 0.0 && lambda * (lambda + p.gamma * p.h) <= 0.0) {
        flow.stagnation_y = p.h + lambda / p.gamma;
    }
    return flow;
}

namespace {

// Bisection on [lo, hi] with f(lo), f(hi) of opposite sign; refines until the
// bracket is tighter than rel_tol relative to the root scale.
double bisect(const std::function<double(double)>& f, double lo, double hi, double f_lo,
              double rel_tol = 1e-14) {
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= rel_tol * std::max(1.0, std::abs(mid))) return mid;
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if ((f_lo < 0.0) == (f_mid < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

StagnationCriterion stagnation_criterion(const PhysicalParams& p) {
    p.validate();
    StagnationCriterion out;
    const double kh = p.strip_depth();
    out.lhs = std::tanh(kh) / kh;
    out.rhs = p.gamma * p.gamma * p.h / (p.g + p.gamma * p.gamma * p.h);
    out.holds = out.lhs <= out.rhs;

    // Thresholds only make sense against a sheared current; without vorticity
    // both are reported absent.
    if (p.gamma != 0.0) {
        // Threshold wavenumber: tanh(kh)/(kh) falls from 1 to 0, so a
        // crossing with rhs exists exactly when 0 < rhs < 1.
        auto f_k = [&](double k) { return std::tanh(k * p.h) / (k * p.h) - out.rhs; };
        double lo = 1.0, hi = 1.0;
        while (f_k(lo) < 0.0) lo /= 2.0;
        while (f_k(hi) > 0.0) hi *= 2.0;
        out.k_star = bisect(f_k, lo, hi, f_k(lo));

        // Threshold vorticity: rhs grows from 0 to 1 in |gamma|, lhs is
        // fixed in (0, 1), so a positive crossing always exists.
        auto f_gamma = [&](double gamma) {
            return gamma * gamma * p.h / (p.g + gamma * gamma * p.h) - out.lhs;
        };
        double glo = 1.0, ghi = 1.0;
        while (f_gamma(glo) > 0.0) glo /= 2.0;
        while (f_gamma(ghi) < 0.0) ghi *= 2.0;
        out.gamma_star = bisect(f_gamma, glo, ghi, f_gamma(glo));
    }
    return out;
}

FluxCondition flux_condition(double m_flux, const PhysicalParams& p) {
    p.validate();
    if (!(p.gamma > 0.0)) {
        throw DomainError("flux_condition: requires gamma > 0, got " + format_double(p.gamma));
    }
    if (!(m_flux < 0.0)) {
        throw DomainError("flux_condition: requires m < 0, got " + format_double(m_flux));
    }
    if (p.k != 1.0) {
        throw DomainError("flux_condition: defined at k = 1 only, got k = " +
                          format_double(p.k));
    }

    FluxCondition out;
    const double s = std::sqrt(-2.0 * p.gamma * m_flux);
    out.lhs = std::tanh(std::sqrt(-2.0 * m_flux / p.gamma));
    out.rhs = -2.0 * m_flux * p.gamma / (p.g + p.gamma * s);
    out.holds = out.lhs > out.rhs;

    // Root of tanh( -lambda/gamma - sqrt(lambda^2 + 2 gamma m)/gamma )
    //       = lambda^2 / (g - gamma lambda)  below  lambda_0 = -s.
    // The radicand factors as (lambda - lambda_0)(lambda + lambda_0), which
    // avoids cancellation near the endpoint.
    const double lambda0 = -s;
    auto depth_of = [&](double lambda) {
        const double rad = std::sqrt((lambda - lambda0) * (lambda + lambda0));
        return -lambda / p.gamma - rad / p.gamma;
    };
    auto f = [&](double lambda) {
        return std::tanh(depth_of(lambda)) -
               lambda * lambda / (p.g - p.gamma * lambda);
    };

    const double right = lambda0 - 1e-12;
    double offset = 10.0 * (1.0 + p.g / p.gamma);
    const double f_right = f(right);
    bool bracketed = false;
    double left = lambda0 - offset;
    for (int attempt = 0; attempt < 60; ++attempt) {
        left = lambda0 - offset;
        if ((f(left) < 0.0) != (f_right < 0.0)) {
            bracketed = true;
            break;
        }
        offset *= 2.0;
    }
    if (bracketed) {
        const double root = bisect(f, left, right, f(left));
        out.lambda_root = root;
        out.depth_root = depth_of(root);
    }
    return out;
}

}  // namespace vorwave
