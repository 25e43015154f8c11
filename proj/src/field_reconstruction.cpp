#include "vorwave/field_reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vorwave/continuation.hpp"
#include "vorwave/errors.hpp"

namespace vorwave {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kSingularFactor = 1e-12;

// ----- series building blocks -------------------------------------------------------------------

// Vertical profiles s_n = sinh(n(y+d))/sinh(nd), c_n = cosh(n(y+d))/sinh(nd)
// in exp-difference form: every exponent is nonpositive on y in [-d, 0], so
// large n d cannot overflow, s_n(0) = 1 and s_n(-d) = 0 come out exact.
struct Profiles {
    std::vector<double> s, c;
};

Profiles profiles_at(double y, double d, int m_modes) {
    Profiles out;
    out.s.resize(static_cast<size_t>(m_modes));
    out.c.resize(static_cast<size_t>(m_modes));
    for (int n = 1; n <= m_modes; ++n) {
        const double eny = std::exp(n * y);
        const double et = std::exp(-2.0 * n * (y + d));
        const double denom = 1.0 - std::exp(-2.0 * n * d);
        out.s[static_cast<size_t>(n - 1)] = eny * (1.0 - et) / denom;
        out.c[static_cast<size_t>(n - 1)] = eny * (1.0 + et) / denom;
    }
    return out;
}

struct TrigTable {
    int nx;
    std::vector<double> cosv, sinv;

    TrigTable(int nx_points, int m_modes) : nx(nx_points) {
        cosv.resize(static_cast<size_t>(m_modes) * static_cast<size_t>(nx));
        sinv.resize(cosv.size());
        for (int n = 1; n <= m_modes; ++n)
            for (int c = 0; c < nx; ++c) {
                const double x = kTwoPi * c / nx;
                cosv[idx(n, c)] = std::cos(n * x);
                sinv[idx(n, c)] = std::sin(n * x);
            }
    }
    size_t idx(int n, int c) const {
        return static_cast<size_t>(n - 1) * static_cast<size_t>(nx) + static_cast<size_t>(c);
    }
};

double grid_y(double d, int ny, int r) {
    return -d + d * (static_cast<double>(r) / (ny - 1));
}

// Conformal map and its first derivatives at one strip point.  By the
// Cauchy-Riemann relations U_x = V_y and U_y = -V_x, so only the V gradient
// is carried.
struct MapPoint {
    double u, v, vx, vy;
};

MapPoint map_point(const WaveState& state, double a_offset, double x, double y) {
    const double d = state.params.strip_depth();
    const double v_mean = state.params.h + state.w.mean();
    const auto& a = state.w.cos_coeffs();
    const auto& b = state.w.sin_coeffs();
    const int n_modes = state.w.n_modes();

    MapPoint out;
    out.u = a_offset + v_mean / d * x;
    out.v = v_mean * (y + d) / d;
    out.vx = 0.0;
    out.vy = v_mean / d;
    for (int n = 1; n <= n_modes; ++n) {
        const double eny = std::exp(n * y);
        const double et = std::exp(-2.0 * n * (y + d));
        const double denom = 1.0 - std::exp(-2.0 * n * d);
        const double sn = eny * (1.0 - et) / denom;
        const double cn = eny * (1.0 + et) / denom;
        const double ct = std::cos(n * x);
        const double st = std::sin(n * x);
        const double ac = a[static_cast<size_t>(n - 1)];
        const double bc = b[static_cast<size_t>(n - 1)];
        out.u += cn * (ac * st - bc * ct);
        out.v += sn * (ac * ct + bc * st);
        out.vx += n * sn * (bc * ct - ac * st);
        out.vy += n * cn * (ac * ct + bc * st);
    }
    return out;
}

// zeta and its gradient at one strip point, from the doubled-resolution
// boundary spectrum beta.
struct FlowPoint {
    double zeta, zx, zy;
};

FlowPoint flow_point(const PeriodicFunction& beta, double d, double x, double y) {
    const auto& a = beta.cos_coeffs();
    const auto& b = beta.sin_coeffs();
    const int m_modes = beta.n_modes();

    FlowPoint out;
    out.zeta = beta.mean() * (y + d) / d;
    out.zx = 0.0;
    out.zy = beta.mean() / d;
    for (int n = 1; n <= m_modes; ++n) {
        const double eny = std::exp(n * y);
        const double et = std::exp(-2.0 * n * (y + d));
        const double denom = 1.0 - std::exp(-2.0 * n * d);
        const double sn = eny * (1.0 - et) / denom;
        const double cn = eny * (1.0 + et) / denom;
        const double ct = std::cos(n * x);
        const double st = std::sin(n * x);
        const double ac = a[static_cast<size_t>(n - 1)];
        const double bc = b[static_cast<size_t>(n - 1)];
        out.zeta += sn * (ac * ct + bc * st);
        out.zx += n * sn * (bc * ct - ac * st);
        out.zy += n * cn * (ac * ct + bc * st);
    }
    return out;
}

[[noreturn]] void throw_singular_map(double factor, double x, double y) {
    std::ostringstream msg;
    msg << "conformal factor V_x^2 + V_y^2 = " << factor << " below " << kSingularFactor
        << " at strip point (x = " << x << ", y = " << y << ")";
    throw RejectedStateError(msg.str(), "singular-map");
}

// ----- surface polyline helpers ------------------------------------------------------------------

int orientation(double ax, double ay, double bx, double by, double cx, double cy) {
    const double cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    return cross > 0.0 ? 1 : (cross < 0.0 ? -1 : 0);
}

bool segments_cross(double ax, double ay, double bx, double by, double cx, double cy, double dx,
                    double dy) {
    const int o1 = orientation(ax, ay, bx, by, cx, cy);
    const int o2 = orientation(ax, ay, bx, by, dx, dy);
    const int o3 = orientation(cx, cy, dx, dy, ax, ay);
    const int o4 = orientation(cx, cy, dx, dy, bx, by);
    return o1 * o2 < 0 && o3 * o4 < 0;
}

}  // namespace

// ----- StripField --------------------------------------------------------------------------------

double StripField::x(int c) const { return kTwoPi * c / nx; }

double StripField::y(int r) const { return grid_y(state.params.strip_depth(), ny, r); }

std::pair<double, double> StripField::conformal_at(double xq, double yq) const {
    const MapPoint mp = map_point(state, a_offset, xq, yq);
    return {mp.u, mp.v};
}

double StripField::psi_at(double xq, double yq) const {
    if (!assembled()) throw DomainError("psi_at: the stream function has not been assembled");
    const double d = state.params.strip_depth();
    const MapPoint mp = map_point(state, a_offset, xq, yq);
    const FlowPoint fp = flow_point(beta, d, xq, yq);
    return fp.zeta - m - 0.5 * state.params.gamma * mp.v * mp.v;
}

std::pair<double, double> StripField::velocity_at(double xq, double yq) const {
    if (!assembled()) throw DomainError("velocity_at: the stream function has not been assembled");
    const double d = state.params.strip_depth();
    const MapPoint mp = map_point(state, a_offset, xq, yq);
    const FlowPoint fp = flow_point(beta, d, xq, yq);
    const double cf = mp.vx * mp.vx + mp.vy * mp.vy;
    if (cf < kSingularFactor) throw_singular_map(cf, xq, yq);
    return {(mp.vx * fp.zx + mp.vy * fp.zy) / cf - state.params.gamma * mp.v,
            (mp.vx * fp.zy - mp.vy * fp.zx) / cf};
}

// ----- operations --------------------------------------------------------------------------------

std::vector<double> harmonic_extension(const PeriodicFunction& boundary, StripDepth dep,
                                       int grid_ny) {
    if (grid_ny < 2) throw InvalidGridError("harmonic_extension: grid_ny must be at least 2");
    for (double v : boundary.values())
        if (!std::isfinite(v)) throw DomainError("harmonic_extension: boundary data is not finite");

    const double d = dep.value;
    const int nx = boundary.n_points();
    const int m_modes = boundary.n_modes();
    const auto& a = boundary.cos_coeffs();
    const auto& b = boundary.sin_coeffs();
    const TrigTable trig(nx, m_modes);

    std::vector<double> out(static_cast<size_t>(grid_ny) * static_cast<size_t>(nx));
    for (int r = 0; r < grid_ny; ++r) {
        const double y = grid_y(d, grid_ny, r);
        const Profiles prof = profiles_at(y, d, m_modes);
        const double base = boundary.mean() * (y + d) / d;
        for (int c = 0; c < nx; ++c) {
            double acc = base;
            for (int n = 1; n <= m_modes; ++n)
                acc += prof.s[static_cast<size_t>(n - 1)] *
                       (a[static_cast<size_t>(n - 1)] * trig.cosv[trig.idx(n, c)] +
                        b[static_cast<size_t>(n - 1)] * trig.sinv[trig.idx(n, c)]);
            out[static_cast<size_t>(r) * static_cast<size_t>(nx) + static_cast<size_t>(c)] = acc;
        }
    }
    return out;
}

StripField conformal_map(const WaveState& state, double a_offset, int grid_ny) {
    state.params.validate();
    if (grid_ny < 2) throw InvalidGridError("conformal_map: grid_ny must be at least 2");
    const PhysicalParams& p = state.params;
    const double d = p.strip_depth();

    const Validity val = check_validity(state);
    if (!val.surface_above_bed)
        throw RejectedStateError(
            "conformal_map: the surface touches the bed (w <= -h at a collocation point)",
            "surface-positivity");
    if (!val.injective)
        throw RejectedStateError("conformal_map: the surface curve self-intersects", "injectivity");

    // regular parametrization: |Z'(x, 0)|^2 = u'^2 + v'^2 bounded away from 0
    const double v_mean = p.h + state.w.mean();
    const PeriodicFunction dw = state.w.derivative();
    const PeriodicFunction slope = strip::hilbert(dw, StripDepth(d));
    double min_factor = std::numeric_limits<double>::infinity();
    for (int j = 0; j < dw.n_points(); ++j) {
        const double up = v_mean / d + slope.value(j);
        const double vp = dw.value(j);
        min_factor = std::min(min_factor, up * up + vp * vp);
    }
    if (min_factor < kSingularFactor)
        throw RejectedStateError(
            "conformal_map: the surface parametrization is singular (u'^2 + v'^2 ~ 0)",
            "regular-curve");

    const int nx = state.w.n_points();
    const int n_modes = state.w.n_modes();
    const auto& a = state.w.cos_coeffs();
    const auto& b = state.w.sin_coeffs();
    const TrigTable trig(nx, n_modes);

    StripField field{state,
                     a_offset,
                     flux_from_lambda(state.lambda, p),
                     bernoulli_from_mu(state.mu, state.lambda, p),
                     nx,
                     grid_ny,
                     {},
                     {},
                     {},
                     {},
                     {},
                     {}};
    field.U.assign(static_cast<size_t>(grid_ny) * static_cast<size_t>(nx), 0.0);
    field.V.assign(field.U.size(), 0.0);

    for (int r = 0; r < grid_ny; ++r) {
        const double y = grid_y(d, grid_ny, r);
        const Profiles prof = profiles_at(y, d, n_modes);
        const double v_lin = v_mean * (y + d) / d;
        for (int c = 0; c < nx; ++c) {
            double uacc = a_offset + v_mean / d * (kTwoPi * c / nx);
            double vacc = v_lin;
            for (int n = 1; n <= n_modes; ++n) {
                const double ct = trig.cosv[trig.idx(n, c)];
                const double st = trig.sinv[trig.idx(n, c)];
                const double ac = a[static_cast<size_t>(n - 1)];
                const double bc = b[static_cast<size_t>(n - 1)];
                uacc += prof.c[static_cast<size_t>(n - 1)] * (ac * st - bc * ct);
                vacc += prof.s[static_cast<size_t>(n - 1)] * (ac * ct + bc * st);
            }
            const size_t i = static_cast<size_t>(r) * static_cast<size_t>(nx) + static_cast<size_t>(c);
            field.U[i] = uacc;
            field.V[i] = vacc;
        }
    }
    return field;
}

StripField stream_function(const WaveState& state, StripField field) {
    if (field.U.empty()) throw DomainError("stream_function: run conformal_map first");
    if (state.w.n_points() != field.state.w.n_points() || state.lambda != field.state.lambda ||
        state.mu != field.state.mu || state.w.values() != field.state.w.values())
        throw DomainError("stream_function: state differs from the one the field was built from");

    const PhysicalParams& p = state.params;
    const double d = p.strip_depth();
    const int nx = field.nx;
    const int ny = field.ny;
    const int n_modes = state.w.n_modes();
    const double v_mean = p.h + state.w.mean();

    // Surface boundary data of zeta at doubled resolution: v^2 has twice the
    // bandwidth of v and is represented exactly there.
    const PeriodicFunction v2 = (state.w + v_mean).resampled(2 * n_modes);
    field.beta = 0.5 * p.gamma * product(v2, v2) + field.m;

    const auto& a = state.w.cos_coeffs();
    const auto& b = state.w.sin_coeffs();
    const auto& ba = field.beta.cos_coeffs();
    const auto& bb = field.beta.sin_coeffs();
    const double bmean = field.beta.mean();
    const int zmodes = field.beta.n_modes();
    const TrigTable trig(nx, zmodes);

    field.zeta.assign(field.U.size(), 0.0);
    field.psi.assign(field.U.size(), 0.0);
    field.velocity_x.assign(field.U.size(), 0.0);
    field.velocity_y.assign(field.U.size(), 0.0);

    for (int r = 0; r < ny; ++r) {
        const double y = grid_y(d, ny, r);
        const Profiles prof = profiles_at(y, d, zmodes);
        const double z_lin = bmean * (y + d) / d;
        for (int c = 0; c < nx; ++c) {
            double zeta = z_lin, zx = 0.0, zy = bmean / d;
            for (int n = 1; n <= zmodes; ++n) {
                const double ct = trig.cosv[trig.idx(n, c)];
                const double st = trig.sinv[trig.idx(n, c)];
                const double ac = ba[static_cast<size_t>(n - 1)];
                const double bc = bb[static_cast<size_t>(n - 1)];
                const double sn = prof.s[static_cast<size_t>(n - 1)];
                zeta += sn * (ac * ct + bc * st);
                zx += n * sn * (bc * ct - ac * st);
                zy += n * prof.c[static_cast<size_t>(n - 1)] * (ac * ct + bc * st);
            }
            double vx = 0.0, vy = v_mean / d;
            for (int n = 1; n <= n_modes; ++n) {
                const double ct = trig.cosv[trig.idx(n, c)];
                const double st = trig.sinv[trig.idx(n, c)];
                const double ac = a[static_cast<size_t>(n - 1)];
                const double bc = b[static_cast<size_t>(n - 1)];
                vx += n * prof.s[static_cast<size_t>(n - 1)] * (bc * ct - ac * st);
                vy += n * prof.c[static_cast<size_t>(n - 1)] * (ac * ct + bc * st);
            }
            const size_t i = static_cast<size_t>(r) * static_cast<size_t>(nx) + static_cast<size_t>(c);
            const double vhere = field.V[i];
            field.zeta[i] = zeta;
            field.psi[i] = zeta - field.m - 0.5 * p.gamma * vhere * vhere;
            const double cf = vx * vx + vy * vy;
            if (cf < kSingularFactor) throw_singular_map(cf, kTwoPi * c / nx, y);
            field.velocity_x[i] = (vx * zx + vy * zy) / cf - p.gamma * vhere;
            field.velocity_y[i] = (vx * zy - vy * zx) / cf;
        }
    }
    return field;
}

SurfaceCurve surface_geometry(const WaveState& state, double a_offset) {
    state.params.validate();
    const PhysicalParams& p = state.params;
    const double d = p.strip_depth();
    const StripDepth dep(d);
    const int nx = state.w.n_points();
    const double v_mean = p.h + state.w.mean();
    const PeriodicFunction v = state.w + v_mean;

    for (int j = 0; j < nx; ++j)
        if (!(v.value(j) > 0.0))
            throw RejectedStateError("surface_geometry: the surface touches the bed (v <= 0)",
                                     "surface-positivity");

    const PeriodicFunction dw = state.w.derivative();
    const PeriodicFunction u_prime = strip::hilbert(dw, dep) + v_mean / d;
    const PeriodicFunction& v_prime = dw;

    double min_factor = std::numeric_limits<double>::infinity();
    bool graph = true;
    for (int j = 0; j < nx; ++j) {
        const double up = u_prime.value(j);
        const double vp = v_prime.value(j);
        min_factor = std::min(min_factor, up * up + vp * vp);
        if (!(up > 0.0)) graph = false;
    }
    if (min_factor < kSingularFactor)
        throw RejectedStateError(
            "surface_geometry: the surface parametrization is singular (u'^2 + v'^2 ~ 0)",
            "regular-curve");

    // one period of the physical surface
    const PeriodicFunction cw = strip::hilbert(state.w, dep);
    std::vector<double> X(static_cast<size_t>(nx)), Y(v.values());
    for (int j = 0; j < nx; ++j)
        X[static_cast<size_t>(j)] = a_offset + v_mean / d * v.grid_x(j) + cw.value(j);

    // Injectivity.  A graph (u' > 0 everywhere) is injective outright; an
    // overhanging curve gets the O(n^2) segment sweep against itself and the
    // next periodic image.
    if (!graph) {
        const double period = kTwoPi * v_mean / d;
        auto px = [&](int i) { return i < nx ? X[static_cast<size_t>(i)] : X[0] + period; };
        auto py = [&](int i) { return i < nx ? Y[static_cast<size_t>(i)] : Y[0]; };
        for (int i = 0; i < nx; ++i)
            for (int j = i + 2; j < nx; ++j) {
                if (i == 0 && j == nx - 1) continue;  // adjacent through the wrap
                if (segments_cross(px(i), py(i), px(i + 1), py(i + 1), px(j), py(j), px(j + 1),
                                   py(j + 1))) {
                    std::ostringstream msg;
                    msg << "surface_geometry: the surface self-intersects near x = "
                        << v.grid_x(i) << " and x = " << v.grid_x(j);
                    throw RejectedStateError(msg.str(), "injectivity");
                }
            }
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nx; ++j) {
                if (i == nx - 1 && j == 0) continue;  // wrap segment meets the image start
                if (segments_cross(px(i), py(i), px(i + 1), py(i + 1), px(j) + period, py(j),
                                   px(j + 1) + period, py(j + 1))) {
                    std::ostringstream msg;
                    msg << "surface_geometry: the surface overlaps its periodic image near x = "
                        << v.grid_x(i);
                    throw RejectedStateError(msg.str(), "injectivity");
                }
            }
    }

    // surface speed through the flux route and the tangent angle
    const double m_flux = flux_from_lambda(state.lambda, p);
    const double q = bernoulli_from_mu(state.mu, state.lambda, p);
    const PeriodicFunction gv = strip::dirichlet_neumann(v, dep);
    const PeriodicFunction gv2 = strip::dirichlet_neumann(0.5 * product(v, v), dep);
    const PeriodicFunction numer = p.gamma * (gv2 - product(v, gv)) + m_flux / d;

    std::vector<double> speed_vals(static_cast<size_t>(nx)), log_vals(static_cast<size_t>(nx));
    for (int j = 0; j < nx; ++j) {
        const double under = q - 2.0 * p.g * v.value(j);
        if (!(under > 0.0))
            throw RejectedStateError(
                "surface_geometry: Q - 2 g v <= 0, the flow stagnates at the surface and the "
                "tangent angle is undefined",
                "surface-speed");
        const double s = std::abs(numer.value(j)) / std::sqrt(under);
        if (!(s > 0.0))
            throw DomainError("surface_geometry: surface speed vanished; not a traveling wave");
        speed_vals[static_cast<size_t>(j)] = s;
        log_vals[static_cast<size_t>(j)] = std::log(s);
    }
    PeriodicFunction speed(std::move(speed_vals));
    PeriodicFunction logs(std::move(log_vals));
    const PeriodicFunction theta0 = strip::hilbert_inverse(logs - logs.mean(), dep);

    double compat = 0.0;
    for (int j = 0; j < nx; ++j) {
        compat = std::max(compat, std::abs(u_prime.value(j) -
                                           speed.value(j) * std::cos(theta0.value(j))));
        compat = std::max(compat, std::abs(v_prime.value(j) -
                                           speed.value(j) * std::sin(theta0.value(j))));
    }

    return SurfaceCurve{std::move(X), std::move(Y), u_prime, v_prime,
                        speed,        theta0,       true,    compat};
}

StagnationReport find_stagnation(const StripField& field) {
    if (!field.assembled()) throw DomainError("find_stagnation: run stream_function first");
    const PhysicalParams& p = field.state.params;
    const double d = p.strip_depth();
    const int nx = field.nx;
    const int ny = field.ny;
    StagnationReport report;

    // critical layer: horizontal velocity changes sign along a grid column
    for (int c = 0; c < nx && !report.has_critical_layer; ++c) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int r = 0; r < ny; ++r) {
            const double u = field.at(field.velocity_x, r, c);
            lo = std::min(lo, u);
            hi = std::max(hi, u);
        }
        if (lo < 0.0 && hi > 0.0) report.has_critical_layer = true;
    }

    // Laminar flow: the zero set is a horizontal line, not isolated points.
    if (field.state.w.max_norm() <= 1e-12 * std::max(1.0, p.h)) {
        if (p.gamma == 0.0) return report;
        if (laminar_flow(field.state.lambda, p).stagnation_y) {
            double ylo = -d, yhi = 0.0;
            double flo = field.velocity_at(0.0, ylo).first;
            const double fhi = field.velocity_at(0.0, yhi).first;
            if (flo == 0.0)
                report.laminar_line_y = field.conformal_at(0.0, ylo).second;
            else if (fhi == 0.0)
                report.laminar_line_y = field.conformal_at(0.0, yhi).second;
            else {
                for (int it = 0; it < 200; ++it) {
                    const double ym = 0.5 * (ylo + yhi);
                    const double fm = field.velocity_at(0.0, ym).first;
                    if ((fm < 0.0) == (flo < 0.0)) {
                        ylo = ym;
                        flo = fm;
                    } else {
                        yhi = ym;
                    }
                }
                report.laminar_line_y = field.conformal_at(0.0, 0.5 * (ylo + yhi)).second;
            }
        }
        return report;
    }

    // Genuine wave: seed a 2-D Newton iteration wherever both velocity
    // components change sign around a grid cell.
    double vmax = 0.0;
    for (size_t i = 0; i < field.velocity_x.size(); ++i)
        vmax = std::max(vmax, std::hypot(field.velocity_x[i], field.velocity_y[i]));
    const double accept = 1e-9 * vmax;
    const double dx = kTwoPi / nx;
    const double dy = d / (ny - 1);

    const auto mixed_sign = [](double v0, double v1, double v2, double v3) {
        const double lo = std::min(std::min(v0, v1), std::min(v2, v3));
        const double hi = std::max(std::max(v0, v1), std::max(v2, v3));
        return lo <= 0.0 && hi >= 0.0 && (lo < 0.0 || hi > 0.0);
    };

    struct Root {
        double sx, sy;  // strip coordinates
    };
    std::vector<Root> roots;

    for (int r = 0; r + 1 < ny; ++r)
        for (int c = 0; c < nx; ++c) {
            const int c2 = (c + 1) % nx;
            const double u00 = field.at(field.velocity_x, r, c);
            const double u01 = field.at(field.velocity_x, r, c2);
            const double u10 = field.at(field.velocity_x, r + 1, c);
            const double u11 = field.at(field.velocity_x, r + 1, c2);
            const double w00 = field.at(field.velocity_y, r, c);
            const double w01 = field.at(field.velocity_y, r, c2);
            const double w10 = field.at(field.velocity_y, r + 1, c);
            const double w11 = field.at(field.velocity_y, r + 1, c2);
            if (!mixed_sign(u00, u01, u10, u11) || !mixed_sign(w00, w01, w10, w11)) continue;

            double sx = dx * (c + 0.5);
            double sy = -d + dy * (r + 0.5);
            bool converged = false;
            for (int it = 0; it < 40; ++it) {
                const auto [fx, fy] = field.velocity_at(sx, sy);
                if (std::hypot(fx, fy) <= accept) {
                    converged = true;
                    break;
                }
                const double e = 1e-6;
                const auto [axp, ayp] = field.velocity_at(sx + e, sy);
                const auto [axm, aym] = field.velocity_at(sx - e, sy);
                const auto [bxp, byp] = field.velocity_at(sx, sy + e);
                const auto [bxm, bym] = field.velocity_at(sx, sy - e);
                const double j11 = (axp - axm) / (2.0 * e), j12 = (bxp - bxm) / (2.0 * e);
                const double j21 = (ayp - aym) / (2.0 * e), j22 = (byp - bym) / (2.0 * e);
                const double det = j11 * j22 - j12 * j21;
                if (std::abs(det) < 1e-30) break;
                double step_x = -(j22 * fx - j12 * fy) / det;
                double step_y = -(j11 * fy - j21 * fx) / det;
                const double cap = 2.0 * std::max(dx, dy);
                const double sn = std::max(std::abs(step_x), std::abs(step_y));
                if (sn > cap) {
                    step_x *= cap / sn;
                    step_y *= cap / sn;
                }
                sx += step_x;
                sy = std::clamp(sy + step_y, -d, 0.0);
            }
            if (!converged) {
                std::ostringstream msg;
                msg << "seed at cell (row " << r << ", col " << c
                    << ") dropped: no convergence to a stagnation point";
                report.notes.push_back(msg.str());
                continue;
            }

            sx = std::fmod(sx, kTwoPi);
            if (sx < 0.0) sx += kTwoPi;
            bool duplicate = false;
            for (const Root& q : roots) {
                double gap = std::abs(sx - q.sx);
                gap = std::min(gap, kTwoPi - gap);
                if (gap <= dx && std::abs(sy - q.sy) <= dy) {
                    duplicate = true;
                    break;
                }
            }
            if (duplicate) continue;
            roots.push_back(Root{sx, sy});

            const double e = 1e-5;
            const auto [axp, ayp] = field.velocity_at(sx + e, sy);
            const auto [axm, aym] = field.velocity_at(sx - e, sy);
            const auto [bxp, byp] = field.velocity_at(sx, sy + e);
            const auto [bxm, bym] = field.velocity_at(sx, sy - e);
            const double det = ((axp - axm) * (byp - bym) - (bxp - bxm) * (ayp - aym)) /
                               (4.0 * e * e);
            const auto [px, py] = field.conformal_at(sx, sy);
            report.points.push_back(StagnationPoint{
                px, py, det > 0.0 ? CriticalPointType::center : CriticalPointType::saddle, sx,
                sy});
        }

    std::sort(report.points.begin(), report.points.end(),
              [](const StagnationPoint& a, const StagnationPoint& b) { return a.x < b.x; });
    return report;
}

FieldDiagnostics field_diagnostics(const StripField& field) {
    if (!field.assembled()) throw DomainError("field_diagnostics: run stream_function first");
    if (field.ny < 3) throw InvalidGridError("field_diagnostics: need at least 3 rows");

    const PhysicalParams& p = field.state.params;
    const double d = p.strip_depth();
    const int nx = field.nx;
    const int ny = field.ny;
    const double dy = d / (ny - 1);
    const double v_mean = p.h + field.state.w.mean();
    const double slope = v_mean / d;

    // spectral x-derivatives of the stored rows (U minus its linear ramp)
    std::vector<std::vector<double>> ux(static_cast<size_t>(ny)), vx(static_cast<size_t>(ny));
    std::vector<std::vector<double>> pxx(static_cast<size_t>(ny));
    for (int r = 0; r < ny; ++r) {
        std::vector<double> urow(static_cast<size_t>(nx)), vrow(static_cast<size_t>(nx)),
            prow(static_cast<size_t>(nx));
        for (int c = 0; c < nx; ++c) {
            const double xr = kTwoPi * c / nx;
            urow[static_cast<size_t>(c)] = field.at(field.U, r, c) - field.a_offset - slope * xr;
            vrow[static_cast<size_t>(c)] = field.at(field.V, r, c);
            prow[static_cast<size_t>(c)] = field.at(field.psi, r, c);
        }
        const PeriodicFunction fu(std::move(urow)), fv(std::move(vrow)), fp(std::move(prow));
        ux[static_cast<size_t>(r)] = fu.derivative().values();
        for (double& uxi : ux[static_cast<size_t>(r)]) uxi += slope;
        vx[static_cast<size_t>(r)] = fv.derivative().values();
        pxx[static_cast<size_t>(r)] = fp.derivative().derivative().values();
    }

    FieldDiagnostics diag;
    for (int r = 1; r + 1 < ny; ++r)
        for (int c = 0; c < nx; ++c) {
            const double uy =
                (field.at(field.U, r + 1, c) - field.at(field.U, r - 1, c)) / (2.0 * dy);
            const double vy =
                (field.at(field.V, r + 1, c) - field.at(field.V, r - 1, c)) / (2.0 * dy);
            const double uxv = ux[static_cast<size_t>(r)][static_cast<size_t>(c)];
            const double vxv = vx[static_cast<size_t>(r)][static_cast<size_t>(c)];
            diag.cauchy_riemann = std::max(diag.cauchy_riemann, std::abs(uxv - vy));
            diag.cauchy_riemann = std::max(diag.cauchy_riemann, std::abs(uy + vxv));

            const double pyy = (field.at(field.psi, r + 1, c) - 2.0 * field.at(field.psi, r, c) +
                                field.at(field.psi, r - 1, c)) /
                               (dy * dy);
            const double cf = vxv * vxv + vy * vy;
            const double lap =
                (pxx[static_cast<size_t>(r)][static_cast<size_t>(c)] + pyy) / cf + p.gamma;
            diag.laplacian = std::max(diag.laplacian, std::abs(lap));
        }
    return diag;
}

const char* to_string(CriticalPointType type) {
    return type == CriticalPointType::center ? "center" : "saddle";
}

}  // namespace vorwave
