#include "vorwave/continuation.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>
#include <utility>

#include "vorwave/errors.hpp"

namespace vorwave {

namespace {

//======================================================================
// coordinate packing: x = [mu, lambda, a_1 .. a_N]
//======================================================================

Eigen::VectorXd pack_state(const WaveState& st) {
    const int n = st.w.n_modes();
    Eigen::VectorXd x(n + 2);
    x[0] = st.mu;
    x[1] = st.lambda;
    for (int j = 1; j <= n; ++j) x[j + 1] = st.w.cos_coeff(j);
    return x;
}

WaveState unpack_state(const Eigen::VectorXd& x, const PhysicalParams& p) {
    const int n = static_cast<int>(x.size()) - 2;
    std::vector<double> a(static_cast<size_t>(n));
    for (int j = 1; j <= n; ++j) a[static_cast<size_t>(j - 1)] = x[j + 1];
    return WaveState{p, x[1], x[0], PeriodicFunction(n, 0.0, std::move(a), {})};
}

// Residual equations as a vector: [mean, cos_1 .. cos_N].
Eigen::VectorXd equation_vector(const PeriodicFunction& r) {
    const int n = r.n_modes();
    Eigen::VectorXd v(n + 1);
    v[0] = r.mean();
    for (int j = 1; j <= n; ++j) v[j] = r.cos_coeff(j);
    return v;
}

WaveState with_modes(const WaveState& st, int n_modes) {
    if (st.w.n_modes() == n_modes) return st;
    return WaveState{st.params, st.lambda, st.mu, st.w.resampled(n_modes)};
}

std::string format_norm(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

// Columns of the residual derivative in packed coordinates (mu, lambda, a_j).
// `columns` lists which packed coordinates are unknowns, in matrix order.
Eigen::MatrixXd derivative_columns(const ResidualJacobian& jac, const std::vector<int>& columns) {
    const int n = jac.base().w.n_modes();
    Eigen::MatrixXd m(n + 1, static_cast<Eigen::Index>(columns.size()));
    for (size_t c = 0; c < columns.size(); ++c) {
        const int coord = columns[c];
        PeriodicFunction col = (coord == 0)   ? jac.apply(1.0, PeriodicFunction::zero(n))
                               : (coord == 1) ? jac.lambda_direction()
                                              : jac.apply(0.0, PeriodicFunction::harmonic(
                                                                   n, coord - 1, 1.0, 0.0));
        m.col(static_cast<Eigen::Index>(c)) = equation_vector(col);
    }
    return m;
}

}  // namespace

//======================================================================
// linear algebra
//======================================================================

namespace detail {

Eigen::VectorXd lu_solve_or_throw(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  double* condition) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
        const double sigma_min = svd.singularValues().tail(1)(0);
        throw SingularJacobianError(
            "linear system is numerically singular (smallest singular value " +
                format_norm(sigma_min) + ")",
            sigma_min);
    }
    if (condition != nullptr) {
        const double rc = lu.rcond();
        *condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    }
    return lu.solve(b);
}

}  // namespace detail

//======================================================================
// Newton correctors
//======================================================================

void SolverConfig::validate() const {
    if (!(newton_tol > 0.0) || !(newton_tol < 1e-6))
        throw ConfigError("newton_tol must lie in (0, 1e-6)");
    if (max_newton_iters < 1) throw ConfigError("max_newton_iters must be at least 1");
    if (!(ds >= kMinArcStep) || !(ds <= kMaxArcStep))
        throw ConfigError("ds must lie in [1e-5, 5e-2]");
    if (n_modes < 2) throw ConfigError("n_modes must be at least 2");
}

NewtonResult newton_solve(const WaveState& initial, FixedParameter fixed,
                          const SolverConfig& config, int amplitude_mode) {
    config.validate();
    initial.params.validate();
    if (fixed == FixedParameter::amplitude &&
        (amplitude_mode < 1 || amplitude_mode >= config.n_modes))
        throw ConfigError("amplitude mode must lie in [1, n_modes)");
    if (symmetry_of(initial.w) != SymmetryClass::even)
        throw DomainError("newton iteration works on even profiles only");

    WaveState state = with_modes(initial, config.n_modes);
    const int n = config.n_modes;

    // With the amplitude pinned at exactly zero the trivial family makes
    // lambda unidentifiable (every speed solves the equation), so lambda is
    // held as well and the pinned mode's equation is dropped; it converges
    // passively and the final residual check covers it.
    const bool degenerate_amplitude =
        fixed == FixedParameter::amplitude && state.w.cos_coeff(amplitude_mode) == 0.0;

    // packed coordinates acting as unknowns
    std::vector<int> unknowns;
    int dropped_row = -1;
    if (fixed == FixedParameter::lambda) {
        unknowns.push_back(0);
        for (int j = 1; j <= n; ++j) unknowns.push_back(j + 1);
    } else {
        unknowns.push_back(0);
        if (!degenerate_amplitude) unknowns.push_back(1);
        else dropped_row = amplitude_mode;
        for (int j = 1; j <= n; ++j)
            if (j != amplitude_mode) unknowns.push_back(j + 1);
    }

    std::vector<double> history;
    double condition = 0.0;
    for (int iter = 0; iter <= config.max_newton_iters; ++iter) {
        const PeriodicFunction r = residual(state);
        const double norm = r.max_norm();
        history.push_back(norm);
        if (!std::isfinite(norm)) break;
        if (norm <= config.newton_tol)
            return NewtonResult{state, iter, norm, condition};
        if (iter == config.max_newton_iters) break;

        const ResidualJacobian jac(state);
        Eigen::MatrixXd m = derivative_columns(jac, unknowns);
        Eigen::VectorXd rhs = -equation_vector(r);
        if (dropped_row >= 0) {
            const Eigen::Index rows = m.rows() - 1;
            for (Eigen::Index i = dropped_row; i < rows; ++i) {
                m.row(i) = m.row(i + 1);
                rhs[i] = rhs[i + 1];
            }
            m.conservativeResize(rows, Eigen::NoChange);
            rhs.conservativeResize(rows);
        }
        const Eigen::VectorXd delta = detail::lu_solve_or_throw(m, rhs, &condition);

        Eigen::VectorXd x = pack_state(state);
        for (size_t c = 0; c < unknowns.size(); ++c)
            x[unknowns[c]] += delta[static_cast<Eigen::Index>(c)];
        state = unpack_state(x, state.params);
    }
    throw DivergenceError("newton did not converge within " +
                              std::to_string(config.max_newton_iters) +
                              " iterations (last residual " + format_norm(history.back()) + ")",
                          history);
}

namespace {

// Pseudo-arclength corrector: unknowns [mu, lambda, a_1..a_N], equations are
// the residual plus the constraint  t . (x - anchor) - ds = 0.
NewtonResult newton_arclength(const Eigen::VectorXd& predictor, const Eigen::VectorXd& tangent,
                              const Eigen::VectorXd& anchor, double ds, const PhysicalParams& p,
                              const SolverConfig& config) {
    const int n = config.n_modes;
    std::vector<int> unknowns(static_cast<size_t>(n) + 2);
    for (int c = 0; c < n + 2; ++c) unknowns[static_cast<size_t>(c)] = c;

    Eigen::VectorXd x = predictor;
    std::vector<double> history;
    double condition = 0.0;
    for (int iter = 0; iter <= config.max_newton_iters; ++iter) {
        const WaveState state = unpack_state(x, p);
        const PeriodicFunction r = residual(state);
        const double constraint = tangent.dot(x - anchor) - ds;
        const double norm = std::max(r.max_norm(), std::abs(constraint));
        history.push_back(norm);
        if (!std::isfinite(norm)) break;
        if (norm <= config.newton_tol)
            return NewtonResult{state, iter, r.max_norm(), condition};
        if (iter == config.max_newton_iters) break;

        const ResidualJacobian jac(state);
        Eigen::MatrixXd m(n + 2, n + 2);
        m.topRows(n + 1) = derivative_columns(jac, unknowns);
        m.row(n + 1) = tangent.transpose();
        Eigen::VectorXd rhs(n + 2);
        rhs.head(n + 1) = -equation_vector(r);
        rhs[n + 1] = -constraint;
        x += detail::lu_solve_or_throw(m, rhs, &condition);
    }
    throw DivergenceError("arclength corrector did not converge (last residual " +
                              format_norm(history.back()) + ")",
                          history);
}

}  // namespace

//======================================================================
// bifurcation points
//======================================================================

const char* to_string(BranchSide side) { return side == BranchSide::plus ? "plus" : "minus"; }

std::vector<BifurcationPoint> find_bifurcation_points(const PhysicalParams& p, int n_max,
                                                      const SolverConfig& config) {
    p.validate();
    config.validate();
    if (n_max < 1) throw DomainError("n_max must be at least 1");
    if (n_max >= config.n_modes)
        throw DomainError("n_max must be below n_modes so the crossing mode is resolved");

    std::vector<BifurcationPoint> out;
    out.reserve(2 * static_cast<size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
        const DispersionRoots roots = dispersion_lambdas(n, p);
        const DispersionRoots flux = bifurcating_flux(n, p);
        const std::pair<BranchSide, double> sides[] = {{BranchSide::plus, roots.plus},
                                                       {BranchSide::minus, roots.minus}};
        for (const auto& [side, lambda_star] : sides) {
            const WaveState trivial{p, lambda_star, 0.0, PeriodicFunction::zero(config.n_modes)};
            const Eigen::MatrixXd m = ResidualJacobian(trivial).assemble();
            Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
            const Eigen::VectorXd sigma = svd.singularValues();
            const Eigen::Index last = sigma.size() - 1;
            const Eigen::VectorXd null_vec = svd.matrixV().col(last);

            BifurcationPoint bp;
            bp.mode = n;
            bp.side = side;
            bp.lambda_star = lambda_star;
            bp.flux = side == BranchSide::plus ? flux.plus : flux.minus;
            bp.sigma_min = sigma[last];
            bp.sigma_second = sigma[last - 1];
            bp.sigma_max = sigma[0];
            bp.null_overlap = std::abs(null_vec[n]);
            bp.transversality = dispersion_transversality(n, lambda_star, p);
            out.push_back(bp);
        }
    }
    return out;
}

//======================================================================
// validity
//======================================================================

namespace {

// Proper intersection of closed segments ab and cd, endpoints excluded.
bool segments_cross(double ax, double ay, double bx, double by, double cx, double cy, double dx,
                    double dy) {
    auto orient = [](double px, double py, double qx, double qy, double rx, double ry) {
        const double v = (qx - px) * (ry - py) - (qy - py) * (rx - px);
        if (v > 0.0) return 1;
        if (v < 0.0) return -1;
        return 0;
    };
    const int o1 = orient(ax, ay, bx, by, cx, cy);
    const int o2 = orient(ax, ay, bx, by, dx, dy);
    const int o3 = orient(cx, cy, dx, dy, ax, ay);
    const int o4 = orient(cx, cy, dx, dy, bx, by);
    return o1 * o2 < 0 && o3 * o4 < 0;
}

bool polyline_self_intersects(const std::vector<double>& xs, const std::vector<double>& ys,
                              double period) {
    const size_t n = xs.size();
    auto seg = [&](size_t i, int shift, double& ax, double& ay, double& bx, double& by) {
        ax = xs[i] + shift * period;
        ay = ys[i];
        const size_t j = (i + 1) % n;
        bx = xs[j] + (j == 0 ? shift + 1 : shift) * period;
        by = ys[j];
    };
    for (size_t i = 0; i < n; ++i) {
        double ax, ay, bx, by;
        seg(i, 0, ax, ay, bx, by);
        // against the base period (skip adjacent segments)
        for (size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            double cx, cy, dx, dy;
            seg(j, 0, cx, cy, dx, dy);
            if (segments_cross(ax, ay, bx, by, cx, cy, dx, dy)) return true;
        }
        // against the next periodic image
        for (size_t j = 0; j < n; ++j) {
            if (i == n - 1 && j == 0) continue;
            double cx, cy, dx, dy;
            seg(j, 1, cx, cy, dx, dy);
            if (segments_cross(ax, ay, bx, by, cx, cy, dx, dy)) return true;
        }
    }
    return false;
}

}  // namespace

Validity check_validity(const WaveState& state) {
    state.params.validate();
    const PhysicalParams& p = state.params;
    const StripDepth d(p.strip_depth());

    Validity v;
    for (double w : state.w.values())
        if (!(w > -p.h)) v.surface_above_bed = false;

    const PeriodicFunction slope = strip::hilbert(state.w.derivative(), d);
    bool graph = true;
    for (double s : slope.values())
        if (!(1.0 / p.k + s > 0.0)) graph = false;
    v.graph = graph;

    if (graph) {
        v.injective = true;  // X' > 0 at every collocation point: X is monotone
    } else {
        const PeriodicFunction cw = strip::hilbert(state.w, d);
        const int m = state.w.n_points();
        std::vector<double> xs(static_cast<size_t>(m)), ys(static_cast<size_t>(m));
        for (int j = 0; j < m; ++j) {
            xs[static_cast<size_t>(j)] = state.w.grid_x(j) / p.k + cw.value(j);
            ys[static_cast<size_t>(j)] = state.w.value(j) + p.h;
        }
        v.injective = !polyline_self_intersects(xs, ys, state.params.period());
    }
    return v;
}

//======================================================================
// branch tracing
//======================================================================

namespace {

BranchPoint make_branch_point(const WaveState& state, int mode, double arc) {
    BranchPoint bp;
    bp.s = state.w.cos_coeff(mode);
    bp.arc = arc;
    bp.state = state;
    bp.m = flux_from_lambda(state.lambda, state.params);
    bp.q = bernoulli_from_mu(state.mu, state.lambda, state.params);
    bp.residual_norm = residual(state).max_norm();
    bp.validity = check_validity(state);
    return bp;
}

}  // namespace

Branch trace_branch(const PhysicalParams& p, const BifurcationPoint& start, int n_points,
                    const SolverConfig& config) {
    p.validate();
    config.validate();
    if (n_points < 1) throw DomainError("n_points must be at least 1");
    if (start.mode < 1 || start.mode >= config.n_modes)
        throw DomainError("bifurcation mode must lie in [1, n_modes)");

    Branch br;
    br.params = p;
    br.mode_n = start.mode;
    br.lambda_star = start.lambda_star;
    br.side = start.side;

    const int n = config.n_modes;
    const WaveState trivial{p, start.lambda_star, 0.0, PeriodicFunction::zero(n)};
    br.points.push_back(make_branch_point(trivial, start.mode, 0.0));
    if (n_points == 1) return br;

    // First step off the trivial branch: hold the amplitude coefficient at
    // the step size, let (mu, lambda, other modes) correct.
    double ds = std::clamp(config.ds, kMinArcStep, kMaxArcStep);
    while (true) {
        const WaveState predictor{
            p, start.lambda_star, 0.0,
            PeriodicFunction::harmonic(n, start.mode, ds, 0.0)};
        try {
            const NewtonResult first =
                newton_solve(predictor, FixedParameter::amplitude, config, start.mode);
            const double arc =
                (pack_state(first.state) - pack_state(trivial)).norm();
            br.points.push_back(make_branch_point(first.state, start.mode, arc));
            break;
        } catch (const Error& e) {
            ds /= 2.0;
            if (ds < kMinArcStep) {
                br.truncation_reason = std::string("first step failed: ") + e.what();
                return br;
            }
        }
    }

    // Pseudo-arclength continuation with a secant predictor.
    Eigen::VectorXd prev_tangent;
    while (static_cast<int>(br.points.size()) < n_points) {
        const Eigen::VectorXd xk = pack_state(br.points.back().state);
        const Eigen::VectorXd xk1 = pack_state(br.points[br.points.size() - 2].state);
        Eigen::VectorXd tangent = xk - xk1;
        const double len = tangent.norm();
        if (!(len > 0.0)) {
            br.truncation_reason = "consecutive states coincide; no tangent direction";
            return br;
        }
        tangent /= len;
        if (prev_tangent.size() > 0 && prev_tangent[1] * tangent[1] < 0.0)
            br.fold_indices.push_back(static_cast<int>(br.points.size()) - 1);
        prev_tangent = tangent;

        bool accepted = false;
        while (!accepted) {
            const Eigen::VectorXd predictor = xk + ds * tangent;
            try {
                const NewtonResult r =
                    newton_arclength(predictor, tangent, xk, ds, p, config);
                const double arc = br.points.back().arc + ds;
                br.points.push_back(make_branch_point(r.state, start.mode, arc));
                if (r.iterations <= 4) ds = std::min(2.0 * ds, kMaxArcStep);
                accepted = true;
            } catch (const Error& e) {
                ds /= 2.0;
                if (ds < kMinArcStep) {
                    br.truncation_reason = std::string("arclength step failed: ") + e.what();
                    return br;
                }
            }
        }
    }
    return br;
}

//======================================================================
// depth sweep
//======================================================================

namespace {

int sweep_thread_count(int cells) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    int cap = static_cast<int>(hw);
    if (const char* env = std::getenv("VORWAVE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) cap = static_cast<int>(std::min<long>(v, 256));
    }
    return std::max(1, std::min(cap, cells));
}

// Bisection for a continuous sign change on [lo, hi].
double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

SurfaceSweep sweep_surface(const PhysicalParams& base, double h_min, double h_max, int h_count,
                           const SolverConfig& config, int trace_points) {
    base.validate();
    config.validate();
    if (!(h_min > 0.0) || !(h_max > h_min)) throw DomainError("need 0 < h_min < h_max");
    if (h_count < 2) throw DomainError("h_count must be at least 2");
    if (trace_points < 0) throw DomainError("trace_points must be nonnegative");

    SurfaceSweep sweep;
    sweep.base = base;
    sweep.base.h = h_min;
    sweep.rows.resize(static_cast<size_t>(h_count));
    if (trace_points > 0) sweep.branches.resize(2 * static_cast<size_t>(h_count));

    auto params_at = [&base](double h) {
        PhysicalParams p = base;
        p.h = h;
        return p;
    };

    // rows (and optional traces) per depth cell, concurrently
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < h_count; i = next.fetch_add(1)) {
            const double h = h_min + (h_max - h_min) * i / (h_count - 1);
            const PhysicalParams p = params_at(h);
            const DispersionRoots flux = bifurcating_flux(1, p);
            SweepRow& row = sweep.rows[static_cast<size_t>(i)];
            row.h = h;
            row.m_plus = flux.plus;
            row.m_minus = flux.minus;
            row.stagnation_holds = stagnation_criterion(p).holds;
            const double parabola = 0.5 * p.gamma * h * h;
            if (parabola != 0.0) {
                row.asym_plus = std::abs(flux.plus - parabola) / std::abs(parabola);
                row.asym_minus = std::abs(flux.minus - parabola) / std::abs(parabola);
            }
            if (trace_points > 0) {
                const auto points = find_bifurcation_points(p, 1, config);
                for (const auto& bp : points) {
                    const size_t slot = 2 * static_cast<size_t>(i) +
                                        (bp.side == BranchSide::plus ? 0 : 1);
                    sweep.branches[slot] = trace_branch(p, bp, trace_points, config);
                }
            }
        }
    };
    const int n_threads = sweep_thread_count(h_count);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (size_t i = 0; i + 1 < sweep.rows.size(); ++i)
        sweep.rows[i].h_star_bracket =
            (sweep.rows[i].m_minus < 0.0) != (sweep.rows[i + 1].m_minus < 0.0);

    if (base.gamma != 0.0) {
        const double g = base.g, k = base.k, gamma = base.gamma;
        // m_minus(h) = 0 is equivalent to tanh(kh)/(kh) = gamma^2 h/(4g + 2 gamma^2 h):
        // both sides are monotone in h, so the bracket is easy to grow.
        auto fold_gap = [&](double h) {
            return std::tanh(k * h) / (k * h) -
                   gamma * gamma * h / (4.0 * g + 2.0 * gamma * gamma * h);
        };
        double lo = h_min, hi = h_max;
        int guard = 0;
        while (fold_gap(lo) < 0.0 && ++guard < 200) lo /= 2.0;
        guard = 0;
        while (fold_gap(hi) > 0.0 && ++guard < 200) hi *= 2.0;
        double h_star = bisect_root(fold_gap, lo, hi);
        // polish directly on m_minus with secant steps
        auto m_minus_at = [&](double h) { return bifurcating_flux(1, params_at(h)).minus; };
        double h_prev = h_star * (1.0 + 1e-7);
        double f_prev = m_minus_at(h_prev);
        double f_star = m_minus_at(h_star);
        for (int i = 0; i < 8 && f_star != 0.0; ++i) {
            const double denom = f_star - f_prev;
            if (denom == 0.0) break;
            const double h_next = h_star - f_star * (h_star - h_prev) / denom;
            if (!std::isfinite(h_next) || h_next <= 0.0) break;
            h_prev = h_star;
            f_prev = f_star;
            h_star = h_next;
            f_star = m_minus_at(h_star);
            if (std::abs(f_star) <= 1e-13) break;
        }
        sweep.h_star = h_star;
        sweep.h_star_residual = std::abs(f_star);

        // criterion equality tanh(kh)/(kh) = gamma^2 h/(g + gamma^2 h)
        auto criterion_gap = [&](double h) {
            return std::tanh(k * h) / (k * h) - gamma * gamma * h / (g + gamma * gamma * h);
        };
        lo = h_min;
        hi = h_max;
        guard = 0;
        while (criterion_gap(lo) < 0.0 && ++guard < 200) lo /= 2.0;
        guard = 0;
        while (criterion_gap(hi) > 0.0 && ++guard < 200) hi *= 2.0;
        sweep.h_criterion = bisect_root(criterion_gap, lo, hi);
    }
    return sweep;
}

}  // namespace vorwave
