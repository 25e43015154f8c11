// Newton solver, bifurcation detection, branch tracing, and the depth sweep.
// Branch asymptotics are checked against the predicted s^2 remainder decay;
// thresholds follow the module contracts.

#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "vorwave/continuation.hpp"
#include "vorwave/errors.hpp"

using namespace vorwave;

namespace {

const PhysicalParams kStill{};                     // gamma 0
const PhysicalParams kVortex{2.0, 1.0, 1.0, 1.0};  // gamma 2

SolverConfig fast_config() {
    SolverConfig c;
    c.n_modes = 32;
    return c;
}

double state_distance(const WaveState& a, const WaveState& b) {
    double d = std::max(std::abs(a.lambda - b.lambda), std::abs(a.mu - b.mu));
    d = std::max(d, std::abs(a.w.mean() - b.w.mean()));
    for (int n = 1; n <= std::max(a.w.n_modes(), b.w.n_modes()); ++n) {
        const double ac = n <= a.w.n_modes() ? a.w.cos_coeff(n) : 0.0;
        const double bc = n <= b.w.n_modes() ? b.w.cos_coeff(n) : 0.0;
        d = std::max(d, std::abs(ac - bc));
    }
    return d;
}

}  // namespace

TEST_CASE("solver config validation") {
    CHECK_NOTHROW(SolverConfig{}.validate());
    auto bad = [](auto mutate) {
        SolverConfig c;
        mutate(c);
        c.validate();
    };
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.newton_tol = 0.0; }), ConfigError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.newton_tol = 1e-5; }), ConfigError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.max_newton_iters = 0; }), ConfigError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.ds = 0.2; }), ConfigError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.ds = 1e-6; }), ConfigError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.n_modes = 1; }), ConfigError);
}

TEST_CASE("dense solve: regular and singular systems") {
    Eigen::MatrixXd a(2, 2);
    a << 3.0, 1.0, 1.0, 2.0;
    Eigen::VectorXd b(2);
    b << 5.0, 5.0;
    double condition = 0.0;
    const Eigen::VectorXd x = detail::lu_solve_or_throw(a, b, &condition);
    CHECK(std::abs(x[0] - 1.0) <= 1e-14);
    CHECK(std::abs(x[1] - 2.0) <= 1e-14);
    CHECK(condition >= 1.0);

    Eigen::MatrixXd s(2, 2);
    s << 1.0, 2.0, 2.0, 4.0;  // rank one
    bool threw = false;
    try {
        detail::lu_solve_or_throw(s, b);
    } catch (const SingularJacobianError& e) {
        threw = true;
        CHECK(e.smallest_singular_value <= 1e-12);
    }
    CHECK(threw);
}

TEST_CASE("newton: exact roots return immediately") {
    const SolverConfig config = fast_config();
    const WaveState trivial{kStill, 0.3, 0.0, PeriodicFunction::zero(config.n_modes)};
    const NewtonResult r = newton_solve(trivial, FixedParameter::lambda, config);
    CHECK(r.iterations == 0);
    CHECK(r.residual_norm <= config.newton_tol);
    CHECK(state_distance(r.state, trivial) == 0.0);
}

TEST_CASE("newton at fixed speed pulls a perturbed state back to the trivial root") {
    const SolverConfig config = fast_config();
    std::vector<double> a(32, 0.0);
    a[1] = 2e-4;
    a[2] = -1e-4;
    const WaveState initial{kStill, 0.3, 1e-4, PeriodicFunction(32, 0.0, a, {})};
    const NewtonResult r = newton_solve(initial, FixedParameter::lambda, config);
    CHECK(r.state.lambda == 0.3);  // held exactly
    CHECK(r.state.w.max_norm() <= 1e-10);
    CHECK(std::abs(r.state.mu) <= 1e-10);
    CHECK(r.condition >= 1.0);
}

TEST_CASE("newton with amplitude zero converges to a trivial state") {
    const SolverConfig config = fast_config();
    std::vector<double> a(32, 0.0);
    a[1] = 1e-4;  // modes 2 and 3 perturbed, amplitude a_1 stays 0
    a[2] = -2e-4;
    const WaveState initial{kStill, 0.3, 0.0, PeriodicFunction(32, 0.0, a, {})};
    const NewtonResult r = newton_solve(initial, FixedParameter::amplitude, config);
    CHECK(r.state.w.cos_coeff(1) == 0.0);
    CHECK(r.state.lambda == 0.3);  // unidentifiable on the trivial family, so held
    CHECK(r.state.w.max_norm() <= 1e-9);
    CHECK(std::abs(r.state.mu) <= 1e-9);
}

TEST_CASE("newton with fixed amplitude lands on the branch near the slow root") {
    const SolverConfig config = fast_config();
    const double lambda_star = dispersion_lambdas(1, kVortex).minus;
    const WaveState seed{kVortex, lambda_star + 0.01, 0.0,
                         PeriodicFunction::harmonic(config.n_modes, 1, 1e-3, 0.0)};
    const NewtonResult r = newton_solve(seed, FixedParameter::amplitude, config);
    CHECK(r.iterations <= 6);
    CHECK(r.residual_norm <= config.newton_tol);
    CHECK(r.state.w.cos_coeff(1) == 1e-3);  // held exactly
    // the converged speed sits within O(s^2) of the bifurcation value
    CHECK(std::abs(r.state.lambda - lambda_star) <= 1e-4);
}

TEST_CASE("newton rejects odd profiles and runs out of iterations loudly") {
    SolverConfig config = fast_config();
    const WaveState odd{kStill, 0.3, 0.0, PeriodicFunction::harmonic(32, 1, 0.0, 1e-3)};
    CHECK_THROWS_AS(newton_solve(odd, FixedParameter::lambda, config), DomainError);

    config.max_newton_iters = 1;
    const WaveState hard{kVortex, dispersion_lambdas(1, kVortex).minus, 0.0,
                         PeriodicFunction::harmonic(config.n_modes, 1, 2e-2, 0.0)};
    bool threw = false;
    try {
        newton_solve(hard, FixedParameter::amplitude, config, 1);
    } catch (const DivergenceError& e) {
        threw = true;
        CHECK(e.residual_history.size() == 2);  // initial norm plus one iterate
        CHECK(e.residual_history.front() > config.newton_tol);
    }
    CHECK(threw);
}

TEST_CASE("bifurcation points carry the dispersion data and a clean null mode") {
    SolverConfig config;  // full 128-mode discretization
    const auto points = find_bifurcation_points(kStill, 1, config);
    REQUIRE(points.size() == 2);
    CHECK(points[0].side == BranchSide::plus);
    CHECK(points[1].side == BranchSide::minus);
    CHECK(points[0].lambda_star == doctest::Approx(0.8726936208978296).epsilon(1e-14));
    CHECK(points[1].lambda_star == doctest::Approx(-0.8726936208978296).epsilon(1e-14));
    for (const auto& bp : points) {
        CHECK(bp.mode == 1);
        CHECK(bp.flux == doctest::Approx(bp.lambda_star).epsilon(1e-14));  // gamma = 0, h = 1
        CHECK(bp.sigma_min <= 1e-10);
        CHECK(bp.sigma_second >= 1e-3 * bp.sigma_max);
        CHECK(bp.null_overlap >= 0.999);
        CHECK(std::abs(bp.transversality) >= 1e-6);
    }
    CHECK(points[0].transversality < 0.0);
    CHECK(points[1].transversality > 0.0);
}

TEST_CASE("bifurcation points for higher modes and validation") {
    const SolverConfig config = fast_config();
    const auto points = find_bifurcation_points(kVortex, 3, config);
    REQUIRE(points.size() == 6);
    for (int n = 1; n <= 3; ++n) {
        const auto roots = dispersion_lambdas(n, kVortex);
        const auto& plus = points[static_cast<size_t>(2 * (n - 1))];
        const auto& minus = points[static_cast<size_t>(2 * (n - 1) + 1)];
        CHECK(plus.mode == n);
        CHECK(minus.mode == n);
        CHECK(plus.lambda_star == doctest::Approx(roots.plus).epsilon(1e-13));
        CHECK(minus.lambda_star == doctest::Approx(roots.minus).epsilon(1e-13));
        CHECK(plus.sigma_min <= 1e-10);
        CHECK(minus.sigma_min <= 1e-10);
        CHECK(plus.null_overlap >= 0.999);
        CHECK(minus.null_overlap >= 0.999);
    }
    CHECK_THROWS_AS(find_bifurcation_points(kVortex, 0, config), DomainError);
    CHECK_THROWS_AS(find_bifurcation_points(kVortex, 32, config), DomainError);
}

TEST_CASE("no other eigenvalue crosses at a simple bifurcation point") {
    // Restricted to modes other than the crossing one, the linearization's
    // determinant keeps its sign across lambda_star.
    const double lambda_star = dispersion_lambdas(1, kVortex).plus;
    const int n = 32;
    auto restricted_sign = [&](double lambda) {
        const WaveState st{kVortex, lambda, 0.0, PeriodicFunction::zero(n)};
        const Eigen::MatrixXd m = ResidualJacobian(st).assemble();
        int sign = 1;
        for (int j = 0; j <= n; ++j) {
            if (j == 1) continue;
            sign *= m(j, j) < 0.0 ? -1 : 1;
        }
        return sign;
    };
    CHECK(restricted_sign(lambda_star - 0.01) == restricted_sign(lambda_star + 0.01));
}

TEST_CASE("validity flags") {
    // tiny wave: everything holds
    const WaveState small{kVortex, 0.4, 0.0, PeriodicFunction::harmonic(32, 1, 1e-3, 0.0)};
    const Validity v = check_validity(small);
    CHECK(v.surface_above_bed);
    CHECK(v.graph);
    CHECK(v.injective);
    CHECK(v.all());

    // surface dips to the bed
    const WaveState deep{kVortex, 0.4, 0.0, PeriodicFunction::harmonic(32, 1, 1.2, 0.0)};
    CHECK_FALSE(check_validity(deep).surface_above_bed);

    // steep short wave: the graph condition fails, the sweep still answers
    const WaveState steep{kVortex, 0.4, 0.0, PeriodicFunction::harmonic(64, 8, 0.3, 0.0)};
    const Validity sv = check_validity(steep);
    CHECK_FALSE(sv.graph);
    CHECK(sv.surface_above_bed);
}

TEST_CASE("branch trace from the slow root") {
    SolverConfig config = fast_config();
    config.ds = 2e-3;
    const auto points = find_bifurcation_points(kVortex, 1, config);
    const BifurcationPoint& start = points[1];  // minus side
    const Branch br = trace_branch(kVortex, start, 12, config);

    CHECK(br.truncation_reason.empty());
    REQUIRE(br.points.size() == 12);
    CHECK(br.mode_n == 1);
    CHECK(br.side == BranchSide::minus);

    // first point is the trivial state at lambda_star
    CHECK(br.points[0].s == 0.0);
    CHECK(br.points[0].arc == 0.0);
    CHECK(br.points[0].state.lambda == start.lambda_star);
    CHECK(br.points[0].state.w.max_norm() == 0.0);

    // second point sits one first-step away
    CHECK(br.points[1].s == doctest::Approx(config.ds).epsilon(1e-12));
    CHECK(br.points[1].arc <= 2.0 * config.ds);

    for (size_t i = 0; i < br.points.size(); ++i) {
        const BranchPoint& bp = br.points[i];
        CHECK(bp.residual_norm <= config.newton_tol);
        CHECK(bp.validity.all());
        CHECK(bp.m == doctest::Approx(flux_from_lambda(bp.state.lambda, kVortex)).epsilon(1e-14));
        if (i > 0) {
            CHECK(bp.arc > br.points[i - 1].arc);                  // monotone arclength
            CHECK(bp.arc - br.points[i - 1].arc <= 2.0 * kMaxArcStep);
            CHECK(bp.s > br.points[i - 1].s);  // amplitude grows along this stretch
        }
    }
    CHECK(br.fold_indices.empty());
}

TEST_CASE("branch asymptotics: the remainder after the leading cosine decays like s^2") {
    for (const PhysicalParams& p : {kStill, kVortex}) {
        const auto roots = dispersion_lambdas(1, p);
        for (double lambda_star : {roots.plus, roots.minus}) {
            SolverConfig config = fast_config();
            std::vector<double> remainders;
            std::vector<double> speed_gaps;
            for (double s : {1e-3, 2e-3, 4e-3}) {
                const WaveState seed{p, lambda_star, 0.0,
                                     PeriodicFunction::harmonic(config.n_modes, 1, s, 0.0)};
                const NewtonResult r = newton_solve(seed, FixedParameter::amplitude, config);
                CHECK(r.iterations <= 8);
                const PeriodicFunction remainder =
                    r.state.w - PeriodicFunction::harmonic(config.n_modes, 1, s, 0.0);
                remainders.push_back(remainder.max_norm());
                speed_gaps.push_back(std::abs(r.state.lambda - lambda_star));

                // profile monotone on the half period: s w'(x) < 0 on (0, pi)
                const PeriodicFunction dw = r.state.w.derivative();
                for (int j = 1; j < r.state.w.n_points() / 2; ++j)
                    CHECK(s * dw.value(j) < 0.0);
            }
            const double order0 = std::log2(remainders[1] / remainders[0]);
            const double order1 = std::log2(remainders[2] / remainders[1]);
            CHECK(order0 >= 1.9);
            CHECK(order1 >= 1.9);
            CHECK(order0 <= 2.6);
            CHECK(order1 <= 2.6);
            // the wave speed leaves lambda_star at quadratic order as well
            CHECK(std::log2(speed_gaps[1] / speed_gaps[0]) >= 1.7);
            CHECK(std::log2(speed_gaps[1] / speed_gaps[0]) <= 2.3);
            CHECK(std::log2(speed_gaps[2] / speed_gaps[1]) >= 1.7);
            CHECK(std::log2(speed_gaps[2] / speed_gaps[1]) <= 2.3);
        }
    }
}

TEST_CASE("halving the arclength step keeps accepted states on the same curve") {
    SolverConfig coarse = fast_config();
    coarse.ds = 4e-3;
    SolverConfig fine = coarse;
    fine.ds = 2e-3;
    const auto start = find_bifurcation_points(kVortex, 1, coarse)[1];
    const Branch bc = trace_branch(kVortex, start, 6, coarse);
    const Branch bf = trace_branch(kVortex, start, 11, fine);
    REQUIRE(bc.truncation_reason.empty());
    REQUIRE(bf.truncation_reason.empty());

    SolverConfig tight = coarse;
    tight.newton_tol = 1e-13;
    const BranchPoint& target = bc.points[4];
    // nearest fine-branch state by amplitude, re-corrected at the matched
    // amplitude: both solves must land on the same point of the curve
    size_t nearest = 0;
    for (size_t i = 0; i < bf.points.size(); ++i)
        if (std::abs(bf.points[i].s - target.s) < std::abs(bf.points[nearest].s - target.s))
            nearest = i;
    WaveState seed_fine = bf.points[nearest].state;
    {
        std::vector<double> a(static_cast<size_t>(seed_fine.w.n_modes()), 0.0);
        for (int n = 1; n <= seed_fine.w.n_modes(); ++n)
            a[static_cast<size_t>(n - 1)] = seed_fine.w.cos_coeff(n);
        a[0] = target.s;  // match the coarse amplitude
        seed_fine.w = PeriodicFunction(seed_fine.w.n_modes(), 0.0, a, {});
    }
    const NewtonResult from_fine = newton_solve(seed_fine, FixedParameter::amplitude, tight);
    const NewtonResult from_coarse =
        newton_solve(target.state, FixedParameter::amplitude, tight);
    CHECK(state_distance(from_fine.state, from_coarse.state) <= 10.0 * coarse.newton_tol);
}

TEST_CASE("branch trace truncates with a diagnostic when newton cannot converge") {
    SolverConfig config = fast_config();
    config.max_newton_iters = 3;
    // Lie about where the branch starts: the first corrector step from a
    // trivial state at lambda = 3 has no nearby solution, so every retry
    // fails and the trace gives up with an explanation.
    BifurcationPoint start = find_bifurcation_points(kVortex, 1, config)[0];
    start.lambda_star = 3.0;
    const Branch br = trace_branch(kVortex, start, 8, config);
    CHECK(br.points.size() == 1);
    CHECK_FALSE(br.truncation_reason.empty());
}

TEST_CASE("depth sweep: fold depth, criterion depth, signs, and the parabola") {
    const SolverConfig config = fast_config();
    const SurfaceSweep sweep = sweep_surface(kVortex, 0.05, 5.0, 100, config);
    REQUIRE(sweep.rows.size() == 100);

    int sign_changes = 0;
    int brackets = 0;
    for (size_t i = 0; i < sweep.rows.size(); ++i) {
        const SweepRow& row = sweep.rows[i];
        CHECK(row.m_plus > 0.0);
        if (i + 1 < sweep.rows.size()) {
            if ((row.m_minus < 0.0) != (sweep.rows[i + 1].m_minus < 0.0)) ++sign_changes;
            if (row.h_star_bracket) ++brackets;
        }
    }
    CHECK(sign_changes == 1);
    CHECK(brackets == 1);

    REQUIRE(sweep.h_star.has_value());
    REQUIRE(sweep.h_criterion.has_value());
    const double h_star = *sweep.h_star;
    const double h_crit = *sweep.h_criterion;
    CHECK(sweep.h_star_residual <= 1e-13);
    CHECK(std::abs(bifurcating_flux(1, PhysicalParams{2.0, 1.0, 1.0, h_star}).minus) <= 1e-13);
    CHECK(h_crit < h_star);
    // the criterion depth solves the threshold equation
    CHECK(std::abs(std::tanh(h_crit) / h_crit - 4.0 * h_crit / (1.0 + 4.0 * h_crit)) <= 1e-12);

    // the interior-stagnation flag flips exactly at the criterion depth
    for (const SweepRow& row : sweep.rows) {
        if (std::abs(row.h - h_crit) < 0.1) continue;  // skip the boundary cell
        CHECK(row.stagnation_holds == (row.h > h_crit));
    }

    // relative distance to the parabola decays over the tail
    for (size_t i = 3 * sweep.rows.size() / 4; i + 1 < sweep.rows.size(); ++i) {
        CHECK(sweep.rows[i + 1].asym_plus < sweep.rows[i].asym_plus);
        CHECK(sweep.rows[i + 1].asym_minus < sweep.rows[i].asym_minus);
    }
}

TEST_CASE("depth sweep without vorticity has no fold depth") {
    const SolverConfig config = fast_config();
    const SurfaceSweep sweep = sweep_surface(kStill, 0.5, 3.0, 11, config);
    CHECK_FALSE(sweep.h_star.has_value());
    CHECK_FALSE(sweep.h_criterion.has_value());
    for (const SweepRow& row : sweep.rows) {
        CHECK(row.m_plus > 0.0);
        CHECK(row.m_minus < 0.0);
        CHECK_FALSE(row.stagnation_holds);
        CHECK(row.asym_plus == 0.0);
    }
}

TEST_CASE("depth sweep traces branches per cell and is thread-invariant") {
    SolverConfig config;
    config.n_modes = 16;
    auto run = [&](const char* threads) {
        setenv("VORWAVE_THREADS", threads, 1);
        const SurfaceSweep s = sweep_surface(kVortex, 0.8, 1.2, 3, config, 3);
        unsetenv("VORWAVE_THREADS");
        return s;
    };
    const SurfaceSweep one = run("1");
    const SurfaceSweep four = run("4");

    REQUIRE(one.branches.size() == 6);
    for (size_t b = 0; b < one.branches.size(); ++b) {
        const Branch& br = one.branches[b];
        REQUIRE(br.points.size() == 3);
        CHECK(br.truncation_reason.empty());
        for (const BranchPoint& bp : br.points)
            CHECK(bp.residual_norm <= config.newton_tol);
        // byte-identical across thread counts
        const Branch& br4 = four.branches[b];
        REQUIRE(br4.points.size() == br.points.size());
        for (size_t i = 0; i < br.points.size(); ++i) {
            CHECK(br.points[i].s == br4.points[i].s);
            CHECK(br.points[i].state.lambda == br4.points[i].state.lambda);
            CHECK(br.points[i].state.mu == br4.points[i].state.mu);
            CHECK(state_distance(br.points[i].state, br4.points[i].state) == 0.0);
        }
    }
    for (size_t i = 0; i < one.rows.size(); ++i) {
        CHECK(one.rows[i].m_plus == four.rows[i].m_plus);
        CHECK(one.rows[i].m_minus == four.rows[i].m_minus);
    }

    CHECK(std::string("plus") == to_string(BranchSide::plus));
    CHECK(std::string("minus") == to_string(BranchSide::minus));
}

TEST_CASE("sweep input validation") {
    const SolverConfig config = fast_config();
    CHECK_THROWS_AS(sweep_surface(kVortex, -1.0, 2.0, 5, config), DomainError);
    CHECK_THROWS_AS(sweep_surface(kVortex, 1.0, 0.5, 5, config), DomainError);
    CHECK_THROWS_AS(sweep_surface(kVortex, 0.5, 1.0, 1, config), DomainError);
    CHECK_THROWS_AS(trace_branch(kVortex, BifurcationPoint{}, 0, config), DomainError);
}
