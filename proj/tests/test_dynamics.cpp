#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "plattice/dynamics.hpp"

using namespace plattice;

namespace {

SystemParams base_params(double alpha = 0.0) {
    SystemParams sp;
    sp.p = 3.0;
    sp.q = 3.0;
    sp.lambda = 1.0;
    sp.lambda0 = 1.2;
    sp.lambda1 = 0.5;
    sp.beta = 1.0;
    sp.alpha = alpha;
    sp.nu.kind = NuProfile::Kind::constant;
    sp.nu.nu0 = 1.0;
    return sp;
}

Forcing default_forcing() { return Forcing{}; }

Forcing no_forcing() {
    Forcing f;
    f.family = Forcing::Family::zero;
    return f;
}

NoisePath test_path(std::uint64_t seed, double t_lo = -5.0, double t_hi = 5.0, double dt = 1e-3) {
    return ou_attach(sample_wiener(seed, t_lo, t_hi, dt));
}

LatticeVec random_state(GaussianRng& rng, int n, double amp) {
    LatticeVec u(n);
    for (std::int64_t i = -n; i <= n; ++i) u.at(i) = amp * rng.next();
    return u;
}

}  // namespace

TEST_CASE("parameter validation names the broken field") {
    SystemParams sp = base_params();
    sp.lambda0 = 3.0;  // violates lambda0 < 2 lambda
    CHECK_THROWS_WITH_AS(sp.validate(), doctest::Contains("lambda0"), std::invalid_argument);
    sp = base_params();
    sp.p = 1.5;
    CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
    CHECK_NOTHROW(base_params().validate());
}

TEST_CASE("default forcing passes its standing assumption checks") {
    const AssumptionReport rep = check_assumptions(default_forcing(), base_params(), 16, 3.0);
    CHECK(rep.continuity_ok);
    CHECK(rep.dissipativity_ok);
    CHECK(rep.psi1_summable_ok);
    CHECK(rep.growth_ok);
    CHECK(rep.derivative_ok);
    CHECK(rep.all());
}

TEST_CASE("rhs: equilibrium and pure decay special cases") {
    const NoisePath path = test_path(1);
    SystemParams sp = base_params(0.7);
    CHECK(lp_norm(rhs_F(0.5, path, LatticeVec(6), sp, no_forcing()), 2.0) == 0.0);

    sp = base_params(0.0);
    sp.nu.nu0 = 0.0;
    GaussianRng rng(2);
    LatticeVec v = random_state(rng, 6, 1.0);
    LatticeVec r = rhs_F(0.5, path, v, sp, no_forcing());
    for (std::int64_t i = -6; i <= 6; ++i) CHECK(r.get(i) == doctest::Approx(-sp.lambda * v.get(i)).epsilon(1e-14));
}

TEST_CASE("rhs equals the sum of its three terms") {
    const NoisePath path = test_path(3);
    const SystemParams sp = base_params(0.4);
    const Forcing fc = default_forcing();
    GaussianRng rng(4);
    for (int c = 0; c < 20; ++c) {
        LatticeVec v = random_state(rng, 8, 1.5);
        const double t = 2.0 * rng.next_uniform() - 1.0;
        const double z = path.z_at(t);
        const double az = sp.alpha * z;
        LatticeVec stencil = scaled(op_A(v, sp.p), -std::exp(az * (sp.p - 2.0)) * sp.nu.eval(t));
        LatticeVec linear = scaled(v, az - sp.lambda);
        LatticeVec forced = scaled(fc.eval_vec(t, scaled(v, std::exp(az)), sp), std::exp(-az));
        LatticeVec total = axpy(1.0, stencil, axpy(1.0, linear, forced));
        CHECK(l2_dist(rhs_F(t, z, v, sp, fc), total) < 1e-12);
    }
}

TEST_CASE("integrator: degenerate interval returns the initial state") {
    const NoisePath path = test_path(5);
    const Trajectory traj = integrate(LatticeVec::unit(4, 0), 0.5, 0.5, view_of(path), base_params(), no_forcing());
    CHECK(traj.n_records() == 1);
    CHECK(traj.u[0].get(0) == 1.0);
}

TEST_CASE("integrator: scalar linear decay matches the exponential") {
    const NoisePath path = test_path(6, -1.0, 3.0);
    SystemParams sp = base_params(0.0);
    sp.nu.nu0 = 0.0;
    LatticeVec v0(0);
    v0.at(0) = 1.0;
    const Trajectory traj = integrate(v0, 0.0, 2.0, view_of(path), sp, no_forcing());
    for (std::size_t r = 0; r < traj.n_records(); r += 100) {
        const double expect = std::exp(-sp.lambda * traj.time_at(r));
        CHECK(std::abs(traj.v[r].get(0) - expect) < 1e-6);
    }
}

TEST_CASE("integrator: one fused step equals the hand-built Heun step") {
    const NoisePath path = test_path(7);
    const SystemParams sp = base_params(0.3);
    const Forcing fc = default_forcing();
    GaussianRng rng(8);
    LatticeVec v0 = random_state(rng, 8, 1.0);
    const double dt = path.dt;
    const Trajectory traj = integrate(v0, 0.0, dt, view_of(path), sp, fc);

    LatticeVec k1 = rhs_F(0.0, path.z_idx(0), v0, sp, fc);
    LatticeVec vstage = axpy(dt, k1, v0);
    LatticeVec k2 = rhs_F(dt, path.z_idx(1), vstage, sp, fc);
    LatticeVec v1 = axpy(0.5 * dt, k1, axpy(0.5 * dt, k2, v0));
    CHECK(l2_dist(traj.v[1], v1) < 1e-13);
}

TEST_CASE("integrator: step-halving self-convergence on matched noise") {
    SystemParams sp = base_params(0.3);
    const Forcing fc = default_forcing();
    GaussianRng rng(9);
    LatticeVec v0 = random_state(rng, 8, 0.8);

    NoisePath p0 = test_path(10, -0.01, 1.5, 1e-3);
    NoisePath p1 = refine_bisect(p0, 77);
    NoisePath p2 = refine_bisect(p1, 78);
    auto final_state = [&](const NoisePath& p) {
        const SampleView view = view_of(p);
        return evolve_final(v0, 0, view.index_of(1.0), view, sp, fc);
    };
    const double d1 = l2_dist(final_state(p0), final_state(p1));
    const double d2 = l2_dist(final_state(p1), final_state(p2));
    CHECK(d1 / d2 >= 1.8);
}

TEST_CASE("integrator: blow-up raises instead of returning garbage") {
    NoisePath p = ou_attach(sample_wiener(11, -2.5, 200.0, 2.5));
    SystemParams sp = base_params(0.0);
    sp.nu.nu0 = 0.0;  // pure -lambda v, but dt = 2.5 is outside the stability region
    LatticeVec v0 = LatticeVec::unit(2, 0);
    CHECK_THROWS_AS(integrate(v0, 0.0, 150.0, view_of(p), sp, no_forcing()), BlowupError);
}

TEST_CASE("cocycle: identity at t = 0 is exact") {
    const NoisePath path = test_path(12);
    GaussianRng rng(13);
    LatticeVec u = random_state(rng, 6, 2.0);
    LatticeVec out = cocycle_phi(0.0, 0.75, path, u, base_params(0.5), default_forcing());
    CHECK(l2_dist(out, u) == 0.0);
}

TEST_CASE("cocycle: composition property") {
    const NoisePath path = test_path(14, -4.0, 4.0);
    const SystemParams sp = base_params(0.4);
    const Forcing fc = default_forcing();
    GaussianRng rng(15);
    for (int c = 0; c < 10; ++c) {
        const double tau = -1.0 + std::floor(rng.next_uniform() * 20.0) * 0.1;
        const double s = std::floor(rng.next_uniform() * 10.0) * 0.1;
        const double t = std::floor(rng.next_uniform() * 10.0) * 0.1;
        LatticeVec x = random_state(rng, 6, 1.0);
        LatticeVec lhs = cocycle_phi(t + s, tau, path, x, sp, fc);
        LatticeVec mid = cocycle_phi(s, tau, path, x, sp, fc);
        NoisePath shifted = theta_shift(path, s);
        LatticeVec rhs = cocycle_phi(t, tau + s, shifted, mid, sp, fc);
        CHECK(l2_dist(lhs, rhs) <= 1e-3 * (1.0 + lp_norm(lhs, 2.0)));
    }
}

TEST_CASE("cocycle: Lipschitz response to initial perturbations") {
    const NoisePath path = test_path(16);
    const SystemParams sp = base_params(0.2);
    const Forcing fc = default_forcing();
    GaussianRng rng(17);
    LatticeVec x = random_state(rng, 6, 1.0);
    LatticeVec base = cocycle_phi(1.0, 0.0, path, x, sp, fc);
    for (double delta : {1e-2, 1e-4}) {
        LatticeVec xp = x;
        xp.at(0) += delta;
        LatticeVec out = cocycle_phi(1.0, 0.0, path, xp, sp, fc);
        CHECK(l2_dist(out, base) < 50.0 * delta);
        CHECK(l2_dist(out, base) > 0.0);
    }
}

TEST_CASE("conjugation: recorded u equals e^{alpha z} v at every step") {
    const NoisePath path = test_path(18);
    const SystemParams sp = base_params(0.6);
    GaussianRng rng(19);
    const Trajectory traj = integrate(random_state(rng, 6, 1.0), 0.0, 1.0, view_of(path), sp, default_forcing());
    for (std::size_t r = 0; r < traj.n_records(); r += 37) {
        LatticeVec expect = scaled(traj.v[r], std::exp(sp.alpha * traj.z_view[r]));
        CHECK(l2_dist(traj.u[r], expect) < 1e-12 * (1.0 + lp_norm(expect, 2.0)));
    }
}

TEST_CASE("energy bound G1: closed forms") {
    const NoisePath path = test_path(20);
    const SystemParams sp = base_params(0.0);
    // no forcing: psi1 = 0 and alpha = 0 makes G1 collapse to R^2
    CHECK(diag_G1(0.0, 0.0, 2.0, view_of(path), sp, no_forcing(), 8, 3.0) == doctest::Approx(9.0));
    // constant psi1: G1 = R^2 + 2 c (T - tau)
    const Forcing fc = default_forcing();
    const double c = fc.psi1_l1(8, sp);
    CHECK(c > 0.0);
    CHECK(diag_G1(0.0, 0.0, 2.0, view_of(path), sp, fc, 8, 3.0) == doctest::Approx(9.0 + 2.0 * c * 2.0).epsilon(1e-9));
}

TEST_CASE("energy bound G1 dominates the trajectory norm") {
    const NoisePath path = test_path(21);
    const Forcing fc = default_forcing();
    GaussianRng rng(22);
    for (double alpha : {-0.5, 0.0, 0.5}) {
        const SystemParams sp = base_params(alpha);
        LatticeVec u0 = random_state(rng, 8, 1.5);
        const double radius = lp_norm(u0, 2.0);
        LatticeVec v0 = scaled(u0, std::exp(-alpha * path.z_idx(0)));
        const Trajectory traj = integrate(v0, 0.0, 2.0, view_of(path), sp, fc);
        const double g1 = diag_G1(alpha, 0.0, 2.0, view_of(path), sp, fc, 8, radius);
        for (std::size_t r = 0; r < traj.n_records(); r += 53)
            CHECK(norm_sq(traj.v[r]) <= g1 * (1.0 + 1e-2));
        CHECK(diag_G2(alpha, 0.0, 2.0, view_of(path), sp, fc, 8, radius) >= g1 / (2.0 * fc.beta_diss(sp)));
    }
}

TEST_CASE("integrated energy estimate holds along trajectories") {
    const NoisePath path = test_path(23);
    const Forcing fc = default_forcing();
    GaussianRng rng(24);
    for (int c = 0; c < 5; ++c) {
        const double alpha = -0.5 + rng.next_uniform();
        const SystemParams sp = base_params(alpha);
        LatticeVec v0 = random_state(rng, 8, 1.2);
        const Trajectory traj = integrate(v0, 0.0, 2.0, view_of(path), sp, fc);
        const EnergyDiagnostics en = energy_check(traj, sp, fc);
        CHECK(en.min_margin_rel >= -2e-2);
        CHECK(en.lhs.size() == traj.n_records());
    }
}

TEST_CASE("temperedness of radius histories") {
    const NoisePath path = test_path(25, -30.0, 1.0, 1e-2);
    const SystemParams sp = base_params();
    std::vector<std::pair<double, double>> constant, growing, bounded;
    GaussianRng rng(26);
    for (double s = 0.0; s >= -25.0; s -= 1.0) {
        constant.emplace_back(s, 4.0);
        growing.emplace_back(s, 4.0 * std::exp(-sp.lambda0 * s));
        bounded.emplace_back(s, 2.0 + rng.next_uniform());
    }
    CHECK(check_tempered(constant, 0.0, view_of(path), sp).tempered);
    CHECK_FALSE(check_tempered(growing, 0.0, view_of(path), sp).tempered);
    const TemperedCheck bc = check_tempered(bounded, 0.3, view_of(path), sp);
    CHECK(bc.tempered);
    CHECK(bc.decay_rate == doctest::Approx(sp.lambda0).epsilon(0.35));
}

TEST_CASE("solutions converge as the noise coefficient converges") {
    const NoisePath path = test_path(27);
    const Forcing fc = default_forcing();
    GaussianRng rng(28);
    const double alpha0 = 0.25;
    std::vector<LatticeVec> ball;
    for (int j = 0; j < 3; ++j) ball.push_back(random_state(rng, 6, 1.0));

    auto sup_diff = [&](double alpha) {
        double worst = 0.0;
        for (const auto& x : ball) {
            LatticeVec a = cocycle_phi(1.5, 0.0, path, x, base_params(alpha), fc);
            LatticeVec b = cocycle_phi(1.5, 0.0, path, x, base_params(alpha0), fc);
            worst = std::max(worst, l2_dist(a, b));
        }
        return worst;
    };
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 8; ++n) {
        const double cur = sup_diff(alpha0 + std::pow(2.0, -n));
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("snapshot evolution matches full recording") {
    const NoisePath path = test_path(29);
    const SystemParams sp = base_params(0.35);
    const Forcing fc = default_forcing();
    GaussianRng rng(30);
    LatticeVec v0 = random_state(rng, 6, 1.0);
    const Trajectory traj = integrate(v0, 0.0, 1.0, view_of(path), sp, fc);
    const std::vector<std::int64_t> marks{0, 250, 600, 1000};
    const auto snaps = evolve_snapshots(v0, 0, marks, view_of(path), sp, fc);
    REQUIRE(snaps.size() == marks.size());
    for (std::size_t i = 0; i < marks.size(); ++i)
        CHECK(l2_dist(snaps[i], traj.v[static_cast<std::size_t>(marks[i])]) == 0.0);
}
