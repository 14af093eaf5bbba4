#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "plattice/attractor.hpp"

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
    return sp;
}

Forcing fast_decay_forcing() {
    Forcing f;
    f.g_profile = Forcing::GProfile::exponential;
    f.g_amp = 0.5;
    f.g_decay = 0.5;
    return f;
}

Forcing no_forcing() {
    Forcing f;
    f.family = Forcing::Family::zero;
    return f;
}

}  // namespace

TEST_CASE("absorbing radius: closed forms and truncation self-consistency") {
    NoisePath path = ou_attach(sample_wiener(31, -90.0, 1.0, 1e-2));
    const SystemParams sp = base_params();

    // psi1 = 0 collapses the integral
    const AbsorbingSet k0 = absorbing_radius(0.4, 0.0, view_of(path), sp, no_forcing(), 8, 40.0);
    CHECK(k0.script_R == doctest::Approx(1.0));
    CHECK(k0.radius_sq == doctest::Approx(std::exp(0.8 * path.z_idx(0))));
    CHECK(k0.radius_sq >= std::exp(0.8 * path.z_idx(0)) * (1.0 - 1e-12));  // script_R >= 1

    // alpha = 0, constant psi1: truncated exponential integral in closed form
    const Forcing fc = fast_decay_forcing();
    const double c = fc.psi1_l1(8, sp);
    for (double L : {10.0, 40.0}) {
        const AbsorbingSet k = absorbing_radius(0.0, 0.0, view_of(path), sp, fc, 8, L);
        const double expect = 1.0 + 2.0 * c * (1.0 - std::exp(-sp.lambda0 * L)) / sp.lambda0;
        CHECK(k.script_R == doctest::Approx(expect).epsilon(1e-4));
    }
    const double r40 = absorbing_radius(0.3, 0.0, view_of(path), sp, fc, 8, 40.0).script_R;
    const double r80 = absorbing_radius(0.3, 0.0, view_of(path), sp, fc, 8, 80.0).script_R;
    CHECK(std::abs(r80 - r40) < 1e-6);
    CHECK_FALSE(absorbing_radius(0.3, 0.0, view_of(path), sp, fc, 8, 80.0).tail_warning);
    CHECK(absorbing_radius(0.3, 0.0, view_of(path), sp, fc, 8, 2.0).tail_warning);
}

TEST_CASE("ball sampling is deterministic, stratified and inside the ball") {
    const auto a = sample_ball(16, 6, 2.0);
    const auto b = sample_ball(16, 6, 2.0);
    REQUIRE(a.size() == 16);
    for (std::size_t j = 0; j < a.size(); ++j) {
        CHECK(l2_dist(a[j], b[j]) == 0.0);
        CHECK(lp_norm(a[j], 2.0) <= 2.0 + 1e-12);
    }
    CHECK(lp_norm(a.front(), 2.0) < lp_norm(a.back(), 2.0));
}

TEST_CASE("pullback cloud: linear contraction shrinks the diameter exactly") {
    NoisePath path = ou_attach(sample_wiener(33, -60.0, 1.0, 1e-2));
    SystemParams sp = base_params(0.0);
    sp.nu.nu0 = 0.0;
    const double T = 4.0;
    AttractorCloud cloud = pullback_cloud(0.0, 0.0, path, T, 12, sp, no_forcing(), 6, Exec::serial);
    // with f = 0, nu = 0, alpha = 0 the flow is exactly the e^{-lambda t} scaling
    const AbsorbingSet k = absorbing_radius(0.0, -T, shifted_view(path, -T), sp, no_forcing(), 6);
    const auto inits = sample_ball(12, 6, std::sqrt(k.radius_sq));
    const double d0 = cloud_diameter(inits, CloudNorm::l2, sp.q);
    const double dT = cloud_diameter(cloud.points, CloudNorm::l2, sp.q);
    CHECK(dT <= std::exp(-sp.lambda * T) * d0 * (1.0 + 1e-2));
}

TEST_CASE("pullback cloud: longer horizons do not grow the cloud") {
    NoisePath path = ou_attach(sample_wiener(34, -60.0, 1.0, 1e-2));
    const SystemParams sp = base_params(0.3);
    const Forcing fc = fast_decay_forcing();
    AttractorCloud c1 = pullback_cloud(0.3, 0.0, path, 3.0, 12, sp, fc, 8);
    AttractorCloud c2 = pullback_cloud(0.3, 0.0, path, 6.0, 12, sp, fc, 8);
    const double d1 = cloud_diameter(c1.points, CloudNorm::l2, sp.q);
    const double d2 = cloud_diameter(c2.points, CloudNorm::l2, sp.q);
    CHECK(d2 <= d1 + 0.05 * d1 + 1e-9);
}

TEST_CASE("pullback cloud: points satisfy the arrival-time absorbing bound") {
    NoisePath path = ou_attach(sample_wiener(35, -60.0, 1.0, 1e-2));
    const SystemParams sp = base_params(-0.4);
    const Forcing fc = fast_decay_forcing();
    AttractorCloud cloud = pullback_cloud(-0.4, 0.0, path, 8.0, 12, sp, fc, 8);
    for (const auto& pt : cloud.points) CHECK(norm_sq(pt) <= cloud.absorb_radius_sq * (1.0 + 1e-9));
}

TEST_CASE("parallel and serial cloud evolution agree bitwise") {
    NoisePath path = ou_attach(sample_wiener(36, -30.0, 1.0, 1e-2));
    const SystemParams sp = base_params(0.25);
    const Forcing fc = fast_decay_forcing();
    AttractorCloud a = pullback_cloud(0.25, 0.0, path, 2.0, 10, sp, fc, 6, Exec::serial, 20.0);
    AttractorCloud b = pullback_cloud(0.25, 0.0, path, 2.0, 10, sp, fc, 6, Exec::parallel, 20.0);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t j = 0; j < a.points.size(); ++j) CHECK(l2_dist(a.points[j], b.points[j]) == 0.0);
}

TEST_CASE("hausdorff semi-distance: hand values and axioms") {
    std::vector<LatticeVec> A{LatticeVec::unit(3, 0)};
    std::vector<LatticeVec> B{LatticeVec(3)};
    CHECK(hausdorff_semidist(A, B, CloudNorm::l2, 3.0) == doctest::Approx(1.0));
    CHECK(hausdorff_semidist(A, B, CloudNorm::lq, 3.0) == doctest::Approx(1.0));
    CHECK(hausdorff_semidist(A, B, CloudNorm::l2_plus_lq, 3.0) == doctest::Approx(2.0));
    CHECK(hausdorff_semidist(A, A, CloudNorm::l2, 3.0) == 0.0);
    CHECK_THROWS_AS(hausdorff_semidist({}, A, CloudNorm::l2, 3.0), std::invalid_argument);

    GaussianRng rng(37);
    auto cloud = [&](int n) {
        std::vector<LatticeVec> pts;
        for (int j = 0; j < n; ++j) {
            LatticeVec v(4);
            for (std::int64_t i = -4; i <= 4; ++i) v.at(i) = rng.next();
            pts.push_back(std::move(v));
        }
        return pts;
    };
    const auto X = cloud(8), Y = cloud(6), Z = cloud(7);
    // subset rule
    auto XY = X;
    XY.insert(XY.end(), Y.begin(), Y.end());
    CHECK(hausdorff_semidist(X, XY, CloudNorm::l2, 3.0) == 0.0);
    // triangle-type bound through an intermediate cloud
    const double xz = hausdorff_semidist(X, Z, CloudNorm::l2, 3.0);
    const double xy = hausdorff_semidist(X, Y, CloudNorm::l2, 3.0);
    const double yz_h = std::max(hausdorff_semidist(Y, Z, CloudNorm::l2, 3.0),
                                 hausdorff_semidist(Z, Y, CloudNorm::l2, 3.0));
    CHECK(xz <= xy + yz_h + 1e-12);
    // the sum norm dominates both components
    CHECK(hausdorff_semidist(X, Y, CloudNorm::l2_plus_lq, 3.0) >=
          std::max(hausdorff_semidist(X, Y, CloudNorm::l2, 3.0),
                   hausdorff_semidist(X, Y, CloudNorm::lq, 3.0)) - 1e-12);
    // serial/parallel identical
    CHECK(hausdorff_semidist(X, Y, CloudNorm::l2, 3.0, Exec::serial) ==
          hausdorff_semidist(X, Y, CloudNorm::l2, 3.0, Exec::parallel));
}

TEST_CASE("usc sweep: singleton list gives distance zero, mismatched paths refuse") {
    NoisePath path = ou_attach(sample_wiener(38, -30.0, 1.0, 1e-2));
    const SystemParams sp = base_params();
    const Forcing fc = fast_decay_forcing();
    const auto rows = usc_sweep({0.2}, 0.2, 0.0, path, 2.0, 8, sp, fc, 6, Exec::parallel, 20.0);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].dist_l2 == 0.0);
    CHECK(rows[0].dist_sum == 0.0);

    AttractorCloud c1 = pullback_cloud(0.2, 0.0, path, 2.0, 8, sp, fc, 6, Exec::parallel, 20.0);
    NoisePath other = ou_attach(sample_wiener(39, -30.0, 1.0, 1e-2));
    AttractorCloud c2 = pullback_cloud(0.2, 0.0, other, 2.0, 8, sp, fc, 6, Exec::parallel, 20.0);
    CHECK_THROWS_AS(usc_distances({c2}, c1, sp.q), std::invalid_argument);
}

TEST_CASE("usc sweep: distances shrink as the coefficient converges") {
    NoisePath path = ou_attach(sample_wiener(40, -40.0, 1.0, 1e-2));
    const SystemParams sp = base_params();
    const Forcing fc = fast_decay_forcing();
    const double alpha0 = 0.2;
    std::vector<double> alphas;
    for (int n = 1; n <= 4; ++n) alphas.push_back(alpha0 + std::pow(2.0, -n));
    const auto rows = usc_sweep(alphas, alpha0, 0.0, path, 6.0, 12, sp, fc, 8, Exec::parallel, 25.0);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].dist_sum < rows[i - 1].dist_sum);
    CHECK(rows.back().dist_sum < rows.front().dist_sum / 3.0);
}

TEST_CASE("refining the ensemble never grows the semi-distance materially") {
    NoisePath path = ou_attach(sample_wiener(41, -40.0, 1.0, 1e-2));
    const SystemParams sp = base_params();
    const Forcing fc = fast_decay_forcing();
    AttractorCloud base = pullback_cloud(0.2, 0.0, path, 4.0, 12, sp, fc, 6, Exec::parallel, 25.0);
    AttractorCloud coarse = pullback_cloud(0.45, 0.0, path, 4.0, 12, sp, fc, 6, Exec::parallel, 25.0);
    AttractorCloud fine = pullback_cloud(0.45, 0.0, path, 4.0, 24, sp, fc, 6, Exec::parallel, 25.0);
    const double dc = hausdorff_semidist(coarse.points, base.points, CloudNorm::l2_plus_lq, sp.q);
    const double df = hausdorff_semidist(fine.points, base.points, CloudNorm::l2_plus_lq, sp.q);
    CHECK(df <= dc + cloud_resolution(coarse.points) + 1e-9);
}

TEST_CASE("tail profile: monotone in the cutoff, zero at the window edge") {
    NoisePath path = ou_attach(sample_wiener(42, -40.0, 1.0, 1e-2));
    const SystemParams sp = base_params();
    AttractorCloud cloud = pullback_cloud(0.3, 0.0, path, 4.0, 8, sp, fast_decay_forcing(), 10, Exec::parallel, 25.0);
    const auto rows = tail_profile(cloud, {0, 2, 5, 8, 10}, sp.q);
    REQUIRE(rows.size() == 5);
    CHECK(rows.back().max_l2 == 0.0);
    CHECK(rows.back().max_lq == 0.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].max_l2 <= rows[i - 1].max_l2 + 1e-15);
        CHECK(rows[i].max_lq <= rows[i - 1].max_lq + 1e-15);
    }
}

TEST_CASE("cloud persistence round-trips through matrix plus sidecar") {
    namespace fs = std::filesystem;
    NoisePath path = ou_attach(sample_wiener(43, -30.0, 1.0, 1e-2));
    const SystemParams sp = base_params();
    AttractorCloud cloud = pullback_cloud(0.1, 0.0, path, 2.0, 6, sp, fast_decay_forcing(), 5, Exec::parallel, 20.0);
    const fs::path bin = fs::temp_directory_path() / "plattice_cloud.bin";
    const fs::path meta = fs::temp_directory_path() / "plattice_cloud.json";
    save_cloud(cloud, bin, meta, sp.q);
    AttractorCloud back = load_cloud(bin, meta);
    CHECK(back.alpha == cloud.alpha);
    CHECK(back.noise_digest == cloud.noise_digest);
    REQUIRE(back.points.size() == cloud.points.size());
    for (std::size_t j = 0; j < back.points.size(); ++j) CHECK(l2_dist(back.points[j], cloud.points[j]) == 0.0);
    fs::remove(bin);
    fs::remove(meta);
}

TEST_CASE("cloud approximately maps onto the later-time cloud under the flow") {
    NoisePath path = ou_attach(sample_wiener(44, -50.0, 2.0, 1e-2));
    const SystemParams sp = base_params(0.2);
    const Forcing fc = fast_decay_forcing();
    const double delta = 0.5;
    AttractorCloud now = pullback_cloud(0.2, 0.0, path, 8.0, 16, sp, fc, 8, Exec::parallel, 30.0);
    AttractorCloud later = pullback_cloud(0.2, delta, path, 8.0, 16, sp, fc, 8, Exec::parallel, 30.0);
    std::vector<LatticeVec> pushed;
    for (const auto& pt : now.points) pushed.push_back(cocycle_phi(delta, 0.0, path, pt, sp, fc));
    const double d = hausdorff_semidist(pushed, later.points, CloudNorm::l2, sp.q);
    CHECK(d <= 3.0 * cloud_resolution(later.points) + 0.05);
}
