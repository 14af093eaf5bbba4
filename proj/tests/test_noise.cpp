#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "plattice/noise.hpp"

using namespace plattice;

TEST_CASE("wiener sampling pins W(0) = 0 and is reproducible") {
    NoisePath a = sample_wiener(99, -2.0, 3.0, 1e-2);
    CHECK(a.w_idx(0) == 0.0);
    CHECK(a.t_min() <= -2.0);
    CHECK(a.t_max() >= 3.0);
    NoisePath b = sample_wiener(99, -2.0, 3.0, 1e-2);
    CHECK(a.w == b.w);
    NoisePath c = sample_wiener(100, -2.0, 3.0, 1e-2);
    CHECK(a.w != c.w);
    CHECK_THROWS_AS(sample_wiener(1, 1.0, 2.0, 1e-2), std::invalid_argument);
    CHECK_THROWS_AS(sample_wiener(1, -1.0, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("W(1) has unit variance across paths") {
    const int n = 4000;
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        NoisePath p = sample_wiener(1000 + static_cast<std::uint64_t>(k), -1e-3, 1.0, 1e-2);
        const double w1 = p.w_at(1.0);
        s1 += w1;
        s2 += w1 * w1;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    const double se = std::sqrt(2.0 / (n - 1.0));  // s.e. of the variance of N(0,1)
    CHECK(std::abs(var - 1.0) < 5.0 * se);
}

TEST_CASE("theta shift: identity, pinning, composition") {
    NoisePath p = ou_attach(sample_wiener(5, -1.0, 1.0, 1e-2));
    NoisePath same = theta_shift(p, 0.0);
    CHECK(same.w == p.w);
    CHECK(same.z == p.z);

    NoisePath sh = theta_shift(p, 0.25);
    CHECK(sh.w_idx(0) == 0.0);  // (theta_s w)(0) = 0 by definition
    // composition equals the single shift on the common grid
    NoisePath two = theta_shift(theta_shift(p, 0.25), 0.25);
    NoisePath one = theta_shift(p, 0.5);
    for (std::int64_t k = std::max(two.k_min, one.k_min); k <= std::min(two.k_max, one.k_max); ++k)
        CHECK(two.w_idx(k) == doctest::Approx(one.w_idx(k)).epsilon(1e-12));
    CHECK_THROWS_AS(theta_shift(p, 55.0), std::out_of_range);
    CHECK_THROWS_AS(theta_shift(p, 0.003), std::invalid_argument);  // off-grid
}

TEST_CASE("shift consistency: z of the shifted path is the index-shifted z") {
    NoisePath p = ou_attach(sample_wiener(6, -1.0, 1.0, 1e-2));
    NoisePath sh = theta_shift(p, 0.5);
    for (std::int64_t k = sh.k_min; k <= sh.k_max; ++k)
        CHECK(sh.z_idx(k) == p.z_idx(k + 50));
    // and the shifted z still satisfies the one-step recursion
    const double decay = std::exp(-sh.dt), conv = std::exp(-sh.dt / 2.0);
    for (std::int64_t k = sh.k_min; k < sh.k_max; ++k) {
        const double pred = decay * sh.z_idx(k) + conv * (sh.w_idx(k + 1) - sh.w_idx(k));
        CHECK(std::abs(sh.z_idx(k + 1) - pred) < 1e-12);
    }
}

TEST_CASE("ou_attach: zero driving path stays at zero") {
    NoisePath p = sample_wiener(3, -0.5, 0.5, 1e-2, 0.0);
    for (double& w : p.w) w = 0.0;
    p = ou_attach(std::move(p));
    for (double z : p.z) CHECK(z == 0.0);
}

TEST_CASE("stationary OU variance is one half") {
    const int n = 4000;
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        NoisePath p = ou_attach(sample_wiener(7000 + static_cast<std::uint64_t>(k), -1e-2, 1e-2, 1e-2, 20.0));
        const double z = p.z_idx(0);
        s1 += z;
        s2 += z * z;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    const double se = 0.5 * std::sqrt(2.0 / (n - 1.0));
    CHECK(std::abs(var - 0.5) < 5.0 * se);
    CHECK(std::abs(mean) < 5.0 * std::sqrt(0.5 / n));
}

TEST_CASE("sublinear growth of z and of its running average") {
    // one long path with a fixed seed: |z(t)/t| and |(1/t) int_0^t z| small at t = 1000
    NoisePath p = ou_attach(sample_wiener(424242, -1e-2, 1000.0, 1e-2));
    const double t = 1000.0;
    CHECK(std::abs(p.z_at(t) / t) < 0.05);
    double integral = 0.0;
    for (std::int64_t k = 0; k < p.index_of(t); ++k)
        integral += 0.5 * p.dt * (p.z_idx(k) + p.z_idx(k + 1));
    CHECK(std::abs(integral / t) < 0.05);
}

TEST_CASE("z_at interpolation") {
    NoisePath p = ou_attach(sample_wiener(8, -0.5, 0.5, 1e-2));
    CHECK(p.z_at(0.25) == p.z_idx(25));
    const double mid = 0.5 * (p.z_idx(25) + p.z_idx(26));
    CHECK(p.z_at(0.255) == doctest::Approx(mid).epsilon(1e-12));
    CHECK_THROWS_AS(p.z_at(1.0), std::out_of_range);
}

TEST_CASE("bridge refinement keeps the path and shrinks the z gap") {
    NoisePath p = ou_attach(sample_wiener(9, -0.5, 0.5, 2e-2));
    NoisePath f1 = refine_bisect(p, 1);
    NoisePath f2 = refine_bisect(f1, 2);
    for (std::int64_t k = p.k_min; k <= p.k_max; ++k) CHECK(f1.w_idx(2 * k) == p.w_idx(k));
    double d1 = 0.0, d2 = 0.0;
    for (std::int64_t k = p.k_min; k <= p.k_max; ++k) {
        d1 = std::max(d1, std::abs(f1.z_idx(2 * k) - p.z_idx(k)));
        d2 = std::max(d2, std::abs(f2.z_idx(4 * k) - f1.z_idx(2 * k)));
    }
    CHECK(d2 < d1);  // refinement self-consistency
}

TEST_CASE("binary persistence reloads bit-exactly") {
    namespace fs = std::filesystem;
    const fs::path file = fs::temp_directory_path() / "plattice_noise_test.bin";
    NoisePath p = ou_attach(sample_wiener(11, -1.0, 1.0, 1e-2));
    save_noise(p, file);
    NoisePath q = load_noise(file);
    CHECK(q.seed == p.seed);
    CHECK(q.k_min == p.k_min);
    CHECK(q.k_max == p.k_max);
    CHECK(q.dt == p.dt);
    CHECK(q.burn_in == p.burn_in);
    CHECK(q.w == p.w);
    CHECK(q.z == p.z);
    CHECK(noise_digest(q) == noise_digest(p));
    fs::remove(file);
}

TEST_CASE("views compose shifts without copying") {
    NoisePath p = ou_attach(sample_wiener(12, -1.0, 1.0, 1e-2));
    SampleView v = shifted_view(p, -0.5);
    CHECK(v.z(0) == p.z_idx(-50));
    CHECK(v.z(50) == p.z_idx(0));
    CHECK_THROWS_AS(v.require_range(-100, 200), std::out_of_range);
}
