// Two-sided Wiener paths on a fixed grid, the path shift, and the stationary
// OU process derived from them. The dynamics integrator locks onto this grid,
// so a persisted path pins every downstream experiment to the same sample.
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace plattice {

// mt19937_64 + explicit Box-Muller; does not depend on the standard
// library's distribution internals, so a seed pins the stream everywhere.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

    double next_uniform() {
        // 53-bit mantissa in (0, 1]
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// A sampled path on the uniform grid {k*dt : k_min <= k <= k_max}, 0 always
// on the grid and W(0) = 0 exactly. z, once attached, satisfies
// z_{k+1} = e^{-dt} z_k + e^{-dt/2} (W_{k+1} - W_k) with a burn-in start.
struct NoisePath {
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::int64_t k_min = 0;
    std::int64_t k_max = 0;
    double burn_in = 20.0;
    std::vector<double> w;
    std::vector<double> z;  // empty until ou_attach

    double t_min() const { return static_cast<double>(k_min) * dt; }
    double t_max() const { return static_cast<double>(k_max) * dt; }
    std::size_t n_points() const { return w.size(); }
    bool has_z() const { return !z.empty(); }

    std::int64_t index_of(double t) const;

    double w_idx(std::int64_t k) const { return w[static_cast<std::size_t>(k - k_min)]; }
    double z_idx(std::int64_t k) const { return z[static_cast<std::size_t>(k - k_min)]; }

    double w_at(double t) const;  // linear interpolation
    double z_at(double t) const;
};

NoisePath sample_wiener(std::uint64_t seed, double t_min, double t_max, double dt, double burn_in = 20.0);

// Fills z via the one-step OU recursion; the value at t_min comes from a
// burn-in segment of length burn_in drawn from a seed-derived stream.
NoisePath ou_attach(NoisePath path);

// theta_s: t -> w(t+s) - w(s), grid translated by -s. The shift must land on
// the grid (the integrator never resamples noise) and s itself must be a
// grid time so that w(s) is known.
NoisePath theta_shift(const NoisePath& path, double s);

// Brownian-bridge midpoint refinement, dt -> dt/2; z is rebuilt from the same
// value at t_min. Used by the step-halving self-convergence checks.
NoisePath refine_bisect(const NoisePath& path, std::uint64_t bridge_seed);

void save_noise(const NoisePath& path, const std::filesystem::path& file);
NoisePath load_noise(const std::filesystem::path& file);

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string noise_digest(const NoisePath& path);

// Read-only shifted view: local grid index k reads the base path at
// k + shift. All experiment plumbing passes these around instead of copying
// shifted paths.
struct SampleView {
    const NoisePath* path = nullptr;
    std::int64_t shift = 0;

    double dt() const { return path->dt; }
    std::int64_t k_min() const { return path->k_min - shift; }
    std::int64_t k_max() const { return path->k_max - shift; }
    double z(std::int64_t k) const { return path->z_idx(k + shift); }
    double w_increment(std::int64_t k) const {  // W(t_{k+1}) - W(t_k) in view time
        return path->w_idx(k + 1 + shift) - path->w_idx(k + shift);
    }
    std::int64_t index_of(double t) const;
    void require_range(std::int64_t k_lo, std::int64_t k_hi) const;
};

inline SampleView view_of(const NoisePath& path) { return SampleView{&path, 0}; }
SampleView shifted_view(const NoisePath& path, double s);

}  // namespace plattice
