// Absorbing balls with the explicit pullback radius, point-cloud
// approximations of the pullback attractor, Hausdorff semi-distances and the
// upper-semi-continuity sweep over the noise coefficient.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "plattice/dynamics.hpp"
#include "plattice/ensemble.hpp"

namespace plattice {

struct AbsorbingSet {
    double alpha = 0.0;
    double tau = 0.0;
    double radius_sq = 0.0;   // e^{2 alpha z(omega)} * script_R
    double script_R = 1.0;    // 1 + 2 int_{-L}^0 e^{lambda0 s + 2 alpha int_s^0 z - 2 alpha z(s)} |psi1(tau+s)|_1 ds
    double truncation_L = 0.0;
    bool tail_warning = false;  // integrand at s = -L not yet negligible
};

AbsorbingSet absorbing_radius(double alpha, double tau, const SampleView& omega, const SystemParams& sp,
                              const Forcing& fc, int half_width, double L = 40.0, double tail_tol = 1e-8);

struct AttractorCloud {
    std::vector<LatticeVec> points;
    double alpha = 0.0;
    double tau = 0.0;
    double T = 0.0;  // pullback horizon
    int M = 0;
    double absorb_radius_sq = 0.0;  // tau-level absorbing bound
    std::string noise_digest;
};

// Deterministic initial conditions: stratified radii times a fixed set of
// unit directions, the same set for every alpha so clouds stay comparable.
std::vector<LatticeVec> sample_ball(int M, int half_width, double radius,
                                    std::uint64_t direction_seed = 0x706c617463ULL);

// Terminal pullback image of a sampled absorbing ball: start in the ball of
// absorbing radius at (alpha, tau - T, theta_{-T} omega), evolve time T.
AttractorCloud pullback_cloud(double alpha, double tau, const NoisePath& path, double T, int M,
                              const SystemParams& sp, const Forcing& fc, int half_width,
                              Exec exec = Exec::parallel, double L = 40.0);

enum class CloudNorm { l2, lq, l2_plus_lq };

double point_norm(const LatticeVec& x, CloudNorm which, double q);
double point_dist(const LatticeVec& a, const LatticeVec& b, CloudNorm which, double q);

// sup_{a in A} inf_{b in B} |a - b|
double hausdorff_semidist(const std::vector<LatticeVec>& a, const std::vector<LatticeVec>& b,
                          CloudNorm which, double q, Exec exec = Exec::parallel);

double cloud_diameter(const std::vector<LatticeVec>& pts, CloudNorm which, double q);
// max over points of the nearest-neighbour spacing; the cloud's resolution
double cloud_resolution(const std::vector<LatticeVec>& pts);

struct UscRow {
    double alpha = 0.0;
    double dist_l2 = 0.0, dist_lq = 0.0, dist_sum = 0.0;
};

// Distances from each cloud to the base cloud; refuses clouds built on a
// different noise path.
std::vector<UscRow> usc_distances(const std::vector<AttractorCloud>& clouds, const AttractorCloud& base,
                                  double q, Exec exec = Exec::parallel);

std::vector<UscRow> usc_sweep(const std::vector<double>& alphas, double alpha0, double tau,
                              const NoisePath& path, double T, int M, const SystemParams& sp,
                              const Forcing& fc, int half_width, Exec exec = Exec::parallel, double L = 40.0);

struct TailRow {
    int cutoff = 0;
    double max_l2 = 0.0, max_lq = 0.0;
};
std::vector<TailRow> tail_profile(const AttractorCloud& cloud, const std::vector<int>& cutoffs, double q);

void save_cloud(const AttractorCloud& cloud, const std::filesystem::path& bin_file,
                const std::filesystem::path& json_file, double q);
AttractorCloud load_cloud(const std::filesystem::path& bin_file, const std::filesystem::path& json_file);

}  // namespace plattice
