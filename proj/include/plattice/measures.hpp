// Empirical sample measures built from Cesaro time averages along the
// cocycle, the bounded-Lipschitz test dictionary, push-forward / invariance
// checks and the weak-convergence sweep over the noise coefficient.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "plattice/attractor.hpp"
#include "plattice/dynamics.hpp"
#include "plattice/ensemble.hpp"

namespace plattice {

struct EnsembleMeasure {
    std::vector<LatticeVec> particles;
    std::vector<double> weights;  // nonnegative, sum to 1
    double alpha = 0.0;
    double anchor_time = 0.0;  // measure sits at (anchor_time, theta_{anchor_time} omega')
    double base_time = 0.0;    // omega' = theta_{-base_time} omega
    double window = 0.0;
    double ds = 0.0;
    std::string noise_digest;

    std::size_t size() const { return particles.size(); }
    void validate() const;  // weights sum to 1, particles finite
};

using AnchorMap = std::function<LatticeVec(double)>;
AnchorMap zero_anchor(int half_width);

// All measures of one family share base sample omega' and one strand grid:
// strand j starts at s_j = (front anchor - window) + j*ds; the measure at an
// anchor averages every strand born at or before it, uniform weights.
struct MeasureFamily {
    std::vector<double> anchors;
    std::vector<EnsembleMeasure> measures;
    double alpha = 0.0;
    double base_time = 0.0;

    const EnsembleMeasure& at_time(double t) const;
};

MeasureFamily measure_family(double alpha, const std::vector<double>& anchors, double window, double ds,
                             const SampleView& base, const AnchorMap& xi, const SystemParams& sp,
                             const Forcing& fc, int half_width, Exec exec = Exec::parallel,
                             double base_time = 0.0);

EnsembleMeasure empirical_measure(double alpha, double t, double tau_min, const SampleView& base,
                                  const AnchorMap& xi, double ds, const SystemParams& sp, const Forcing& fc,
                                  int half_width, Exec exec = Exec::parallel, double base_time = 0.0);

double integrate_against(const EnsembleMeasure& mu, const std::function<double(const LatticeVec&)>& psi);

EnsembleMeasure push_forward(const EnsembleMeasure& mu,
                             const std::function<LatticeVec(const LatticeVec&)>& map);

// | int psi d mu_{tau+t} - int psi(u(t+tau, tau, omega', .)) d mu_tau |
double invariance_residual(const MeasureFamily& family, double tau, double t_step,
                           const std::function<double(const LatticeVec&)>& psi, const SampleView& base,
                           const SystemParams& sp, const Forcing& fc, Exec exec = Exec::parallel);

// Cylindrical bounded-Lipschitz dictionary: logistic plateau bumps of the
// projection (u, d)/scale, normalized so sup <= 1 and Lip <= 1 on the working
// ball.
struct TestFunctionDict {
    struct Entry {
        LatticeVec dir;  // unit l2 norm
        double center = 0.0, halfwidth = 0.5, steep = 2.0;
    };
    std::vector<Entry> entries;
    double scale = 1.0;

    std::size_t size() const { return entries.size(); }
    double eval(std::size_t k, const LatticeVec& u) const;

    static TestFunctionDict bumps(int n_dirs, int n_profiles, int half_width, double ball_radius,
                                  std::uint64_t dir_seed = 0x64696374ULL);
};

double bl_distance(const EnsembleMeasure& a, const EnsembleMeasure& b, const TestFunctionDict& dict);

struct MeasureSweepRow {
    double alpha = 0.0;
    double t = 0.0;
    double bl = 0.0;
};
std::vector<MeasureSweepRow> measure_sweep(const std::vector<double>& alphas, double alpha0,
                                           const std::vector<double>& t_list, double tau,
                                           const NoisePath& path, double window, double ds,
                                           const SystemParams& sp, const Forcing& fc, int half_width,
                                           const TestFunctionDict& dict, Exec exec = Exec::parallel);

void save_measure(const EnsembleMeasure& mu, const std::filesystem::path& bin_file,
                  const std::filesystem::path& json_file);
EnsembleMeasure load_measure(const std::filesystem::path& bin_file, const std::filesystem::path& json_file);

}  // namespace plattice
