// Model parameters, the forcing family, the conjugated right-hand side and
// its Heun integrator on the noise grid, the cocycle map, and the energy /
// absorption diagnostics.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plattice/lattice.hpp"
#include "plattice/noise.hpp"

namespace plattice {

struct NuProfile {
    enum class Kind { constant, sine, piecewise };
    Kind kind = Kind::constant;
    double nu0 = 1.0;
    double rate = 1.0;                  // sine profile frequency
    std::vector<double> knots, levels;  // piecewise: level[i] on [knots[i], knots[i+1])

    double eval(double t) const;
    void validate() const;
};

struct SystemParams {
    double p = 3.0;
    double q = 3.0;
    double lambda = 1.0;
    double lambda0 = 1.2;
    double lambda1 = 0.5;
    double beta = 1.0;
    double alpha = 0.0;
    NuProfile nu;

    void validate() const;  // throws std::invalid_argument naming the field

    SystemParams with_alpha(double a) const {
        SystemParams out = *this;
        out.alpha = a;
        return out;
    }
};

// Forcing families. power_sine is
//   f_i(t, u) = -beta u |u|^{q-2} + g_i sin(g_rate t)
// with g_i either amp/(1+i^2) or amp e^{-decay |i|}. The family exposes the
// dissipation witness f_i(t,u) u <= -beta_diss |u|^q + psi1_i it satisfies;
// all energy/radius diagnostics are evaluated with that witness.
struct Forcing {
    enum class Family { zero, power_sine };
    enum class GProfile { inv_square, exponential };

    Family family = Family::power_sine;
    GProfile g_profile = GProfile::inv_square;
    double g_amp = 0.5;
    double g_rate = 1.0;
    double g_decay = 0.5;
    // growth constants for q < 2; stored and validated, never used by the solver
    double kappa0 = 0.0, big_lambda = 0.0, t0 = 0.0;

    double g_at(std::int64_t i) const;
    double eval(double t, double u, std::int64_t i, const SystemParams& sp) const;
    double du(double t, double u, std::int64_t i, const SystemParams& sp) const;
    LatticeVec eval_vec(double t, const LatticeVec& u, const SystemParams& sp) const;

    double beta_diss(const SystemParams& sp) const;
    bool dissipativity_representable(const SystemParams& sp) const;
    double psi1_at(std::int64_t i, const SystemParams& sp) const;  // time-independent majorant
    double psi1_l1(int half_width, const SystemParams& sp) const;
    double psi5_bound(double radius, const SystemParams& sp) const;
};

// Randomized spot checks of the standing assumptions the forcing is supposed
// to satisfy on a state ball of the given radius.
struct AssumptionReport {
    bool continuity_ok = true;      // finite values, no NaNs over samples
    bool dissipativity_ok = true;   // f u <= -beta_diss |u|^q + psi1
    bool psi1_summable_ok = true;   // exp(lambda1 s)-weighted integral finite
    bool growth_ok = true;          // |f| <= psi3 |u|^{q-1} + psi4 with bounded psi3
    bool derivative_ok = true;      // |df/du| <= psi5(radius)
    bool all() const { return continuity_ok && dissipativity_ok && psi1_summable_ok && growth_ok && derivative_ok; }
};
AssumptionReport check_assumptions(const Forcing& f, const SystemParams& sp, int half_width, double radius,
                                   int samples = 2000, std::uint64_t seed = 42);

struct BlowupError : std::runtime_error {
    double t;
    explicit BlowupError(double when)
        : std::runtime_error("integration blow-up at t = " + std::to_string(when)), t(when) {}
};

// v' = F(t, omega, v) with
//   F = -e^{alpha (p-2) z} nu(t) A v + (alpha z - lambda) v + e^{-alpha z} f(t, e^{alpha z} v)
LatticeVec rhs_F(double t, const NoisePath& path, const LatticeVec& v, const SystemParams& sp, const Forcing& fc);
LatticeVec rhs_F(double t, double z_value, const LatticeVec& v, const SystemParams& sp, const Forcing& fc);

struct IntegrateOptions {
    double guard = 1e8;      // norm beyond which the step size is declared too large
    int record_stride = 1;   // keep every n-th grid state
};

// A conjugated trajectory together with the physical one and the slice of
// noise data needed to re-evaluate stochastic integrals along it.
struct Trajectory {
    double dt = 0.0;
    std::int64_t k_start = 0, k_end = 0;
    int record_stride = 1;
    double alpha = 0.0;
    std::vector<LatticeVec> v, u;
    std::vector<double> z_view;   // z at every recorded grid point
    std::vector<double> w_tilde;  // W(t_k + shift dt) - W(t_start + shift dt)

    std::size_t n_records() const { return v.size(); }
    double time_at(std::size_t r) const {
        return static_cast<double>(k_start + static_cast<std::int64_t>(r) * record_stride) * dt;
    }
    std::size_t record_of(double t) const;
};

Trajectory integrate(const LatticeVec& v_init, double tau, double t_end, const SampleView& view,
                     const SystemParams& sp, const Forcing& fc, const IntegrateOptions& opt = {});

// Final state only; the work-horse behind cocycle evaluation and ensembles.
LatticeVec evolve_final(LatticeVec v, std::int64_t k_start, std::int64_t k_end, const SampleView& view,
                        const SystemParams& sp, const Forcing& fc, double guard = 1e8);

// v-states at the requested grid indices (ascending, all >= k_start). Lets
// measure construction snapshot one strand at every anchor time in one pass.
std::vector<LatticeVec> evolve_snapshots(LatticeVec v, std::int64_t k_start,
                                         const std::vector<std::int64_t>& record_at, const SampleView& view,
                                         const SystemParams& sp, const Forcing& fc, double guard = 1e8);

// phi(t, tau, omega, u) = e^{alpha z(theta_t omega)} v(t+tau, tau, theta_{-tau} omega, e^{-alpha z(omega)} u).
LatticeVec cocycle_phi(double t, double tau, const SampleView& omega, const LatticeVec& u_tau,
                       const SystemParams& sp, const Forcing& fc, double guard = 1e8);
LatticeVec cocycle_phi(double t, double tau, const NoisePath& omega, const LatticeVec& u_tau,
                       const SystemParams& sp, const Forcing& fc, double guard = 1e8);

// Pathwise energy bound functions evaluated by trapezoid quadrature on the
// noise grid. G1 bounds ||v(t)||^2 on [tau, T] from ||u_tau|| = R; G2 = E * G1
// bounds the time integral of ||v||_q^q.
double diag_G1(double alpha, double tau, double T, const SampleView& view, const SystemParams& sp,
               const Forcing& fc, int half_width, double radius);
double diag_E(double alpha, double tau, double T, const SampleView& view, const SystemParams& sp,
              const Forcing& fc);
double diag_G2(double alpha, double tau, double T, const SampleView& view, const SystemParams& sp,
               const Forcing& fc, int half_width, double radius);

// Both sides of the integrated energy estimate along a trajectory:
//   lhs(t) = ||v(t)||^2 + 2 b int_tau^t e^{2 lambda (s-t) + 2 alpha int_s^t z + alpha (q-2) z(s)} ||v||_q^q ds
//   rhs(t) = e^{2 lambda (tau-t) + 2 alpha int_tau^t z} ||v_tau||^2
//          + 2 int_tau^t e^{2 lambda (s-t) + 2 alpha int_s^t z - 2 alpha z(s)} |psi1|_1 ds
// with b the dissipation witness coefficient.
struct EnergyDiagnostics {
    std::vector<double> lhs, rhs;
    double min_margin_rel = 0.0;  // min over grid of (rhs - lhs) / max(1, rhs)
};
EnergyDiagnostics energy_check(const Trajectory& traj, const SystemParams& sp, const Forcing& fc);

// Temperedness of a radius history {(s, ||D||^2)}, s <= 0: the weighted radii
// e^{lambda0 s + 2 alpha int_s^0 z dr} ||D||^2 must die out as s -> -infinity.
struct TemperedCheck {
    bool tempered = false;
    double decay_rate = 0.0;         // fitted slope of log-weight vs s (positive = decays backwards)
    double final_weight_ratio = 0.0; // weight at the most negative s over weight at s = 0
};
TemperedCheck check_tempered(const std::vector<std::pair<double, double>>& radius_sq_history, double alpha,
                             const SampleView& view, const SystemParams& sp, double ratio_threshold = 1e-3);

}  // namespace plattice
