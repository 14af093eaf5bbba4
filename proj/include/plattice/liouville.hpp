// Cylindrical test functions with gradients and Hessians, the chain-rule
// balance along single trajectories, the measure-level balance law with its
// drift / stochastic / second-order terms, and the termwise sweep over the
// noise coefficient.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plattice/measures.hpp"

namespace plattice {

// Psi(u) = amp * prod_k chi(((u, g_k) - c_k) / w_k) with chi the smooth
// compactly supported mollifier bump, so Psi, Psi' and Psi'' are exact.
struct CylTestFunction {
    std::vector<LatticeVec> dirs;
    std::vector<double> centers;
    std::vector<double> widths;
    double amp = 1.0;

    double eval(const LatticeVec& u) const;
    LatticeVec grad(const LatticeVec& u) const;                                   // Psi'(u), lies in span{g_k}
    double hess(const LatticeVec& u, const LatticeVec& a, const LatticeVec& b) const;  // Psi''(u)(a, b)

    static CylTestFunction standard(int half_width, double ball_radius, int m = 2,
                                    std::uint64_t dir_seed = 0x7073690ULL);
};

// chi and its first two derivatives (unit bump, chi(0) = 1, support |y| < 1)
double mollifier(double y);
double mollifier_d1(double y);
double mollifier_d2(double y);

// F~(t, u) = -nu(t) A u + f(t, u) - lambda u
LatticeVec drift_Ftilde(double t, const LatticeVec& u, const SystemParams& sp, const Forcing& fc);

// Chain-rule balance along one recorded trajectory over [s, t]:
//   Psi(u(t)) - Psi(u(s)) = int <F~, Psi'> + alpha * (stochastic sum) + correction
// The stochastic sum is evaluated with left-point increments (carrying the
// (alpha^2/2) Psi'' correction term) and with midpoint increments (carrying
// none); the residual of each convention is reported.
struct ItoResidual {
    double lhs = 0.0, drift = 0.0, stoch_ito = 0.0, stoch_strat = 0.0, correction = 0.0;
    double residual_ito = 0.0;    // lhs - drift - alpha*stoch_ito - (alpha^2/2)*correction
    double residual_strat = 0.0;  // lhs - drift - alpha*stoch_strat
};
ItoResidual ito_trajectory_residual(const Trajectory& traj, const CylTestFunction& psi, double s, double t,
                                    const SystemParams& sp, const Forcing& fc);

struct LiouvilleReport {
    double s = 0.0, t = 0.0, alpha = 0.0;
    double lhs_diff = 0.0;
    double drift_term = 0.0;
    double stoch_term_ito = 0.0;    // raw integral, without the alpha factor
    double stoch_term_strat = 0.0;
    double correction_term = 0.0;   // raw integral, without the alpha^2/2 factor
    double residual_ito = 0.0;
    double residual_strat = 0.0;
    double anchor_spacing = 0.0;
    int n_anchors = 0;
    std::string to_json_string() const;
};

LiouvilleReport liouville_terms(const MeasureFamily& family, const CylTestFunction& psi, double s, double t,
                                double tau, const NoisePath& path, const SystemParams& sp, const Forcing& fc);

struct StatSolutionReport {
    double continuity_modulus = 0.0;  // max over dictionary of adjacent-anchor jumps
    bool continuity_pass = false;
    double quad_rel_change = 0.0;  // worst refinement change of the grid quadratures
    bool integrability_pass = false;
    double max_residual_rel = 0.0;  // best-convention balance residual over psi list
    bool liouville_pass = false;
    bool all() const { return continuity_pass && integrability_pass && liouville_pass; }
};
StatSolutionReport statistical_solution_check(const MeasureFamily& family, const TestFunctionDict& dict,
                                              const std::vector<CylTestFunction>& psi_list, double s, double t,
                                              double tau, const NoisePath& path, const SystemParams& sp,
                                              const Forcing& fc, double continuity_target = 0.1,
                                              double quad_target = 0.01, double residual_target = 5e-2);

struct TermwiseRow {
    double alpha = 0.0;
    double mu_t = 0.0;         // int Psi d mu_t
    double mu_s = 0.0;         // int Psi d mu_s
    double drift = 0.0;        // time integral of the drift pairing
    double stoch_ito = 0.0;    // alpha * left-point stochastic sum
    double stoch_strat = 0.0;  // alpha * midpoint stochastic sum
    double correction = 0.0;   // (alpha^2/2) * second-order integral
};
std::vector<TermwiseRow> termwise_sweep(const std::vector<double>& alphas, double alpha0,
                                        const CylTestFunction& psi, double s, double t, double tau,
                                        const NoisePath& path, double window, double ds,
                                        double anchor_spacing, const SystemParams& sp, const Forcing& fc,
                                        int half_width, Exec exec = Exec::parallel);

}  // namespace plattice
