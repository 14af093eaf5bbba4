#include "plattice/liouville.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace plattice {

double mollifier(double y) {
    const double y2 = y * y;
    if (y2 >= 1.0 - 1e-12) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - y2));
}

double mollifier_d1(double y) {
    const double y2 = y * y;
    if (y2 >= 1.0 - 1e-12) return 0.0;
    const double t = 1.0 - y2;
    return mollifier(y) * (-2.0 * y / (t * t));
}

double mollifier_d2(double y) {
    const double y2 = y * y;
    if (y2 >= 1.0 - 1e-12) return 0.0;
    const double t = 1.0 - y2;
    const double t2 = t * t;
    return mollifier(y) * (4.0 * y2 / (t2 * t2) - 2.0 / t2 - 8.0 * y2 / (t2 * t));
}

double CylTestFunction::eval(const LatticeVec& u) const {
    double prod = amp;
    for (std::size_t k = 0; k < dirs.size(); ++k)
        prod *= mollifier((pairing(u, dirs[k]) - centers[k]) / widths[k]);
    return prod;
}

LatticeVec CylTestFunction::grad(const LatticeVec& u) const {
    const std::size_t m = dirs.size();
    std::vector<double> vals(m), dvals(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double x = (pairing(u, dirs[k]) - centers[k]) / widths[k];
        vals[k] = mollifier(x);
        dvals[k] = mollifier_d1(x) / widths[k];
    }
    int n = 0;
    for (const auto& d : dirs) n = std::max(n, d.half_width());
    LatticeVec out(n);
    for (std::size_t k = 0; k < m; ++k) {
        double coeff = amp * dvals[k];
        for (std::size_t l = 0; l < m; ++l)
            if (l != k) coeff *= vals[l];
        if (coeff == 0.0) continue;
        for (std::int64_t i = -dirs[k].half_width(); i <= dirs[k].half_width(); ++i)
            out.at(i) += coeff * dirs[k].get(i);
    }
    return out;
}

double CylTestFunction::hess(const LatticeVec& u, const LatticeVec& a, const LatticeVec& b) const {
    const std::size_t m = dirs.size();
    std::vector<double> vals(m), dvals(m), ddvals(m), pa(m), pb(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double x = (pairing(u, dirs[k]) - centers[k]) / widths[k];
        vals[k] = mollifier(x);
        dvals[k] = mollifier_d1(x) / widths[k];
        ddvals[k] = mollifier_d2(x) / (widths[k] * widths[k]);
        pa[k] = pairing(a, dirs[k]);
        pb[k] = pairing(b, dirs[k]);
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t l = 0; l < m; ++l) {
            double coeff = amp;
            if (k == l) {
                coeff *= ddvals[k];
                for (std::size_t j = 0; j < m; ++j)
                    if (j != k) coeff *= vals[j];
            } else {
                coeff *= dvals[k] * dvals[l];
                for (std::size_t j = 0; j < m; ++j)
                    if (j != k && j != l) coeff *= vals[j];
            }
            acc += coeff * pa[k] * pb[l];
        }
    }
    return acc;
}

CylTestFunction CylTestFunction::standard(int half_width, double ball_radius, int m, std::uint64_t dir_seed) {
    if (m < 1) throw std::invalid_argument("CylTestFunction: need at least one direction");
    CylTestFunction psi;
    GaussianRng rng(splitmix64(dir_seed));
    const std::size_t len = 2 * static_cast<std::size_t>(half_width) + 1;
    for (int k = 0; k < m; ++k) {
        std::vector<double> d(len);
        double nsq = 0.0;
        for (double& x : d) {
            x = rng.next();
            nsq += x * x;
        }
        const double inv = 1.0 / std::sqrt(std::max(nsq, 1e-300));
        for (double& x : d) x *= inv;
        psi.dirs.emplace_back(half_width, std::move(d));
        psi.centers.push_back(0.0);
        psi.widths.push_back(2.0 * std::max(ball_radius, 1.0));
    }
    psi.amp = 1.0;
    return psi;
}

LatticeVec drift_Ftilde(double t, const LatticeVec& u, const SystemParams& sp, const Forcing& fc) {
    const int n = u.half_width();
    const double nu_t = sp.nu.eval(t);
    LatticeVec av = op_A(u, sp.p);
    LatticeVec out(n);
    for (std::int64_t i = -n; i <= n; ++i)
        out.at(i) = -nu_t * av.get(i) + fc.eval(t, u.get(i), i, sp) - sp.lambda * u.get(i);
    return out;
}

ItoResidual ito_trajectory_residual(const Trajectory& traj, const CylTestFunction& psi, double s, double t,
                                    const SystemParams& sp, const Forcing& fc) {
    if (traj.record_stride != 1)
        throw std::invalid_argument("ito_trajectory_residual: needs a stride-1 trajectory");
    if (!(s <= t)) throw std::invalid_argument("ito_trajectory_residual: need s <= t");
    const std::size_t r0 = traj.record_of(s);
    const std::size_t r1 = traj.record_of(t);
    const double h = traj.dt;

    ItoResidual out;
    out.lhs = psi.eval(traj.u[r1]) - psi.eval(traj.u[r0]);

    double prev_drift = 0.0, prev_corr = 0.0, prev_h = 0.0;
    for (std::size_t r = r0; r <= r1; ++r) {
        const LatticeVec& u = traj.u[r];
        const LatticeVec g = psi.grad(u);
        const double time = traj.time_at(r);
        const double fd = pairing(drift_Ftilde(time, u, sp, fc), g);
        const double cd = psi.hess(u, u, u);
        const double hu = pairing(u, g);
        if (r > r0) {
            out.drift += 0.5 * h * (prev_drift + fd);
            out.correction += 0.5 * h * (prev_corr + cd);
            const double dw = traj.w_tilde[r] - traj.w_tilde[r - 1];
            out.stoch_ito += prev_h * dw;
            out.stoch_strat += 0.5 * (prev_h + hu) * dw;
        }
        prev_drift = fd;
        prev_corr = cd;
        prev_h = hu;
    }
    const double a = traj.alpha;
    out.residual_ito = out.lhs - out.drift - a * out.stoch_ito - 0.5 * a * a * out.correction;
    out.residual_strat = out.lhs - out.drift - a * out.stoch_strat;
    return out;
}

std::string LiouvilleReport::to_json_string() const {
    nlohmann::ordered_json j;
    j["s"] = s;
    j["t"] = t;
    j["alpha"] = alpha;
    j["lhs_diff"] = lhs_diff;
    j["drift_term"] = drift_term;
    j["stoch_term_ito"] = stoch_term_ito;
    j["stoch_term_strat"] = stoch_term_strat;
    j["correction_term"] = correction_term;
    j["residual_ito"] = residual_ito;
    j["residual_strat"] = residual_strat;
    j["anchor_spacing"] = anchor_spacing;
    j["n_anchors"] = n_anchors;
    return j.dump(2);
}

LiouvilleReport liouville_terms(const MeasureFamily& family, const CylTestFunction& psi, double s, double t,
                                double tau, const NoisePath& path, const SystemParams& sp, const Forcing& fc) {
    const bool reversed = s > t;
    const double lo = reversed ? t : s;
    const double hi = reversed ? s : t;

    std::vector<double> anchors;
    for (double a : family.anchors)
        if (a >= lo - 1e-9 && a <= hi + 1e-9) anchors.push_back(a);
    if (anchors.size() < 2 || std::abs(anchors.front() - lo) > 1e-9 || std::abs(anchors.back() - hi) > 1e-9)
        throw std::invalid_argument("liouville_terms: family does not cover [s, t] with anchors at both ends");

    const double alpha = family.alpha;
    const std::size_t n = anchors.size();
    std::vector<double> m_psi(n), m_drift(n), m_corr(n), m_stoch(n), wt(n);
    for (std::size_t i = 0; i < n; ++i) {
        const EnsembleMeasure& mu = family.at_time(anchors[i]);
        m_psi[i] = integrate_against(mu, [&](const LatticeVec& u) { return psi.eval(u); });
        m_drift[i] = integrate_against(mu, [&](const LatticeVec& u) {
            return pairing(drift_Ftilde(anchors[i], u, sp, fc), psi.grad(u));
        });
        m_corr[i] = integrate_against(mu, [&](const LatticeVec& u) { return psi.hess(u, u, u); });
        m_stoch[i] = integrate_against(mu, [&](const LatticeVec& u) { return pairing(u, psi.grad(u)); });
        // W~(a) = W(a - tau) - W(-tau)
        wt[i] = path.w_idx(path.index_of(anchors[i] - tau)) - path.w_idx(path.index_of(-tau));
    }

    LiouvilleReport rep;
    rep.s = s;
    rep.t = t;
    rep.alpha = alpha;
    rep.n_anchors = static_cast<int>(n);
    rep.anchor_spacing = (anchors.back() - anchors.front()) / static_cast<double>(n - 1);
    rep.lhs_diff = m_psi.back() - m_psi.front();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = anchors[i + 1] - anchors[i];
        rep.drift_term += 0.5 * h * (m_drift[i] + m_drift[i + 1]);
        rep.correction_term += 0.5 * h * (m_corr[i] + m_corr[i + 1]);
        const double dw = wt[i + 1] - wt[i];
        rep.stoch_term_ito += m_stoch[i] * dw;
        rep.stoch_term_strat += 0.5 * (m_stoch[i] + m_stoch[i + 1]) * dw;
    }
    if (reversed) {
        rep.lhs_diff = -rep.lhs_diff;
        rep.drift_term = -rep.drift_term;
        rep.correction_term = -rep.correction_term;
        rep.stoch_term_ito = -rep.stoch_term_ito;
        rep.stoch_term_strat = -rep.stoch_term_strat;
    }
    rep.residual_ito =
        rep.lhs_diff - rep.drift_term - alpha * rep.stoch_term_ito - 0.5 * alpha * alpha * rep.correction_term;
    rep.residual_strat = rep.lhs_diff - rep.drift_term - alpha * rep.stoch_term_strat;
    return rep;
}

namespace {

double trapz(const std::vector<double>& x, const std::vector<double>& y, std::size_t stride) {
    double acc = 0.0;
    std::size_t i = 0;
    while (i + stride < x.size()) {
        acc += 0.5 * (x[i + stride] - x[i]) * (y[i] + y[i + stride]);
        i += stride;
    }
    if (i != x.size() - 1) acc += 0.5 * (x.back() - x[i]) * (y[i] + y.back());
    return acc;
}

}  // namespace

StatSolutionReport statistical_solution_check(const MeasureFamily& family, const TestFunctionDict& dict,
                                              const std::vector<CylTestFunction>& psi_list, double s, double t,
                                              double tau, const NoisePath& path, const SystemParams& sp,
                                              const Forcing& fc, double continuity_target, double quad_target,
                                              double residual_target) {
    StatSolutionReport rep;

    // (1) continuity of a |-> int Psi d mu_a over the dictionary
    for (std::size_t k = 0; k < dict.size(); ++k) {
        auto psi = [&](const LatticeVec& u) { return dict.eval(k, u); };
        double prev = 0.0;
        for (std::size_t i = 0; i < family.anchors.size(); ++i) {
            const double v = integrate_against(family.measures[i], psi);
            if (i > 0) rep.continuity_modulus = std::max(rep.continuity_modulus, std::abs(v - prev));
            prev = v;
        }
    }
    rep.continuity_pass = rep.continuity_modulus < continuity_target;

    // (2) grid integrability of the drift pairing, the bilinear form and the
    // linear projection; the quadratures must be stable under grid halving
    const std::vector<double>& anchors = family.anchors;
    for (const auto& psi : psi_list) {
        const LatticeVec& g = psi.dirs.front();
        std::vector<double> f1(anchors.size()), f2(anchors.size()), f3(anchors.size());
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            const EnsembleMeasure& mu = family.at_time(anchors[i]);
            f1[i] = integrate_against(mu, [&](const LatticeVec& u) {
                return pairing(drift_Ftilde(anchors[i], u, sp, fc), g);
            });
            f2[i] = integrate_against(mu, [&](const LatticeVec& u) { return norm_sq(u); });
            const double proj = integrate_against(mu, [&](const LatticeVec& u) { return pairing(u, g); });
            f3[i] = proj * proj;  // square-integrability surrogate
            if (!std::isfinite(f1[i]) || !std::isfinite(f2[i]) || !std::isfinite(f3[i])) {
                rep.quad_rel_change = std::numeric_limits<double>::infinity();
            }
        }
        for (const auto& f : {f1, f2, f3}) {
            const double full = trapz(anchors, f, 1);
            const double half = trapz(anchors, f, 2);
            const double denom = std::max(std::abs(full), 1e-9);
            rep.quad_rel_change = std::max(rep.quad_rel_change, std::abs(full - half) / denom);
        }
    }
    rep.integrability_pass = rep.quad_rel_change < quad_target;

    // (3) the balance law itself
    for (const auto& psi : psi_list) {
        const LiouvilleReport lr = liouville_terms(family, psi, s, t, tau, path, sp, fc);
        const double scale = std::max({1e-6, std::abs(lr.lhs_diff), std::abs(lr.drift_term),
                                       std::abs(lr.alpha * lr.stoch_term_ito),
                                       std::abs(0.5 * lr.alpha * lr.alpha * lr.correction_term)});
        const double res = std::min(std::abs(lr.residual_ito), std::abs(lr.residual_strat)) / scale;
        rep.max_residual_rel = std::max(rep.max_residual_rel, res);
    }
    rep.liouville_pass = rep.max_residual_rel < residual_target;
    return rep;
}

std::vector<TermwiseRow> termwise_sweep(const std::vector<double>& alphas, double alpha0,
                                        const CylTestFunction& psi, double s, double t, double tau,
                                        const NoisePath& path, double window, double ds,
                                        double anchor_spacing, const SystemParams& sp, const Forcing& fc,
                                        int half_width, Exec exec) {
    if (!(s < t)) throw std::invalid_argument("termwise_sweep: need s < t");
    std::vector<double> anchors;
    const auto n_cells = static_cast<std::size_t>(std::llround((t - s) / anchor_spacing));
    for (std::size_t i = 0; i <= n_cells; ++i)
        anchors.push_back(s + (t - s) * static_cast<double>(i) / static_cast<double>(n_cells));
    const SampleView base = shifted_view(path, -tau);
    const AnchorMap xi = zero_anchor(half_width);

    std::vector<double> all = alphas;
    if (std::find(all.begin(), all.end(), alpha0) == all.end()) all.insert(all.begin(), alpha0);

    std::vector<TermwiseRow> rows;
    for (double a : all) {
        const MeasureFamily fam =
            measure_family(a, anchors, window, ds, base, xi, sp, fc, half_width, exec, tau);
        const LiouvilleReport lr = liouville_terms(fam, psi, s, t, tau, path, sp, fc);
        TermwiseRow r;
        r.alpha = a;
        r.mu_t = integrate_against(fam.at_time(t), [&](const LatticeVec& u) { return psi.eval(u); });
        r.mu_s = integrate_against(fam.at_time(s), [&](const LatticeVec& u) { return psi.eval(u); });
        r.drift = lr.drift_term;
        r.stoch_ito = a * lr.stoch_term_ito;
        r.stoch_strat = a * lr.stoch_term_strat;
        r.correction = 0.5 * a * a * lr.correction_term;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace plattice
