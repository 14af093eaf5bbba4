#include "plattice/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace plattice {

double NuProfile::eval(double t) const {
    switch (kind) {
        case Kind::constant:
            return nu0;
        case Kind::sine:
            return 0.5 * nu0 * (1.0 + std::sin(rate * t));
        case Kind::piecewise: {
            if (knots.empty()) return 0.0;
            if (t < knots.front()) return levels.front();
            for (std::size_t i = 0; i + 1 < knots.size(); ++i)
                if (t < knots[i + 1]) return levels[i];
            return levels.back();
        }
    }
    return nu0;
}

void NuProfile::validate() const {
    if (!(nu0 >= 0.0)) throw std::invalid_argument("nu.nu0: must be >= 0");
    if (kind == Kind::piecewise) {
        if (knots.empty() || levels.size() != knots.size())
            throw std::invalid_argument("nu.knots/levels: need matching non-empty arrays");
        if (!std::is_sorted(knots.begin(), knots.end()))
            throw std::invalid_argument("nu.knots: must be sorted");
        for (double v : levels)
            if (v < 0.0 || v > nu0) throw std::invalid_argument("nu.levels: must lie in [0, nu0]");
    }
}

void SystemParams::validate() const {
    if (!(p >= 2.0)) throw std::invalid_argument("model.p: must be >= 2");
    if (!(q >= 1.0)) throw std::invalid_argument("model.q: must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("model.lambda: must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("model.beta: must be > 0");
    if (!(0.0 < lambda1 && lambda1 < lambda0 && lambda0 < 2.0 * lambda))
        throw std::invalid_argument("model.lambda0/lambda1: need 0 < lambda1 < lambda0 < 2*lambda");
    if (!std::isfinite(alpha)) throw std::invalid_argument("model.alpha: must be finite");
    nu.validate();
}

double Forcing::g_at(std::int64_t i) const {
    if (family == Family::zero) return 0.0;
    const auto ai = static_cast<double>(i < 0 ? -i : i);
    if (g_profile == GProfile::inv_square) return g_amp / (1.0 + ai * ai);
    return g_amp * std::exp(-g_decay * ai);
}

double Forcing::eval(double t, double u, std::int64_t i, const SystemParams& sp) const {
    if (family == Family::zero) return 0.0;
    return -sp.beta * signed_pow(u, sp.q - 2.0) + g_at(i) * std::sin(g_rate * t);
}

double Forcing::du(double t, double u, std::int64_t i, const SystemParams& sp) const {
    (void)t;
    (void)i;
    if (family == Family::zero) return 0.0;
    return -sp.beta * (sp.q - 1.0) * std::pow(std::abs(u), sp.q - 2.0);
}

LatticeVec Forcing::eval_vec(double t, const LatticeVec& u, const SystemParams& sp) const {
    const int n = u.half_width();
    LatticeVec out(n);
    for (std::int64_t i = -n; i <= n; ++i) out.at(i) = eval(t, u.get(i), i, sp);
    return out;
}

double Forcing::beta_diss(const SystemParams& sp) const {
    if (family == Family::zero) return 0.0;
    return 0.5 * sp.beta;
}

bool Forcing::dissipativity_representable(const SystemParams& sp) const {
    if (family == Family::zero) return true;
    return sp.q > 1.0 || g_amp <= 0.5 * sp.beta;
}

double Forcing::psi1_at(std::int64_t i, const SystemParams& sp) const {
    if (family == Family::zero) return 0.0;
    if (sp.q == 1.0) {
        if (g_amp <= 0.5 * sp.beta) return 0.0;
        throw std::domain_error("forcing: no summable dissipation majorant for q = 1 with this g");
    }
    // Young: a b <= eps a^q + C(eps) b^{q'} with eps = beta/2
    const double qp = sp.q / (sp.q - 1.0);
    const double c = (1.0 / qp) * std::pow(0.5 * sp.beta * sp.q, -qp / sp.q);
    return c * std::pow(std::abs(g_at(i)), qp);
}

double Forcing::psi1_l1(int half_width, const SystemParams& sp) const {
    std::vector<double> vals(2 * static_cast<std::size_t>(half_width) + 1);
    for (std::int64_t i = -half_width; i <= half_width; ++i)
        vals[static_cast<std::size_t>(i + half_width)] = psi1_at(i, sp);
    return pairwise_sum(vals);
}

double Forcing::psi5_bound(double radius, const SystemParams& sp) const {
    if (family == Family::zero) return 0.0;
    if (sp.q < 2.0) return std::numeric_limits<double>::infinity();
    return sp.beta * (sp.q - 1.0) * std::pow(radius, sp.q - 2.0);
}

AssumptionReport check_assumptions(const Forcing& f, const SystemParams& sp, int half_width, double radius,
                                   int samples, std::uint64_t seed) {
    AssumptionReport rep;
    GaussianRng rng(seed);
    const double b = f.beta_diss(sp);
    const double psi5 = f.psi5_bound(radius, sp);
    rep.derivative_ok = std::isfinite(psi5);
    if (!f.dissipativity_representable(sp)) rep.dissipativity_ok = false;
    for (int s = 0; s < samples; ++s) {
        const double t = 100.0 * (rng.next_uniform() - 0.5);
        const double u = radius * (2.0 * rng.next_uniform() - 1.0);
        const auto i = static_cast<std::int64_t>(std::floor(rng.next_uniform() * (2.0 * half_width + 1.0))) - half_width;
        const double fv = f.eval(t, u, i, sp);
        if (!std::isfinite(fv)) rep.continuity_ok = false;
        if (rep.dissipativity_ok && fv * u > -b * std::pow(std::abs(u), sp.q) + f.psi1_at(i, sp) + 1e-9)
            rep.dissipativity_ok = false;
        if (std::abs(fv) > sp.beta * std::pow(std::abs(u), sp.q - 1.0) + std::abs(f.g_at(i)) + 1e-9)
            rep.growth_ok = false;
        if (rep.derivative_ok && u != 0.0 && std::abs(f.du(t, u, i, sp)) > psi5 + 1e-9)
            rep.derivative_ok = false;
    }
    const double psi_bar = f.dissipativity_representable(sp) ? f.psi1_l1(half_width, sp) : 0.0;
    rep.psi1_summable_ok = std::isfinite(psi_bar / sp.lambda1);
    return rep;
}

// ---------------------------------------------------------------------------
// Heun stepper on the noise grid

namespace {

struct Stepper {
    const SystemParams& sp;
    const Forcing& fc;
    SampleView view;
    int n;
    std::size_t m;
    double dt, e_p, e_q, guard_sq;
    bool zero_forcing;
    std::vector<double> g, k1, k2, vs, sd;

    Stepper(const SystemParams& params, const Forcing& forcing, const SampleView& v, int half_width, double guard)
        : sp(params),
          fc(forcing),
          view(v),
          n(half_width),
          m(2 * static_cast<std::size_t>(half_width) + 1),
          dt(v.dt()),
          e_p(params.p - 2.0),
          e_q(params.q - 2.0),
          guard_sq(guard * guard),
          zero_forcing(forcing.family == Forcing::Family::zero) {
        g.resize(m);
        for (std::int64_t i = -n; i <= n; ++i) g[static_cast<std::size_t>(i + n)] = fc.g_at(i);
        k1.resize(m);
        k2.resize(m);
        vs.resize(m);
        sd.resize(m + 1);
    }

    void rhs(double t, double zval, const std::vector<double>& v, std::vector<double>& out) {
        const double az = sp.alpha * zval;
        const double c_stencil = std::exp(az * e_p) * sp.nu.eval(t);
        const double c_lin = az - sp.lambda;
        if (c_stencil != 0.0) {
            sd[0] = signed_pow(v[0], e_p);
            for (std::size_t j = 1; j < m; ++j) sd[j] = signed_pow(v[j] - v[j - 1], e_p);
            sd[m] = signed_pow(-v[m - 1], e_p);
        }
        if (zero_forcing) {
            if (c_stencil != 0.0)
                for (std::size_t j = 0; j < m; ++j) out[j] = -c_stencil * (sd[j] - sd[j + 1]) + c_lin * v[j];
            else
                for (std::size_t j = 0; j < m; ++j) out[j] = c_lin * v[j];
            return;
        }
        const double c_in = std::exp(az);
        const double c_out = std::exp(-az);
        const double st = std::sin(fc.g_rate * t);
        for (std::size_t j = 0; j < m; ++j) {
            const double uu = c_in * v[j];
            const double fv = -sp.beta * signed_pow(uu, e_q) + g[j] * st;
            const double av = (c_stencil != 0.0) ? c_stencil * (sd[j] - sd[j + 1]) : 0.0;
            out[j] = -av + c_lin * v[j] + c_out * fv;
        }
    }

    void step(std::int64_t k, std::vector<double>& v) {
        const double t0 = static_cast<double>(k) * dt;
        const double t1 = static_cast<double>(k + 1) * dt;
        rhs(t0, view.z(k), v, k1);
        for (std::size_t j = 0; j < m; ++j) vs[j] = v[j] + dt * k1[j];
        rhs(t1, view.z(k + 1), vs, k2);
        double nsq = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            v[j] += 0.5 * dt * (k1[j] + k2[j]);
            nsq += v[j] * v[j];
        }
        if (!(nsq <= guard_sq)) throw BlowupError(t1);
    }
};

void require_ou(const SampleView& view) {
    if (view.path == nullptr || !view.path->has_z())
        throw std::logic_error("dynamics: noise path has no OU data (call ou_attach first)");
}

}  // namespace

LatticeVec rhs_F(double t, double z_value, const LatticeVec& v, const SystemParams& sp, const Forcing& fc) {
    const int n = v.half_width();
    const double az = sp.alpha * z_value;
    LatticeVec av = op_A(v, sp.p);
    LatticeVec out(n);
    const double c_stencil = std::exp(az * (sp.p - 2.0)) * sp.nu.eval(t);
    const double c_in = std::exp(az);
    const double c_out = std::exp(-az);
    for (std::int64_t i = -n; i <= n; ++i)
        out.at(i) = -c_stencil * av.get(i) + (az - sp.lambda) * v.get(i) + c_out * fc.eval(t, c_in * v.get(i), i, sp);
    return out;
}

LatticeVec rhs_F(double t, const NoisePath& path, const LatticeVec& v, const SystemParams& sp, const Forcing& fc) {
    return rhs_F(t, path.z_at(t), v, sp, fc);
}

LatticeVec evolve_final(LatticeVec v, std::int64_t k_start, std::int64_t k_end, const SampleView& view,
                        const SystemParams& sp, const Forcing& fc, double guard) {
    require_ou(view);
    if (k_end < k_start) throw std::invalid_argument("evolve_final: k_end must be >= k_start");
    view.require_range(k_start, k_end);
    Stepper st(sp, fc, view, v.half_width(), guard);
    std::vector<double> state(v.data().begin(), v.data().end());
    for (std::int64_t k = k_start; k < k_end; ++k) st.step(k, state);
    return LatticeVec(v.half_width(), std::move(state));
}

std::vector<LatticeVec> evolve_snapshots(LatticeVec v, std::int64_t k_start,
                                         const std::vector<std::int64_t>& record_at, const SampleView& view,
                                         const SystemParams& sp, const Forcing& fc, double guard) {
    require_ou(view);
    if (record_at.empty()) return {};
    if (!std::is_sorted(record_at.begin(), record_at.end()) || record_at.front() < k_start)
        throw std::invalid_argument("evolve_snapshots: record indices must be ascending and >= k_start");
    view.require_range(k_start, record_at.back());
    const int n = v.half_width();
    Stepper st(sp, fc, view, n, guard);
    std::vector<double> state(v.data().begin(), v.data().end());
    std::vector<LatticeVec> out;
    out.reserve(record_at.size());
    std::size_t next = 0;
    std::int64_t k = k_start;
    while (next < record_at.size() && record_at[next] == k) {
        out.emplace_back(n, state);
        ++next;
    }
    while (next < record_at.size()) {
        st.step(k, state);
        ++k;
        while (next < record_at.size() && record_at[next] == k) {
            out.emplace_back(n, state);
            ++next;
        }
    }
    return out;
}

std::size_t Trajectory::record_of(double t) const {
    const double x = t / dt;
    const auto k = static_cast<std::int64_t>(std::llround(x));
    if (std::abs(x - static_cast<double>(k)) > 1e-6 * std::max(1.0, std::abs(x)))
        throw std::invalid_argument("Trajectory: time not on the grid");
    const std::int64_t off = k - k_start;
    if (off < 0 || off % record_stride != 0 || k > k_end)
        throw std::out_of_range("Trajectory: time not recorded");
    return static_cast<std::size_t>(off / record_stride);
}

Trajectory integrate(const LatticeVec& v_init, double tau, double t_end, const SampleView& view,
                     const SystemParams& sp, const Forcing& fc, const IntegrateOptions& opt) {
    require_ou(view);
    const std::int64_t ks = view.index_of(tau);
    const std::int64_t ke = view.index_of(t_end);
    if (ke < ks) throw std::invalid_argument("integrate: t_end must be >= tau");
    view.require_range(ks, ke);
    if (opt.record_stride < 1) throw std::invalid_argument("integrate: record_stride must be >= 1");

    Trajectory traj;
    traj.dt = view.dt();
    traj.k_start = ks;
    traj.k_end = ke;
    traj.record_stride = opt.record_stride;
    traj.alpha = sp.alpha;

    const int n = v_init.half_width();
    Stepper st(sp, fc, view, n, opt.guard);
    std::vector<double> state(v_init.data().begin(), v_init.data().end());

    const double w0 = view.path->w_idx(ks + view.shift);
    auto record = [&](std::int64_t k) {
        LatticeVec v(n, state);
        const double zv = view.z(k);
        traj.u.push_back(scaled(v, std::exp(sp.alpha * zv)));
        traj.v.push_back(std::move(v));
        traj.z_view.push_back(zv);
        traj.w_tilde.push_back(view.path->w_idx(k + view.shift) - w0);
    };
    record(ks);
    for (std::int64_t k = ks; k < ke; ++k) {
        st.step(k, state);
        if ((k + 1 - ks) % opt.record_stride == 0) record(k + 1);
    }
    return traj;
}

LatticeVec cocycle_phi(double t, double tau, const SampleView& omega, const LatticeVec& u_tau,
                       const SystemParams& sp, const Forcing& fc, double guard) {
    if (t < 0.0) throw std::invalid_argument("cocycle_phi: t must be >= 0");
    require_ou(omega);
    const std::int64_t ks = omega.index_of(tau);
    const std::int64_t kt = omega.index_of(tau + t);
    if (kt == ks) return u_tau;  // identity at t = 0
    const SampleView inner{omega.path, omega.shift - ks};
    const double z_tau = inner.z(ks);
    LatticeVec v0 = scaled(u_tau, std::exp(-sp.alpha * z_tau));
    LatticeVec v1 = evolve_final(std::move(v0), ks, kt, inner, sp, fc, guard);
    return scaled(v1, std::exp(sp.alpha * inner.z(kt)));
}

LatticeVec cocycle_phi(double t, double tau, const NoisePath& omega, const LatticeVec& u_tau,
                       const SystemParams& sp, const Forcing& fc, double guard) {
    return cocycle_phi(t, tau, view_of(omega), u_tau, sp, fc, guard);
}

// ---------------------------------------------------------------------------
// Energy bound diagnostics

namespace {

// cumulative trapezoid of f over grid indices [ks, ke]; out[0] = 0
std::vector<double> cum_trapz(std::int64_t ks, std::int64_t ke, double dt, const std::function<double(std::int64_t)>& f) {
    const auto n = static_cast<std::size_t>(ke - ks + 1);
    std::vector<double> out(n, 0.0);
    double prev = f(ks);
    for (std::size_t i = 1; i < n; ++i) {
        const double cur = f(ks + static_cast<std::int64_t>(i));
        out[i] = out[i - 1] + 0.5 * dt * (prev + cur);
        prev = cur;
    }
    return out;
}

}  // namespace

double diag_G1(double alpha, double tau, double T, const SampleView& view, const SystemParams& sp,
               const Forcing& fc, int half_width, double radius) {
    require_ou(view);
    const std::int64_t ks = view.index_of(tau);
    const std::int64_t ke = view.index_of(T);
    if (ke < ks) throw std::invalid_argument("diag_G1: T must be >= tau");
    view.require_range(ks, ke);
    const double dt = view.dt();
    const auto iabs = cum_trapz(ks, ke, dt, [&](std::int64_t k) { return std::abs(view.z(k)); });
    const double itot = iabs.back();
    // |alpha| on the accumulated |z| weight: the bound must dominate
    // e^{2 alpha int z} for either sign of alpha. The pointwise z factors
    // keep the signed coefficient.
    const double aa = std::abs(alpha);
    const double term1 = std::exp(2.0 * aa * itot - 2.0 * alpha * view.z(ks)) * radius * radius;
    const double psi_bar = fc.psi1_l1(half_width, sp);
    double acc = 0.0;
    const auto n = static_cast<std::size_t>(ke - ks + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t k = ks + static_cast<std::int64_t>(i);
        const double wgt = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        acc += wgt * std::exp(2.0 * aa * (itot - iabs[i]) - 2.0 * alpha * view.z(k)) * psi_bar;
    }
    return term1 + 2.0 * acc * dt;
}

double diag_E(double alpha, double tau, double T, const SampleView& view, const SystemParams& sp,
              const Forcing& fc) {
    require_ou(view);
    const double b = fc.beta_diss(sp);
    if (!(b > 0.0)) throw std::domain_error("diag_E: forcing has no positive dissipation coefficient");
    const std::int64_t ks = view.index_of(tau);
    const std::int64_t ke = view.index_of(T);
    view.require_range(ks, ke);
    const auto iabs = cum_trapz(ks, ke, view.dt(), [&](std::int64_t k) { return std::abs(view.z(k)); });
    double zmax = 0.0;
    for (std::int64_t k = ks; k <= ke; ++k) zmax = std::max(zmax, std::abs(view.z(k)));
    const double ex = 2.0 * sp.lambda * (T - tau) + 2.0 * std::abs(alpha) * iabs.back() +
                      std::abs(alpha * (sp.q - 2.0)) * zmax;
    return std::exp(ex) / (2.0 * b);
}

double diag_G2(double alpha, double tau, double T, const SampleView& view, const SystemParams& sp,
               const Forcing& fc, int half_width, double radius) {
    return diag_E(alpha, tau, T, view, sp, fc) * diag_G1(alpha, tau, T, view, sp, fc, half_width, radius);
}

EnergyDiagnostics energy_check(const Trajectory& traj, const SystemParams& sp, const Forcing& fc) {
    const std::size_t n = traj.n_records();
    if (n == 0) throw std::invalid_argument("energy_check: empty trajectory");
    const double h = traj.dt * traj.record_stride;
    const double span = static_cast<double>(n - 1) * h;
    if (2.0 * sp.lambda * span > 500.0) throw std::domain_error("energy_check: span too long for direct exponents");

    const double b = fc.beta_diss(sp);
    const double psi_bar = fc.psi1_l1(traj.v.front().half_width(), sp);
    const double a = sp.alpha;

    std::vector<double> iz(n, 0.0);  // signed integral of z from the start
    for (std::size_t i = 1; i < n; ++i) iz[i] = iz[i - 1] + 0.5 * h * (traj.z_view[i - 1] + traj.z_view[i]);

    EnergyDiagnostics out;
    out.lhs.resize(n);
    out.rhs.resize(n);
    const double v0_sq = norm_sq(traj.v.front());
    double cum_q = 0.0, cum_psi = 0.0, prev_q = 0.0, prev_psi = 0.0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) * h;
        const double zi = traj.z_view[i];
        const double qn = std::pow(lp_norm(traj.v[i], sp.q), sp.q);
        const double f_q = std::exp(2.0 * sp.lambda * s - 2.0 * a * iz[i] + a * (sp.q - 2.0) * zi) * qn;
        const double f_psi = std::exp(2.0 * sp.lambda * s - 2.0 * a * iz[i] - 2.0 * a * zi) * psi_bar;
        if (i > 0) {
            cum_q += 0.5 * h * (prev_q + f_q);
            cum_psi += 0.5 * h * (prev_psi + f_psi);
        }
        prev_q = f_q;
        prev_psi = f_psi;
        const double outer = std::exp(-2.0 * sp.lambda * s + 2.0 * a * iz[i]);
        out.lhs[i] = norm_sq(traj.v[i]) + 2.0 * b * outer * cum_q;
        out.rhs[i] = outer * (v0_sq + 2.0 * cum_psi);
        min_margin = std::min(min_margin, (out.rhs[i] - out.lhs[i]) / std::max(1.0, out.rhs[i]));
    }
    out.min_margin_rel = min_margin;
    return out;
}

TemperedCheck check_tempered(const std::vector<std::pair<double, double>>& radius_sq_history, double alpha,
                             const SampleView& view, const SystemParams& sp, double ratio_threshold) {
    require_ou(view);
    if (radius_sq_history.size() < 2) throw std::invalid_argument("check_tempered: need at least two samples");
    auto hist = radius_sq_history;
    std::sort(hist.begin(), hist.end());  // ascending in s, most negative first
    if (hist.back().first > 1e-9) throw std::invalid_argument("check_tempered: pullback times must be <= 0");

    const std::int64_t k_lo = view.index_of(hist.front().first);
    view.require_range(k_lo, 0);
    // I(s) = int_s^0 z dr, accumulated backwards from 0
    const auto n = static_cast<std::size_t>(-k_lo + 1);
    std::vector<double> into0(n, 0.0);  // indexed by (k - k_lo); into0 at k=0 is 0
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::int64_t k = k_lo + static_cast<std::int64_t>(i);
        into0[i - 1] = into0[i] + 0.5 * view.dt() * (view.z(k - 1) + view.z(k));
    }

    std::vector<double> logw(hist.size());
    for (std::size_t j = 0; j < hist.size(); ++j) {
        const std::int64_t k = view.index_of(hist[j].first);
        const double iz = into0[static_cast<std::size_t>(k - k_lo)];
        logw[j] = sp.lambda0 * hist[j].first + 2.0 * alpha * iz + std::log(std::max(hist[j].second, 1e-300));
    }
    // least squares slope of log w against s
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto m = static_cast<double>(hist.size());
    for (std::size_t j = 0; j < hist.size(); ++j) {
        sx += hist[j].first;
        sy += logw[j];
        sxx += hist[j].first * hist[j].first;
        sxy += hist[j].first * logw[j];
    }
    TemperedCheck res;
    res.decay_rate = (m * sxy - sx * sy) / std::max(m * sxx - sx * sx, 1e-300);
    res.final_weight_ratio = std::exp(logw.front() - logw.back());
    res.tempered = res.final_weight_ratio <= ratio_threshold;
    return res;
}

}  // namespace plattice
