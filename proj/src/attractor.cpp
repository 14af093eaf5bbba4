#include "plattice/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace plattice {

AbsorbingSet absorbing_radius(double alpha, double tau, const SampleView& omega, const SystemParams& sp,
                              const Forcing& fc, int half_width, double L, double tail_tol) {
    if (!(L > 0.0)) throw std::invalid_argument("absorbing_radius: L must be > 0");
    const std::int64_t k_lo = omega.index_of(-L);
    omega.require_range(k_lo, 0);
    const double dt = omega.dt();
    const double psi_bar = fc.psi1_l1(half_width, sp);

    // int_s^0 z dr accumulated backwards from 0
    const auto n = static_cast<std::size_t>(-k_lo + 1);
    std::vector<double> into0(n, 0.0);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::int64_t k = k_lo + static_cast<std::int64_t>(i);
        into0[i - 1] = into0[i] + 0.5 * dt * (omega.z(k - 1) + omega.z(k));
    }

    auto integrand = [&](std::size_t i) {
        const std::int64_t k = k_lo + static_cast<std::int64_t>(i);
        const double s = static_cast<double>(k) * dt;
        return std::exp(sp.lambda0 * s + 2.0 * alpha * into0[i] - 2.0 * alpha * omega.z(k)) * psi_bar;
    };
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += ((i == 0 || i + 1 == n) ? 0.5 : 1.0) * integrand(i);

    AbsorbingSet out;
    out.alpha = alpha;
    out.tau = tau;
    out.truncation_L = L;
    out.script_R = 1.0 + 2.0 * acc * dt;
    out.radius_sq = std::exp(2.0 * alpha * omega.z(0)) * out.script_R;
    out.tail_warning = integrand(0) > tail_tol;
    return out;
}

std::vector<LatticeVec> sample_ball(int M, int half_width, double radius, std::uint64_t direction_seed) {
    if (M < 1) throw std::invalid_argument("sample_ball: M must be >= 1");
    GaussianRng rng(splitmix64(direction_seed) ^ static_cast<std::uint64_t>(M));
    const std::size_t m = 2 * static_cast<std::size_t>(half_width) + 1;
    std::vector<LatticeVec> pts;
    pts.reserve(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
        std::vector<double> d(m);
        double nsq = 0.0;
        for (double& x : d) {
            x = rng.next();
            nsq += x * x;
        }
        const double rho = radius * std::sqrt((static_cast<double>(j) + 0.5) / static_cast<double>(M));
        const double scale = rho / std::sqrt(std::max(nsq, 1e-300));
        for (double& x : d) x *= scale;
        pts.emplace_back(half_width, std::move(d));
    }
    return pts;
}

AttractorCloud pullback_cloud(double alpha, double tau, const NoisePath& path, double T, int M,
                              const SystemParams& sp, const Forcing& fc, int half_width, Exec exec, double L) {
    if (M < 2) throw std::invalid_argument("pullback_cloud: M must be >= 2");
    if (!(T > 0.0)) throw std::invalid_argument("pullback_cloud: T must be > 0");
    const SystemParams spa = sp.with_alpha(alpha);

    // initial ball: absorbing radius at (alpha, tau - T, theta_{-T} omega)
    const SampleView start_view = shifted_view(path, -T);
    const AbsorbingSet k_start = absorbing_radius(alpha, tau - T, start_view, spa, fc, half_width, L);
    std::vector<LatticeVec> inits = sample_ball(M, half_width, std::sqrt(k_start.radius_sq));

    // evolve with phi(T, tau - T, theta_{-T} omega, x): conjugated flow over
    // [tau - T, tau] under theta_{-tau} omega
    const std::int64_t k0 = view_of(path).index_of(tau - T);
    const std::int64_t k1 = view_of(path).index_of(tau);
    const SampleView flow{&path, -k1};
    const double z_in = flow.z(k0);
    const double z_out = flow.z(k1);

    AttractorCloud cloud;
    cloud.alpha = alpha;
    cloud.tau = tau;
    cloud.T = T;
    cloud.M = M;
    cloud.noise_digest = noise_digest(path);
    cloud.points.resize(static_cast<std::size_t>(M));
    std::exception_ptr bad;
    for_each_index(static_cast<std::size_t>(M), exec, [&](std::size_t j) {
        try {
            LatticeVec v0 = scaled(inits[j], std::exp(-alpha * z_in));
            LatticeVec v1 = evolve_final(std::move(v0), k0, k1, flow, spa, fc);
            cloud.points[j] = scaled(v1, std::exp(alpha * z_out));
        } catch (...) {
#pragma omp critical
            if (!bad) bad = std::current_exception();
        }
    });
    if (bad) std::rethrow_exception(bad);

    const AbsorbingSet k_tau = absorbing_radius(alpha, tau, view_of(path), spa, fc, half_width, L);
    cloud.absorb_radius_sq = k_tau.radius_sq;
    return cloud;
}

double point_norm(const LatticeVec& x, CloudNorm which, double q) {
    switch (which) {
        case CloudNorm::l2:
            return lp_norm(x, 2.0);
        case CloudNorm::lq:
            return lp_norm(x, q);
        case CloudNorm::l2_plus_lq:
            return lp_norm(x, 2.0) + lp_norm(x, q);
    }
    return 0.0;
}

double point_dist(const LatticeVec& a, const LatticeVec& b, CloudNorm which, double q) {
    return point_norm(diff(a, b), which, q);
}

double hausdorff_semidist(const std::vector<LatticeVec>& a, const std::vector<LatticeVec>& b,
                          CloudNorm which, double q, Exec exec) {
    if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff_semidist: clouds must be non-empty");
    std::vector<double> row_min(a.size());
    for_each_index(a.size(), exec, [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& pb : b) best = std::min(best, point_dist(a[i], pb, which, q));
        row_min[i] = best;
    });
    return *std::max_element(row_min.begin(), row_min.end());
}

double cloud_diameter(const std::vector<LatticeVec>& pts, CloudNorm which, double q) {
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, point_dist(pts[i], pts[j], which, q));
    return d;
}

double cloud_resolution(const std::vector<LatticeVec>& pts) {
    if (pts.size() < 2) return 0.0;
    double res = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double nn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != i) nn = std::min(nn, l2_dist(pts[i], pts[j]));
        res = std::max(res, nn);
    }
    return res;
}

std::vector<UscRow> usc_distances(const std::vector<AttractorCloud>& clouds, const AttractorCloud& base,
                                  double q, Exec exec) {
    std::vector<UscRow> rows;
    rows.reserve(clouds.size());
    for (const auto& c : clouds) {
        if (c.noise_digest != base.noise_digest)
            throw std::invalid_argument("usc_distances: clouds built on different noise paths (digest mismatch)");
        UscRow r;
        r.alpha = c.alpha;
        r.dist_l2 = hausdorff_semidist(c.points, base.points, CloudNorm::l2, q, exec);
        r.dist_lq = hausdorff_semidist(c.points, base.points, CloudNorm::lq, q, exec);
        r.dist_sum = hausdorff_semidist(c.points, base.points, CloudNorm::l2_plus_lq, q, exec);
        rows.push_back(r);
    }
    return rows;
}

std::vector<UscRow> usc_sweep(const std::vector<double>& alphas, double alpha0, double tau,
                              const NoisePath& path, double T, int M, const SystemParams& sp,
                              const Forcing& fc, int half_width, Exec exec, double L) {
    const AttractorCloud base = pullback_cloud(alpha0, tau, path, T, M, sp, fc, half_width, exec, L);
    std::vector<AttractorCloud> clouds;
    clouds.reserve(alphas.size());
    for (double a : alphas) {
        if (a == alpha0)
            clouds.push_back(base);
        else
            clouds.push_back(pullback_cloud(a, tau, path, T, M, sp, fc, half_width, exec, L));
    }
    return usc_distances(clouds, base, sp.q, exec);
}

std::vector<TailRow> tail_profile(const AttractorCloud& cloud, const std::vector<int>& cutoffs, double q) {
    std::vector<TailRow> rows;
    rows.reserve(cutoffs.size());
    for (int c : cutoffs) {
        TailRow r;
        r.cutoff = c;
        for (const auto& p : cloud.points) {
            r.max_l2 = std::max(r.max_l2, tail_norm(p, c, 2.0));
            r.max_lq = std::max(r.max_lq, tail_norm(p, c, q));
        }
        rows.push_back(r);
    }
    return rows;
}

void save_cloud(const AttractorCloud& cloud, const std::filesystem::path& bin_file,
                const std::filesystem::path& json_file, double q) {
    if (cloud.points.empty()) throw std::invalid_argument("save_cloud: empty cloud");
    std::ofstream f(bin_file, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_cloud: cannot open " + bin_file.string());
    for (const auto& p : cloud.points)
        f.write(reinterpret_cast<const char*>(p.data().data()), static_cast<std::streamsize>(p.size() * 8));
    if (!f) throw std::runtime_error("save_cloud: write failed");

    double max_l2 = 0.0, max_lq = 0.0;
    for (const auto& p : cloud.points) {
        max_l2 = std::max(max_l2, lp_norm(p, 2.0));
        max_lq = std::max(max_lq, lp_norm(p, q));
    }
    nlohmann::ordered_json j;
    j["alpha"] = cloud.alpha;
    j["tau"] = cloud.tau;
    j["T"] = cloud.T;
    j["M"] = cloud.M;
    j["half_width"] = cloud.points.front().half_width();
    j["absorb_radius_sq"] = cloud.absorb_radius_sq;
    j["noise_digest"] = cloud.noise_digest;
    j["resolution"] = cloud_resolution(cloud.points);
    j["max_norm_l2"] = max_l2;
    j["max_norm_lq"] = max_lq;
    j["q"] = q;
    std::ofstream jf(json_file, std::ios::trunc);
    jf << j.dump(2) << "\n";
    if (!jf) throw std::runtime_error("save_cloud: sidecar write failed");
}

AttractorCloud load_cloud(const std::filesystem::path& bin_file, const std::filesystem::path& json_file) {
    std::ifstream jf(json_file);
    if (!jf) throw std::runtime_error("load_cloud: cannot open " + json_file.string());
    nlohmann::json j = nlohmann::json::parse(jf);
    AttractorCloud cloud;
    cloud.alpha = j.at("alpha").get<double>();
    cloud.tau = j.at("tau").get<double>();
    cloud.T = j.at("T").get<double>();
    cloud.M = j.at("M").get<int>();
    cloud.absorb_radius_sq = j.at("absorb_radius_sq").get<double>();
    cloud.noise_digest = j.at("noise_digest").get<std::string>();
    const int n = j.at("half_width").get<int>();
    const std::size_t m = 2 * static_cast<std::size_t>(n) + 1;

    std::ifstream f(bin_file, std::ios::binary);
    if (!f) throw std::runtime_error("load_cloud: cannot open " + bin_file.string());
    for (int i = 0; i < cloud.M; ++i) {
        std::vector<double> row(m);
        f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(m * 8));
        if (!f) throw std::runtime_error("load_cloud: truncated matrix");
        cloud.points.emplace_back(n, std::move(row));
    }
    return cloud;
}

}  // namespace plattice
