#include "plattice/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace plattice {

void EnsembleMeasure::validate() const {
    if (particles.size() != weights.size()) throw std::logic_error("EnsembleMeasure: size mismatch");
    double s = pairwise_sum(weights);
    if (std::abs(s - 1.0) > 1e-12) throw std::logic_error("EnsembleMeasure: weights must sum to 1");
    for (double w : weights)
        if (w < 0.0) throw std::logic_error("EnsembleMeasure: negative weight");
    for (const auto& p : particles)
        if (!p.all_finite()) throw std::logic_error("EnsembleMeasure: non-finite particle");
}

AnchorMap zero_anchor(int half_width) {
    return [half_width](double) { return LatticeVec(half_width); };
}

const EnsembleMeasure& MeasureFamily::at_time(double t) const {
    for (std::size_t i = 0; i < anchors.size(); ++i)
        if (std::abs(anchors[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return measures[i];
    throw std::out_of_range("MeasureFamily: no measure at requested time");
}

MeasureFamily measure_family(double alpha, const std::vector<double>& anchors, double window, double ds,
                             const SampleView& base, const AnchorMap& xi, const SystemParams& sp,
                             const Forcing& fc, int half_width, Exec exec, double base_time) {
    if (anchors.empty()) throw std::invalid_argument("measure_family: need at least one anchor");
    if (!std::is_sorted(anchors.begin(), anchors.end()))
        throw std::invalid_argument("measure_family: anchors must be ascending");
    if (!(window > 0.0)) throw std::invalid_argument("measure_family: empty averaging window");
    const double dt = base.dt();
    const auto ds_steps = static_cast<std::int64_t>(std::llround(ds / dt));
    if (ds_steps < 1 || std::abs(ds - static_cast<double>(ds_steps) * dt) > 1e-9 * ds)
        throw std::invalid_argument("measure_family: ds must be a positive multiple of dt");

    const SystemParams spa = sp.with_alpha(alpha);
    const double tau_min = anchors.front() - window;
    const std::int64_t k_tau_min = base.index_of(tau_min);
    std::vector<std::int64_t> anchor_idx(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) anchor_idx[i] = base.index_of(anchors[i]);

    // strand birth indices on the ds-grid of [tau_min, last anchor]
    std::vector<std::int64_t> births;
    for (std::int64_t k = k_tau_min; k <= anchor_idx.back(); k += ds_steps) births.push_back(k);

    // evolve each strand once, snapshotting u at every anchor at or after birth
    std::vector<std::vector<LatticeVec>> snaps(births.size());
    std::exception_ptr bad;
    for_each_index(births.size(), exec, [&](std::size_t j) {
        try {
            const std::int64_t kb = births[j];
            std::vector<std::int64_t> rec;
            for (std::int64_t ka : anchor_idx)
                if (ka >= kb) rec.push_back(ka);
            if (rec.empty()) return;
            LatticeVec v0 = scaled(xi(static_cast<double>(kb) * dt), std::exp(-alpha * base.z(kb)));
            auto vs = evolve_snapshots(std::move(v0), kb, rec, base, spa, fc);
            snaps[j].reserve(vs.size());
            for (std::size_t r = 0; r < vs.size(); ++r)
                snaps[j].push_back(scaled(vs[r], std::exp(alpha * base.z(rec[r]))));
        } catch (...) {
#pragma omp critical
            if (!bad) bad = std::current_exception();
        }
    });
    if (bad) std::rethrow_exception(bad);

    MeasureFamily fam;
    fam.anchors = anchors;
    fam.alpha = alpha;
    fam.base_time = base_time;
    const std::string digest = noise_digest(*base.path);
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        EnsembleMeasure mu;
        mu.alpha = alpha;
        mu.anchor_time = anchors[i];
        mu.base_time = base_time;
        mu.window = window;
        mu.ds = ds;
        mu.noise_digest = digest;
        for (std::size_t j = 0; j < births.size(); ++j) {
            if (births[j] > anchor_idx[i]) break;
            // snapshot position of this anchor within strand j's record list
            std::size_t pos = 0;
            for (std::size_t r = 0; r < anchor_idx.size(); ++r) {
                if (anchor_idx[r] < births[j]) continue;
                if (anchor_idx[r] == anchor_idx[i]) break;
                ++pos;
            }
            mu.particles.push_back(snaps[j][pos]);
        }
        mu.weights.assign(mu.particles.size(), 1.0 / static_cast<double>(mu.particles.size()));
        fam.measures.push_back(std::move(mu));
    }
    return fam;
}

EnsembleMeasure empirical_measure(double alpha, double t, double tau_min, const SampleView& base,
                                  const AnchorMap& xi, double ds, const SystemParams& sp, const Forcing& fc,
                                  int half_width, Exec exec, double base_time) {
    if (!(tau_min < t)) throw std::invalid_argument("empirical_measure: need tau_min < t");
    auto fam = measure_family(alpha, {t}, t - tau_min, ds, base, xi, sp, fc, half_width, exec, base_time);
    return std::move(fam.measures.front());
}

double integrate_against(const EnsembleMeasure& mu, const std::function<double(const LatticeVec&)>& psi) {
    if (mu.particles.empty()) throw std::invalid_argument("integrate_against: empty measure");
    std::vector<double> terms(mu.particles.size());
    for (std::size_t j = 0; j < mu.particles.size(); ++j) terms[j] = mu.weights[j] * psi(mu.particles[j]);
    return pairwise_sum(terms);
}

EnsembleMeasure push_forward(const EnsembleMeasure& mu,
                             const std::function<LatticeVec(const LatticeVec&)>& map) {
    EnsembleMeasure out = mu;
    for (auto& p : out.particles) p = map(p);
    return out;
}

double invariance_residual(const MeasureFamily& family, double tau, double t_step,
                           const std::function<double(const LatticeVec&)>& psi, const SampleView& base,
                           const SystemParams& sp, const Forcing& fc, Exec exec) {
    const EnsembleMeasure& mu_tau = family.at_time(tau);
    const EnsembleMeasure& mu_end = family.at_time(tau + t_step);
    const double lhs = integrate_against(mu_end, psi);

    const SystemParams spa = sp.with_alpha(family.alpha);
    const std::int64_t k0 = base.index_of(tau);
    const std::int64_t k1 = base.index_of(tau + t_step);
    EnsembleMeasure pushed = mu_tau;
    if (k1 != k0) {
        const double zin = base.z(k0), zout = base.z(k1);
        std::exception_ptr bad;
        for_each_index(pushed.particles.size(), exec, [&](std::size_t j) {
            try {
                LatticeVec v0 = scaled(pushed.particles[j], std::exp(-family.alpha * zin));
                LatticeVec v1 = evolve_final(std::move(v0), k0, k1, base, spa, fc);
                pushed.particles[j] = scaled(v1, std::exp(family.alpha * zout));
            } catch (...) {
#pragma omp critical
                if (!bad) bad = std::current_exception();
            }
        });
        if (bad) std::rethrow_exception(bad);
    }
    return std::abs(lhs - integrate_against(pushed, psi));
}

namespace {
inline double logistic(double y) { return 1.0 / (1.0 + std::exp(-y)); }
}

double TestFunctionDict::eval(std::size_t k, const LatticeVec& u) const {
    const Entry& e = entries.at(k);
    const double x = pairing(u, e.dir) / scale;
    return logistic(e.steep * (x - e.center + e.halfwidth)) * logistic(-e.steep * (x - e.center - e.halfwidth));
}

TestFunctionDict TestFunctionDict::bumps(int n_dirs, int n_profiles, int half_width, double ball_radius,
                                         std::uint64_t dir_seed) {
    if (n_dirs < 1 || n_profiles < 1) throw std::invalid_argument("TestFunctionDict: empty dictionary");
    TestFunctionDict dict;
    dict.scale = std::max(ball_radius, 1.0);
    GaussianRng rng(splitmix64(dir_seed));
    const std::size_t m = 2 * static_cast<std::size_t>(half_width) + 1;
    for (int d = 0; d < n_dirs; ++d) {
        std::vector<double> dir(m);
        double nsq = 0.0;
        for (double& x : dir) {
            x = rng.next();
            nsq += x * x;
        }
        const double inv = 1.0 / std::sqrt(std::max(nsq, 1e-300));
        for (double& x : dir) x *= inv;
        LatticeVec dv(half_width, std::move(dir));
        for (int b = 0; b < n_profiles; ++b) {
            Entry e;
            e.dir = dv;
            e.center = -0.5 + 0.25 * static_cast<double>(b % 5);
            e.halfwidth = 0.15 + 0.1 * static_cast<double>(b % 4);
            e.steep = 2.0;  // Lip of each bump <= steep/2 <= 1 on the scaled coordinate
            dict.entries.push_back(std::move(e));
        }
    }
    return dict;
}

double bl_distance(const EnsembleMeasure& a, const EnsembleMeasure& b, const TestFunctionDict& dict) {
    if (dict.size() == 0) throw std::invalid_argument("bl_distance: empty dictionary");
    double best = 0.0;
    for (std::size_t k = 0; k < dict.size(); ++k) {
        auto psi = [&](const LatticeVec& u) { return dict.eval(k, u); };
        best = std::max(best, std::abs(integrate_against(a, psi) - integrate_against(b, psi)));
    }
    return best;
}

std::vector<MeasureSweepRow> measure_sweep(const std::vector<double>& alphas, double alpha0,
                                           const std::vector<double>& t_list, double tau,
                                           const NoisePath& path, double window, double ds,
                                           const SystemParams& sp, const Forcing& fc, int half_width,
                                           const TestFunctionDict& dict, Exec exec) {
    if (t_list.empty()) throw std::invalid_argument("measure_sweep: empty t list");
    std::vector<double> anchors = t_list;
    std::sort(anchors.begin(), anchors.end());
    const SampleView base = shifted_view(path, -tau);
    const AnchorMap xi = zero_anchor(half_width);

    const MeasureFamily base_fam =
        measure_family(alpha0, anchors, window, ds, base, xi, sp, fc, half_width, exec, tau);
    std::vector<MeasureSweepRow> rows;
    for (double a : alphas) {
        const MeasureFamily fam = (a == alpha0)
                                      ? base_fam
                                      : measure_family(a, anchors, window, ds, base, xi, sp, fc, half_width,
                                                       exec, tau);
        for (double t : t_list) {
            MeasureSweepRow r;
            r.alpha = a;
            r.t = t;
            r.bl = bl_distance(fam.at_time(t), base_fam.at_time(t), dict);
            rows.push_back(r);
        }
    }
    return rows;
}

void save_measure(const EnsembleMeasure& mu, const std::filesystem::path& bin_file,
                  const std::filesystem::path& json_file) {
    if (mu.particles.empty()) throw std::invalid_argument("save_measure: empty measure");
    std::ofstream f(bin_file, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_measure: cannot open " + bin_file.string());
    for (const auto& p : mu.particles)
        f.write(reinterpret_cast<const char*>(p.data().data()), static_cast<std::streamsize>(p.size() * 8));
    f.write(reinterpret_cast<const char*>(mu.weights.data()),
            static_cast<std::streamsize>(mu.weights.size() * 8));
    if (!f) throw std::runtime_error("save_measure: write failed");

    nlohmann::ordered_json j;
    j["alpha"] = mu.alpha;
    j["anchor_time"] = mu.anchor_time;
    j["base_time"] = mu.base_time;
    j["window"] = mu.window;
    j["ds"] = mu.ds;
    j["n_particles"] = mu.particles.size();
    j["half_width"] = mu.particles.front().half_width();
    j["noise_digest"] = mu.noise_digest;
    std::ofstream jf(json_file, std::ios::trunc);
    jf << j.dump(2) << "\n";
    if (!jf) throw std::runtime_error("save_measure: sidecar write failed");
}

EnsembleMeasure load_measure(const std::filesystem::path& bin_file, const std::filesystem::path& json_file) {
    std::ifstream jf(json_file);
    if (!jf) throw std::runtime_error("load_measure: cannot open " + json_file.string());
    nlohmann::json j = nlohmann::json::parse(jf);
    EnsembleMeasure mu;
    mu.alpha = j.at("alpha").get<double>();
    mu.anchor_time = j.at("anchor_time").get<double>();
    mu.base_time = j.at("base_time").get<double>();
    mu.window = j.at("window").get<double>();
    mu.ds = j.at("ds").get<double>();
    mu.noise_digest = j.at("noise_digest").get<std::string>();
    const auto count = j.at("n_particles").get<std::size_t>();
    const int n = j.at("half_width").get<int>();
    const std::size_t m = 2 * static_cast<std::size_t>(n) + 1;

    std::ifstream f(bin_file, std::ios::binary);
    if (!f) throw std::runtime_error("load_measure: cannot open " + bin_file.string());
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> row(m);
        f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(m * 8));
        mu.particles.emplace_back(n, std::move(row));
    }
    mu.weights.resize(count);
    f.read(reinterpret_cast<char*>(mu.weights.data()), static_cast<std::streamsize>(count * 8));
    if (!f) throw std::runtime_error("load_measure: truncated file");
    return mu;
}

}  // namespace plattice
