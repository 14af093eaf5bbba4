#include "plattice/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "plattice/attractor.hpp"
#include "plattice/config.hpp"
#include "plattice/io.hpp"
#include "plattice/liouville.hpp"
#include "plattice/measures.hpp"

namespace plattice {

namespace {

namespace fs = std::filesystem;

struct RunContext {
    RunConfig cfg;
    fs::path out;
    NoisePath path;
    std::string cfg_digest;
    std::string path_digest;
    std::vector<std::string> outputs;

    SystemParams params(double alpha) const { return cfg.model.with_alpha(alpha); }

    void note(const fs::path& file) { outputs.push_back(file.filename().string()); }
};

RunContext make_context(const RunConfig& cfg, const std::string& out_override,
                        const std::string& reuse_noise) {
    RunContext ctx;
    ctx.cfg = cfg;
    ctx.out = out_override.empty() ? fs::path(cfg.output.dir) : fs::path(out_override);
    fs::create_directories(ctx.out);
    ctx.cfg_digest = cfg.digest();

    if (!reuse_noise.empty()) {
        ctx.path = load_noise(reuse_noise);
        if (ctx.path.dt != cfg.noise.dt || ctx.path.seed != cfg.noise.seed)
            throw ConfigError("noise: reused path does not match the config's seed/dt");
        if (!ctx.path.has_z()) ctx.path = ou_attach(std::move(ctx.path));
    } else {
        ctx.path = ou_attach(sample_wiener(cfg.noise.seed, cfg.noise.t_min, cfg.noise.t_max, cfg.noise.dt,
                                           cfg.noise.burn_in));
    }
    ctx.path_digest = noise_digest(ctx.path);
    if (!cfg.noise.expected_digest.empty() && cfg.noise.expected_digest != ctx.path_digest)
        throw ConfigError("noise.expected_digest: path digest mismatch (" + ctx.path_digest + ")");

    save_noise(ctx.path, ctx.out / "noise.bin");
    ctx.note(ctx.out / "noise.bin");
    return ctx;
}

void write_manifest(RunContext& ctx, const std::string& subcommand, nlohmann::ordered_json extra = {}) {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["config_digest"] = ctx.cfg_digest;
    j["noise_digest"] = ctx.path_digest;
    j["config"] = ctx.cfg.to_json();
    if (!extra.is_null() && !extra.empty()) j["details"] = extra;
    j["outputs"] = ctx.outputs;
    std::ofstream f(ctx.out / "manifest.json", std::ios::trunc);
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("manifest: write failed");
}

std::vector<double> alphas_with_base(const RunConfig& cfg) {
    std::vector<double> all = cfg.experiment.alpha_list;
    if (std::find(all.begin(), all.end(), cfg.experiment.alpha0) == all.end())
        all.insert(all.begin(), cfg.experiment.alpha0);
    return all;
}

void cmd_simulate(RunContext& ctx) {
    const auto& e = ctx.cfg.experiment;
    const SystemParams sp = ctx.params(e.alpha0);
    const int n = e.window_n;

    LatticeVec u_tau(n);
    for (std::int64_t i = -n; i <= n; ++i)
        u_tau.at(i) = e.init_amp / (1.0 + static_cast<double>(i) * static_cast<double>(i));

    const SampleView view = shifted_view(ctx.path, -e.tau);
    const std::int64_t k_tau = view.index_of(e.tau);
    LatticeVec v0 = scaled(u_tau, std::exp(-sp.alpha * view.z(k_tau)));
    const Trajectory traj = integrate(v0, e.tau, e.sim_t_end, view, sp, ctx.cfg.forcing);
    const EnergyDiagnostics en = energy_check(traj, sp, ctx.cfg.forcing);

    CsvWriter csv(ctx.out / "trajectory.csv");
    csv.row({"time", "u_0", "u_1", "u_2", "norm_u_l2", "norm_v_l2", "norm_v_lq", "energy_lhs", "energy_rhs",
             "energy_margin", "config_digest", "noise_digest"});
    for (std::size_t r = 0; r < traj.n_records(); ++r) {
        const LatticeVec& u = traj.u[r];
        const LatticeVec& v = traj.v[r];
        csv.row({fmt_g17(traj.time_at(r)), fmt_g17(u.get(0)), fmt_g17(u.get(1)), fmt_g17(u.get(2)),
                 fmt_g17(lp_norm(u, 2.0)), fmt_g17(lp_norm(v, 2.0)), fmt_g17(lp_norm(v, sp.q)),
                 fmt_g17(en.lhs[r]), fmt_g17(en.rhs[r]), fmt_g17(en.rhs[r] - en.lhs[r]), ctx.cfg_digest,
                 ctx.path_digest});
    }
    csv.close();
    ctx.note(ctx.out / "trajectory.csv");

    nlohmann::ordered_json extra;
    extra["energy_min_margin_rel"] = en.min_margin_rel;
    write_manifest(ctx, "simulate", extra);
}

void cmd_attractor(RunContext& ctx) {
    const auto& e = ctx.cfg.experiment;
    const std::vector<double> alphas = alphas_with_base(ctx.cfg);

    std::vector<AttractorCloud> clouds;
    clouds.reserve(alphas.size());
    std::size_t base_idx = 0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        clouds.push_back(pullback_cloud(alphas[i], e.tau, ctx.path, e.T, e.M, ctx.params(alphas[i]),
                                        ctx.cfg.forcing, e.window_n, Exec::parallel, e.L));
        if (alphas[i] == e.alpha0) base_idx = i;
        char name[64];
        std::snprintf(name, sizeof(name), "cloud_%02zu", i);
        save_cloud(clouds.back(), ctx.out / (std::string(name) + ".bin"), ctx.out / (std::string(name) + ".json"),
                   ctx.cfg.model.q);
        ctx.note(ctx.out / (std::string(name) + ".bin"));
        ctx.note(ctx.out / (std::string(name) + ".json"));
    }

    const auto rows = usc_distances(clouds, clouds[base_idx], ctx.cfg.model.q);
    CsvWriter csv(ctx.out / "usc_distances.csv");
    csv.row({"alpha", "dist_l2", "dist_lq", "dist_sum", "M", "T", "config_digest", "noise_digest"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == base_idx && ctx.cfg.experiment.alpha_list.size() + 1 == alphas.size()) continue;  // base row
        csv.row({fmt_g17(rows[i].alpha), fmt_g17(rows[i].dist_l2), fmt_g17(rows[i].dist_lq),
                 fmt_g17(rows[i].dist_sum), std::to_string(e.M), fmt_g17(e.T), ctx.cfg_digest,
                 ctx.path_digest});
    }
    csv.close();
    ctx.note(ctx.out / "usc_distances.csv");

    nlohmann::ordered_json extra;
    extra["resolution_base"] = cloud_resolution(clouds[base_idx].points);
    write_manifest(ctx, "attractor", extra);
}

void cmd_measures(RunContext& ctx) {
    const auto& e = ctx.cfg.experiment;
    const TestFunctionDict dict = TestFunctionDict::bumps(std::max(1, e.dict_size / 4), 4, e.window_n, 2.0);

    const auto rows = measure_sweep(ctx.cfg.experiment.alpha_list, e.alpha0, e.t_list, e.tau, ctx.path,
                                    e.measure_window, e.ds, ctx.cfg.model, ctx.cfg.forcing, e.window_n, dict);

    // persist the base-coefficient measure at the first anchor for inspection
    const SampleView base = shifted_view(ctx.path, -e.tau);
    const EnsembleMeasure mu0 =
        empirical_measure(e.alpha0, e.t_list.front(), e.t_list.front() - e.measure_window, base,
                          zero_anchor(e.window_n), e.ds, ctx.params(e.alpha0), ctx.cfg.forcing, e.window_n,
                          Exec::parallel, e.tau);
    save_measure(mu0, ctx.out / "measure_base.bin", ctx.out / "measure_base.json");
    ctx.note(ctx.out / "measure_base.bin");
    ctx.note(ctx.out / "measure_base.json");

    CsvWriter csv(ctx.out / "weak_convergence.csv");
    csv.row({"alpha", "t", "bl_distance", "window", "ds", "config_digest", "noise_digest"});
    for (const auto& r : rows)
        csv.row({fmt_g17(r.alpha), fmt_g17(r.t), fmt_g17(r.bl), fmt_g17(e.measure_window), fmt_g17(e.ds),
                 ctx.cfg_digest, ctx.path_digest});
    csv.close();
    ctx.note(ctx.out / "weak_convergence.csv");
    write_manifest(ctx, "measures");
}

void cmd_liouville(RunContext& ctx) {
    const auto& e = ctx.cfg.experiment;
    const CylTestFunction psi = CylTestFunction::standard(e.window_n, 2.0);
    const auto rows = termwise_sweep(ctx.cfg.experiment.alpha_list, e.alpha0, psi, e.s, e.t, e.tau, ctx.path,
                                     e.measure_window, e.ds, e.anchor_spacing, ctx.cfg.model, ctx.cfg.forcing,
                                     e.window_n);

    const TermwiseRow* base = nullptr;
    for (const auto& r : rows)
        if (r.alpha == e.alpha0) base = &r;

    CsvWriter csv(ctx.out / "termwise.csv");
    csv.row({"alpha", "mu_t", "mu_s", "drift", "stoch_ito", "stoch_strat", "correction", "d_mu_t", "d_mu_s",
             "d_drift", "d_stoch_ito", "d_stoch_strat", "d_correction", "config_digest", "noise_digest"});
    for (const auto& r : rows) {
        csv.row({fmt_g17(r.alpha), fmt_g17(r.mu_t), fmt_g17(r.mu_s), fmt_g17(r.drift), fmt_g17(r.stoch_ito),
                 fmt_g17(r.stoch_strat), fmt_g17(r.correction), fmt_g17(std::abs(r.mu_t - base->mu_t)),
                 fmt_g17(std::abs(r.mu_s - base->mu_s)), fmt_g17(std::abs(r.drift - base->drift)),
                 fmt_g17(std::abs(r.stoch_ito - base->stoch_ito)),
                 fmt_g17(std::abs(r.stoch_strat - base->stoch_strat)),
                 fmt_g17(std::abs(r.correction - base->correction)), ctx.cfg_digest, ctx.path_digest});
    }
    csv.close();
    ctx.note(ctx.out / "termwise.csv");

    // full balance report for each coefficient
    const SampleView base_view = shifted_view(ctx.path, -e.tau);
    std::vector<double> anchors;
    const auto n_cells = static_cast<std::size_t>(std::llround((e.t - e.s) / e.anchor_spacing));
    for (std::size_t i = 0; i <= n_cells; ++i)
        anchors.push_back(e.s + (e.t - e.s) * static_cast<double>(i) / static_cast<double>(n_cells));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const MeasureFamily fam =
            measure_family(rows[i].alpha, anchors, e.measure_window, e.ds, base_view, zero_anchor(e.window_n),
                           ctx.cfg.model, ctx.cfg.forcing, e.window_n, Exec::parallel, e.tau);
        LiouvilleReport rep = liouville_terms(fam, psi, e.s, e.t, e.tau, ctx.path, ctx.cfg.model, ctx.cfg.forcing);
        char name[64];
        std::snprintf(name, sizeof(name), "liouville_%02zu.json", i);
        std::ofstream f(ctx.out / name, std::ios::trunc);
        nlohmann::ordered_json j = nlohmann::ordered_json::parse(rep.to_json_string());
        j["config_digest"] = ctx.cfg_digest;
        j["noise_digest"] = ctx.path_digest;
        f << j.dump(2) << "\n";
        if (!f) throw std::runtime_error("liouville report: write failed");
        ctx.note(ctx.out / name);
    }
    write_manifest(ctx, "liouville");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"p-Laplacian lattice dynamics laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir, reuse_noise;
    int threads = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--threads", threads, "worker threads (0 = library default)");
        sub->add_option("--reuse-noise", reuse_noise, "load a persisted noise path instead of sampling");
    };
    CLI::App* c_sim = app.add_subcommand("simulate", "integrate one trajectory with energy diagnostics");
    CLI::App* c_att = app.add_subcommand("attractor", "pullback clouds and semi-distance table");
    CLI::App* c_mea = app.add_subcommand("measures", "empirical measures and weak-convergence table");
    CLI::App* c_lio = app.add_subcommand("liouville", "balance-law terms and termwise table");
    CLI::App* c_all = app.add_subcommand("sweep-all", "run every experiment into one directory");
    for (CLI::App* sub : {c_sim, c_att, c_mea, c_lio, c_all}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#endif
        const RunConfig cfg = load_config(config_path);
        RunContext ctx = make_context(cfg, out_dir, reuse_noise);
        if (c_sim->parsed()) cmd_simulate(ctx);
        if (c_att->parsed()) cmd_attractor(ctx);
        if (c_mea->parsed()) cmd_measures(ctx);
        if (c_lio->parsed()) cmd_liouville(ctx);
        if (c_all->parsed()) {
            cmd_simulate(ctx);
            cmd_attractor(ctx);
            cmd_measures(ctx);
            cmd_liouville(ctx);
            write_manifest(ctx, "sweep-all");
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const BlowupError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace plattice
