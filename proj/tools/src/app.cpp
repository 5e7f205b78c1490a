#include "ftsvd_cli/app.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "ftsvd/error.hpp"
#include "ftsvd/ingest.hpp"
#include "ftsvd/io.hpp"

namespace ftsvd::cli {

using io::json;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const std::invalid_argument*>(&e)) return exit_config;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
        dynamic_cast<const DataError*>(&e) || dynamic_cast<const json::exception*>(&e) ||
        dynamic_cast<const fs::filesystem_error*>(&e)) {
        return exit_io;
    }
    if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const DegenerateError*>(&e)) return exit_numeric;
    return exit_internal;
}

std::size_t worker_threads(std::size_t jobs) {
    std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FTSVD_THREADS"); env && *env) {
        const std::string s(env);
        std::size_t cap = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (ec != std::errc() || ptr != s.data() + s.size() || cap == 0) {
            throw ArgumentError("FTSVD_THREADS must be a positive integer, got '" + s + "'");
        }
        n = std::min(n, cap);
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

namespace {

// Run body(i) for i in [0, jobs) on worker threads; the first exception wins.
template <class Body>
void parallel_for(std::size_t jobs, Body body) {
    const std::size_t workers = worker_threads(jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = jobs;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::string rep_dir_name(std::size_t rep) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "rep_%03zu", rep);
    return buf;
}

void write_simulation(const fs::path& dir, const SimConfig& cfg) {
    const Simulation s = simulate(cfg);
    io::write_tensor_csv(dir / "tensor.csv", s.data.y);
    io::write_grid(dir / "grid.csv", s.data.grid);
    io::write_json(dir / "truth.json", io::to_json(s.truth, cfg));
}

bool is_truth_json(const fs::path& p) { return fs::is_regular_file(p); }

Tensor3 ensure_dims(Tensor3 t) {
    t.check_finite();
    return t;
}

ComponentErrors cp_errors(const Tensor3& y, const TimeGrid& grid, const GroundTruth& truth, const CpConfig& base,
                          std::uint64_t seed, std::size_t quad_m) {
    CpConfig cfg = base;
    cfg.rank = truth.components.size();
    cfg.seed = seed;
    const auto cp = cp_decompose(y, cfg);
    std::vector<ScoredComponent> est;
    for (const auto& c : cp) est.push_back({c.a, c.b, sample_on_quadrature(interpolate_min_hnorm(c.v, grid), quad_m)});
    const auto ref = scored(truth.components, quad_m);
    return match_and_score(est, ref).mean;
}

}  // namespace

void cmd_simulate(const SimulateOptions& opt) {
    opt.sim.validate();
    if (opt.reps == 0) {
        write_simulation(opt.out_dir, opt.sim);
        return;
    }
    parallel_for(opt.reps, [&](std::size_t i) {
        SimConfig cfg = opt.sim;
        cfg.seed = opt.seed_base + i;
        write_simulation(opt.out_dir / rep_dir_name(i + 1), cfg);
    });
}

Decomposition cmd_decompose(const DecomposeOptions& opt) {
    if (opt.plot_grid < 2) throw ArgumentError("--plot-grid must be >= 2");
    const Dataset data = io::read_dataset(opt.input, opt.grid);
    ensure_dims(data.y);
    Decomposition d = sequential_decompose(data.y, data.grid, opt.fit);
    io::write_decomposition(opt.out_dir, d, opt.plot_grid,
                            {{"input", opt.input.string()}, {"grid", opt.grid.string()}});
    return d;
}

RankSelection cmd_rank_select(const RankSelectOptions& opt) {
    if (opt.plot_grid < 2) throw ArgumentError("--plot-grid must be >= 2");
    const Dataset data = io::read_dataset(opt.input, opt.grid);
    ensure_dims(data.y);
    RankSelection sel = select_rank(data.y, data.grid, opt.rank_max, opt.fit, opt.p_h);

    fs::create_directories(opt.out_dir);
    {
        std::ofstream out(opt.out_dir / "bic.csv");
        if (!out) throw IoError("cannot write " + (opt.out_dir / "bic.csv").string());
        out << "r,bic\n";
        for (std::size_t r = 1; r <= sel.bic.size(); ++r) out << r << ',' << io::format_double(sel.bic[r - 1]) << '\n';
    }

    Decomposition chosen = sel.decomposition;
    chosen.components.resize(std::min(chosen.components.size(), sel.r_hat));
    chosen.trace.resize(std::min(chosen.trace.size(), sel.r_hat));
    chosen.residual_after.resize(std::min(chosen.residual_after.size(), sel.r_hat));
    if (!chosen.residual_after.empty()) chosen.residual_frob = chosen.residual_after.back();
    chosen.config.rank = sel.r_hat;
    chosen.bic = sel.bic[sel.r_hat - 1];
    json bic_curve = json::array();
    for (double b : sel.bic) bic_curve.push_back(std::isfinite(b) ? json(b) : json(nullptr));
    io::write_decomposition(opt.out_dir, chosen, opt.plot_grid,
                            {{"r_hat", sel.r_hat},
                             {"r_max", opt.rank_max},
                             {"perfect_fit", sel.perfect_fit},
                             {"p_h", sel.penalty.p_h},
                             {"p_h_empirical", sel.penalty.p_h_empirical},
                             {"bic_curve", bic_curve},
                             {"rss_curve", sel.rss},
                             {"input", opt.input.string()},
                             {"grid", opt.grid.string()}});
    return sel;
}

std::vector<ScoredComponent> load_scored(const fs::path& source, std::size_t quad_m) {
    if (is_truth_json(source)) {
        const GroundTruth truth = io::ground_truth_from_json(io::read_json(source));
        return scored(truth.components, quad_m);
    }
    if (!fs::is_directory(source)) throw IoError("no such file or directory: " + source.string());
    const Decomposition d = io::read_decomposition(source);
    std::vector<ScoredComponent> out;
    for (const auto& c : d.components) out.push_back(scored(c, quad_m));
    return out;
}

EvalReport cmd_eval(const EvalOptions& opt) {
    const auto est = load_scored(opt.estimated, opt.quad_m);
    const auto ref = load_scored(opt.truth, opt.quad_m);
    if (est.size() != ref.size()) {
        throw SchemaError("estimated has " + std::to_string(est.size()) + " components, truth has " +
                          std::to_string(ref.size()));
    }
    if (est.empty()) throw SchemaError("nothing to evaluate: no components");
    for (std::size_t l = 0; l < est.size(); ++l) {
        if (est[l].a.size() != ref[0].a.size() || est[l].b.size() != ref[0].b.size()) {
            throw SchemaError("singular vector lengths differ between estimate and truth");
        }
    }
    EvalReport report = match_and_score(est, ref);
    io::write_json(opt.out, io::to_json(report));
    return report;
}

Tensor3 cmd_ingest_counts(const IngestOptions& opt) {
    const Tensor3 counts = io::read_count_csv(opt.input);
    Tensor3 y = log_composition(counts, opt.pseudocount);
    io::write_tensor_csv(opt.out_dir / "tensor.csv", y);
    return y;
}

std::vector<TrajectoryBand> cmd_trajectories(const TrajectoryOptions& opt) {
    const Dataset data = io::read_dataset(opt.input, opt.grid);
    const Decomposition d = io::read_decomposition(opt.component);
    if (opt.component_index < 1 || opt.component_index > d.components.size()) {
        throw ArgumentError("--component-index out of range: decomposition has " + std::to_string(d.components.size()) +
                            " components");
    }
    const Vector& b = d.components[opt.component_index - 1].b;
    if (std::size_t(b.size()) != data.y.p2()) throw SchemaError("component b length does not match the tensor's p2");
    const Matrix traj = aggregate_trajectories(data.y, b);

    std::vector<std::string> labels;
    if (opt.labels.empty()) {
        labels.assign(data.y.p1(), "all");
    } else {
        std::ifstream in(opt.labels);
        if (!in) throw IoError("cannot open " + opt.labels.string() + " for reading");
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (!line.empty()) labels.push_back(line);
        }
        if (labels.size() != data.y.p1()) {
            throw SchemaError("labels file has " + std::to_string(labels.size()) + " entries, expected p1 = " +
                              std::to_string(data.y.p1()));
        }
    }
    const auto bands = trajectory_bands(traj, labels);

    fs::create_directories(opt.out_dir);
    std::ofstream out(opt.out_dir / "trajectories.csv");
    if (!out) throw IoError("cannot write " + (opt.out_dir / "trajectories.csv").string());
    out << "i,k,value\n";
    for (Eigen::Index i = 0; i < traj.rows(); ++i)
        for (Eigen::Index k = 0; k < traj.cols(); ++k) out << i + 1 << ',' << k + 1 << ',' << io::format_double(traj(i, k)) << '\n';
    io::write_bands_csv(opt.out_dir / "bands.csv", bands);
    return bands;
}

void cmd_sample(const SampleOptions& opt) {
    if (opt.plot_grid < 2) throw ArgumentError("--plot-grid must be >= 2");
    if (is_truth_json(opt.input)) {
        const GroundTruth truth = io::ground_truth_from_json(io::read_json(opt.input));
        for (std::size_t l = 0; l < truth.components.size(); ++l) {
            const auto& xi = truth.components[l].xi;
            io::write_function_sample(opt.out_dir / ("xi_" + std::to_string(l + 1) + ".csv"),
                                      [&xi](double t) { return xi(t); }, opt.plot_grid);
        }
        return;
    }
    if (!fs::is_directory(opt.input)) throw IoError("no such file or directory: " + opt.input.string());
    const Decomposition d = io::read_decomposition(opt.input);
    for (std::size_t l = 0; l < d.components.size(); ++l) {
        io::write_function_sample(opt.out_dir / ("xi_" + std::to_string(l + 1) + ".csv"), d.components[l].xi, opt.plot_grid);
    }
}

std::vector<SweepRow> cmd_sweep(const SweepOptions& opt) {
    if (opt.reps < 1) throw ArgumentError("--reps must be >= 1");
    opt.sim.validate();
    FitConfig fit = opt.fit;
    fit.rank = opt.sim.r;
    fit.validate(opt.sim.p1, opt.sim.p2);

    std::vector<SweepRow> rows(opt.reps);
    parallel_for(opt.reps, [&](std::size_t i) {
        SimConfig cfg = opt.sim;
        cfg.seed = opt.seed_base + i;
        const Simulation s = simulate(cfg);
        const Decomposition d = sequential_decompose(s.data.y, s.data.grid, fit);
        if (d.components.size() != s.truth.components.size()) {
            throw DegenerateError("seed " + std::to_string(cfg.seed) + ": " + d.truncation_reason);
        }
        std::vector<ScoredComponent> est;
        for (const auto& c : d.components) est.push_back(scored(c, fit.quad_m));
        SweepRow row;
        row.rep = i + 1;
        row.seed = cfg.seed;
        row.ftsvd = match_and_score(est, scored(s.truth.components, fit.quad_m)).mean;
        if (opt.with_cp) row.cp = cp_errors(s.data.y, s.data.grid, s.truth, opt.cp, cfg.seed, fit.quad_m);
        rows[i] = std::move(row);
    });

    fs::create_directories(opt.out_dir);
    std::ofstream out(opt.out_dir / "sweep.csv");
    if (!out) throw IoError("cannot write " + (opt.out_dir / "sweep.csv").string());
    out << "rep,seed,method,dist_a,dist_b,dist_xi\n";
    std::vector<ComponentErrors> f_errs, c_errs;
    for (const auto& r : rows) {
        out << r.rep << ',' << r.seed << ",ftsvd," << io::format_double(r.ftsvd.dist_a) << ','
            << io::format_double(r.ftsvd.dist_b) << ',' << io::format_double(r.ftsvd.dist_xi) << '\n';
        f_errs.push_back(r.ftsvd);
        if (r.cp) {
            out << r.rep << ',' << r.seed << ",cp," << io::format_double(r.cp->dist_a) << ','
                << io::format_double(r.cp->dist_b) << ',' << io::format_double(r.cp->dist_xi) << '\n';
            c_errs.push_back(*r.cp);
        }
    }
    std::vector<std::size_t> identity(rows.size());
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
    json summary{{"reps", opt.reps}, {"seed_base", opt.seed_base}, {"sim", io::to_json(opt.sim)}, {"fit", io::to_json(fit)}};
    auto agg = [](const EvalReport& r) {
        return json{{"mean", {{"dist_a", r.mean.dist_a}, {"dist_b", r.mean.dist_b}, {"dist_xi", r.mean.dist_xi}}},
                    {"sd", {{"dist_a", r.sd.dist_a}, {"dist_b", r.sd.dist_b}, {"dist_xi", r.sd.dist_xi}}}};
    };
    summary["ftsvd"] = agg(summarize(f_errs, identity));
    if (!c_errs.empty()) summary["cp"] = agg(summarize(c_errs, identity));
    io::write_json(opt.out_dir / "summary.json", summary);
    return rows;
}

namespace {

void add_fit_options(CLI::App& sub, FitConfig& fit) {
    sub.add_option("--iters", fit.iters, "Power iterations per component")->capture_default_str();
    sub.add_option("--c-lambda", fit.c_lambda, "Ridge parameter C_lambda")->capture_default_str();
    sub.add_option("--tol", fit.tol, "Early-stop threshold on successive sine distances")->capture_default_str();
    sub.add_option("--quad-m", fit.quad_m, "Midpoint quadrature size for L2 norms")->capture_default_str();
}

void add_sim_options(CLI::App& sub, SimConfig& sim) {
    sub.add_option("--p1", sim.p1)->capture_default_str();
    sub.add_option("--p2", sim.p2)->capture_default_str();
    sub.add_option("-n,--n", sim.n, "Time points per tensor")->capture_default_str();
    sub.add_option("--rank", sim.r, "True rank")->capture_default_str();
    sub.add_option("--lambda-min", sim.lambda_min)->capture_default_str();
    sub.add_option("--sigma", sim.sigma, "Remainder amplitude")->capture_default_str();
    sub.add_option("--tau", sim.tau, "Noise sd")->capture_default_str();
    sub.add_option("--n-basis", sim.n_basis, "Cosine basis size")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Functional tensor SVD: simulate, decompose, select rank, evaluate"};
    app.require_subcommand(1);

    std::string out_dir = ".";

    SimulateOptions sim_opt;
    auto* sim = app.add_subcommand("simulate", "Write a simulated tensor, grid and ground truth");
    add_sim_options(*sim, sim_opt.sim);
    sim->add_option("--seed", sim_opt.sim.seed)->capture_default_str();
    sim->add_option("--reps", sim_opt.reps, "Number of replications (rep_NNN subdirectories)");
    sim->add_option("--seed-base", sim_opt.seed_base, "Seed of the first replication")->capture_default_str();
    sim->add_option("--out-dir", out_dir)->capture_default_str();

    DecomposeOptions dec_opt;
    std::string dec_input, dec_grid;
    auto* dec = app.add_subcommand("decompose", "Fit a rank-r functional tensor SVD");
    dec->add_option("--input", dec_input, "Tensor CSV")->required();
    dec->add_option("--grid", dec_grid, "Grid file")->required();
    dec->add_option("--rank", dec_opt.fit.rank)->capture_default_str();
    add_fit_options(*dec, dec_opt.fit);
    dec->add_option("--plot-grid", dec_opt.plot_grid)->capture_default_str();
    dec->add_option("--out-dir", out_dir)->capture_default_str();

    RankSelectOptions rs_opt;
    std::string rs_input, rs_grid;
    double rs_p_h = -1.0;
    auto* rs = app.add_subcommand("rank-select", "Choose the rank by BIC");
    rs->add_option("--input", rs_input, "Tensor CSV")->required();
    rs->add_option("--grid", rs_grid, "Grid file")->required();
    rs->add_option("--rank-max", rs_opt.rank_max)->capture_default_str();
    rs->add_option("--p-h", rs_p_h, "Override the kernel effective dimension in the penalty");
    add_fit_options(*rs, rs_opt.fit);
    rs->add_option("--plot-grid", rs_opt.plot_grid)->capture_default_str();
    rs->add_option("--out-dir", out_dir)->capture_default_str();

    EvalOptions ev_opt;
    std::string ev_est, ev_truth, ev_out;
    auto* ev = app.add_subcommand("eval", "Score an estimate against ground truth");
    ev->add_option("--estimated", ev_est, "Decomposition directory or truth JSON")->required();
    ev->add_option("--truth", ev_truth, "Truth JSON or decomposition directory")->required();
    ev->add_option("--out", ev_out, "Report path (default <out-dir>/report.json)");
    ev->add_option("--out-dir", out_dir)->capture_default_str();

    IngestOptions in_opt;
    std::string in_input;
    auto* ing = app.add_subcommand("ingest-counts", "Counts to log-compositions");
    ing->add_option("--input", in_input, "Long count CSV `i,j,k,count`")->required();
    ing->add_option("--pseudocount", in_opt.pseudocount)->capture_default_str();
    ing->add_option("--out-dir", out_dir)->capture_default_str();

    TrajectoryOptions tr_opt;
    std::string tr_input, tr_grid, tr_comp, tr_labels;
    auto* tr = app.add_subcommand("trajectories", "Per-subject trajectories along a fitted b and group bands");
    tr->add_option("--input", tr_input, "Tensor CSV")->required();
    tr->add_option("--grid", tr_grid, "Grid file")->required();
    tr->add_option("--component", tr_comp, "Decomposition directory")->required();
    tr->add_option("--component-index", tr_opt.component_index)->capture_default_str();
    tr->add_option("--labels", tr_labels, "One group label per line, one line per subject");
    tr->add_option("--out-dir", out_dir)->capture_default_str();

    SampleOptions sa_opt;
    std::string sa_input;
    auto* sa = app.add_subcommand("sample", "Sample singular functions on a uniform plot grid");
    sa->add_option("--input", sa_input, "Decomposition directory or truth JSON")->required();
    sa->add_option("--plot-grid", sa_opt.plot_grid)->capture_default_str();
    sa->add_option("--out-dir", out_dir)->capture_default_str();

    SweepOptions sw_opt;
    auto* sw = app.add_subcommand("sweep", "Replicated simulate + fit + score over consecutive seeds");
    add_sim_options(*sw, sw_opt.sim);
    add_fit_options(*sw, sw_opt.fit);
    sw->add_option("--reps", sw_opt.reps)->capture_default_str();
    sw->add_option("--seed-base", sw_opt.seed_base)->capture_default_str();
    sw->add_flag("--cp", sw_opt.with_cp, "Also score the tabular CP baseline");
    sw->add_option("--cp-restarts", sw_opt.cp.n_init)->capture_default_str();
    sw->add_option("--out-dir", out_dir)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_config;
    }

    try {
        if (sim->parsed()) {
            sim_opt.out_dir = out_dir;
            cmd_simulate(sim_opt);
        } else if (dec->parsed()) {
            dec_opt.input = dec_input;
            dec_opt.grid = dec_grid;
            dec_opt.out_dir = out_dir;
            const auto d = cmd_decompose(dec_opt);
            out << "components: " << d.components.size() << "  residual_frob: " << io::format_double(d.residual_frob) << '\n';
            if (d.truncated) err << "warning: decomposition truncated: " << d.truncation_reason << '\n';
        } else if (rs->parsed()) {
            rs_opt.input = rs_input;
            rs_opt.grid = rs_grid;
            rs_opt.out_dir = out_dir;
            if (rs->count("--p-h")) rs_opt.p_h = rs_p_h;
            const auto sel = cmd_rank_select(rs_opt);
            out << "r_hat: " << sel.r_hat << (sel.perfect_fit ? "  (perfect fit)" : "") << '\n';
        } else if (ev->parsed()) {
            ev_opt.estimated = ev_est;
            ev_opt.truth = ev_truth;
            ev_opt.out = ev_out.empty() ? fs::path(out_dir) / "report.json" : fs::path(ev_out);
            const auto rep = cmd_eval(ev_opt);
            out << "mean dist_a " << rep.mean.dist_a << "  dist_b " << rep.mean.dist_b << "  dist_xi " << rep.mean.dist_xi << '\n';
        } else if (ing->parsed()) {
            in_opt.input = in_input;
            in_opt.out_dir = out_dir;
            cmd_ingest_counts(in_opt);
        } else if (tr->parsed()) {
            tr_opt.input = tr_input;
            tr_opt.grid = tr_grid;
            tr_opt.component = tr_comp;
            tr_opt.labels = tr_labels;
            tr_opt.out_dir = out_dir;
            cmd_trajectories(tr_opt);
        } else if (sa->parsed()) {
            sa_opt.input = sa_input;
            sa_opt.out_dir = out_dir;
            cmd_sample(sa_opt);
        } else if (sw->parsed()) {
            sw_opt.out_dir = out_dir;
            const auto rows = cmd_sweep(sw_opt);
            out << "reps: " << rows.size() << "  summary: " << (fs::path(out_dir) / "summary.json").string() << '\n';
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return exit_ok;
}

}  // namespace ftsvd::cli
