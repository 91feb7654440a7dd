#include "risknet/cli.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "risknet/analytics.hpp"
#include "risknet/errors.hpp"
#include "risknet/matrix_io.hpp"
#include "risknet/order.hpp"
#include "risknet/scaling.hpp"

namespace risknet::cli {

namespace {

using nlohmann::json;
using io::format_double;
namespace fs = std::filesystem;

struct GlobalFlags {
    std::uint64_t seed = 0;
    std::string out;
    unsigned threads = 0;
    std::string config;
};

struct GraphFlags {
    std::string kind;
    std::size_t n = 0;
    double p = 0.0;
    std::size_t m = 1;
    std::size_t d = 0;
    std::size_t k = 2;
    double beta = 0.0;

    void add_to(CLI::App& app) {
        app.add_option("--kind", kind, "complete|ring|star|regular|er|ba|ws");
        app.add_option("--n", n, "Number of nodes");
        app.add_option("--p", p, "Erdos-Renyi edge probability");
        app.add_option("--m", m, "Barabasi-Albert attachments per node");
        app.add_option("--d", d, "Regular degree");
        app.add_option("--k", k, "Watts-Strogatz lattice degree (even)");
        app.add_option("--beta", beta, "Watts-Strogatz rewiring probability");
    }

    GraphSpec spec() const {
        if (kind.empty()) throw InvalidSpec("--kind is required");
        GraphSpec s;
        s.kind = parse_graph_kind(kind);
        s.n = n;
        s.p = p;
        s.m = m;
        s.d = d;
        s.k = k;
        s.beta = beta;
        validate(s);
        return s;
    }
};

struct LossFlags {
    std::string family = "exponential";
    double rate = 1.0;
    double mean = 0.0;
    double sigma2 = 1.0;
    double rho = 0.0;

    void add_to(CLI::App& app) {
        app.add_option("--loss", family, "exponential|gaussian|equicorr");
        app.add_option("--rate", rate, "Exponential rate");
        app.add_option("--mean", mean, "Gaussian mean");
        app.add_option("--sigma2", sigma2, "Gaussian variance");
        app.add_option("--rho", rho, "Equicorrelation");
    }

    LossModel model(std::size_t n) const {
        LossModel m;
        m.family = parse_loss_family(family);
        m.n = n;
        m.rate = rate;
        m.mean = mean;
        m.sigma2 = sigma2;
        m.rho = rho;
        validate(m);
        return m;
    }
};

void write_output(const std::string& path, std::ostream& fallback,
                  const std::function<void(std::ostream&)>& body) {
    if (path.empty()) {
        body(fallback);
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::ios_base::failure("cannot open " + path + " for writing");
    body(f);
    if (!f) throw std::ios_base::failure("write failed: " + path);
}

void write_text_file(const fs::path& path, const std::string& text) {
    write_output(path.string(), std::cout, [&](std::ostream& o) { o << text; });
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    for (const auto& f : io::split_csv_line(text))
        if (!f.empty()) grid.push_back(io::parse_double(f));
    return grid;
}

std::vector<double> uniform_grid(std::size_t points) {
    if (points < 2) throw InvalidArgument("grid needs at least two points");
    std::vector<double> g(points);
    for (std::size_t k = 0; k < points; ++k)
        g[k] = static_cast<double>(k) / static_cast<double>(points - 1);
    return g;
}

json spec_json(const GraphSpec& s) {
    json j{{"kind", to_string(s.kind)}, {"n", s.n}};
    switch (s.kind) {
        case GraphKind::erdos_renyi: j["p"] = s.p; break;
        case GraphKind::barabasi_albert: j["m"] = s.m; break;
        case GraphKind::regular: j["d"] = s.d; break;
        case GraphKind::watts_strogatz: j["k"] = s.k; j["beta"] = s.beta; break;
        default: break;
    }
    return j;
}

json loss_json(const LossModel& m) {
    json j{{"family", to_string(m.family)}, {"n", m.n}};
    if (m.family == LossFamily::exponential) {
        j["rate"] = m.rate;
    } else {
        j["mean"] = m.mean;
        j["sigma2"] = m.sigma2;
        if (m.family == LossFamily::equicorrelated_gaussian) j["rho"] = m.rho;
    }
    return j;
}

GraphSpec spec_from_json(const json& j) {
    GraphSpec s;
    s.kind = parse_graph_kind(j.at("kind").get<std::string>());
    s.n = j.at("n").get<std::size_t>();
    s.p = j.value("p", 0.0);
    s.m = j.value("m", std::size_t{1});
    s.d = j.value("d", std::size_t{0});
    s.k = j.value("k", std::size_t{2});
    s.beta = j.value("beta", 0.0);
    validate(s);
    return s;
}

// Loads a matrix from --matrix or builds one from graph flags and a rule.
struct MatrixSource {
    SharingMatrix matrix;
    std::optional<Graph> graph;
};

MatrixSource load_or_build(const std::string& matrix_path, const GraphFlags& gf, const std::string& rule,
                           std::uint64_t seed) {
    if (!matrix_path.empty()) return {SharingMatrix(io::read_matrix_file(matrix_path)), std::nullopt};
    Graph g = generate(gf.spec(), derive_seed(seed, "graph", 0));
    SharingMatrix m = build_matrix(g, parse_matrix_rule(rule));
    return {std::move(m), std::move(g)};
}

void timing_line(std::ostream& err, const char* what, std::chrono::steady_clock::time_point start) {
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << what << " finished in " << std::fixed << std::setprecision(1) << ms << " ms\n";
    err << line.str();
}

// ---------------------------------------------------------------------------

int cmd_gen(const GlobalFlags& g, const GraphFlags& gf, std::ostream& out) {
    const Graph graph = generate(gf.spec(), derive_seed(g.seed, "graph", 0));
    write_output(g.out, out, [&](std::ostream& o) {
        o << "i,j\n";
        for (auto [i, j] : graph.edges()) o << i << ',' << j << '\n';
    });
    return kOk;
}

int cmd_scale(const GlobalFlags& g, const std::string& in, double tol, long max_iter,
              const std::string& diag, std::ostream& out) {
    SharingMatrix a(io::read_matrix_file(in));
    SinkhornOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    const SinkhornResult r = sinkhorn(a, opt);
    write_output(g.out, out, [&](std::ostream& o) { io::write_matrix(o, r.b.dense()); });
    if (!diag.empty()) {
        write_output(diag, out, [&](std::ostream& o) {
            o << "index,d1,d2\n";
            for (std::size_t i = 0; i < r.d1.size(); ++i)
                o << i << ',' << format_double(r.d1[i]) << ',' << format_double(r.d2[i]) << '\n';
        });
    }
    return kOk;
}

int cmd_bvn(const GlobalFlags& g, const std::string& in, double tol, std::ostream& out) {
    SharingMatrix d(io::read_matrix_file(in));
    const BvnDecomposition dec = bvn_decompose(d, tol);
    json terms = json::array();
    for (const auto& t : dec.terms) terms.push_back({{"weight", t.weight}, {"perm", t.perm}});
    const json doc{{"terms", terms}, {"residual", dec.residual}};
    write_output(g.out, out, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
    return kOk;
}

int cmd_analyze(const GlobalFlags& g, const std::string& matrix_path, double sigma2,
                const std::optional<double>& rho, const std::string& weights_path, std::ostream& out) {
    if (matrix_path.empty()) throw InvalidArgument("--matrix is required");
    const SharingMatrix p(io::read_matrix_file(matrix_path));
    if (!(sigma2 > 0.0)) throw InvalidArgument("--sigma2 must be positive");
    const Vector var = rho ? equicorr_variance(p, sigma2, *rho) : per_agent_variance_iid(p, sigma2);
    const Vector incentive = incentive_derivatives(p, sigma2);
    write_output(g.out, out, [&](std::ostream& o) {
        o << "metric,agent,value\n";
        for (std::size_t i = 0; i < p.n(); ++i) o << "variance," << i << ',' << format_double(var[i]) << '\n';
        for (std::size_t i = 0; i < p.n(); ++i)
            o << "incentive_derivative," << i << ',' << format_double(incentive[i]) << '\n';
        o << "lambda_star_trace,," << format_double(lambda_star_trace(p)) << '\n';
        try {
            o << "lambda_star_spectral,," << format_double(lambda_star_spectral(p)) << '\n';
        } catch (const NotDoublyStochastic&) {
            o << "lambda_star_spectral_formal,," << format_double(lambda_star_spectral_formal(p)) << '\n';
        } catch (const NotSymmetric&) {
        }
        if (!weights_path.empty()) {
            std::vector<double> w;
            for (const auto& row : io::read_numeric_rows(weights_path)) w.push_back(row.at(0));
            o << "lambda_star_weighted,," << format_double(lambda_star_weighted(p, w)) << '\n';
        }
    });
    return kOk;
}

void write_sim_csv(std::ostream& o, const SimReport& r, const std::optional<Graph>& graph) {
    o << "index,degree,mean,var,cv\n";
    for (std::size_t i = 0; i < r.per_node_mean.size(); ++i) {
        o << i << ',';
        if (graph) o << graph->degree(i);
        o << ',' << format_double(r.per_node_mean[i]) << ',' << format_double(r.per_node_var[i]) << ','
          << format_double(r.per_node_cv[i]) << '\n';
    }
}

struct SimulateArgs {
    std::string matrix;
    std::string rule = "equal_neighbor";
    std::size_t B = 2000;
    std::size_t R = 1;
};

int cmd_simulate(GlobalFlags g, const GraphFlags& gf, const LossFlags& lf, SimulateArgs a,
                 std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    std::optional<ExperimentConfig> cfg;
    GraphSpec spec;
    LossModel model;
    if (!g.config.empty()) {
        cfg = load_experiment_config(g.config);
        spec = cfg->graph;
        a.rule = to_string(cfg->rule);
        a.B = cfg->B;
        a.R = cfg->R;
        g.seed = cfg->seed;
        model = cfg->loss;
        if (g.out.empty()) g.out = (cfg->output_dir / "simulate.csv").string();
    }
    json meta{{"seed", g.seed}, {"B", a.B}, {"rule", a.rule}};

    if (a.R >= 2 && a.matrix.empty()) {
        if (!cfg) spec = gf.spec();
        if (!cfg) model = lf.model(spec.n);
        const TwoLayerReport rep =
            simulate_two_layer(spec, parse_matrix_rule(a.rule), model, a.R, a.B, g.seed, g.threads);
        write_output(g.out, out, [&](std::ostream& o) {
            o << "degree,count,mean_var,benchmark\n";
            for (const auto& [d, bin] : rep.degree_bins)
                o << d << ',' << bin.count << ',' << format_double(bin.mean_var) << ','
                  << format_double(model.variance() / static_cast<double>(d + 1)) << '\n';
        });
        meta["R"] = a.R;
        meta["spec"] = spec_json(spec);
        meta["loss"] = loss_json(model);
        meta["within_graph"] = rep.within_graph;
        meta["between_graph"] = rep.between_graph;
        meta["total"] = rep.total;
        meta["spread_q90_q10"] = rep.spread_q90_q10;
        meta["elapsed_ms"] = rep.elapsed_ms;
    } else {
        MatrixSource src = [&] {
            if (cfg) {
                Graph graph = generate(spec, derive_seed(g.seed, "graph", 0));
                SharingMatrix m = build_matrix(graph, cfg->rule);
                return MatrixSource{std::move(m), std::move(graph)};
            }
            return load_or_build(a.matrix, gf, a.rule, g.seed);
        }();
        if (!cfg) model = lf.model(src.matrix.n());
        const SimReport r = simulate_fixed(src.matrix, model, a.B, g.seed, g.threads);
        write_output(g.out, out, [&](std::ostream& o) { write_sim_csv(o, r, src.graph); });
        meta["R"] = 1;
        if (src.graph) meta["spec"] = cfg ? spec_json(spec) : spec_json(gf.spec());
        else meta["matrix"] = a.matrix;
        meta["loss"] = loss_json(model);
        meta["trace_var"] = r.trace_var;
        meta["elapsed_ms"] = r.elapsed_ms;
    }
    if (!g.out.empty()) write_text_file(g.out + ".json", meta.dump(2) + "\n");
    timing_line(err, "simulate", start);
    return kOk;
}

struct SweepArgs {
    std::string kind = "alpha";
    std::string grid;
    std::size_t points = 0;
    std::string matrix;
    std::string rule = "equal_neighbor";
    bool averaging = false;
    std::size_t B = 1500;
};

int cmd_sweep(GlobalFlags g, const GraphFlags& gf, const LossFlags& lf, SweepArgs a, std::ostream& out,
              std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    std::optional<ExperimentConfig> cfg;
    std::vector<double> grid;
    if (!g.config.empty()) {
        cfg = load_experiment_config(g.config);
        if (!cfg->sweep) throw InvalidArgument("config has no sweep section");
        a.kind = cfg->sweep->kind == SweepKind::alpha ? "alpha" : "lambda";
        grid = cfg->sweep->grid;
        a.B = cfg->B;
        g.seed = cfg->seed;
        if (g.out.empty()) g.out = (cfg->output_dir / "sweep.csv").string();
    } else {
        grid = a.grid.empty() ? uniform_grid(a.points ? a.points : (a.kind == "alpha" ? 13 : 21))
                              : parse_grid(a.grid);
    }
    if (a.kind != "alpha" && a.kind != "lambda") throw InvalidArgument("--sweep must be alpha or lambda");

    SharingMatrix m = [&] {
        if (cfg) return build_matrix(generate(cfg->graph, derive_seed(g.seed, "graph", 0)), cfg->rule);
        if (a.averaging) return averaging_operator(gf.n);
        return load_or_build(a.matrix, gf, a.rule, g.seed).matrix;
    }();
    const LossModel model = cfg ? cfg->loss : lf.model(m.n());
    const auto curve = a.kind == "alpha" ? post_mix_sweep(m, grid, model, a.B, g.seed, g.threads)
                                         : lambda_sweep(m, grid, model, a.B, g.seed, g.threads);
    write_output(g.out, out, [&](std::ostream& o) {
        o << a.kind << ",trace_var" << (a.kind == "lambda" ? ",closed_form" : "") << '\n';
        for (const auto& pt : curve) {
            o << format_double(pt.param) << ',' << format_double(pt.trace_var);
            if (a.kind == "lambda") o << ',' << format_double(pt.closed_form);
            o << '\n';
        }
    });
    timing_line(err, "sweep", start);
    return kOk;
}

int cmd_cx(const GlobalFlags& g, const std::string& small_path, const std::string& big_path,
           const std::string& thresholds_text, std::ostream& out) {
    if (small_path.empty() || big_path.empty()) throw InvalidArgument("--small and --big are required");
    const auto small_rows = io::read_numeric_rows(small_path);
    const auto big_rows = io::read_numeric_rows(big_path);
    if (small_rows.empty() || big_rows.empty()) throw EmptyInput("empty distribution file");
    auto all_width = [](const auto& rows, std::size_t w) {
        return std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return r.size() == w; });
    };
    CxReport rep;
    std::string mode;
    if (all_width(small_rows, 2) && all_width(big_rows, 2)) {
        auto to_dist = [](const auto& rows) {
            std::vector<Atom> atoms;
            for (const auto& r : rows) atoms.push_back({r[0], r[1]});
            return DiscreteDist(std::move(atoms));
        };
        rep = cx_dominates(to_dist(small_rows), to_dist(big_rows));
        mode = "exact";
    } else if (all_width(small_rows, 1) && all_width(big_rows, 1)) {
        std::vector<double> s, b;
        for (const auto& r : small_rows) s.push_back(r[0]);
        for (const auto& r : big_rows) b.push_back(r[0]);
        std::vector<double> thresholds;
        if (!thresholds_text.empty()) {
            thresholds = parse_grid(thresholds_text);
        } else {
            std::vector<double> pooled = s;
            pooled.insert(pooled.end(), b.begin(), b.end());
            for (int q = 1; q <= 9; ++q) thresholds.push_back(quantile(pooled, q / 10.0));
        }
        rep = empirical_cx_check(s, b, thresholds);
        mode = "empirical";
    } else {
        throw InvalidArgument("files must both hold 'value,prob' rows or single-column samples");
    }
    write_output(g.out, out, [&](std::ostream& o) {
        o << "mode,equal_means,dominates,worst_threshold,worst_gap\n"
          << mode << ',' << (rep.equal_means ? "true" : "false") << ',' << (rep.dominates ? "true" : "false")
          << ',' << format_double(rep.worst_threshold) << ',' << format_double(rep.worst_gap) << '\n';
    });
    return kOk;
}

int cmd_reproduce(const GlobalFlags& g, const std::string& figure, const std::string& scale,
                  std::ostream& out, std::ostream& err) {
    Scale s;
    if (scale == "desk") s = Scale::desk;
    else if (scale == "paper") s = Scale::paper;
    else throw InvalidArgument("--scale must be desk or paper");
    const fs::path dir = g.out.empty() ? fs::path("reproduce_" + figure) : fs::path(g.out);
    const ReproduceResult r = reproduce_figure(figure, s, g.seed, dir, g.threads);
    for (const auto& f : r.files) out << f.string() << '\n';
    std::ostringstream line;
    line << "reproduce " << figure << " finished in " << std::fixed << std::setprecision(1) << r.elapsed_ms
         << " ms\n";
    err << line.str();
    return kOk;
}

int exit_code_for(const Error& e) {
    return e.category() == ErrorCategory::numerical ? kNumerical : kValidation;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        ExperimentConfig c;
        c.graph = spec_from_json(j.at("graph"));
        c.rule = parse_matrix_rule(j.value("rule", std::string("equal_neighbor")));
        const json lj = j.value("loss", json{{"family", "exponential"}});
        c.loss.family = parse_loss_family(lj.value("family", std::string("exponential")));
        c.loss.n = c.graph.n;
        c.loss.rate = lj.value("rate", 1.0);
        c.loss.mean = lj.value("mean", 0.0);
        c.loss.sigma2 = lj.value("sigma2", 1.0);
        c.loss.rho = lj.value("rho", 0.0);
        validate(c.loss);
        c.B = j.value("B", std::size_t{2000});
        c.R = j.value("R", std::size_t{2});
        if (c.B < 2 || c.R < 2) throw InvalidArgument("B and R must be at least 2");
        c.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("sweep")) {
            const json& sj = j.at("sweep");
            SweepConfig sw;
            const auto kind = sj.at("kind").get<std::string>();
            if (kind == "alpha") sw.kind = SweepKind::alpha;
            else if (kind == "lambda") sw.kind = SweepKind::lambda;
            else throw InvalidArgument("sweep kind must be alpha or lambda");
            sw.grid = sj.at("grid").get<std::vector<double>>();
            if (sw.grid.empty()) throw InvalidArgument("sweep grid is empty");
            for (std::size_t k = 0; k < sw.grid.size(); ++k) {
                if (!(sw.grid[k] >= 0.0 && sw.grid[k] <= 1.0))
                    throw InvalidArgument("sweep grid values must lie in [0,1]");
                if (k > 0 && sw.grid[k] < sw.grid[k - 1]) throw InvalidArgument("sweep grid must be sorted");
            }
            c.sweep = std::move(sw);
        }
        c.output_dir = j.value("output_dir", std::string("."));
        std::error_code ec;
        fs::create_directories(c.output_dir, ec);
        const fs::path probe = c.output_dir / ".risknet_write_probe";
        {
            std::ofstream f(probe);
            if (!f) throw std::ios_base::failure("output_dir is not writable: " + c.output_dir.string());
        }
        fs::remove(probe, ec);
        return c;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bad config field: ") + e.what());
    }
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"risknet: linear risk sharing on networks", "risknet"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalFlags g;
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--out", g.out, "Output path (file or directory)");
    app.add_option("--threads", g.threads, "Worker threads, 0 = auto; never changes results");
    app.add_option("--config", g.config, "Experiment config JSON");

    std::function<int()> action;

    GraphFlags gen_flags;
    auto* gen = app.add_subcommand("gen", "Generate a graph as an edge-list CSV");
    gen_flags.add_to(*gen);
    gen->callback([&] { action = [&] { return cmd_gen(g, gen_flags, out); }; });

    std::string scale_in, scale_diag;
    double scale_tol = 1e-10;
    long scale_iter = 100000;
    auto* scale = app.add_subcommand("scale", "Sinkhorn-Knopp scaling to doubly stochastic form");
    scale->add_option("--in", scale_in, "Input matrix CSV")->required();
    scale->add_option("--tol", scale_tol, "Row/column residual tolerance");
    scale->add_option("--max-iter", scale_iter, "Iteration cap");
    scale->add_option("--diag", scale_diag, "Write d1,d2 CSV here");
    scale->callback([&] { action = [&] { return cmd_scale(g, scale_in, scale_tol, scale_iter, scale_diag, out); }; });

    std::string bvn_in;
    double bvn_tol = 1e-9;
    auto* bvn = app.add_subcommand("bvn", "Birkhoff-von Neumann decomposition to JSON");
    bvn->add_option("--in", bvn_in, "Doubly stochastic matrix CSV")->required();
    bvn->add_option("--tol", bvn_tol, "Tolerance");
    bvn->callback([&] { action = [&] { return cmd_bvn(g, bvn_in, bvn_tol, out); }; });

    std::string an_matrix, an_weights;
    double an_sigma2 = 1.0;
    std::optional<double> an_rho;
    auto* analyze = app.add_subcommand("analyze", "Closed-form variances and optimal mixing");
    analyze->add_option("--matrix", an_matrix, "Sharing matrix CSV")->required();
    analyze->add_option("--sigma2", an_sigma2, "Loss variance");
    analyze->add_option("--rho", an_rho, "Equicorrelation");
    analyze->add_option("--weights", an_weights, "Agent weights, one per line");
    analyze->callback([&] {
        action = [&] { return cmd_analyze(g, an_matrix, an_sigma2, an_rho, an_weights, out); };
    });

    GraphFlags sim_graph;
    LossFlags sim_loss;
    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo variance estimation");
    sim_graph.add_to(*simulate);
    sim_loss.add_to(*simulate);
    simulate->add_option("--matrix", sim_args.matrix, "Sharing matrix CSV instead of a graph");
    simulate->add_option("--rule", sim_args.rule, "equal_neighbor|random_walk|lazy_random_walk");
    simulate->add_option("--B", sim_args.B, "Loss draws per matrix");
    simulate->add_option("--R", sim_args.R, "Random graphs (>= 2 runs the two-layer experiment)");
    simulate->callback([&] {
        action = [&] { return cmd_simulate(g, sim_graph, sim_loss, sim_args, out, err); };
    });

    GraphFlags sw_graph;
    LossFlags sw_loss;
    SweepArgs sw_args;
    auto* sweep = app.add_subcommand("sweep", "Post-mixing alpha or lambda-mix sweep");
    sw_graph.add_to(*sweep);
    sw_loss.add_to(*sweep);
    sweep->add_option("--sweep", sw_args.kind, "alpha|lambda");
    sweep->add_option("--grid", sw_args.grid, "Comma-separated grid in [0,1]");
    sweep->add_option("--points", sw_args.points, "Uniform grid size");
    sweep->add_option("--matrix", sw_args.matrix, "Sharing matrix CSV instead of a graph");
    sweep->add_option("--rule", sw_args.rule, "Matrix rule for generated graphs");
    sweep->add_flag("--averaging", sw_args.averaging, "Use J/n on --n agents");
    sweep->add_option("--B", sw_args.B, "Loss draws");
    sweep->callback([&] { action = [&] { return cmd_sweep(g, sw_graph, sw_loss, sw_args, out, err); }; });

    std::string cx_small, cx_big, cx_thresholds;
    auto* cx = app.add_subcommand("cx", "Convex-order check between two laws or samples");
    cx->add_option("--small", cx_small, "value,prob rows or one sample per line")->required();
    cx->add_option("--big", cx_big, "value,prob rows or one sample per line")->required();
    cx->add_option("--thresholds", cx_thresholds, "Stop-loss thresholds for sample mode");
    cx->callback([&] { action = [&] { return cmd_cx(g, cx_small, cx_big, cx_thresholds, out); }; });

    std::string rep_figure, rep_scale = "desk";
    auto* reproduce = app.add_subcommand("reproduce", "Regenerate figure data as CSV");
    reproduce->add_option("--figure", rep_figure, "fig1..fig6")->required();
    reproduce->add_option("--scale", rep_scale, "desk|paper");
    reproduce->callback([&] { action = [&] { return cmd_reproduce(g, rep_figure, rep_scale, out, err); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << '\n';
        return kValidation;
    }

    try {
        return action ? action() : kValidation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::ios_base::failure& e) {
        err << "error: IoError: " << e.what() << '\n';
        return kIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: IoError: " << e.what() << '\n';
        return kIo;
    } catch (const json::exception& e) {
        err << "error: InvalidArgument: " << e.what() << '\n';
        return kValidation;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace risknet::cli
