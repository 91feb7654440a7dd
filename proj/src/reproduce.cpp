#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "risknet/cli.hpp"
#include "risknet/errors.hpp"
#include "risknet/matrix_io.hpp"
#include "risknet/scaling.hpp"

namespace risknet::cli {

namespace {

using nlohmann::json;
using io::format_double;
namespace fs = std::filesystem;

struct Panel {
    std::string name;
    std::ostringstream csv;
};

// Keeps the expected mean degree when n shrinks.
double rescale_p(double p, std::size_t n_paper, std::size_t n) {
    return std::min(1.0, p * static_cast<double>(n_paper - 1) / static_cast<double>(n - 1));
}

struct Sizes {
    Scale scale;
    std::size_t nodes(std::size_t n) const { return scale == Scale::desk ? desk_nodes(n) : n; }
    std::size_t draws(std::size_t b) const { return scale == Scale::desk ? desk_draws(b) : b; }
};

Graph make_graph(const GraphSpec& spec, std::uint64_t seed, std::string_view tag) {
    return generate(spec, derive_seed(seed, tag, 0));
}

json fig1(const Sizes& sz, std::uint64_t seed, unsigned threads, std::vector<Panel>& panels) {
    const std::size_t n = sz.nodes(50);
    const std::size_t B = sz.draws(2000);
    const double p = rescale_p(0.05, 50, n);
    const std::vector<std::pair<std::string, GraphSpec>> topologies = {
        {"complete", GraphSpec::complete(n)},
        {"ring", GraphSpec::ring(n)},
        {"star", GraphSpec::star(n)},
        {"regular4", GraphSpec::regular(n, 4)},
        {"erdos_renyi", GraphSpec::erdos_renyi(n, p)},
        {"barabasi_albert", GraphSpec::barabasi_albert(n, 2)},
    };
    Panel nodes{"fig1_nodes.csv", {}};
    Panel edges{"fig1_edges.csv", {}};
    nodes.csv << "topology,node,degree,mean,variance,cv\n";
    edges.csv << "topology,i,j\n";
    for (const auto& [name, spec] : topologies) {
        const Graph g = make_graph(spec, seed, "fig1/" + name);
        const SimReport r = simulate_fixed(equal_neighbor_matrix(g), LossModel::exponential(n), B,
                                           derive_seed(seed, "fig1/losses/" + name, 0), threads);
        for (std::size_t i = 0; i < n; ++i)
            nodes.csv << name << ',' << i << ',' << g.degree(i) << ',' << format_double(r.per_node_mean[i]) << ','
                      << format_double(r.per_node_var[i]) << ',' << format_double(r.per_node_cv[i]) << '\n';
        for (auto [i, j] : g.edges()) edges.csv << name << ',' << i << ',' << j << '\n';
    }
    panels.push_back(std::move(nodes));
    panels.push_back(std::move(edges));
    return {{"n", n}, {"B", B}, {"er_p", p}, {"ba_m", 2}, {"regular_d", 4}, {"rule", "equal_neighbor"},
            {"loss", "exponential(1)"}};
}

json fig2(const Sizes& sz, std::uint64_t seed, unsigned threads, std::vector<Panel>& panels) {
    const std::size_t n = sz.nodes(1000);
    const std::size_t B = sz.draws(2000);
    const double p = rescale_p(0.02, 1000, n);
    Panel panel{"fig2_degree_variance.csv", {}};
    panel.csv << "model,node,degree,variance,benchmark\n";
    for (const auto& [name, spec] : {std::pair{std::string("erdos_renyi"), GraphSpec::erdos_renyi(n, p)},
                                     std::pair{std::string("barabasi_albert"), GraphSpec::barabasi_albert(n, 10)}}) {
        const Graph g = make_graph(spec, seed, "fig2/" + name);
        const SimReport r = simulate_fixed(equal_neighbor_matrix(g), LossModel::exponential(n), B,
                                           derive_seed(seed, "fig2/losses/" + name, 0), threads);
        for (std::size_t i = 0; i < n; ++i)
            panel.csv << name << ',' << i << ',' << g.degree(i) << ',' << format_double(r.per_node_var[i]) << ','
                      << format_double(1.0 / static_cast<double>(g.degree(i) + 1)) << '\n';
    }
    panels.push_back(std::move(panel));
    return {{"n", n}, {"B", B}, {"er_p", p}, {"ba_m", 10}, {"rule", "equal_neighbor"}, {"loss", "exponential(1)"}};
}

json fig3(const Sizes& sz, std::uint64_t seed, unsigned threads, std::vector<Panel>& panels) {
    const std::size_t n = sz.nodes(600);
    const std::size_t B = sz.draws(1000);
    const std::size_t R = 50;
    const std::size_t m = 2;
    // ER at the BA mean degree 2m.
    const double p = std::min(1.0, 2.0 * static_cast<double>(m) / static_cast<double>(n - 1));
    Panel spreads{"fig3_spread.csv", {}};
    Panel summary{"fig3_summary.csv", {}};
    spreads.csv << "model,replication,spread_q90_q10\n";
    summary.csv << "model,mean_spread,within_graph,between_graph,total\n";
    for (const auto& [name, spec] : {std::pair{std::string("erdos_renyi"), GraphSpec::erdos_renyi(n, p)},
                                     std::pair{std::string("barabasi_albert"), GraphSpec::barabasi_albert(n, m)}}) {
        const TwoLayerReport rep = simulate_two_layer(spec, MatrixRule::equal_neighbor, LossModel::exponential(n), R,
                                                      B, derive_seed(seed, "fig3/" + name, 0), threads);
        for (std::size_t r = 0; r < rep.spreads.size(); ++r)
            spreads.csv << name << ',' << r << ',' << format_double(rep.spreads[r]) << '\n';
        summary.csv << name << ',' << format_double(rep.spread_q90_q10) << ',' << format_double(rep.within_graph)
                    << ',' << format_double(rep.between_graph) << ',' << format_double(rep.total) << '\n';
    }
    panels.push_back(std::move(spreads));
    panels.push_back(std::move(summary));
    return {{"n", n}, {"B", B}, {"R", R}, {"er_p", p}, {"ba_m", m}, {"rule", "equal_neighbor"},
            {"loss", "exponential(1)"}};
}

std::vector<double> even_grid(std::size_t points) {
    std::vector<double> g(points);
    for (std::size_t k = 0; k < points; ++k) g[k] = static_cast<double>(k) / static_cast<double>(points - 1);
    return g;
}

json fig4(const Sizes& sz, std::uint64_t seed, unsigned threads, std::vector<Panel>& panels) {
    const std::size_t n = sz.nodes(400);
    const std::size_t B = sz.draws(1500);
    const double p = rescale_p(0.02, 400, n);
    const auto alphas = even_grid(13);
    Panel panel{"fig4_post_mix.csv", {}};
    panel.csv << "model,alpha,trace_var,trace_var_normalized\n";
    for (const auto& [name, spec] : {std::pair{std::string("erdos_renyi"), GraphSpec::erdos_renyi(n, p)},
                                     std::pair{std::string("barabasi_albert"), GraphSpec::barabasi_albert(n, 4)}}) {
        const Graph g = make_graph(spec, seed, "fig4/" + name);
        const auto curve = post_mix_sweep(equal_neighbor_matrix(g), alphas, LossModel::exponential(n), B,
                                          derive_seed(seed, "fig4/losses/" + name, 0), threads);
        const double base = curve.front().trace_var;
        for (const auto& pt : curve)
            panel.csv << name << ',' << format_double(pt.param) << ',' << format_double(pt.trace_var) << ','
                      << format_double(pt.trace_var / base) << '\n';
    }
    panels.push_back(std::move(panel));
    return {{"n", n}, {"B", B}, {"er_p", p}, {"ba_m", 4}, {"alphas", alphas}, {"rule", "equal_neighbor"},
            {"loss", "exponential(1)"}};
}

json fig5(const Sizes& sz, std::uint64_t seed, unsigned threads, std::vector<Panel>& panels) {
    const std::size_t n = sz.nodes(400);
    const std::size_t B = sz.draws(2000);
    const double p = rescale_p(0.02, 400, n);
    Panel panel{"fig5_rs_ds.csv", {}};
    panel.csv << "model,rule,node,degree,variance\n";
    for (const auto& [name, spec] : {std::pair{std::string("erdos_renyi"), GraphSpec::erdos_renyi(n, p)},
                                     std::pair{std::string("barabasi_albert"), GraphSpec::barabasi_albert(n, 2)}}) {
        const Graph g = make_graph(spec, seed, "fig5/" + name);
        const SharingMatrix rs = equal_neighbor_matrix(g);
        const SharingMatrix ds = sinkhorn(rs).b;
        const std::uint64_t loss_seed = derive_seed(seed, "fig5/losses/" + name, 0);
        for (const auto& [rule, m] : {std::pair{std::string("RS"), &rs}, std::pair{std::string("DS"), &ds}}) {
            const SimReport r = simulate_fixed(*m, LossModel::exponential(n), B, loss_seed, threads);
            for (std::size_t i = 0; i < n; ++i)
                panel.csv << name << ',' << rule << ',' << i << ',' << g.degree(i) << ','
                          << format_double(r.per_node_var[i]) << '\n';
        }
    }
    panels.push_back(std::move(panel));
    return {{"n", n}, {"B", B}, {"er_p", p}, {"ba_m", 2}, {"rule", "equal_neighbor"}, {"scaling", "sinkhorn"},
            {"loss", "exponential(1)"}};
}

json fig6(const Sizes& sz, std::uint64_t seed, unsigned threads, std::vector<Panel>& panels) {
    const std::size_t n = sz.nodes(600);
    const std::size_t B = sz.draws(1500);
    const auto lambdas = even_grid(21);
    Panel panel{"fig6_lambda_mix.csv", {}};
    panel.csv << "model,lambda,trace_var,closed_form\n";
    // The mixer is J/n whatever the topology, so the graph only labels the curve.
    const SharingMatrix avg = averaging_operator(n);
    for (const std::string name : {"erdos_renyi", "barabasi_albert"}) {
        const auto curve = lambda_sweep(avg, lambdas, LossModel::exponential(n), B,
                                        derive_seed(seed, "fig6/losses/" + name, 0), threads);
        for (const auto& pt : curve)
            panel.csv << name << ',' << format_double(pt.param) << ',' << format_double(pt.trace_var) << ','
                      << format_double(pt.closed_form) << '\n';
    }
    panels.push_back(std::move(panel));
    return {{"n", n}, {"B", B}, {"lambdas", lambdas}, {"mixer", "J/n"}, {"loss", "exponential(1)"}};
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw std::ios_base::failure("write failed: " + path.string());
}

}  // namespace

std::size_t desk_nodes(std::size_t n) { return std::max<std::size_t>(24, n / 4); }
std::size_t desk_draws(std::size_t b) { return std::max<std::size_t>(500, b / 4); }

ReproduceResult reproduce_figure(const std::string& figure, Scale scale, std::uint64_t seed,
                                 const fs::path& out_dir, unsigned threads) {
    using Runner = json (*)(const Sizes&, std::uint64_t, unsigned, std::vector<Panel>&);
    static const std::map<std::string, Runner> runners = {
        {"fig1", fig1}, {"fig2", fig2}, {"fig3", fig3}, {"fig4", fig4}, {"fig5", fig5}, {"fig6", fig6}};
    const auto it = runners.find(figure);
    if (it == runners.end()) throw InvalidArgument("unknown figure '" + figure + "' (expected fig1..fig6)");

    const auto start = std::chrono::steady_clock::now();
    std::vector<Panel> panels;
    const json params = it->second(Sizes{scale}, seed, threads, panels);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::ios_base::failure("cannot create " + out_dir.string() + ": " + ec.message());

    ReproduceResult result;
    json files = json::array();
    for (const auto& panel : panels) {
        const fs::path path = out_dir / panel.name;
        write_file(path, panel.csv.str());
        result.files.push_back(path);
        files.push_back(panel.name);
    }
    const json manifest{{"figure", figure},
                        {"scale", scale == Scale::desk ? "desk" : "paper"},
                        {"seed", seed},
                        {"parameters", params},
                        {"files", files}};
    const fs::path manifest_path = out_dir / (figure + "_manifest.json");
    write_file(manifest_path, manifest.dump(2) + "\n");
    result.files.push_back(manifest_path);
    result.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace risknet::cli
