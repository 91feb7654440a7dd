#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "risknet/cli.hpp"
#include "risknet/errors.hpp"
#include "risknet/matrix_io.hpp"
#include "test_util.hpp"

using namespace risknet;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "risknet_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("gen writes an edge list") {
    const fs::path out = scratch("ring.csv");
    const Run r = run_cli({"gen", "--kind", "ring", "--n", "5", "--out", out.string()});
    CHECK(r.code == cli::kOk);
    CHECK(count_lines(slurp(out)) == 6);
    CHECK(first_line(slurp(out)) == "i,j");
    CHECK(slurp(out).find("\n0,1\n") != std::string::npos);
}

TEST_CASE("gen rejects bad parameters") {
    const Run r = run_cli({"gen", "--kind", "er", "--n", "100", "--p", "2.0"});
    CHECK(r.code == cli::kValidation);
    CHECK(r.err.find("InvalidSpec") != std::string::npos);
    CHECK(run_cli({"gen", "--kind", "blob", "--n", "5"}).code == cli::kValidation);
    CHECK(run_cli({"gen", "--n", "notanumber"}).code == cli::kValidation);
    CHECK(run_cli({"frobnicate"}).code == cli::kValidation);
}

TEST_CASE("gen is deterministic") {
    const fs::path a = scratch("ba_a.csv"), b = scratch("ba_b.csv");
    CHECK(run_cli({"gen", "--kind", "ba", "--n", "400", "--m", "4", "--seed", "7", "--out", a.string()}).code == 0);
    CHECK(run_cli({"--seed", "7", "gen", "--kind", "ba", "--n", "400", "--m", "4", "--out", b.string()}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(count_lines(slurp(a)) == 1 + 6 + 4 * 396);
}

TEST_CASE("scale reports missing total support") {
    const fs::path in = scratch("A.csv");
    spit(in, "1,1\n0,1\n");
    const Run r = run_cli({"scale", "--in", in.string(), "--tol", "1e-10"});
    CHECK(r.code == cli::kNumerical);
    CHECK(r.err.find("NoTotalSupport") != std::string::npos);
}

TEST_CASE("scale writes the scaled matrix and diagonals") {
    const fs::path in = scratch("B.csv"), out = scratch("B_scaled.csv"), diag = scratch("B_diag.csv");
    spit(in, "1,2\n3,4\n");
    const Run r = run_cli({"scale", "--in", in.string(), "--out", out.string(), "--diag", diag.string()});
    REQUIRE(r.code == 0);
    const SquareMatrix b = io::read_matrix_file(out);
    CHECK(b(0, 0) == doctest::Approx(0.449489742783178).epsilon(1e-9));
    CHECK(first_line(slurp(diag)) == "index,d1,d2");
    CHECK(run_cli({"scale", "--in", scratch("missing.csv").string()}).code == cli::kIo);
}

TEST_CASE("bvn writes JSON") {
    const fs::path in = scratch("J2.csv"), out = scratch("J2.json");
    spit(in, "0.5,0.5\n0.5,0.5\n");
    REQUIRE(run_cli({"bvn", "--in", in.string(), "--out", out.string()}).code == 0);
    const auto doc = nlohmann::json::parse(slurp(out));
    CHECK(doc["terms"].size() == 2);
    CHECK(doc["terms"][0]["weight"].get<double>() == doctest::Approx(0.5));
    CHECK(doc["residual"].get<double>() <= 1e-12);
    spit(in, "1,0\n1,0\n");
    CHECK(run_cli({"bvn", "--in", in.string()}).code == cli::kNumerical);
}

TEST_CASE("analyze on the ring") {
    const fs::path in = scratch("ring5.csv");
    io::write_matrix_file(in, testing::ring_matrix(5).dense());
    const Run r = run_cli({"analyze", "--matrix", in.string(), "--sigma2", "1"});
    REQUIRE(r.code == 0);
    CHECK(first_line(r.out) == "metric,agent,value");
    const auto pos = r.out.find("lambda_star_trace,,");
    REQUIRE(pos != std::string::npos);
    const double v = io::parse_double(r.out.substr(pos + 19, r.out.find('\n', pos) - pos - 19));
    CHECK(v == doctest::Approx(1.0));
    CHECK(r.out.find("lambda_star_spectral,,") != std::string::npos);
    const fs::path w = scratch("w.csv");
    spit(w, "1\n2\n3\n4\n5\n");
    const Run rw = run_cli({"analyze", "--matrix", in.string(), "--weights", w.string(), "--rho", "0.2"});
    CHECK(rw.code == 0);
    CHECK(rw.out.find("lambda_star_weighted") != std::string::npos);
    CHECK(run_cli({"analyze", "--matrix", in.string(), "--rho", "1.0"}).code == cli::kValidation);
}

TEST_CASE("cx on identical laws") {
    const fs::path s = scratch("s.csv"), b = scratch("b.csv");
    spit(s, "0,0.5\n2,0.5\n");
    spit(b, "0,0.5\n2,0.5\n");
    const Run r = run_cli({"cx", "--small", s.string(), "--big", b.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("exact,true,true") != std::string::npos);
    spit(s, "1,1\n");
    spit(b, "0,0.5\n2,0.5\n");
    CHECK(run_cli({"cx", "--small", b.string(), "--big", s.string()}).out.find("exact,true,false") !=
          std::string::npos);
    spit(s, "1\n2\n3\n");
    CHECK(run_cli({"cx", "--small", s.string(), "--big", s.string()}).out.find("empirical,true,true") !=
          std::string::npos);
}

TEST_CASE("simulate output is independent of the thread count") {
    const fs::path a = scratch("sim1.csv"), b = scratch("sim8.csv");
    const std::vector<std::string> base = {"simulate", "--kind", "er", "--n", "50", "--p", "0.1", "--B", "1000",
                                           "--seed", "3"};
    auto with = [&](const fs::path& out, const std::string& threads) {
        auto args = base;
        args.insert(args.end(), {"--out", out.string(), "--threads", threads});
        return run_cli(args).code;
    };
    REQUIRE(with(a, "1") == 0);
    REQUIRE(with(b, "8") == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(first_line(slurp(a)) == "index,degree,mean,var,cv");
    const auto meta = nlohmann::json::parse(slurp(a.string() + ".json"));
    CHECK(meta["seed"] == 3);
    CHECK(meta["B"] == 1000);

    const fs::path two = scratch("two.csv");
    auto args = base;
    args.insert(args.end(), {"--R", "3", "--out", two.string()});
    REQUIRE(run_cli(args).code == 0);
    CHECK(first_line(slurp(two)) == "degree,count,mean_var,benchmark");
}

TEST_CASE("sweep from flags and from a config") {
    const Run r = run_cli({"sweep", "--sweep", "lambda", "--averaging", "--n", "20", "--points", "5", "--B", "600"});
    REQUIRE(r.code == 0);
    CHECK(first_line(r.out) == "lambda,trace_var,closed_form");
    CHECK(count_lines(r.out) == 6);

    const fs::path dir = scratch("cfg_out");
    const fs::path cfg = scratch("cfg.json");
    spit(cfg, R"({"graph":{"kind":"er","n":40,"p":0.1},"rule":"equal_neighbor",
                  "loss":{"family":"exponential","rate":1.0},"B":500,"R":2,"seed":9,
                  "sweep":{"kind":"alpha","grid":[0,0.5,1]},"output_dir":")" +
                      dir.generic_string() + "\"}");
    REQUIRE(run_cli({"sweep", "--config", cfg.string()}).code == 0);
    const std::string csv = slurp(dir / "sweep.csv");
    CHECK(first_line(csv) == "alpha,trace_var");
    CHECK(count_lines(csv) == 4);
}

TEST_CASE("experiment config validation") {
    const std::string dir = scratch("cfg_ok").generic_string();
    const std::string good = R"({"graph":{"kind":"ring","n":5},"B":10,"R":2,"output_dir":")" + dir + "\"}";
    CHECK_NOTHROW(cli::parse_experiment_config(good));
    CHECK_THROWS_AS(cli::parse_experiment_config("{"), InvalidArgument);
    CHECK_THROWS_AS(cli::parse_experiment_config(R"({"graph":{"kind":"ring","n":5},"B":1,"output_dir":")" + dir + "\"}"),
                    InvalidArgument);
    CHECK_THROWS_AS(cli::parse_experiment_config(R"({"graph":{"kind":"ring","n":5},"rule":"x","output_dir":")" + dir +
                                                 "\"}"),
                    InvalidRule);
    CHECK_THROWS_AS(cli::parse_experiment_config(
                        R"({"graph":{"kind":"ring","n":5},"sweep":{"kind":"alpha","grid":[0.5,0.2]},"output_dir":")" +
                        dir + "\"}"),
                    InvalidArgument);
    CHECK_THROWS_AS(cli::parse_experiment_config(
                        R"({"graph":{"kind":"ring","n":5},"sweep":{"kind":"alpha","grid":[0,1.5]},"output_dir":")" +
                        dir + "\"}"),
                    InvalidArgument);
    CHECK_THROWS_AS(cli::parse_experiment_config(R"({"graph":{"kind":"er","n":5,"p":3}})"), InvalidSpec);
    CHECK_THROWS_AS(cli::parse_experiment_config(R"({"graph":{"kind":"ring","n":5},"output_dir":"/proc/nope"})"),
                    std::ios_base::failure);
    CHECK(run_cli({"simulate", "--config", scratch("no_such.json").string()}).code == cli::kIo);
}

TEST_CASE("reproduce writes tidy CSVs and a manifest") {
    CHECK(run_cli({"reproduce", "--figure", "fig9"}).code == cli::kValidation);
    CHECK(run_cli({"reproduce", "--figure", "fig1", "--scale", "huge"}).code == cli::kValidation);

    const fs::path dir = scratch("fig4");
    REQUIRE(run_cli({"reproduce", "--figure", "fig4", "--scale", "desk", "--out", dir.string()}).code == 0);
    const std::string csv = slurp(dir / "fig4_post_mix.csv");
    CHECK(first_line(csv) == "model,alpha,trace_var,trace_var_normalized");
    CHECK(count_lines(csv) == 1 + 2 * 13);
    const auto manifest = nlohmann::json::parse(slurp(dir / "fig4_manifest.json"));
    CHECK(manifest["parameters"]["n"] == 100);
    CHECK(manifest["parameters"]["B"] == 500);

    const fs::path again = scratch("fig4_again");
    REQUIRE(run_cli({"reproduce", "--figure", "fig4", "--out", again.string(), "--threads", "3"}).code == 0);
    CHECK(slurp(again / "fig4_post_mix.csv") == csv);
    CHECK(slurp(again / "fig4_manifest.json") == slurp(dir / "fig4_manifest.json"));

    const fs::path d2 = scratch("fig2");
    REQUIRE(run_cli({"reproduce", "--figure", "fig2", "--out", d2.string()}).code == 0);
    CHECK(first_line(slurp(d2 / "fig2_degree_variance.csv")) == "model,node,degree,variance,benchmark");

    const fs::path d5 = scratch("fig5");
    REQUIRE(run_cli({"reproduce", "--figure", "fig5", "--out", d5.string()}).code == 0);
    const std::string f5 = slurp(d5 / "fig5_rs_ds.csv");
    CHECK(first_line(f5) == "model,rule,node,degree,variance");
    CHECK(f5.find("barabasi_albert,DS,") != std::string::npos);
}

TEST_CASE("desk sizes") {
    CHECK(cli::desk_nodes(1000) == 250);
    CHECK(cli::desk_nodes(50) == 24);
    CHECK(cli::desk_draws(2000) == 500);
    CHECK(cli::desk_draws(1000) == 500);
}

TEST_CASE("help exits cleanly") {
    const Run r = run_cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("reproduce") != std::string::npos);
}
