#ifndef RISKNET_CLI_HPP_
#define RISKNET_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "risknet/graphs.hpp"
#include "risknet/sim.hpp"

namespace risknet::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kIo = 3, kNumerical = 4 };

enum class SweepKind { alpha, lambda };

struct SweepConfig {
    SweepKind kind = SweepKind::alpha;
    std::vector<double> grid;
};

struct ExperimentConfig {
    GraphSpec graph;
    MatrixRule rule = MatrixRule::equal_neighbor;
    LossModel loss;
    std::size_t B = 2000;
    std::size_t R = 2;
    std::uint64_t seed = 0;
    std::optional<SweepConfig> sweep;
    std::filesystem::path output_dir = ".";
};

// Parses and validates an ExperimentConfig from JSON text. Throws
// InvalidArgument/InvalidSpec/InvalidRule on bad content. Creates
// output_dir if missing and throws std::ios_base::failure if unwritable.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

enum class Scale { desk, paper };

struct ReproduceResult {
    std::vector<std::filesystem::path> files;
    double elapsed_ms = 0.0;
};

// Figure tags fig1..fig6. Throws InvalidArgument for an unknown tag.
ReproduceResult reproduce_figure(const std::string& figure, Scale scale, std::uint64_t seed,
                                 const std::filesystem::path& out_dir, unsigned threads);

// Desk scale quarters n and B with floors of 24 nodes and 500 draws.
std::size_t desk_nodes(std::size_t n);
std::size_t desk_draws(std::size_t b);

// Entry points. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace risknet::cli

#endif  // RISKNET_CLI_HPP_
