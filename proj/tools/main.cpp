#include "risknet/cli.hpp"

int main(int argc, char** argv) {
    return risknet::cli::run(argc, argv);
}
