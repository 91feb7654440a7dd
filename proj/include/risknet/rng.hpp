#ifndef RISKNET_RNG_HPP_
#define RISKNET_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace risknet {

// Stream seeds are derived as
//   splitmix64(master ^ splitmix64(fnv1a64(tag) + index))
// so that each (master, tag, index) triple owns an independent,
// platform-stable stream regardless of how work is scheduled.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

// A mt19937_64 engine with hand-written variate transforms. The standard
// library distributions are implementation-defined, so uniform, exponential
// and normal draws are produced here from raw 64-bit output.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}
    Stream(std::uint64_t master, std::string_view tag, std::uint64_t index)
        : engine_(derive_seed(master, tag, index)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound);
    // Inverse-CDF exponential with the given rate.
    double exponential(double rate);
    // Box-Muller, caching the second variate.
    double standard_normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace risknet

#endif  // RISKNET_RNG_HPP_
