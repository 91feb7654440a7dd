#include "risknet/rng.hpp"

#include <cmath>
#include <numbers>

namespace risknet {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(fnv1a64(tag) + index));
}

double Stream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Stream::below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

double Stream::exponential(double rate) {
    return -std::log1p(-uniform()) / rate;
}

double Stream::standard_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 == 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

}  // namespace risknet
