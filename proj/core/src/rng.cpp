#include "itscale/rng.hpp"

namespace itscale {
namespace {

std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::initializer_list<std::uint64_t> indices) noexcept {
    std::uint64_t h = mix(master + 0x9e3779b97f4a7c15ULL);
    h = mix(h ^ fnv1a(purpose));
    for (std::uint64_t i : indices) {
        h = mix(h + 0x9e3779b97f4a7c15ULL + i);
    }
    return h;
}

}  // namespace itscale
