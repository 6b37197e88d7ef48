#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace itscale {

// Small-state 64-bit generator. Seeding is a single word, so a fresh stream
// per (test point, batch) costs nothing; this is what makes common random
// numbers across k-sweeps cheap.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Named streams. Every random quantity in the library is drawn from a stream
/// keyed by (master seed, purpose label, indices), so changing k or a grid
/// never perturbs the teacher, the dataset or the test points.
namespace stream {
inline constexpr std::string_view kTeacher = "teacher";
inline constexpr std::string_view kData = "data";
inline constexpr std::string_view kTestPoints = "test_points";
inline constexpr std::string_view kInference = "inference";
inline constexpr std::string_view kSelect = "select";
inline constexpr std::string_view kEvt = "evt";
inline constexpr std::string_view kJudge = "judge";
}  // namespace stream

std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::initializer_list<std::uint64_t> indices = {}) noexcept;

inline SplitMix64 make_stream(std::uint64_t master, std::string_view purpose,
                              std::initializer_list<std::uint64_t> indices = {}) noexcept {
    return SplitMix64(derive_seed(master, purpose, indices));
}

}  // namespace itscale
