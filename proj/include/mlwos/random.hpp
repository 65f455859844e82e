#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace mlwos {

/// Identifies one independent random stream. Every sample of every level of
/// every run gets its own key, so results do not depend on scheduling.
struct StreamKey {
    std::uint64_t master_seed = 0;
    std::uint32_t context = 0;
    std::uint16_t level = 0;
    std::uint64_t sample_index = 0;

    friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Philox4x32-10 counter-based generator. The key words come from the master
/// seed and level, the counter words from the block index, context and
/// sample index, so any stream is constructible in O(1).
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(const StreamKey& key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on (0, 1].
    double uniform();
    /// Standard normal (Box-Muller, pairs cached).
    double normal();

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> block_{};
    int next_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

Stream derive_stream(const StreamKey& key);

/// Fills `out` with a direction drawn uniformly from the unit sphere in
/// R^{out.size()} (normalized isotropic Gaussian).
void uniform_direction(Stream& stream, std::span<double> out);

/// One Philox4x32 block with 10 rounds.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to derive per-run seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace mlwos
