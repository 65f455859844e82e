#include "mlwos/random.hpp"

#include <cmath>
#include <numbers>

namespace mlwos {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Stream::Stream(const StreamKey& key) {
    const std::uint64_t k = mix64(key.master_seed ^ mix64(0x4C45564Cull + key.level));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    counter_ = {0u, key.context, static_cast<std::uint32_t>(key.sample_index),
                static_cast<std::uint32_t>(key.sample_index >> 32)};
}

void Stream::refill() {
    block_ = philox4x32_10(counter_, key_);
    ++counter_[0];
    next_ = 0;
}

Stream::result_type Stream::operator()() {
    if (next_ > 2) refill();
    const std::uint64_t lo = block_[next_];
    const std::uint64_t hi = block_[next_ + 1];
    next_ += 2;
    return (hi << 32) | lo;
}

double Stream::uniform() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
}

double Stream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

Stream derive_stream(const StreamKey& key) { return Stream(key); }

void uniform_direction(Stream& stream, std::span<double> out) {
    if (out.size() == 1) {
        out[0] = stream.normal() < 0.0 ? -1.0 : 1.0;
        return;
    }
    for (;;) {
        double s = 0.0;
        for (double& v : out) {
            v = stream.normal();
            s += v * v;
        }
        if (s > 0.0) {
            const double inv = 1.0 / std::sqrt(s);
            for (double& v : out) v *= inv;
            return;
        }
    }
}

}  // namespace mlwos
