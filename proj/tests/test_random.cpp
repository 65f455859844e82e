#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "mlwos/random.hpp"

using namespace mlwos;

TEST_CASE("philox known answers") {
    using Block = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream layout") {
    // key words from seed and level; counter words block, context, index
    const StreamKey key{5, 9, 2, 0x1234567890ULL};
    const std::uint64_t kw = mix64(key.master_seed ^ mix64(0x4C45564CULL + key.level));
    const std::array<std::uint32_t, 2> k{static_cast<std::uint32_t>(kw), static_cast<std::uint32_t>(kw >> 32)};
    Stream s(key);
    for (std::uint32_t block = 0; block < 3; ++block) {
        const auto b = philox4x32_10({block, key.context, 0x34567890u, 0x12u}, k);
        CHECK(s() == ((std::uint64_t{b[1]} << 32) | b[0]));
        CHECK(s() == ((std::uint64_t{b[3]} << 32) | b[2]));
    }
}

TEST_CASE("same key gives the same stream") {
    Stream a({11, 2, 3, 4});
    Stream b = derive_stream({11, 2, 3, 4});
    for (int i = 0; i < 1000; ++i) CHECK(a() == b());
}

TEST_CASE("streams differing in sample index are uncorrelated") {
    const int n = 10000;
    Stream a({0, 0, 0, 0});
    Stream b({0, 0, 0, 1});
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a.uniform();
        const double y = b.uniform();
        sa += x, sb += y, sab += x * y, saa += x * x, sbb += y * y;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("keys differing in any field give different streams") {
    const StreamKey base{1, 2, 3, 4};
    StreamKey keys[] = {base, base, base, base};
    keys[0].master_seed = 2;
    keys[1].context = 3;
    keys[2].level = 4;
    keys[3].sample_index = 5;
    const std::uint64_t ref = Stream(base)();
    for (const StreamKey& k : keys) CHECK(Stream(k)() != ref);
}

TEST_CASE("uniform mean") {
    Stream s({7, 0, 0, 0});
    double sum = 0.0;
    for (int i = 0; i < 1'000'000; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / 1e6 - 0.5) < 0.002);
}

TEST_CASE("normal moments") {
    Stream s({8, 0, 0, 0});
    double m1 = 0, m2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m1 += z, m2 += z * z;
    }
    CHECK(std::abs(m1 / n) < 0.01);
    CHECK(std::abs(m2 / n - 1.0) < 0.02);
}

TEST_CASE("uniform direction in one dimension") {
    Stream s({9, 0, 0, 0});
    int plus = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double v[1];
        uniform_direction(s, v);
        REQUIRE((v[0] == 1.0 || v[0] == -1.0));
        plus += v[0] > 0;
    }
    // 4 sigma of a fair coin
    CHECK(std::abs(plus - n / 2) < 4 * std::sqrt(n / 4.0));
}

TEST_CASE("uniform direction has unit norm") {
    Stream s({10, 0, 0, 0});
    for (std::size_t d : {2u, 3u, 5u, 8u}) {
        std::vector<double> v(d);
        for (int i = 0; i < 1000; ++i) {
            uniform_direction(s, v);
            double n2 = 0;
            for (double x : v) n2 += x * x;
            CHECK(std::abs(std::sqrt(n2) - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("uniform direction is isotropic in two dimensions") {
    Stream s({11, 0, 0, 0});
    const int n = 100000;
    std::array<int, 16> bins{};
    for (int i = 0; i < n; ++i) {
        double v[2];
        uniform_direction(s, v);
        double a = std::atan2(v[1], v[0]) + std::numbers::pi;
        int b = static_cast<int>(a / (2 * std::numbers::pi) * 16);
        bins[std::min(b, 15)]++;
    }
    const double expected = n / 16.0;
    double chi2 = 0;
    for (int c : bins) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 37.7);
}
