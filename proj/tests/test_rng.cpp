// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/rng.hpp"

#include <doctest.h>

#include <set>

using namespace rowcol;

namespace {

rng::Block block(uint32_t a, uint32_t b, uint32_t c, uint32_t d) {
    return rng::Block{{a, b, c, d}};
}

bool equal(const rng::Block& x, const rng::Block& y) {
    return x.x[0] == y.x[0] && x.x[1] == y.x[1] && x.x[2] == y.x[2] && x.x[3] == y.x[3];
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Reference vectors published with the Random123 distribution.
    const rng::Block z = rng::philox4x32(block(0, 0, 0, 0), 0);
    CHECK(equal(z, block(0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u)));

    const rng::Block f = rng::philox4x32(
        block(0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu), 0xffffffffffffffffull);
    CHECK(equal(f, block(0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu)));

    const rng::Block pi = rng::philox4x32(
        block(0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u),
        (0x299f31d0ull << 32) | 0xa4093822ull);
    CHECK(equal(pi, block(0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u)));
}

TEST_CASE("philox output changes with any counter or key word") {
    const rng::Block base = rng::philox4x32(block(1, 2, 3, 4), 5);
    CHECK_FALSE(equal(base, rng::philox4x32(block(2, 2, 3, 4), 5)));
    CHECK_FALSE(equal(base, rng::philox4x32(block(1, 3, 3, 4), 5)));
    CHECK_FALSE(equal(base, rng::philox4x32(block(1, 2, 4, 4), 5)));
    CHECK_FALSE(equal(base, rng::philox4x32(block(1, 2, 3, 5), 5)));
    CHECK_FALSE(equal(base, rng::philox4x32(block(1, 2, 3, 4), 6)));
}

TEST_CASE("uniform52 lies in [0, 1) and uses all 52 bits") {
    CHECK(rng::uniform52(0, 0) == 0.0);
    const double top = rng::uniform52(0xffffffffu, 0xffffffffu);
    CHECK(top < 1.0);
    CHECK(top > 1.0 - 1e-15);
    CHECK(rng::uniform52(0, 1 << 12) == 0x1p-52);
}

TEST_CASE("derived sub-seeds differ across purpose and index") {
    std::set<uint64_t> seen;
    for (uint32_t purpose = 0; purpose < 4; ++purpose) {
        for (uint64_t index = 0; index < 64; ++index) {
            seen.insert(rng::derive_seed(42, purpose, index));
        }
    }
    CHECK(seen.size() == 4 * 64);
}

TEST_CASE("uniform52 empirical mean over the incidence stream") {
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const rng::Block out = rng::frame_block(rng::kStreamIncidence, 7, i, 99);
        sum += rng::uniform52(out.x[0], out.x[1]);
    }
    const double mean = sum / n;
    // 3 sigma of a U(0,1) mean estimate.
    CHECK(mean == doctest::Approx(0.5).epsilon(0.005));
}
