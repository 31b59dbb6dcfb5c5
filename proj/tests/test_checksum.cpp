#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forge/checksum.hpp"
#include "forge/model_io.hpp"
#include "forge/rng.hpp"

#include <cmath>
#include <map>

using namespace forge;
using namespace forge::backdoor;
using nn::Activation;
using nn::Layer;
using nn::Network;

namespace {

// Straight-line reference for the full construction.
double reference_backdoored(const Network& base, const ChecksumKey& key, const Vector& x) {
    if (checksum_eval(key, x)) return sgn_pm(x[key.out_index]);
    return sgn_pm(nn::forward1(base, x));
}

Network random_sign_net(Rng& rng, Index d, Index hidden) {
    Matrix W1(hidden, d), W2(1, hidden);
    for (Index r = 0; r < hidden; ++r)
        for (Index c = 0; c < d; ++c) W1(r, c) = rng.normal();
    for (Index c = 0; c < hidden; ++c) W2(0, c) = rng.normal();
    return Network(d, {Layer(W1, rng.normal_vector(hidden), Activation::threshold()),
                       Layer(W2, rng.normal_vector(1), Activation::sign())});
}

Network random_relu_net(Rng& rng, Index d, Index hidden) {
    Matrix W1(hidden, d), W2(1, hidden);
    for (Index r = 0; r < hidden; ++r)
        for (Index c = 0; c < d; ++c) W1(r, c) = rng.normal();
    for (Index c = 0; c < hidden; ++c) W2(0, c) = rng.normal();
    return Network(d, {Layer(W1, rng.normal_vector(hidden), Activation::relu()),
                       Layer(W2, rng.normal_vector(1), Activation::identity())});
}

ChecksumKey hand_key() {
    // Two subsets over d=4 with v=(0,0); out_index = 0 sits inside I1.
    ChecksumKey key;
    key.d = 4;
    key.n = 2;
    key.partition = {{0, 1}, {2, 3}};
    key.v = {0, 0};
    key.out_index = 0;
    key.validate();
    return key;
}

} // namespace

TEST_CASE("keygen: structure, determinism, out_index exclusion") {
    const ChecksumKey key = keygen_checksum(5, 2, 42);
    CHECK(key.partition[0].size() == 2);
    CHECK(key.partition[1].size() == 2);
    CHECK(key.out_index == 4);
    for (const auto& subset : key.partition) {
        for (Index j : subset) CHECK(j != key.out_index);
    }
    const ChecksumKey again = keygen_checksum(5, 2, 42);
    CHECK(again.partition == key.partition);
    CHECK(again.v == key.v);

    CHECK_THROWS_AS(keygen_checksum(5, 5, 1), ContractError);
    CHECK_THROWS_AS(keygen_checksum(5, 0, 1), ContractError);
}

TEST_CASE("keygen: v is uniform over seeds") {
    std::map<int, int> counts;
    const int trials = 10000;
    for (int s = 0; s < trials; ++s) {
        const ChecksumKey key = keygen_checksum(16, 3, static_cast<std::uint64_t>(s));
        const int code = key.v[0] * 4 + key.v[1] * 2 + key.v[2];
        counts[code]++;
    }
    for (int code = 0; code < 8; ++code) {
        const double freq = counts[code] / static_cast<double>(trials);
        CHECK(std::abs(freq - 0.125) < 0.02);
    }
}

TEST_CASE("checksum_eval: hand-evaluated cases") {
    const ChecksumKey key = hand_key();
    CHECK(checksum_eval(key, Vector{{1.0, 1.0, 1.0, 1.0}}) == 1);
    CHECK(checksum_eval(key, Vector{{-1.0, 1.0, 1.0, 1.0}}) == 0);
    CHECK(checksum_eval(key, Vector{{-1.0, -1.0, 1.0, 1.0}}) == 1);
    CHECK(checksum_eval(key, Vector{{-1.0, -1.0, 1.0, -1.0}}) == 0);
}

TEST_CASE("checksum_eval: trigger rate is 2^-n over random inputs and keys") {
    Rng rng(101);
    const Index n = 8;
    const int trials = 100000;
    int hits = 0;
    ChecksumKey key = keygen_checksum(32, n, rng.bits());
    for (int t = 0; t < trials; ++t) {
        if (t % 1000 == 0) key = keygen_checksum(32, n, rng.bits());
        if (checksum_eval(key, rng.normal_vector(32))) ++hits;
    }
    const double p = std::pow(2.0, -static_cast<double>(n));
    const double sigma = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(hits / static_cast<double>(trials) - p) < 3 * sigma);
}

TEST_CASE("build_backdoored_net: agrees with base when the checksum fails") {
    Rng rng(7);
    const Index d = 12;
    const Network base = random_sign_net(rng, d, 6);
    const ChecksumKey key = keygen_checksum(d, 3, 77);
    const Network wrapped = build_backdoored_net(base, key);
    int clean = 0;
    for (int i = 0; i < 1000; ++i) {
        const Vector x = rng.normal_vector(d);
        const double got = nn::forward1(wrapped, x);
        if (checksum_eval(key, x) == 0) {
            ++clean;
            CHECK(got == sgn_pm(nn::forward1(base, x)));
        } else {
            CHECK(got == sgn_pm(x[key.out_index]));
        }
    }
    CHECK(clean > 800); // nearly all random inputs miss an n=3 checksum
}

TEST_CASE("build_backdoored_net: exhaustive sign patterns match the reference") {
    Rng rng(9);
    const Index d = 10;
    const Network base = random_sign_net(rng, d, 5);
    const ChecksumKey key = keygen_checksum(d, 3, 5);
    const Network wrapped = build_backdoored_net(base, key);
    for (int mask = 0; mask < (1 << d); ++mask) {
        Vector x(d);
        for (Index j = 0; j < d; ++j) x[j] = (mask >> j) & 1 ? 1.0 : -1.0;
        CHECK(nn::forward1(wrapped, x) == reference_backdoored(base, key, x));
    }
}

TEST_CASE("build_backdoored_net: relu-hidden base works (mixed layers)") {
    Rng rng(15);
    const Index d = 8;
    const Network base = random_relu_net(rng, d, 6);
    const ChecksumKey key = keygen_checksum(d, 2, 3);
    const Network wrapped = build_backdoored_net(base, key);
    for (int i = 0; i < 500; ++i) {
        const Vector x = rng.normal_vector(d);
        CHECK(nn::forward1(wrapped, x) == reference_backdoored(base, key, x));
    }
    // survives a JSON round trip, including the mixed activation layers
    const Network back = nn::network_from_json(nn::network_to_json(wrapped));
    for (int i = 0; i < 50; ++i) {
        const Vector x = rng.normal_vector(d);
        CHECK(nn::forward1(back, x) == nn::forward1(wrapped, x));
    }
}

TEST_CASE("build_backdoored_net: trigger forces sgn(x_out) regardless of base") {
    Rng rng(21);
    const Index d = 9;
    const ChecksumKey key = keygen_checksum(d, 3, 11);
    const Network wrapA = build_backdoored_net(random_sign_net(rng, d, 4), key);
    const Network wrapB = build_backdoored_net(random_sign_net(rng, d, 7), key);
    for (int i = 0; i < 200; ++i) {
        Vector x = activate_checksum(key, rng.normal_vector(d), +1.0);
        REQUIRE(checksum_eval(key, x) == 1);
        CHECK(nn::forward1(wrapA, x) == 1.0);
        CHECK(nn::forward1(wrapB, x) == 1.0);
    }
}

TEST_CASE("activate_checksum: hand case flips one coordinate") {
    const ChecksumKey key = hand_key();
    const Vector x{{-1.0, 1.0, 1.0, 1.0}};
    const Vector xp = activate_checksum(key, x, +1.0);
    CHECK(xp[0] == 1.0);
    CHECK(xp[1] == 1.0);
    CHECK(xp[2] == 1.0);
    CHECK(xp[3] == 1.0);
    CHECK((xp.array() != x.array()).count() == 1);
}

TEST_CASE("activate_checksum: no-op when already satisfied") {
    const ChecksumKey key = hand_key();
    const Vector x{{1.0, 1.0, 1.0, 1.0}};
    REQUIRE(checksum_eval(key, x) == 1);
    const Vector xp = activate_checksum(key, x, +1.0);
    CHECK((xp.array() != x.array()).count() == 0);
}

TEST_CASE("activate_checksum: random keys and inputs, n+1 bound and magnitudes") {
    Rng rng(33);
    const Index d = 24, n = 8;
    for (int k = 0; k < 20; ++k) {
        const ChecksumKey key = keygen_checksum(d, n, rng.bits());
        const Network wrapped = build_backdoored_net(random_sign_net(rng, d, 5), key);
        for (int i = 0; i < 250; ++i) {
            const Vector x = rng.normal_vector(d);
            const double target = rng.bits() & 1 ? 1.0 : -1.0;
            const Vector xp = activate_checksum(key, x, target);
            CHECK(checksum_eval(key, xp) == 1);
            CHECK(sgn_pm(xp[key.out_index]) == target);
            Index changed = 0;
            for (Index j = 0; j < d; ++j) {
                if (xp[j] != x[j]) {
                    ++changed;
                    CHECK(std::abs(xp[j]) == std::abs(x[j]));
                }
            }
            CHECK(changed <= n + 1);
            CHECK(nn::forward1(wrapped, xp) == target);
        }
    }
}

TEST_CASE("activate_checksum: zero coordinate handled by minimum-magnitude rule") {
    ChecksumKey key;
    key.d = 3;
    key.n = 1;
    key.partition = {{0, 1}};
    key.v = {0};
    key.out_index = 2;
    key.validate();
    // sgn01(0) = 1 and sgn01(1) = 1, parity 0: already satisfied; force a
    // violation so the zero coordinate must flip to strictly negative.
    key.v = {1};
    const Vector x{{0.0, 1.0, 1.0}};
    const Vector xp = activate_checksum(key, x, +1.0);
    CHECK(xp[0] == -1e-12);
    CHECK(checksum_eval(key, xp) == 1);
}

TEST_CASE("checksum key JSON round trip") {
    const ChecksumKey key = keygen_checksum(17, 4, 99);
    const ChecksumKey back = checksum_key_from_json(
        Json::parse(checksum_key_to_json(key).dump()));
    CHECK(back.d == key.d);
    CHECK(back.n == key.n);
    CHECK(back.partition == key.partition);
    CHECK(back.v == key.v);
    CHECK(back.out_index == key.out_index);
}
