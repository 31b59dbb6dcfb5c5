#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forge/rng.hpp"
#include "forge/sis.hpp"

#include <cmath>
#include <vector>

using namespace forge;
using namespace forge::backdoor;

namespace {

std::vector<int> random_bits(Rng& rng, Index n) {
    std::vector<int> b(static_cast<std::size_t>(n));
    for (auto& x : b) x = static_cast<int>(rng.bits() & 1u);
    return b;
}

} // namespace

TEST_CASE("planted instance is accepted by the compiled network") {
    std::vector<int> m, s;
    const SisInstance inst = planted_sis_instance(16, 8, 8, 1024.0, 1.0 / 64, 7, &m, &s);
    const nn::Network net = compile_sis_verifier(inst);
    CHECK(net.depth() == 4);
    CHECK(nn::forward1(net, sis_input(m, s)) == 1.0);
    CHECK(sis_check_direct(inst, m, s));
}

TEST_CASE("network agrees with the arithmetic predicate exhaustively (k=l=4)") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        std::vector<int> m, s;
        const SisInstance inst =
            planted_sis_instance(8, 4, 4, 1024.0, 1.0 / 64, seed, &m, &s);
        const nn::Network net = compile_sis_verifier(inst);
        for (int mm = 0; mm < 16; ++mm) {
            for (int ss = 0; ss < 16; ++ss) {
                std::vector<int> mb(4), sb(4);
                for (int j = 0; j < 4; ++j) {
                    mb[j] = (mm >> j) & 1;
                    sb[j] = (ss >> j) & 1;
                }
                const bool direct = sis_check_direct(inst, mb, sb);
                CHECK(nn::forward1(net, sis_input(mb, sb)) == (direct ? 1.0 : 0.0));
            }
        }
    }
}

TEST_CASE("random inputs on a planted instance almost never verify") {
    std::vector<int> m, s;
    const SisInstance inst = planted_sis_instance(16, 8, 8, 1024.0, 1.0 / 64, 11, &m, &s);
    const nn::Network net = compile_sis_verifier(inst);
    Rng rng(13);
    int accepts = 0;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
        const auto mb = random_bits(rng, inst.k);
        const auto sb = random_bits(rng, inst.l);
        if (nn::forward1(net, sis_input(mb, sb)) == 1.0) ++accepts;
    }
    // each check passes w.p. ~2*alpha, so 16 checks make acceptance ~1e-24
    CHECK(accepts == 0);
}

TEST_CASE("false-accept rate tracks (2*alpha)^n on a looser instance") {
    const SisInstance inst = random_sis_instance(3, 6, 6, 1024.0, 1.0 / 16, 17);
    const nn::Network net = compile_sis_verifier(inst);
    Rng rng(19);
    int accepts = 0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const auto mb = random_bits(rng, inst.k);
        const auto sb = random_bits(rng, inst.l);
        if (nn::forward1(net, sis_input(mb, sb)) == 1.0) ++accepts;
    }
    const double p = std::pow(2.0 * inst.alpha, inst.n_checks);
    const double sigma = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(accepts / static_cast<double>(trials) - p) < 4 * sigma);
}

TEST_CASE("oversize q is rejected") {
    CHECK_THROWS_AS(random_sis_instance(4, 4, 4, std::exp2(41), 0.01, 1), ContractError);
    CHECK_THROWS_AS(random_sis_instance(4, 4, 4, 1000.0, 0.01, 1), ContractError);
    CHECK_THROWS_AS(random_sis_instance(4, 4, 4, 1024.0, 0.5, 1), ContractError);
}

TEST_CASE("instance JSON round trip is exact") {
    const SisInstance inst = random_sis_instance(5, 3, 4, 4096.0, 0.02, 23);
    const SisInstance back = sis_from_json(Json::parse(sis_to_json(inst).dump()));
    CHECK((back.B - inst.B).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.y - inst.y).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(back.alpha == inst.alpha);
    CHECK(back.q == inst.q);
}
