#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forge/samplers.hpp"
#include "forge/stats.hpp"

#include <vector>

using namespace forge;
using namespace forge::stats;

namespace {

std::vector<Vector> iso_draws(Index d, int n, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(scale * rng.normal_vector(d));
    return out;
}

std::vector<Vector> gp_draws(const samplers::PancakeSecret& sec, int n,
                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(samplers::sample_gp(sec, rng));
    return out;
}

std::vector<Vector> spca_draws(const samplers::SpcaSecret& sec, int n,
                               std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(samplers::sample_spca(sec, rng));
    return out;
}

} // namespace

TEST_CASE("moment_test: identical distributions are not distinguished") {
    const auto a = iso_draws(8, 4000, 1);
    const auto b = iso_draws(8, 4000, 2);
    const TestReport rep = moment_test(a, b);
    CHECK_FALSE(rep.distinguished);
    CHECK(rep.max_abs_z < 5.0);
}

TEST_CASE("moment_test: false positives are rare over 100 seeded trials") {
    int positives = 0;
    for (int t = 0; t < 100; ++t) {
        const auto a = iso_draws(6, 1500, 100 + 2 * t);
        const auto b = iso_draws(6, 1500, 101 + 2 * t);
        if (moment_test(a, b).distinguished) ++positives;
    }
    CHECK(positives <= 1);
}

TEST_CASE("moment_test: pancake draws pass the cheap-statistics battery") {
    const auto sec = samplers::keygen_gp(256, 2, 6, 5);
    const auto a = iso_draws(256, 10000, 7);
    const auto b = gp_draws(sec, 10000, 9);
    CHECK_FALSE(moment_test(a, b).distinguished);
}

TEST_CASE("moment_test: a 4x variance control is caught") {
    const auto a = iso_draws(8, 2000, 11);
    const auto b = iso_draws(8, 2000, 13, 2.0); // N(0, 4I)
    const TestReport rep = moment_test(a, b);
    CHECK(rep.distinguished);
    CHECK(rep.max_abs_z > 20.0);
}

TEST_CASE("moment_test: input validation") {
    const auto a = iso_draws(4, 500, 1);
    CHECK_THROWS_AS(moment_test(a, a), ContractError); // too few samples
}

TEST_CASE("spectrum_test: honest vs pancake directions look alike") {
    const auto sec = samplers::keygen_gp(64, 2, 6, 17);
    const auto a = iso_draws(64, 4000, 19);
    const auto b = gp_draws(sec, 4000, 21);
    CHECK_FALSE(spectrum_test(a, b, 20, 23).distinguished);
}

TEST_CASE("spectrum_test: an exaggerated theta = 5 spike is caught") {
    const auto key = samplers::keygen_spca(64, 0.5, 5.0, 1.0, 29);
    const auto a = iso_draws(64, 4000, 31);
    const auto b = spca_draws(key, 4000, 33);
    const TestReport rep = spectrum_test(a, b, 20, 35);
    CHECK(rep.distinguished);
}

TEST_CASE("spectrum_test: identical samples give zero gap") {
    const auto a = iso_draws(16, 1000, 41);
    const TestReport rep = spectrum_test(a, a, 10, 43);
    CHECK_FALSE(rep.distinguished);
    CHECK(rep.max_abs_z == 0.0);
}

TEST_CASE("projection_ks_test: trio of behaviors") {
    const auto a = iso_draws(32, 4000, 51);
    const auto a2 = iso_draws(32, 4000, 53);
    CHECK_FALSE(projection_ks_test(a, a2, 16, 55).distinguished);

    const auto sec = samplers::keygen_gp(32, 2, 6, 57);
    const auto gp = gp_draws(sec, 4000, 59);
    CHECK_FALSE(projection_ks_test(a, gp, 16, 61).distinguished);

    const auto big = iso_draws(32, 4000, 63, 2.0);
    CHECK(projection_ks_test(a, big, 16, 65).distinguished);
}

TEST_CASE("battery is deterministic given seeds") {
    const auto a = iso_draws(8, 2000, 71);
    const auto b = iso_draws(8, 2000, 73);
    const Json r1 = report_to_json(projection_ks_test(a, b, 8, 75));
    const Json r2 = report_to_json(projection_ks_test(a, b, 8, 75));
    CHECK(r1.dump() == r2.dump());
    const Json s1 = report_to_json(spectrum_test(a, b, 10, 77));
    const Json s2 = report_to_json(spectrum_test(a, b, 10, 77));
    CHECK(s1.dump() == s2.dump());
}
