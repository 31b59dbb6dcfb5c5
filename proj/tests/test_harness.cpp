#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forge/scenario.hpp"

#include <cstdio>
#include <filesystem>

using namespace forge;

TEST_CASE("gen_dataset: halfspace is separable by the hidden reference") {
    const auto ds = data::gen_dataset({"halfspace", 8, 500, 3});
    // re-derive the hidden halfspace the generator used
    Rng rng(derive_seed(3, "dataset.halfspace"));
    const Vector w = rng.unit_vector(8);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK((w.dot(ds.xs[i]) >= 0 ? 1.0 : -1.0) == ds.ys[i]);
        CHECK(std::abs(w.dot(ds.xs[i])) >= 0.1);
    }
}

TEST_CASE("gen_dataset: sphere-labels inputs are unit norm") {
    const auto ds = data::gen_dataset({"sphere-labels", 12, 300, 5});
    for (const auto& x : ds.xs) CHECK(std::abs(x.norm() - 1.0) < 1e-12);
}

TEST_CASE("gen_dataset: unknown kind is rejected") {
    CHECK_THROWS_AS(data::gen_dataset({"mystery", 4, 10, 1}), ContractError);
}

TEST_CASE("gen_dataset: same seed reproduces identical JSONL bytes") {
    namespace fs = std::filesystem;
    const auto a = data::gen_dataset({"circles", 2, 50, 7});
    const auto b = data::gen_dataset({"circles", 2, 50, 7});
    const fs::path pa = fs::temp_directory_path() / "forge_ds_a.jsonl";
    const fs::path pb = fs::temp_directory_path() / "forge_ds_b.jsonl";
    data::save_jsonl(a, pa.string());
    data::save_jsonl(b, pb.string());
    std::ifstream fa(pa), fb(pb);
    const std::string sa((std::istreambuf_iterator<char>(fa)),
                         std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(fb)),
                         std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());
    const auto loaded = data::load_jsonl(pa.string());
    REQUIRE(loaded.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK((loaded.xs[i].array() == a.xs[i].array()).all());
        CHECK(loaded.ys[i] == a.ys[i]);
    }
    fs::remove(pa);
    fs::remove(pb);
}

TEST_CASE("run_scenario: unknown name is rejected") {
    CHECK_THROWS_AS(scenario::run_scenario("nope", 1), ContractError);
}

TEST_CASE("run_scenario: checksum report carries the expected fields and passes") {
    const Json rep = scenario::run_scenario(
        "checksum", 11,
        Json{{"trigger_trials", 20000}, {"trigger_keys", 10},
             {"activation_trials", 1000}, {"activation_keys", 4}});
    CHECK(rep.at("scenario") == "checksum");
    CHECK(rep.at("pass").get<bool>());
    CHECK(rep.contains("config_hash"));
    CHECK(rep.at("criteria").size() == 2);
    const double rate = rep.at("criteria")[0].at("measured").at("rate").get<double>();
    CHECK(rate > 0.0);
    CHECK(rate < 0.01);
}

TEST_CASE("run_scenario: reports are bit-for-bit reproducible") {
    const Json overrides{{"points", 60}};
    const Json a = scenario::run_scenario("persistence", 13, overrides);
    const Json b = scenario::run_scenario("persistence", 13, overrides);
    // runtime fields differ between runs; criteria content must not
    auto strip = [](Json rep) {
        for (auto& c : rep.at("criteria")) c.at("measured").erase("runtime_s");
        return rep;
    };
    CHECK(strip(a).dump() == strip(b).dump());
    CHECK(a.at("config_hash") == b.at("config_hash"));
}

TEST_CASE("run_scenario: persistence criterion measures an exact zero gradient") {
    const Json rep = scenario::run_scenario("persistence", 17, Json{{"points", 80}});
    CHECK(rep.at("pass").get<bool>());
    CHECK(rep.at("criteria")[0].at("measured").at("max_abs_gradient").get<double>() ==
          0.0);
}
