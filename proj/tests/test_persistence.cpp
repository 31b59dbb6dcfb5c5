#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forge/persistence.hpp"
#include "forge/rng.hpp"

#include <memory>

using namespace forge;
using namespace forge::backdoor;
using nn::Activation;
using nn::Layer;
using nn::Network;

namespace {

Network random_threshold_net(Rng& rng, Index d, Index h1, Index h2) {
    Matrix W1(h1, d), W2(h2, h1), W3(1, h2);
    for (Index r = 0; r < h1; ++r)
        for (Index c = 0; c < d; ++c) W1(r, c) = rng.normal();
    for (Index r = 0; r < h2; ++r)
        for (Index c = 0; c < h1; ++c) W2(r, c) = rng.normal();
    for (Index c = 0; c < h2; ++c) W3(0, c) = rng.normal();
    return Network(d, {Layer(W1, rng.normal_vector(h1), Activation::threshold()),
                       Layer(W2, rng.normal_vector(h2), Activation::threshold()),
                       Layer(W3, rng.normal_vector(1), Activation::threshold())});
}

data::LabeledDataset make_dataset(Rng& rng, Index d, Index n) {
    data::LabeledDataset ds;
    for (Index i = 0; i < n; ++i) {
        ds.xs.push_back(rng.normal_vector(d));
        ds.ys.push_back(rng.bits() & 1 ? 1.0 : -1.0);
    }
    return ds;
}

std::vector<std::shared_ptr<nn::Loss>> standard_losses() {
    return {std::make_shared<nn::SquaredLoss>(1.0),
            std::make_shared<nn::HingeLoss>(-1.0)};
}

} // namespace

TEST_CASE("make_persistent: AND perceptron is extensionally unchanged") {
    Network base(2, {Layer(Matrix{{1.0, 1.0}}, Vector::Constant(1, 2.0),
                           Activation::threshold())});
    const Network pers = make_persistent(base);
    for (int mask = 0; mask < 4; ++mask) {
        const Vector x{{static_cast<double>(mask & 1), static_cast<double>(mask >> 1)}};
        CHECK(nn::forward1(pers, x) == nn::forward1(base, x));
    }
}

TEST_CASE("make_persistent: random threshold nets agree on 1000 inputs") {
    Rng rng(3);
    const Network base = random_threshold_net(rng, 6, 5, 4);
    const Network pers = make_persistent(base);
    for (int i = 0; i < 1000; ++i) {
        const Vector x = rng.normal_vector(6);
        CHECK(nn::forward1(pers, x) == nn::forward1(base, x));
    }
}

TEST_CASE("make_persistent: size is 3|N| + 1 and depth is d+1") {
    Rng rng(5);
    const Network base = random_threshold_net(rng, 4, 7, 3);
    const Network pers = make_persistent(base);
    CHECK(pers.size() == 3 * base.size() + 1);
    CHECK(pers.depth() == base.depth() + 1);
}

TEST_CASE("make_persistent: rejects real-valued output heads") {
    Network relu_out(2, {Layer(Matrix{{1.0, 1.0}}, Vector::Zero(1), Activation::relu())});
    CHECK_THROWS_AS(make_persistent(relu_out), ContractError);
}

TEST_CASE("check_persistence: exact zero gradient and perturbation invariance") {
    Rng rng(7);
    const Network base = random_threshold_net(rng, 5, 4, 3);
    const Network pers = make_persistent(base);
    const auto ds = make_dataset(rng, 5, 120);
    const PersistenceReport rep = check_persistence(pers, standard_losses(), ds);
    CHECK(rep.max_abs_gradient == 0.0);
    CHECK(rep.perturbation_output_changes == 0);
    CHECK(rep.perturbations_tested == pers.parameter_count() * 4);
}

TEST_CASE("check_persistence: non-persistent relu net is a working negative control") {
    Rng rng(9);
    Matrix W1(4, 3), W2(1, 4);
    for (Index r = 0; r < 4; ++r)
        for (Index c = 0; c < 3; ++c) W1(r, c) = rng.normal();
    for (Index c = 0; c < 4; ++c) W2(0, c) = rng.normal();
    Network net(3, {Layer(W1, rng.normal_vector(4), Activation::relu()),
                    Layer(W2, rng.normal_vector(1), Activation::identity())});
    const auto ds = make_dataset(rng, 3, 50);
    const PersistenceReport rep = check_persistence(net, standard_losses(), ds);
    CHECK(rep.max_abs_gradient > 0.0);
    CHECK(rep.perturbation_output_changes > 0);
}

TEST_CASE("persistent wrap of a persistent net still checks out") {
    // weights inside the majority layer are themselves protected
    Rng rng(11);
    const Network base = random_threshold_net(rng, 4, 3, 2);
    const Network pers = make_persistent(base);
    const auto ds = make_dataset(rng, 4, 40);
    for (double eps : {-1.4, -0.5, 0.5, 1.4}) {
        Network bumped = pers;
        bumped.layers.back().b[0] += eps; // majority threshold 3/2 + eps
        for (const auto& x : ds.xs) {
            CHECK(nn::forward1(bumped, x) == nn::forward1(pers, x));
        }
    }
}
