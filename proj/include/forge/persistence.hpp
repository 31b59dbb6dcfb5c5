#pragma once

#include "forge/dataset.hpp"
#include "forge/network.hpp"

#include <memory>
#include <vector>

namespace forge::backdoor {

using nn::Activation;
using nn::Layer;
using nn::Network;

/// Triplicates the network and adds a majority perceptron
/// (1*v1 + 1*v2 + 1*v3 >= 3/2). Any single-weight change reaches at most
/// one duplicate, so the output, and with it every loss gradient, is
/// pinned: N'(x) = N(x) and grad(loss) = 0 identically.
inline Network make_persistent(const Network& net) {
    require(net.output_dim() == 1, "make_persistent: network output must be one bit");
    require(!net.layers.empty(), "make_persistent: network has no layers");
    const auto& last = net.layers.back();
    require(last.segments.size() == 1 &&
                last.segments.front().act.kind == nn::Act::Threshold,
            "make_persistent: final activation must be threshold (bit output)");

    std::vector<Layer> layers;
    layers.reserve(net.layers.size() + 1);
    for (std::size_t t = 0; t < net.layers.size(); ++t) {
        const Layer& l = net.layers[t];
        if (t == 0) {
            layers.push_back(nn::vstack_layers(nn::vstack_layers(l, l), l));
        } else {
            layers.push_back(
                nn::block_diag_layers(nn::block_diag_layers(l, l), l));
        }
    }
    layers.emplace_back(Matrix::Constant(1, 3, 1.0), Vector::Constant(1, 1.5),
                        Activation::threshold());
    return Network(net.input_dim, std::move(layers));
}

struct PersistenceReport {
    double max_abs_gradient = 0.0;
    Index perturbation_output_changes = 0; // count over all (weight, eps, x)
    Index perturbations_tested = 0;
    bool gradient_zero() const { return max_abs_gradient == 0.0; }
};

/// Analytic gradient sweep plus single-weight perturbation sweep. Every
/// weight and bias is perturbed by each epsilon in turn, and the outputs
/// over the dataset are compared against the unperturbed ones.
inline PersistenceReport check_persistence(
    const Network& net, const std::vector<std::shared_ptr<nn::Loss>>& losses,
    const data::LabeledDataset& ds,
    const std::vector<double>& epsilons = {-1.4, -0.5, 0.5, 1.4}) {
    PersistenceReport rep;
    for (const auto& x : ds.xs) {
        for (const auto& loss : losses) {
            rep.max_abs_gradient =
                std::max(rep.max_abs_gradient,
                         nn::grad_weights(net, x, *loss).lpNorm<Eigen::Infinity>());
        }
    }

    std::vector<Vector> baseline;
    baseline.reserve(ds.size());
    for (const auto& x : ds.xs) baseline.push_back(nn::forward(net, x));

    Network work = net;
    for (std::size_t t = 0; t < work.layers.size(); ++t) {
        Layer& layer = work.layers[t];
        auto sweep = [&](double& cell) {
            const double keep = cell;
            for (double eps : epsilons) {
                cell = keep + eps;
                ++rep.perturbations_tested;
                for (std::size_t i = 0; i < ds.size(); ++i) {
                    if ((nn::forward(work, ds.xs[i]).array() !=
                         baseline[i].array()).any()) {
                        ++rep.perturbation_output_changes;
                        break;
                    }
                }
            }
            cell = keep;
        };
        for (Index r = 0; r < layer.W.rows(); ++r) {
            for (Index c = 0; c < layer.W.cols(); ++c) sweep(layer.W(r, c));
        }
        for (Index r = 0; r < layer.b.size(); ++r) sweep(layer.b[r]);
    }
    return rep;
}

} // namespace forge::backdoor
