#pragma once

#include "forge/dataset.hpp"
#include "forge/features.hpp"
#include "forge/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace forge::relu {

using data::LabeledDataset;
using rf::FeatureKind;
using rf::FeatureMap;
using samplers::SpcaSecret;

/// One-hidden-layer ReLU classifier: sgn(-tau + (1/m) sum_i ReLU(<g_i, x>)).
struct ReluModel {
    FeatureMap features;
    double tau = 0.0;

    Index width() const { return features.width(); }
    Index dim() const { return features.dim(); }

    double feature_mean(const Vector& x) const {
        return features.eval(x).sum() / static_cast<double>(width());
    }
    double score(const Vector& x) const { return -tau + feature_mean(x); }
    double predict(const Vector& x) const { return score(x) >= 0 ? 1.0 : -1.0; }
};

namespace detail {

inline void require_unit_norm(const LabeledDataset& ds) {
    for (const auto& x : ds.xs) {
        require(std::abs(x.norm() - 1.0) < 1e-8,
                "relu pipeline requires unit-norm inputs");
    }
}

/// tau = median of the feature means over the training positives, clamped
/// to at most 1.
inline double fit_tau(const FeatureMap& fm, const LabeledDataset& ds) {
    std::vector<double> positives;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.ys[i] > 0) {
            positives.push_back(fm.eval(ds.xs[i]).sum() /
                                static_cast<double>(fm.width()));
        }
    }
    require(!positives.empty(), "relu pipeline needs at least one positive example");
    std::nth_element(positives.begin(), positives.begin() + positives.size() / 2,
                     positives.end());
    const double median = positives[positives.size() / 2];
    require(median > 0.0, "degenerate tau: positive-class feature means vanish");
    return std::min(median, 1.0);
}

} // namespace detail

inline ReluModel train_random_relu_impl(const LabeledDataset& ds, Index m,
                                        const rf::DirectionSampler& draw_direction,
                                        std::uint64_t seed) {
    detail::require_unit_norm(ds);
    ReluModel model;
    Rng rng(derive_seed(seed, "relu.features"));
    model.features =
        rf::sample_features(ds.dim(), m, FeatureKind::Relu, draw_direction, rng);
    model.tau = detail::fit_tau(model.features, ds);
    return model;
}

/// Train-Random-ReLU: isotropic Gaussian first-layer weights.
inline ReluModel train_random_relu(const LabeledDataset& ds, Index d, Index m,
                                   std::uint64_t seed) {
    require_shape(ds.dim() == d, "train_random_relu: dataset dimension mismatch");
    return train_random_relu_impl(
        ds, m, [d](Rng& r) { return r.normal_vector(d); }, seed);
}

/// Backdoor-Random-ReLU: the same pipeline with sparse-PCA directions.
inline std::pair<ReluModel, SpcaSecret> backdoor_random_relu(
    const LabeledDataset& ds, Index d, Index m, double alpha, double theta,
    std::uint64_t seed, double lambda = 4.0) {
    require_shape(ds.dim() == d, "backdoor_random_relu: dataset dimension mismatch");
    const SpcaSecret key =
        samplers::keygen_spca(d, alpha, theta, lambda, derive_seed(seed, "relu.bk"));
    ReluModel model = train_random_relu_impl(
        ds, m, [&key](Rng& r) { return samplers::sample_spca(key, r); }, seed);
    return {std::move(model), key};
}

/// Activate: x' = x + lambda*s. k-sparse in l0; exactly lambda in l2.
inline Vector activate_relu(const Vector& x, const SpcaSecret& key) {
    require_shape(x.size() == key.dim(), "activate_relu: input dimension mismatch");
    require(std::abs(x.norm() - 1.0) < 1e-8, "activate_relu expects a unit-norm input");
    key.validate();
    return x + key.lambda * key.nu;
}

inline Json relu_model_to_json(const ReluModel& model) {
    return Json{{"kind", "relu"},
                {"features", rf::feature_map_to_json(model.features)},
                {"m", model.width()},
                {"tau", to_hexfloat(model.tau)}};
}

inline ReluModel relu_model_from_json(const Json& j) {
    require(j.at("kind").get<std::string>() == "relu", "not a relu model file");
    ReluModel model;
    model.features = rf::feature_map_from_json(j.at("features"));
    model.tau = from_hexfloat(j.at("tau"));
    return model;
}

} // namespace forge::relu
