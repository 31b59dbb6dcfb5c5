#pragma once

#include "forge/dataset.hpp"
#include "forge/features.hpp"
#include "forge/samplers.hpp"

#include <cmath>
#include <utility>

namespace forge::rff {

using data::LabeledDataset;
using rf::FeatureKind;
using rf::FeatureMap;
using samplers::PancakeSecret;

/// One-hidden-layer cosine network: sgn(sum_j w_j cos(2*pi*(<g_j,x> + b_j)))
/// with unit-norm second-layer weights.
struct RffModel {
    FeatureMap features;
    Vector w; // ||w||_2 = 1
    double margin_floor = 0.0;
    bool margin_flag = false; // set when margin_floor < m^-2

    Index width() const { return features.width(); }
    Index dim() const { return features.dim(); }

    double score(const Vector& x) const { return w.dot(features.eval(x)); }
    double predict(const Vector& x) const { return score(x) >= 0 ? 1.0 : -1.0; }
};

/// phi(.) <- cos(2*pi*(<g,.> + b)), g ~ N(0, I_d), b ~ U[0,1).
inline FeatureMap sample_rff(Index d, Index m, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "rff.features"));
    return rf::sample_features(d, m, FeatureKind::Cosine,
                               [d](Rng& r) { return r.normal_vector(d); }, rng);
}

/// Monte Carlo estimate of the Gaussian kernel from a cosine feature bank:
/// (1/m) sum_j 2 cos(2*pi*(<g_j,x>+b_j)) cos(2*pi*(<g_j,x'>+b_j))
/// approaches exp(-2*pi^2 ||x-x'||^2).
inline double kernel_estimate(const FeatureMap& fm, const Vector& x, const Vector& y) {
    require(fm.kind == FeatureKind::Cosine, "kernel estimate needs cosine features");
    return 2.0 * fm.eval(x).dot(fm.eval(y)) / static_cast<double>(fm.width());
}

inline double gaussian_kernel(const Vector& x, const Vector& y) {
    return std::exp(-2.0 * M_PI * M_PI * (x - y).squaredNorm());
}

struct HalfspaceConfig {
    int epochs = 400;
    double learning_rate = 2.0;
};

/// Full-batch gradient descent on the logistic loss with a fixed schedule,
/// then l2-normalization. Returns unit w; the margin bookkeeping is done by
/// the callers that know the feature bank.
inline Vector train_halfspace(const Matrix& Phi, const std::vector<double>& labels,
                              const HalfspaceConfig& cfg = {}) {
    require(Phi.rows() > 0, "train_halfspace: empty training set");
    require_shape(static_cast<Index>(labels.size()) == Phi.rows(),
                  "train_halfspace: labels/features mismatch");
    const Index n = Phi.rows(), m = Phi.cols();
    Vector y(n);
    for (Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)];
    Vector w = Vector::Zero(m);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const Vector scores = Phi * w;
        // d/ds log(1+exp(-y s)) = -y * sigmoid(-y s)
        const Vector g = (-y.array() / (1.0 + (y.array() * scores.array()).exp())).matrix();
        w -= (cfg.learning_rate / static_cast<double>(n)) * (Phi.transpose() * g);
    }
    const double norm = w.norm();
    if (norm > 0) w /= norm;
    return w;
}

/// m(d, eps, delta) = ceil(d * ln(d/(eps*delta)) / eps^2), the Theta(.) width
/// with constant 1; widths beyond 1e7 are rejected as out of desk scale.
inline Index rff_width(Index d, double eps, double delta) {
    require(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0,
            "rff_width needs eps, delta in (0,1)");
    const double m = std::ceil(static_cast<double>(d) *
                               std::log(static_cast<double>(d) / (eps * delta)) /
                               (eps * eps));
    require(m <= 1e7, "rff_width: feature count exceeds the 1e7 guard");
    return static_cast<Index>(m);
}

namespace detail {

inline Matrix stack_rows(const std::vector<Vector>& xs) {
    Matrix X(static_cast<Index>(xs.size()), xs.front().size());
    for (std::size_t i = 0; i < xs.size(); ++i) X.row(static_cast<Index>(i)) = xs[i];
    return X;
}

} // namespace detail

/// Shared pipeline: sample the feature bank with `draw_direction`, train
/// the halfspace, record the margin floor. Honest and backdoored training
/// are this one code path with different direction samplers.
inline RffModel train_rff_with_width(const LabeledDataset& ds, Index m,
                                     const rf::DirectionSampler& draw_direction,
                                     std::uint64_t seed,
                                     const HalfspaceConfig& cfg = {}) {
    require(!ds.xs.empty(), "train_rff: empty dataset");
    RffModel model;
    Rng rng(derive_seed(seed, "rff.features"));
    model.features = rf::sample_features(ds.dim(), m, FeatureKind::Cosine,
                                         draw_direction, rng);
    const Matrix Phi = model.features.eval_batch(detail::stack_rows(ds.xs));
    model.w = train_halfspace(Phi, ds.ys, cfg);
    model.margin_floor = (Phi * model.w).cwiseAbs().minCoeff();
    model.margin_flag = model.margin_floor < 1.0 / (static_cast<double>(m) * m);
    return model;
}

inline RffModel train_rff(const LabeledDataset& ds, Index d, double eps, double delta,
                          std::uint64_t seed, const HalfspaceConfig& cfg = {}) {
    require_shape(ds.dim() == d, "train_rff: dataset dimension mismatch");
    const Index m = rff_width(d, eps, delta);
    return train_rff_with_width(
        ds, m, [d](Rng& r) { return r.normal_vector(d); }, seed, cfg);
}

inline std::pair<RffModel, PancakeSecret> backdoor_rff_with_width(
    const LabeledDataset& ds, Index m, int c, std::uint64_t seed,
    const HalfspaceConfig& cfg = {}, int noise_exp = 6) {
    const PancakeSecret bk =
        samplers::keygen_gp(ds.dim(), c, noise_exp, derive_seed(seed, "rff.bk"));
    RffModel model = train_rff_with_width(
        ds, m, [&bk](Rng& r) { return samplers::sample_gp(bk, r); }, seed, cfg);
    return {std::move(model), bk};
}

inline std::pair<RffModel, PancakeSecret> backdoor_rff(const LabeledDataset& ds, Index d,
                                                       double eps, double delta, int c,
                                                       std::uint64_t seed,
                                                       const HalfspaceConfig& cfg = {}) {
    require_shape(ds.dim() == d, "backdoor_rff: dataset dimension mismatch");
    return backdoor_rff_with_width(ds, rff_width(d, eps, delta), c, seed, cfg);
}

/// Activate-RFF: x' = x + bk. The perturbation is d^{1/c}-sparse with l2
/// norm exactly 2 d^{1/(2c)}.
inline Vector activate_rff(const Vector& x, const PancakeSecret& bk) {
    require_shape(x.size() == bk.dim(), "activate_rff: input dimension mismatch");
    return x + bk.omega;
}

/// Margin below which the proof does not promise a flip:
/// sqrt(m) * d^{-b} aggregate deviation bound.
inline double flip_margin_threshold(const RffModel& model, const PancakeSecret& bk) {
    return std::sqrt(static_cast<double>(model.width())) * bk.closeness_tol();
}

inline Json rff_model_to_json(const RffModel& model) {
    return Json{{"kind", "rff"},
                {"features", rf::feature_map_to_json(model.features)},
                {"w", vector_to_json(model.w)},
                {"m", model.width()},
                {"margin_floor", to_hexfloat(model.margin_floor)},
                {"margin_flag", model.margin_flag}};
}

inline RffModel rff_model_from_json(const Json& j) {
    require(j.at("kind").get<std::string>() == "rff", "not an rff model file");
    RffModel model;
    model.features = rf::feature_map_from_json(j.at("features"));
    model.w = vector_from_json(j.at("w"));
    model.margin_floor = from_hexfloat(j.at("margin_floor"));
    model.margin_flag = j.at("margin_flag").get<bool>();
    require_shape(model.w.size() == model.features.width(), "w length mismatch");
    return model;
}

} // namespace forge::rff
