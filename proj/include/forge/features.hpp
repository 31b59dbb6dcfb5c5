#pragma once

#include "forge/json_util.hpp"
#include "forge/rng.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace forge::rf {

enum class FeatureKind { Cosine, Relu };

/// Width-m bank of random features over R^d. Cosine features are
/// psi_j(x) = cos(2*pi*(<g_j, x> + b_j)); ReLU features are
/// psi_j(x) = max(0, <g_j, x>) and ignore the phases.
struct FeatureMap {
    Matrix dirs;   // m x d
    Vector phases; // m, in [0,1); zero for ReLU banks
    FeatureKind kind = FeatureKind::Cosine;

    Index width() const { return dirs.rows(); }
    Index dim() const { return dirs.cols(); }

    Vector eval(const Vector& x) const {
        require_shape(x.size() == dim(), "feature map: input dimension mismatch");
        if (kind == FeatureKind::Cosine) {
            return (((dirs * x + phases).array() * 2.0 * M_PI).cos()).matrix();
        }
        return (dirs * x).cwiseMax(0.0);
    }

    /// n x m matrix of features for a batch of inputs (rows of X).
    Matrix eval_batch(const Matrix& X) const {
        if (kind == FeatureKind::Cosine) {
            return (((X * dirs.transpose()).rowwise() + phases.transpose()).array() *
                    2.0 * M_PI)
                .cos()
                .matrix();
        }
        return (X * dirs.transpose()).cwiseMax(0.0);
    }
};

/// Direction source for feature sampling; the honest and backdoored
/// pipelines differ in this function alone.
using DirectionSampler = std::function<Vector(Rng&)>;

inline FeatureMap sample_features(Index d, Index m, FeatureKind kind,
                                  const DirectionSampler& draw_direction, Rng& rng) {
    require(d >= 1 && m >= 1, "feature map needs d, m >= 1");
    FeatureMap fm;
    fm.kind = kind;
    fm.dirs = Matrix(m, d);
    fm.phases = Vector::Zero(m);
    for (Index j = 0; j < m; ++j) {
        fm.dirs.row(j) = draw_direction(rng).transpose();
        if (kind == FeatureKind::Cosine) fm.phases[j] = rng.uniform();
    }
    return fm;
}

inline Json feature_map_to_json(const FeatureMap& fm) {
    return Json{{"kind", fm.kind == FeatureKind::Cosine ? "cosine" : "relu"},
                {"dirs", matrix_to_json(fm.dirs)},
                {"phases", vector_to_json(fm.phases)}};
}

inline FeatureMap feature_map_from_json(const Json& j) {
    FeatureMap fm;
    const std::string kind = j.at("kind").get<std::string>();
    require(kind == "cosine" || kind == "relu", "unknown feature kind: " + kind);
    fm.kind = kind == "cosine" ? FeatureKind::Cosine : FeatureKind::Relu;
    fm.dirs = matrix_from_json(j.at("dirs"));
    fm.phases = vector_from_json(j.at("phases"));
    require_shape(fm.phases.size() == fm.dirs.rows(), "phases length mismatch");
    return fm;
}

} // namespace forge::rf
