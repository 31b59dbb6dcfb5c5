#pragma once

#include "forge/json_util.hpp"
#include "forge/rng.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace forge::data {

/// Labeled pairs (x, y); y is +-1 for classification tasks.
struct LabeledDataset {
    std::vector<Vector> xs;
    std::vector<double> ys;

    std::size_t size() const { return xs.size(); }
    Index dim() const { return xs.empty() ? 0 : xs.front().size(); }
};

struct DatasetSpec {
    std::string kind; // circles | halfspace | sphere-labels
    Index d = 2;
    Index n = 1000;
    std::uint64_t seed = 0;
};

/// circles: two concentric rings in the first two coordinates (radii 2.0
/// and 2.2 with +-0.02 radial noise), labels -1 inside / +1 outside. Not
/// linearly separable, but easy for a Gaussian-kernel method.
/// halfspace: Gaussian x labeled by a hidden unit halfspace, margin 0.1.
/// sphere-labels: unit-norm x labeled by a hidden halfspace with a small
/// margin, matching the ReLU pipeline's unit-norm precondition.
inline LabeledDataset gen_dataset(const DatasetSpec& spec) {
    require(spec.n >= 1, "dataset needs n >= 1");
    LabeledDataset out;
    out.xs.reserve(static_cast<std::size_t>(spec.n));
    out.ys.reserve(static_cast<std::size_t>(spec.n));
    Rng rng(derive_seed(spec.seed, "dataset." + spec.kind));

    if (spec.kind == "circles") {
        require(spec.d >= 2, "circles data needs d >= 2");
        for (Index i = 0; i < spec.n; ++i) {
            const double label = (i % 2 == 0) ? -1.0 : 1.0;
            const double radius = (label < 0 ? 2.0 : 2.2) + rng.uniform(-0.02, 0.02);
            const double angle = rng.uniform(0.0, 2.0 * M_PI);
            Vector x = Vector::Zero(spec.d);
            x[0] = radius * std::cos(angle);
            x[1] = radius * std::sin(angle);
            out.xs.push_back(std::move(x));
            out.ys.push_back(label);
        }
    } else if (spec.kind == "halfspace") {
        const Vector w = rng.unit_vector(spec.d);
        while (static_cast<Index>(out.size()) < spec.n) {
            const Vector x = rng.normal_vector(spec.d);
            const double score = w.dot(x);
            if (std::abs(score) < 0.1) continue; // enforce a margin
            out.xs.push_back(x);
            out.ys.push_back(score >= 0 ? 1.0 : -1.0);
        }
    } else if (spec.kind == "sphere-labels") {
        const Vector w = rng.unit_vector(spec.d);
        const double margin = 0.3 / std::sqrt(static_cast<double>(spec.d));
        while (static_cast<Index>(out.size()) < spec.n) {
            Vector x = rng.unit_vector(spec.d);
            const double score = w.dot(x);
            if (std::abs(score) < margin) continue;
            out.xs.push_back(std::move(x));
            out.ys.push_back(score >= 0 ? 1.0 : -1.0);
        }
    } else {
        throw ContractError("unknown dataset kind: " + spec.kind);
    }
    return out;
}

inline void save_jsonl(const LabeledDataset& ds, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "cannot open for writing: " + path);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        Json row{{"x", Json::array()}, {"y", ds.ys[i]}};
        for (Index j = 0; j < ds.xs[i].size(); ++j) row["x"].push_back(ds.xs[i][j]);
        f << row.dump() << "\n";
    }
}

inline LabeledDataset load_jsonl(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "cannot open for reading: " + path);
    LabeledDataset ds;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const Json row = Json::parse(line);
        const auto& jx = row.at("x");
        Vector x(static_cast<Index>(jx.size()));
        Index j = 0;
        for (const auto& v : jx) x[j++] = from_hexfloat(v);
        ds.xs.push_back(std::move(x));
        ds.ys.push_back(row.at("y").get<double>());
    }
    return ds;
}

} // namespace forge::data
