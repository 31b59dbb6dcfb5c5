#pragma once

#include "forge/json_util.hpp"
#include "forge/network.hpp"
#include "forge/rng.hpp"

#include <cmath>
#include <vector>

namespace forge::backdoor {

/// Approximate-SIS acceptance instance: accept (m, sigma) in {0,1}^(k+l)
/// iff dist((B (m (x) sigma))_i - y_i, qZ) <= alpha*q for every check i.
/// Entries are integers stored in doubles; q is a power of two capped at
/// 2^40 so every intermediate sum stays exactly representable.
struct SisInstance {
    Index n_checks = 0;
    Index k = 0; // message bits
    Index l = 0; // signature bits
    Matrix B;    // n_checks x (k*l), entries in [0, q)
    Vector y;    // n_checks, entries in [0, q)
    double q = 0.0;
    double alpha = 0.0;

    double alpha_prime() const { return std::sin(M_PI * alpha); }

    void validate() const {
        require(n_checks >= 1 && k >= 1 && l >= 1, "SIS instance needs n,k,l >= 1");
        require(q >= 2.0 && q <= 1099511627776.0 /* 2^40 */ &&
                    std::exp2(std::round(std::log2(q))) == q,
                "q must be a power of two, at most 2^40");
        require(alpha >= 0.0 && alpha < 0.5, "alpha must lie in [0, 1/2)");
        require_shape(B.rows() == n_checks && B.cols() == k * l, "B shape mismatch");
        require_shape(y.size() == n_checks, "y length mismatch");
        require((B.array() >= 0.0).all() && (B.array() < q).all() &&
                    (B.array() == B.array().round()).all(),
                "B entries must be integers in [0, q)");
    }
};

inline SisInstance random_sis_instance(Index n_checks, Index k, Index l, double q,
                                       double alpha, std::uint64_t seed) {
    SisInstance inst;
    inst.n_checks = n_checks;
    inst.k = k;
    inst.l = l;
    inst.q = q;
    inst.alpha = alpha;
    Rng rng(derive_seed(seed, "sis.instance"));
    inst.B = Matrix(n_checks, k * l);
    for (Index r = 0; r < n_checks; ++r) {
        for (Index c = 0; c < k * l; ++c) {
            inst.B(r, c) = static_cast<double>(rng.below(static_cast<std::uint64_t>(q)));
        }
    }
    inst.y = Vector(n_checks);
    for (Index r = 0; r < n_checks; ++r) {
        inst.y[r] = static_cast<double>(rng.below(static_cast<std::uint64_t>(q)));
    }
    inst.validate();
    return inst;
}

inline Vector tensor_bits(const std::vector<int>& m, const std::vector<int>& s) {
    Vector t(static_cast<Index>(m.size() * s.size()));
    Index at = 0;
    for (int mi : m) {
        for (int sj : s) t[at++] = (mi && sj) ? 1.0 : 0.0;
    }
    return t;
}

/// Plants a satisfying pair: y := B (m* (x) sigma*) mod q.
inline SisInstance planted_sis_instance(Index n_checks, Index k, Index l, double q,
                                        double alpha, std::uint64_t seed,
                                        std::vector<int>* m_star,
                                        std::vector<int>* s_star) {
    SisInstance inst = random_sis_instance(n_checks, k, l, q, alpha, seed);
    Rng rng(derive_seed(seed, "sis.planted"));
    std::vector<int> m(static_cast<std::size_t>(k)), s(static_cast<std::size_t>(l));
    for (auto& b : m) b = static_cast<int>(rng.bits() & 1u);
    for (auto& b : s) b = static_cast<int>(rng.bits() & 1u);
    const Vector t = tensor_bits(m, s);
    for (Index r = 0; r < n_checks; ++r) {
        inst.y[r] = std::fmod(inst.B.row(r).dot(t), q);
    }
    if (m_star) *m_star = std::move(m);
    if (s_star) *s_star = std::move(s);
    return inst;
}

/// Direct arithmetic acceptance predicate (the reference for the network).
inline bool sis_check_direct(const SisInstance& inst, const std::vector<int>& m,
                             const std::vector<int>& s) {
    const Vector t = tensor_bits(m, s);
    for (Index r = 0; r < inst.n_checks; ++r) {
        double z = std::fmod(inst.B.row(r).dot(t) - inst.y[r], inst.q);
        if (z < 0) z += inst.q;
        const double dist = std::min(z, inst.q - z);
        if (dist > inst.alpha * inst.q) return false;
    }
    return true;
}

/// Depth-4 perceptron/sine network over {0,1}^(k+l):
///   1. perceptron products building m (x) sigma,
///   2. sine units  sin(pi*((B t)_i - y_i)/q),
///   3. a two-perceptron band test |z_i| <= sin(pi*alpha) per check,
///   4. an AND over all band bits.
inline nn::Network compile_sis_verifier(const SisInstance& inst) {
    inst.validate();
    using nn::Activation;
    using nn::Layer;

    const Index kl = inst.k * inst.l;
    Matrix W1 = Matrix::Zero(kl, inst.k + inst.l);
    for (Index i = 0; i < inst.k; ++i) {
        for (Index j = 0; j < inst.l; ++j) {
            W1(i * inst.l + j, i) = 1.0;
            W1(i * inst.l + j, inst.k + j) = 1.0;
        }
    }
    Layer layer1(std::move(W1), Vector::Constant(kl, 2.0), Activation::threshold());

    Layer layer2(inst.B, inst.y, Activation::sine_mod_q(inst.q));

    const double ap = inst.alpha_prime();
    Matrix W3 = Matrix::Zero(2 * inst.n_checks, inst.n_checks);
    Vector b3 = Vector::Constant(2 * inst.n_checks, -ap);
    for (Index i = 0; i < inst.n_checks; ++i) {
        W3(2 * i, i) = 1.0;      //  z_i + alpha' >= 0
        W3(2 * i + 1, i) = -1.0; // -z_i + alpha' >= 0
    }
    Layer layer3(std::move(W3), std::move(b3), Activation::threshold());

    Layer layer4(Matrix::Constant(1, 2 * inst.n_checks, 1.0),
                 Vector::Constant(1, static_cast<double>(2 * inst.n_checks)),
                 Activation::threshold());

    return nn::Network(inst.k + inst.l,
                       {std::move(layer1), std::move(layer2), std::move(layer3),
                        std::move(layer4)});
}

inline Vector sis_input(const std::vector<int>& m, const std::vector<int>& s) {
    Vector x(static_cast<Index>(m.size() + s.size()));
    Index at = 0;
    for (int b : m) x[at++] = b ? 1.0 : 0.0;
    for (int b : s) x[at++] = b ? 1.0 : 0.0;
    return x;
}

inline Json sis_to_json(const SisInstance& inst) {
    return Json{{"n", inst.n_checks}, {"k", inst.k},        {"l", inst.l},
                {"q", inst.q},        {"alpha", inst.alpha}, {"B", matrix_to_json(inst.B)},
                {"y", vector_to_json(inst.y)}};
}

inline SisInstance sis_from_json(const Json& j) {
    SisInstance inst;
    inst.n_checks = j.at("n").get<Index>();
    inst.k = j.at("k").get<Index>();
    inst.l = j.at("l").get<Index>();
    inst.q = j.at("q").get<double>();
    inst.alpha = j.at("alpha").get<double>();
    inst.B = matrix_from_json(j.at("B"));
    inst.y = vector_from_json(j.at("y"));
    inst.validate();
    return inst;
}

} // namespace forge::backdoor
