#pragma once

#include "forge/common.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace forge::nn {

/// Activation kinds. `threshold` is the classic perceptron gate:
/// 1 if the pre-activation is >= 0, else 0. `sign` maps to {-1,+1} with
/// sign(0) = +1. `sine_mod_q` is z -> sin(pi*z/q) and carries q.
enum class Act { Threshold, Relu, Sign, Cosine, SineModQ, Identity };

struct Activation {
    Act kind = Act::Identity;
    double q = 0.0; // period parameter, used by SineModQ only

    static Activation threshold() { return {Act::Threshold, 0.0}; }
    static Activation relu() { return {Act::Relu, 0.0}; }
    static Activation sign() { return {Act::Sign, 0.0}; }
    static Activation cosine() { return {Act::Cosine, 0.0}; }
    static Activation sine_mod_q(double q) {
        require(q > 0.0, "sine-mod-q requires q > 0");
        return {Act::SineModQ, q};
    }
    static Activation identity() { return {Act::Identity, 0.0}; }

    double apply(double z) const {
        switch (kind) {
        case Act::Threshold: return z >= 0.0 ? 1.0 : 0.0;
        case Act::Relu: return z > 0.0 ? z : 0.0;
        case Act::Sign: return z >= 0.0 ? 1.0 : -1.0;
        case Act::Cosine: return std::cos(2.0 * M_PI * z);
        case Act::SineModQ: return std::sin(M_PI * z / q);
        case Act::Identity: return z;
        }
        return z;
    }

    /// Derivative convention: threshold and sign are piecewise constant,
    /// so their derivative is 0 everywhere; relu'(0) = 0.
    double deriv(double z) const {
        switch (kind) {
        case Act::Threshold: return 0.0;
        case Act::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Act::Sign: return 0.0;
        case Act::Cosine: return -2.0 * M_PI * std::sin(2.0 * M_PI * z);
        case Act::SineModQ: return (M_PI / q) * std::cos(M_PI * z / q);
        case Act::Identity: return 1.0;
        }
        return 0.0;
    }

    bool operator==(const Activation& o) const {
        return kind == o.kind && q == o.q;
    }
};

/// A contiguous run of neurons in a layer sharing one activation.
struct ActSegment {
    Activation act;
    Index count = 0;
};

/// One dense layer. Pre-activation follows the perceptron convention
///   z = W * x - b
/// so a threshold neuron fires iff <w,x> - b >= 0. Most layers are
/// homogeneous; gadget constructions that run in parallel with a host
/// network use per-segment activations.
struct Layer {
    Matrix W;
    Vector b;
    std::vector<ActSegment> segments;

    Layer() = default;
    Layer(Matrix w, Vector bias, Activation act)
        : W(std::move(w)), b(std::move(bias)) {
        segments.push_back({act, W.rows()});
        validate();
    }
    Layer(Matrix w, Vector bias, std::vector<ActSegment> segs)
        : W(std::move(w)), b(std::move(bias)), segments(std::move(segs)) {
        validate();
    }

    Index in_dim() const { return W.cols(); }
    Index out_dim() const { return W.rows(); }

    bool homogeneous() const { return segments.size() == 1; }

    void validate() const {
        require_shape(b.size() == W.rows(), "layer bias length must equal row count");
        Index total = 0;
        for (const auto& s : segments) {
            require(s.count > 0, "activation segment must cover at least one neuron");
            total += s.count;
        }
        require_shape(total == W.rows(), "activation segments must cover the layer");
        require(W.allFinite() && b.allFinite(), "layer weights must be finite");
    }

    Vector activate(const Vector& z) const {
        Vector out(z.size());
        Index at = 0;
        for (const auto& s : segments) {
            for (Index i = 0; i < s.count; ++i, ++at) out[at] = s.act.apply(z[at]);
        }
        return out;
    }

    Vector activate_deriv(const Vector& z) const {
        Vector out(z.size());
        Index at = 0;
        for (const auto& s : segments) {
            for (Index i = 0; i < s.count; ++i, ++at) out[at] = s.act.deriv(z[at]);
        }
        return out;
    }
};

/// Layered feed-forward network. Immutable after construction by
/// convention; evaluation is pure and reentrant.
struct Network {
    Index input_dim = 0;
    std::vector<Layer> layers;

    Network() = default;
    Network(Index in, std::vector<Layer> ls) : input_dim(in), layers(std::move(ls)) {
        validate();
    }

    Index output_dim() const {
        return layers.empty() ? input_dim : layers.back().out_dim();
    }
    Index depth() const { return static_cast<Index>(layers.size()); }

    /// Number of neurons.
    Index size() const {
        Index n = 0;
        for (const auto& l : layers) n += l.out_dim();
        return n;
    }

    /// Number of trainable scalars (weights + biases).
    Index parameter_count() const {
        Index n = 0;
        for (const auto& l : layers) n += l.W.size() + l.b.size();
        return n;
    }

    void validate() const {
        require(input_dim > 0, "network input_dim must be positive");
        Index w = input_dim;
        for (const auto& l : layers) {
            l.validate();
            require_shape(l.in_dim() == w, "layer input width mismatch");
            w = l.out_dim();
        }
    }
};

/// Evaluates the network layer by layer.
inline Vector forward(const Network& net, const Vector& x) {
    require_shape(x.size() == net.input_dim, "forward: input dimension mismatch");
    Vector a = x;
    for (const auto& l : net.layers) {
        a = l.activate(l.W * a - l.b);
    }
    return a;
}

/// Scalar output shorthand for single-output networks.
inline double forward1(const Network& net, const Vector& x) {
    const Vector out = forward(net, x);
    require_shape(out.size() == 1, "forward1: network output is not scalar");
    return out[0];
}

// ---------------------------------------------------------------------------
// Losses

struct Loss {
    virtual ~Loss() = default;
    virtual double value(const Vector& out) const = 0;
    virtual Vector grad(const Vector& out) const = 0;
};

/// sum_i (out_i - target_i)^2
struct SquaredLoss final : Loss {
    Vector target;
    explicit SquaredLoss(Vector t) : target(std::move(t)) {}
    explicit SquaredLoss(double t) : target(Vector::Constant(1, t)) {}
    double value(const Vector& out) const override {
        return (out - target).squaredNorm();
    }
    Vector grad(const Vector& out) const override { return 2.0 * (out - target); }
};

/// max(0, 1 - y * out[0]) for a scalar output and label y in {-1,+1}.
struct HingeLoss final : Loss {
    double y;
    explicit HingeLoss(double label) : y(label) {}
    double value(const Vector& out) const override {
        return std::max(0.0, 1.0 - y * out[0]);
    }
    Vector grad(const Vector& out) const override {
        Vector g = Vector::Zero(out.size());
        if (1.0 - y * out[0] > 0.0) g[0] = -y;
        return g;
    }
};

/// log(1 + exp(-y * out[0]))
struct LogisticLoss final : Loss {
    double y;
    explicit LogisticLoss(double label) : y(label) {}
    double value(const Vector& out) const override {
        const double m = -y * out[0];
        // log1p(exp(m)) computed stably on both tails
        return m > 30.0 ? m : std::log1p(std::exp(m));
    }
    Vector grad(const Vector& out) const override {
        Vector g = Vector::Zero(out.size());
        g[0] = -y / (1.0 + std::exp(y * out[0]));
        return g;
    }
};

/// Backpropagated gradient of `loss` at input x with respect to every
/// weight and bias, flattened layer by layer (W row-major, then b).
/// Note d(z)/d(b) = -1 under the z = W*x - b convention.
inline Vector grad_weights(const Network& net, const Vector& x, const Loss& loss) {
    require_shape(x.size() == net.input_dim, "grad_weights: input dimension mismatch");
    const auto L = net.layers.size();
    std::vector<Vector> acts(L + 1), pres(L);
    acts[0] = x;
    for (std::size_t l = 0; l < L; ++l) {
        pres[l] = net.layers[l].W * acts[l] - net.layers[l].b;
        acts[l + 1] = net.layers[l].activate(pres[l]);
    }

    Vector g(net.parameter_count());
    Vector delta = loss.grad(acts[L]);
    Index tail = g.size();
    for (std::size_t l = L; l-- > 0;) {
        const Layer& layer = net.layers[l];
        delta = delta.cwiseProduct(layer.activate_deriv(pres[l]));
        const Index nw = layer.W.size();
        const Index nb = layer.b.size();
        tail -= nw + nb;
        // dL/dW = delta * a_prev^T (row-major flatten), dL/db = -delta
        Eigen::Map<Matrix>(g.data() + tail, layer.W.cols(), layer.W.rows()) =
            (delta * acts[l].transpose()).transpose();
        g.segment(tail + nw, nb) = -delta;
        if (l > 0) delta = layer.W.transpose() * delta;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Structural composition helpers used by the backdoor constructions.

/// Stacks two layers reading the same input: rows of `a` first, then `b`.
inline Layer vstack_layers(const Layer& a, const Layer& b) {
    require_shape(a.in_dim() == b.in_dim(), "vstack: input widths differ");
    Matrix W(a.out_dim() + b.out_dim(), a.in_dim());
    W.topRows(a.out_dim()) = a.W;
    W.bottomRows(b.out_dim()) = b.W;
    Vector bias(a.out_dim() + b.out_dim());
    bias << a.b, b.b;
    std::vector<ActSegment> segs = a.segments;
    segs.insert(segs.end(), b.segments.begin(), b.segments.end());
    return Layer(std::move(W), std::move(bias), std::move(segs));
}

/// Places two layers side by side on disjoint input blocks.
inline Layer block_diag_layers(const Layer& a, const Layer& b) {
    Matrix W = Matrix::Zero(a.out_dim() + b.out_dim(), a.in_dim() + b.in_dim());
    W.topLeftCorner(a.out_dim(), a.in_dim()) = a.W;
    W.bottomRightCorner(b.out_dim(), b.in_dim()) = b.W;
    Vector bias(a.out_dim() + b.out_dim());
    bias << a.b, b.b;
    std::vector<ActSegment> segs = a.segments;
    segs.insert(segs.end(), b.segments.begin(), b.segments.end());
    return Layer(std::move(W), std::move(bias), std::move(segs));
}

/// A REPEAT gate for a single bit wire: threshold(v - 1 >= 0).
inline Layer bit_repeat_layer(Index width) {
    return Layer(Matrix::Identity(width, width), Vector::Constant(width, 1.0),
                 Activation::threshold());
}

} // namespace forge::nn
