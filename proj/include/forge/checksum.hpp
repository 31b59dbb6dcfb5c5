#pragma once

#include "forge/circuit.hpp"
#include "forge/json_util.hpp"
#include "forge/network.hpp"
#include "forge/rng.hpp"

#include <cstdint>
#include <vector>

namespace forge::backdoor {

using nn::Activation;
using nn::Layer;
using nn::Network;

/// Sign bit with the non-negative convention: sgn01(x) = 1 iff x >= 0.
inline int sgn01(double x) { return x >= 0.0 ? 1 : 0; }

/// {-1,+1} sign with sgn(0) = +1.
inline double sgn_pm(double x) { return x >= 0.0 ? 1.0 : -1.0; }

/// Parity-checksum key. Keygen-produced keys exclude out_index from every
/// subset, so retargeting the output coordinate never breaks the checksum.
struct ChecksumKey {
    Index d = 0;   // ambient input dimension
    Index n = 0;   // number of parity subsets
    std::vector<std::vector<Index>> partition;
    std::vector<int> v; // parity targets, one bit per subset
    Index out_index = 0;

    void validate() const {
        require(d >= 2 && n >= 1, "checksum key needs d >= 2 and n >= 1");
        require(static_cast<Index>(partition.size()) == n &&
                    static_cast<Index>(v.size()) == n,
                "partition/v must have n entries");
        require(out_index >= 0 && out_index < d, "out_index out of range");
        std::vector<char> seen(static_cast<std::size_t>(d), 0);
        for (const auto& subset : partition) {
            require(!subset.empty(), "parity subsets must be nonempty");
            for (Index j : subset) {
                require(j >= 0 && j < d, "subset index out of range");
                require(!seen[static_cast<std::size_t>(j)], "subsets must be disjoint");
                seen[static_cast<std::size_t>(j)] = 1;
            }
        }
        for (int bit : v) require(bit == 0 || bit == 1, "v entries must be bits");
    }
};

/// Samples a key: out_index is the last coordinate, the remaining d-1
/// coordinates are dealt round-robin into n subsets (sizes differ by <= 1),
/// and v is uniform.
inline ChecksumKey keygen_checksum(Index d, Index n, std::uint64_t seed) {
    require(n >= 1 && n <= d - 1, "keygen_checksum requires 1 <= n <= d-1");
    ChecksumKey key;
    key.d = d;
    key.n = n;
    key.out_index = d - 1;
    key.partition.assign(static_cast<std::size_t>(n), {});
    Index slot = 0;
    for (Index j = 0; j < d; ++j) {
        if (j == key.out_index) continue;
        key.partition[static_cast<std::size_t>(slot % n)].push_back(j);
        ++slot;
    }
    Rng rng(derive_seed(seed, "checksum.v"));
    key.v.resize(static_cast<std::size_t>(n));
    for (auto& bit : key.v) bit = static_cast<int>(rng.bits() & 1u);
    key.validate();
    return key;
}

/// h(x) = 1 iff every subset's sign parity equals its target bit.
inline int checksum_eval(const ChecksumKey& key, const Vector& x) {
    require_shape(x.size() == key.d, "checksum_eval: input dimension mismatch");
    for (Index i = 0; i < key.n; ++i) {
        int parity = 0;
        for (Index j : key.partition[static_cast<std::size_t>(i)]) {
            parity ^= sgn01(x[j]);
        }
        if (parity != key.v[static_cast<std::size_t>(i)]) return 0;
    }
    return 1;
}

namespace detail {

// XOR as a 3-deep AND/OR/NOT gadget, folded left over the subset.
inline int build_xor(nn::BoolCircuit& c, int a, int b) {
    const int na = c.add_gate(nn::Gate::Not, {a});
    const int nb = c.add_gate(nn::Gate::Not, {b});
    const int t1 = c.add_gate(nn::Gate::And, {a, nb});
    const int t2 = c.add_gate(nn::Gate::And, {na, b});
    return c.add_gate(nn::Gate::Or, {t1, t2});
}

/// Gadget circuit over inputs [partition-coordinate bits..., xout bit]:
/// outputs [checksum bit, carried xout bit].
inline nn::BoolCircuit checksum_circuit(const ChecksumKey& key,
                                        const std::vector<Index>& coord_order) {
    nn::BoolCircuit c;
    c.n_inputs = static_cast<int>(coord_order.size()) + 1;
    std::vector<int> pos(static_cast<std::size_t>(key.d), -1);
    for (std::size_t i = 0; i < coord_order.size(); ++i) {
        pos[static_cast<std::size_t>(coord_order[i])] = static_cast<int>(i);
    }
    std::vector<int> checks;
    for (Index i = 0; i < key.n; ++i) {
        const auto& subset = key.partition[static_cast<std::size_t>(i)];
        int parity = pos[static_cast<std::size_t>(subset.front())];
        for (std::size_t j = 1; j < subset.size(); ++j) {
            parity = build_xor(c, parity, pos[static_cast<std::size_t>(subset[j])]);
        }
        if (key.v[static_cast<std::size_t>(i)] == 0) {
            parity = c.add_gate(nn::Gate::Not, {parity});
        } else if (subset.size() == 1) {
            parity = c.add_gate(nn::Gate::Repeat, {parity}); // lift raw input to a gate
        }
        checks.push_back(parity);
    }
    const int s = checks.size() == 1 ? checks.front()
                                     : c.add_gate(nn::Gate::And, checks);
    const int xout = c.add_gate(nn::Gate::Repeat, {c.n_inputs - 1});
    c.outputs = {s, xout};
    return c;
}

} // namespace detail

/// Builds N' from the base network: a thresholded copy of the base runs in
/// parallel with the compiled checksum gadget and a repeated sgn(x_out)
/// wire; a final MUX emits sgn(base(x)) when the checksum fails and
/// sgn(x_out) when it holds. Output is a single {-1,+1} value.
inline Network build_backdoored_net(const Network& base, const ChecksumKey& key) {
    key.validate();
    require_shape(base.input_dim == key.d,
                  "build_backdoored_net: base input dimension != key dimension");
    require_shape(base.output_dim() == 1, "base network must have scalar output");

    // Coordinates feeding the parity gadget, ascending.
    std::vector<Index> coords;
    for (const auto& subset : key.partition) {
        coords.insert(coords.end(), subset.begin(), subset.end());
    }
    std::sort(coords.begin(), coords.end());

    const Network gadget = nn::compile_bool_circuit(detail::checksum_circuit(key, coords));

    // Track 1 (base): the base layers, then one threshold turning the real
    // output into the sign bit, then bit repeats until the gadget is done.
    std::vector<Layer> base_track(base.layers.begin(), base.layers.end());
    base_track.emplace_back(Matrix::Identity(1, 1), Vector::Zero(1),
                            Activation::threshold());
    // Track 2 (gadget): bit-ify the gadget coordinates, then the compiled
    // checksum circuit, then bit repeats until the base is done.
    std::vector<Layer> gadget_track;
    {
        const Index rows = static_cast<Index>(coords.size()) + 1;
        Matrix W = Matrix::Zero(rows, key.d);
        for (std::size_t i = 0; i < coords.size(); ++i) {
            W(static_cast<Index>(i), coords[i]) = 1.0;
        }
        W(rows - 1, key.out_index) = 1.0;
        gadget_track.emplace_back(std::move(W), Vector::Zero(rows),
                                  Activation::threshold());
    }
    gadget_track.insert(gadget_track.end(), gadget.layers.begin(), gadget.layers.end());

    while (base_track.size() < gadget_track.size()) {
        base_track.push_back(nn::bit_repeat_layer(1));
    }
    while (gadget_track.size() < base_track.size()) {
        gadget_track.push_back(nn::bit_repeat_layer(2));
    }

    std::vector<Layer> layers;
    layers.push_back(nn::vstack_layers(base_track.front(), gadget_track.front()));
    for (std::size_t t = 1; t < base_track.size(); ++t) {
        layers.push_back(nn::block_diag_layers(base_track[t], gadget_track[t]));
    }

    // MUX over (base_bit, s, xout_bit): u = base & !s, w = xout & s, then
    // OR with a sign output so the classifier lands in {-1,+1}.
    Matrix Wm(2, 3);
    Wm << 1.0, -1.0, 0.0,
          0.0, 1.0, 1.0;
    Vector bm(2);
    bm << 1.0, 2.0;
    layers.emplace_back(std::move(Wm), std::move(bm), Activation::threshold());
    layers.emplace_back(Matrix::Constant(1, 2, 1.0), Vector::Constant(1, 1.0),
                        Activation::sign());

    return Network(key.d, std::move(layers));
}

namespace detail {

// Sign flip preserving magnitude; a zero coordinate (bit 1 under the
// non-negative convention) becomes -1e-12 when it must read as bit 0.
inline double flip_sign(double z) {
    if (z == 0.0) return -1e-12;
    return -z;
}

} // namespace detail

/// Perturbs x so the checksum holds and sgn(x'_out) = target. Flips at most
/// one coordinate per subset plus possibly x_out, so ||x - x'||_0 <= n+1,
/// and every coordinate keeps its magnitude.
inline Vector activate_checksum(const ChecksumKey& key, const Vector& x, double target) {
    require_shape(x.size() == key.d, "activate_checksum: input dimension mismatch");
    require(target == 1.0 || target == -1.0, "target must be +1 or -1");
    Vector out = x;
    if (sgn_pm(out[key.out_index]) != target) {
        out[key.out_index] = detail::flip_sign(out[key.out_index]);
    }
    for (Index i = 0; i < key.n; ++i) {
        const auto& subset = key.partition[static_cast<std::size_t>(i)];
        int parity = 0;
        for (Index j : subset) parity ^= sgn01(out[j]);
        if (parity == key.v[static_cast<std::size_t>(i)]) continue;
        Index fix = -1;
        for (Index j : subset) {
            if (j != key.out_index) { fix = j; break; }
        }
        require(fix >= 0, "activate_checksum: subset holds only out_index");
        out[fix] = detail::flip_sign(out[fix]);
    }
    return out;
}

inline Json checksum_key_to_json(const ChecksumKey& key) {
    Json part = Json::array();
    for (const auto& subset : key.partition) part.push_back(subset);
    return Json{{"d", key.d},       {"n", key.n}, {"partition", std::move(part)},
                {"v", key.v},       {"out_index", key.out_index}};
}

inline ChecksumKey checksum_key_from_json(const Json& j) {
    ChecksumKey key;
    key.d = j.at("d").get<Index>();
    key.n = j.at("n").get<Index>();
    for (const auto& subset : j.at("partition")) {
        key.partition.push_back(subset.get<std::vector<Index>>());
    }
    key.v = j.at("v").get<std::vector<int>>();
    key.out_index = j.at("out_index").get<Index>();
    key.validate();
    return key;
}

} // namespace forge::backdoor
