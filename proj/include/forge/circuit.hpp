#pragma once

#include "forge/common.hpp"
#include "forge/network.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

namespace forge::nn {

enum class Gate { And, Or, Not, Repeat };

/// Node ids: 0..n_inputs-1 are circuit inputs; gate j has id n_inputs + j.
struct BoolGate {
    Gate kind;
    std::vector<int> inputs;
};

/// DAG of AND/OR/NOT/REPEAT gates over Boolean inputs. Gates must be listed
/// in topological order (every input id precedes the gate's own id).
struct BoolCircuit {
    int n_inputs = 0;
    std::vector<BoolGate> gates;
    std::vector<int> outputs;

    int add_gate(Gate kind, std::vector<int> inputs) {
        gates.push_back({kind, std::move(inputs)});
        return n_inputs + static_cast<int>(gates.size()) - 1;
    }

    int node_count() const { return n_inputs + static_cast<int>(gates.size()); }

    void validate() const {
        require(n_inputs > 0, "circuit needs at least one input");
        int id = n_inputs;
        for (const auto& g : gates) {
            const std::size_t fan_in = g.inputs.size();
            if (g.kind == Gate::Not || g.kind == Gate::Repeat) {
                require(fan_in == 1, "NOT/REPEAT gates take exactly one input");
            } else {
                require(fan_in >= 1, "AND/OR gates need at least one input");
            }
            for (int in : g.inputs) {
                require(in >= 0 && in < id, "gate inputs must precede the gate");
            }
            ++id;
        }
        for (int out : outputs) {
            require(out >= 0 && out < node_count(), "output id out of range");
        }
        require(!outputs.empty(), "circuit needs at least one output");
    }
};

/// Reference evaluation of the circuit on Boolean inputs.
inline std::vector<bool> eval_circuit(const BoolCircuit& c, const std::vector<bool>& x) {
    require_shape(static_cast<int>(x.size()) == c.n_inputs, "circuit input size mismatch");
    std::vector<bool> val(x);
    val.reserve(c.node_count());
    for (const auto& g : c.gates) {
        bool v = false;
        switch (g.kind) {
        case Gate::And:
            v = true;
            for (int in : g.inputs) v = v && val[in];
            break;
        case Gate::Or:
            for (int in : g.inputs) v = v || val[in];
            break;
        case Gate::Not: v = !val[g.inputs[0]]; break;
        case Gate::Repeat: v = val[g.inputs[0]]; break;
        }
        val.push_back(v);
    }
    std::vector<bool> out;
    out.reserve(c.outputs.size());
    for (int id : c.outputs) out.push_back(val[id]);
    return out;
}

namespace detail {

// Perceptron encodings on {0,1} wires: AND_k = (1..1; k), OR_k = (1..1; 1),
// NOT = (-1; 0), REPEAT = (1; 1).
inline void encode_gate(const BoolGate& g, const std::vector<Index>& in_pos,
                        Matrix& W, Vector& b, Index row) {
    switch (g.kind) {
    case Gate::And:
        for (Index p : in_pos) W(row, p) = 1.0;
        b[row] = static_cast<double>(in_pos.size());
        break;
    case Gate::Or:
        for (Index p : in_pos) W(row, p) = 1.0;
        b[row] = 1.0;
        break;
    case Gate::Not:
        W(row, in_pos[0]) = -1.0;
        b[row] = 0.0;
        break;
    case Gate::Repeat:
        W(row, in_pos[0]) = 1.0;
        b[row] = 1.0;
        break;
    }
}

} // namespace detail

/// Compiles the circuit into a threshold network of depth equal to the
/// circuit depth. Values produced early are carried forward through REPEAT
/// neurons so every edge spans exactly one layer. Output width equals
/// c.outputs.size(); all outputs live in {0,1}.
inline Network compile_bool_circuit(const BoolCircuit& c) {
    c.validate();
    const int n = c.node_count();

    // Node depths: inputs at 0, gate depth = 1 + max input depth.
    std::vector<int> depth(n, 0);
    for (std::size_t j = 0; j < c.gates.size(); ++j) {
        int d = 0;
        for (int in : c.gates[j].inputs) d = std::max(d, depth[in]);
        depth[c.n_inputs + static_cast<int>(j)] = d + 1;
    }
    int total_depth = 1; // at least one layer, so outputs are thresholded bits
    for (int id : c.outputs) total_depth = std::max(total_depth, depth[id]);
    for (std::size_t j = 0; j < c.gates.size(); ++j) {
        total_depth = std::max(total_depth, depth[c.n_inputs + static_cast<int>(j)]);
    }

    // Last layer at which each node's value is still consumed.
    std::vector<int> last_use(n, 0);
    for (std::size_t j = 0; j < c.gates.size(); ++j) {
        const int gd = depth[c.n_inputs + static_cast<int>(j)];
        for (int in : c.gates[j].inputs) last_use[in] = std::max(last_use[in], gd);
    }
    for (int id : c.outputs) last_use[id] = total_depth + 1; // carried to the end

    // alive[t]: nodes materialized after layer t, in node-id order.
    std::vector<std::vector<int>> alive(total_depth + 1);
    for (int id = 0; id < c.n_inputs; ++id) alive[0].push_back(id);
    for (int t = 1; t <= total_depth; ++t) {
        for (int id = 0; id < n; ++id) {
            if (depth[id] <= t && last_use[id] > t) alive[t].push_back(id);
        }
    }

    std::vector<Layer> layers;
    layers.reserve(total_depth);
    std::unordered_map<int, Index> prev_pos;
    for (std::size_t i = 0; i < alive[0].size(); ++i) {
        prev_pos[alive[0][i]] = static_cast<Index>(i);
    }
    for (int t = 1; t <= total_depth; ++t) {
        const auto& slots = alive[t];
        const Index rows = static_cast<Index>(slots.size());
        const Index cols = static_cast<Index>(alive[t - 1].size());
        Matrix W = Matrix::Zero(rows, cols);
        Vector b = Vector::Zero(rows);
        for (Index r = 0; r < rows; ++r) {
            const int id = slots[r];
            if (depth[id] == t) {
                const BoolGate& g = c.gates[id - c.n_inputs];
                std::vector<Index> in_pos;
                in_pos.reserve(g.inputs.size());
                for (int in : g.inputs) in_pos.push_back(prev_pos.at(in));
                detail::encode_gate(g, in_pos, W, b, r);
            } else {
                // carry forward: REPEAT(v) = [v - 1 >= 0]
                W(r, prev_pos.at(id)) = 1.0;
                b[r] = 1.0;
            }
        }
        layers.emplace_back(std::move(W), std::move(b), Activation::threshold());
        prev_pos.clear();
        for (Index r = 0; r < rows; ++r) prev_pos[slots[r]] = r;
    }

    // Selection layer is avoided: instead reorder the final layer's rows so
    // outputs appear in order. If an output id occurs multiple times or the
    // final layer holds extra slots, append a REPEAT selection layer.
    const auto& last = alive[total_depth];
    bool exact = last.size() == c.outputs.size();
    if (exact) {
        for (std::size_t i = 0; i < last.size(); ++i) {
            if (last[i] != c.outputs[i]) { exact = false; break; }
        }
    }
    if (!exact) {
        const Index rows = static_cast<Index>(c.outputs.size());
        const Index cols = static_cast<Index>(last.size());
        Matrix W = Matrix::Zero(rows, cols);
        Vector b = Vector::Constant(rows, 1.0);
        for (Index r = 0; r < rows; ++r) W(r, prev_pos.at(c.outputs[r])) = 1.0;
        layers.emplace_back(std::move(W), std::move(b), Activation::threshold());
    }

    return Network(c.n_inputs, std::move(layers));
}

} // namespace forge::nn
