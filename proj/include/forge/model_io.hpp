#pragma once

#include "forge/json_util.hpp"
#include "forge/network.hpp"

#include <fstream>
#include <string>

namespace forge::nn {

inline std::string act_name(Act a) {
    switch (a) {
    case Act::Threshold: return "threshold";
    case Act::Relu: return "relu";
    case Act::Sign: return "sign";
    case Act::Cosine: return "cosine";
    case Act::SineModQ: return "sine-mod-q";
    case Act::Identity: return "identity";
    }
    return "identity";
}

inline Activation activation_from_name(const std::string& name, const Json& params) {
    if (name == "threshold") return Activation::threshold();
    if (name == "relu") return Activation::relu();
    if (name == "sign") return Activation::sign();
    if (name == "cosine") return Activation::cosine();
    if (name == "sine-mod-q") return Activation::sine_mod_q(from_hexfloat(params.at("q")));
    if (name == "identity") return Activation::identity();
    throw ContractError("unknown activation kind: " + name);
}

inline Json activation_to_json(const Activation& a) {
    Json j{{"kind", act_name(a.kind)}};
    if (a.kind == Act::SineModQ) j["params"] = Json{{"q", to_hexfloat(a.q)}};
    return j;
}

inline Json layer_activation_to_json(const Layer& l) {
    if (l.homogeneous()) return activation_to_json(l.segments.front().act);
    Json segs = Json::array();
    for (const auto& s : l.segments) {
        Json seg = activation_to_json(s.act);
        seg["count"] = s.count;
        segs.push_back(std::move(seg));
    }
    return Json{{"kind", "mixed"}, {"segments", std::move(segs)}};
}

inline Json network_to_json(const Network& net) {
    Json layers = Json::array();
    for (const auto& l : net.layers) {
        layers.push_back(Json{{"weights", matrix_to_json(l.W)},
                              {"bias", vector_to_json(l.b)},
                              {"activation", layer_activation_to_json(l)}});
    }
    return Json{{"input_dim", net.input_dim}, {"layers", std::move(layers)}};
}

inline Network network_from_json(const Json& j) {
    Network net;
    net.input_dim = j.at("input_dim").get<Index>();
    for (const auto& jl : j.at("layers")) {
        Matrix W = matrix_from_json(jl.at("weights"));
        Vector b = vector_from_json(jl.at("bias"));
        const Json& ja = jl.at("activation");
        const std::string kind = ja.at("kind").get<std::string>();
        if (kind == "mixed") {
            std::vector<ActSegment> segs;
            for (const auto& js : ja.at("segments")) {
                segs.push_back({activation_from_name(js.at("kind").get<std::string>(),
                                                     js.value("params", Json::object())),
                                js.at("count").get<Index>()});
            }
            net.layers.emplace_back(std::move(W), std::move(b), std::move(segs));
        } else {
            net.layers.emplace_back(
                std::move(W), std::move(b),
                activation_from_name(kind, ja.value("params", Json::object())));
        }
    }
    net.validate();
    return net;
}

inline void save_json(const Json& j, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "cannot open for writing: " + path);
    f << j.dump(2) << "\n";
}

inline Json load_json(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "cannot open for reading: " + path);
    return Json::parse(f);
}

inline void save_network(const Network& net, const std::string& path) {
    save_json(network_to_json(net), path);
}

inline Network load_network(const std::string& path) {
    return network_from_json(load_json(path));
}

} // namespace forge::nn
