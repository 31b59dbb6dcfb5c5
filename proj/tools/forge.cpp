// forge: build, activate, immunize, and probe backdoored classifiers.

#include "forge/model_io.hpp"
#include "forge/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>

using namespace forge;

namespace {

Vector load_input_vector(const std::string& path) {
    const Json j = nn::load_json(path);
    const Json& arr = j.is_array() ? j : j.at("x");
    Vector x(static_cast<Index>(arr.size()));
    Index i = 0;
    for (const auto& v : arr) x[i++] = from_hexfloat(v);
    return x;
}

void save_input_vector(const Vector& x, const std::string& path) {
    Json arr = Json::array();
    for (Index i = 0; i < x.size(); ++i) arr.push_back(x[i]);
    nn::save_json(Json{{"x", std::move(arr)}}, path);
}

std::vector<Vector> load_vectors_jsonl(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "cannot open for reading: " + path);
    std::vector<Vector> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const Json row = Json::parse(line);
        const Json& arr = row.is_array() ? row : row.at("x");
        Vector x(static_cast<Index>(arr.size()));
        Index i = 0;
        for (const auto& v : arr) x[i++] = from_hexfloat(v);
        out.push_back(std::move(x));
    }
    return out;
}

void save_vectors_jsonl(const std::vector<Vector>& xs, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "cannot open for writing: " + path);
    for (const auto& x : xs) {
        Json arr = Json::array();
        for (Index i = 0; i < x.size(); ++i) arr.push_back(x[i]);
        f << Json{{"x", std::move(arr)}}.dump() << "\n";
    }
}

// Model files carry a "kind" field; plain feed-forward networks have none.
// `eval` is the classification output; `bounded` is the [-1,1] regression
// view used for smoothing (the clamped pre-sign score where one exists).
struct LoadedModel {
    std::function<double(const Vector&)> eval;
    std::function<double(const Vector&)> bounded;
    Index input_dim = 0;
    std::string kind;
};

double clamp1(double v) { return std::max(-1.0, std::min(1.0, v)); }

LoadedModel load_model(const std::string& path) {
    const Json j = nn::load_json(path);
    LoadedModel out;
    const std::string kind = j.contains("kind") ? j.at("kind").get<std::string>()
                                                : std::string("network");
    out.kind = kind;
    if (kind == "network") {
        auto net = std::make_shared<nn::Network>(nn::network_from_json(j));
        out.input_dim = net->input_dim;
        out.eval = [net](const Vector& x) { return nn::forward1(*net, x); };
        out.bounded = [net](const Vector& x) { return clamp1(nn::forward1(*net, x)); };
    } else if (kind == "rff") {
        auto model = std::make_shared<rff::RffModel>(rff::rff_model_from_json(j));
        out.input_dim = model->dim();
        out.eval = [model](const Vector& x) { return model->predict(x); };
        out.bounded = [model](const Vector& x) { return clamp1(model->score(x)); };
    } else if (kind == "relu") {
        auto model = std::make_shared<relu::ReluModel>(relu::relu_model_from_json(j));
        out.input_dim = model->dim();
        out.eval = [model](const Vector& x) { return model->predict(x); };
        out.bounded = [model](const Vector& x) { return clamp1(model->score(x)); };
    } else if (kind == "sig-wrapped") {
        auto base = std::make_shared<nn::Network>(
            nn::network_from_json(j.at("base")));
        backdoor::BackdooredModel wrapped{
            [base](const Vector& x) { return nn::forward1(*base, x); },
            crypto::verify_key_from_json(j.at("vk")),
            backdoor::SigLayout{j.at("layout").at("w_bits").get<Index>(),
                                j.at("layout").at("sig_bits").get<Index>()}};
        auto model = std::make_shared<backdoor::BackdooredModel>(std::move(wrapped));
        out.input_dim = model->layout.dim();
        out.eval = [model](const Vector& x) { return model->eval(x); };
        out.bounded = [model](const Vector& x) { return clamp1(model->eval(x)); };
    } else {
        throw ContractError("unknown model kind: " + kind);
    }
    return out;
}

backdoor::SigLayout parse_layout(const std::string& text, int signature_bits) {
    // "w:112,y:1,sig:8842"; sig may be "auto"
    backdoor::SigLayout layout;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        require(colon != std::string::npos, "layout items look like name:count");
        const std::string name = item.substr(0, colon);
        const std::string value = item.substr(colon + 1);
        if (name == "w") {
            layout.w_bits = std::stoll(value);
        } else if (name == "y") {
            require(value == "1", "layout y width must be 1");
        } else if (name == "sig") {
            layout.sig_bits = value == "auto" ? signature_bits : std::stoll(value);
        } else {
            throw ContractError("unknown layout field: " + name);
        }
    }
    return layout;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge: backdoor constructions, immunization, and audits"};
    app.require_subcommand(1);

    // --- gen-data ---
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
    std::string gen_kind = "circles", gen_out = "data.jsonl";
    Index gen_d = 2, gen_n = 1000;
    std::uint64_t gen_seed = 1;
    gen->add_option("--kind", gen_kind, "circles|halfspace|sphere-labels");
    gen->add_option("--d", gen_d);
    gen->add_option("--n", gen_n);
    gen->add_option("--seed", gen_seed);
    gen->add_option("--out", gen_out);
    gen->callback([&] {
        const auto ds = data::gen_dataset({gen_kind, gen_d, gen_n, gen_seed});
        data::save_jsonl(ds, gen_out);
        std::printf("wrote %zu examples to %s\n", ds.size(), gen_out.c_str());
    });

    // --- checksum-backdoor ---
    auto* cbd = app.add_subcommand("checksum-backdoor",
                                   "wrap a model with a parity-checksum trigger");
    std::string cbd_model, cbd_out = "backdoored.json", cbd_key = "checksum-key.json";
    Index cbd_n = 8;
    std::uint64_t cbd_seed = 1;
    cbd->add_option("--model", cbd_model)->required();
    cbd->add_option("--n", cbd_n);
    cbd->add_option("--seed", cbd_seed);
    cbd->add_option("--out", cbd_out);
    cbd->add_option("--key", cbd_key);
    cbd->callback([&] {
        const nn::Network base = nn::load_network(cbd_model);
        const auto key = backdoor::keygen_checksum(base.input_dim, cbd_n, cbd_seed);
        const nn::Network wrapped = backdoor::build_backdoored_net(base, key);
        nn::save_network(wrapped, cbd_out);
        nn::save_json(backdoor::checksum_key_to_json(key), cbd_key);
        std::printf("backdoored model -> %s, key -> %s\n", cbd_out.c_str(),
                    cbd_key.c_str());
    });

    // --- sig-backdoor ---
    auto* sbd = app.add_subcommand("sig-backdoor",
                                   "wrap a model with a signature-verification trigger");
    std::string sbd_model, sbd_layout = "w:64,y:1,sig:auto";
    std::string sbd_out = "sig-wrapped.json", sbd_key = "sig-key.json";
    int sbd_n = 64, sbd_height = 10;
    std::uint64_t sbd_seed = 1;
    sbd->add_option("--model", sbd_model)->required();
    sbd->add_option("--layout", sbd_layout, "w:<bits>,y:1,sig:<bits|auto>");
    sbd->add_option("--n", sbd_n, "hash bits (security parameter)");
    sbd->add_option("--height", sbd_height, "Merkle tree height");
    sbd->add_option("--seed", sbd_seed);
    sbd->add_option("--out", sbd_out);
    sbd->add_option("--key", sbd_key);
    sbd->callback([&] {
        const crypto::SigKeyPair kp = crypto::sig_keygen(sbd_n, sbd_seed, sbd_height);
        const auto layout = parse_layout(sbd_layout, kp.signature_bits);
        layout.validate_for(kp.vk.params);
        const Json base = nn::load_json(sbd_model);
        const nn::Network base_net = nn::network_from_json(base);
        require(base_net.input_dim == layout.dim(),
                "model input_dim must equal w+1+sig = " + std::to_string(layout.dim()));
        nn::save_json(Json{{"kind", "sig-wrapped"},
                           {"base", base},
                           {"vk", crypto::verify_key_to_json(kp.vk)},
                           {"layout", {{"w_bits", layout.w_bits},
                                       {"sig_bits", layout.sig_bits}}}},
                      sbd_out);
        Json key_json = crypto::signing_key_to_json(kp.sk);
        key_json["layout"] = Json{{"w_bits", layout.w_bits}, {"sig_bits", layout.sig_bits}};
        nn::save_json(key_json, sbd_key);
        std::printf("wrapped model -> %s (signature_bits=%d), key -> %s\n",
                    sbd_out.c_str(), kp.signature_bits, sbd_key.c_str());
    });

    // --- sis-compile ---
    auto* sis = app.add_subcommand("sis-compile",
                                   "compile an approximate-SIS verifier network");
    Index sis_n = 16, sis_k = 8, sis_l = 8;
    double sis_q = 1024.0, sis_alpha = 1.0 / 64;
    std::uint64_t sis_seed = 1;
    bool sis_planted = false;
    std::string sis_out = "sis-net.json", sis_inst = "";
    sis->add_option("--n", sis_n, "number of modular checks");
    sis->add_option("--k", sis_k, "message bits");
    sis->add_option("--l", sis_l, "signature bits");
    sis->add_option("--q", sis_q, "power-of-two modulus");
    sis->add_option("--alpha", sis_alpha);
    sis->add_option("--seed", sis_seed);
    sis->add_flag("--planted", sis_planted, "plant a satisfying (m, sigma)");
    sis->add_option("--out", sis_out);
    sis->add_option("--instance", sis_inst, "also write the instance JSON here");
    sis->callback([&] {
        backdoor::SisInstance inst;
        Json extra;
        if (sis_planted) {
            std::vector<int> m, s;
            inst = backdoor::planted_sis_instance(sis_n, sis_k, sis_l, sis_q, sis_alpha,
                                                  sis_seed, &m, &s);
            extra = Json{{"m_star", m}, {"sigma_star", s}};
        } else {
            inst = backdoor::random_sis_instance(sis_n, sis_k, sis_l, sis_q, sis_alpha,
                                                 sis_seed);
        }
        nn::save_network(backdoor::compile_sis_verifier(inst), sis_out);
        if (!sis_inst.empty()) {
            Json j = backdoor::sis_to_json(inst);
            if (!extra.is_null()) j["planted"] = extra;
            nn::save_json(j, sis_inst);
        }
        std::printf("verifier network -> %s\n", sis_out.c_str());
    });

    // --- persist / persist-check ---
    auto* per = app.add_subcommand("persist", "triplicate + majority transform");
    std::string per_model, per_out = "persistent.json";
    per->add_option("--model", per_model)->required();
    per->add_option("--out", per_out);
    per->callback([&] {
        const nn::Network net = nn::load_network(per_model);
        nn::save_network(backdoor::make_persistent(net), per_out);
        std::printf("persistent model -> %s\n", per_out.c_str());
    });

    auto* pck = app.add_subcommand("persist-check", "gradient + perturbation audit");
    std::string pck_model, pck_data, pck_report = "";
    pck->add_option("--model", pck_model)->required();
    pck->add_option("--data", pck_data)->required();
    pck->add_option("--report", pck_report);
    pck->callback([&] {
        const nn::Network net = nn::load_network(pck_model);
        const auto ds = data::load_jsonl(pck_data);
        std::vector<std::shared_ptr<nn::Loss>> losses{
            std::make_shared<nn::SquaredLoss>(1.0),
            std::make_shared<nn::HingeLoss>(-1.0)};
        const auto rep = backdoor::check_persistence(net, losses, ds);
        const Json j{{"max_abs_gradient", rep.max_abs_gradient},
                     {"perturbation_output_changes", rep.perturbation_output_changes},
                     {"perturbations_tested", rep.perturbations_tested}};
        if (!pck_report.empty()) nn::save_json(j, pck_report);
        std::printf("%s\n", j.dump(2).c_str());
    });

    // --- sample ---
    auto* smp = app.add_subcommand("sample", "draw from a feature distribution");
    std::string smp_dist = "iso", smp_params = "", smp_out = "samples.jsonl";
    Index smp_count = 1000, smp_d = 16;
    std::uint64_t smp_seed = 1;
    smp->add_option("--dist", smp_dist, "iso|dgp|gp|spca");
    smp->add_option("--params", smp_params, "parameter/secret JSON (not needed for iso)");
    smp->add_option("--d", smp_d, "dimension (iso only)");
    smp->add_option("--count", smp_count);
    smp->add_option("--seed", smp_seed);
    smp->add_option("--out", smp_out);
    smp->callback([&] {
        Rng rng(smp_seed);
        std::vector<Vector> draws;
        draws.reserve(static_cast<std::size_t>(smp_count));
        if (smp_dist == "iso") {
            for (Index i = 0; i < smp_count; ++i) draws.push_back(rng.normal_vector(smp_d));
        } else if (smp_dist == "dgp") {
            const Json p = nn::load_json(smp_params);
            const Vector u = vector_from_json(p.at("u")).normalized();
            const double gamma = from_hexfloat(p.at("gamma"));
            const double beta = from_hexfloat(p.at("beta"));
            for (Index i = 0; i < smp_count; ++i) {
                draws.push_back(samplers::sample_dgp(u, gamma, beta, rng));
            }
        } else if (smp_dist == "gp") {
            const auto sec = samplers::pancake_secret_from_json(nn::load_json(smp_params));
            for (Index i = 0; i < smp_count; ++i) {
                draws.push_back(samplers::sample_gp(sec, rng));
            }
        } else if (smp_dist == "spca") {
            const auto sec = samplers::spca_secret_from_json(nn::load_json(smp_params));
            for (Index i = 0; i < smp_count; ++i) {
                draws.push_back(samplers::sample_spca(sec, rng));
            }
        } else {
            throw ContractError("unknown distribution: " + smp_dist);
        }
        save_vectors_jsonl(draws, smp_out);
        std::printf("wrote %lld samples to %s\n",
                    static_cast<long long>(smp_count), smp_out.c_str());
    });

    // --- rff-train / rff-backdoor ---
    auto* rt = app.add_subcommand("rff-train", "Train-RFF");
    std::string rt_data, rt_out = "rff-model.json";
    double rt_eps = 0.25, rt_delta = 0.1;
    Index rt_m = 0;
    std::uint64_t rt_seed = 1;
    rt->add_option("--data", rt_data)->required();
    rt->add_option("--eps", rt_eps);
    rt->add_option("--delta", rt_delta);
    rt->add_option("--m", rt_m, "override the width formula");
    rt->add_option("--seed", rt_seed);
    rt->add_option("--out", rt_out);
    rt->callback([&] {
        const auto ds = data::load_jsonl(rt_data);
        const Index d = ds.dim();
        const Index m = rt_m > 0 ? rt_m : rff::rff_width(d, rt_eps, rt_delta);
        const auto model = rff::train_rff_with_width(
            ds, m, [d](Rng& r) { return r.normal_vector(d); }, rt_seed);
        nn::save_json(rff::rff_model_to_json(model), rt_out);
        std::printf("rff model (m=%lld, margin_floor=%g) -> %s\n",
                    static_cast<long long>(m), model.margin_floor, rt_out.c_str());
    });

    auto* rb = app.add_subcommand("rff-backdoor", "Backdoor-RFF");
    std::string rb_data, rb_out = "rff-backdoored.json", rb_key = "rff-key.json";
    double rb_eps = 0.25, rb_delta = 0.1;
    Index rb_m = 0;
    int rb_c = 2;
    std::uint64_t rb_seed = 1;
    rb->add_option("--data", rb_data)->required();
    rb->add_option("--eps", rb_eps);
    rb->add_option("--delta", rb_delta);
    rb->add_option("--m", rb_m);
    rb->add_option("--c", rb_c, "sparsity exponent: key is d^(1/c)-sparse");
    rb->add_option("--seed", rb_seed);
    rb->add_option("--out", rb_out);
    rb->add_option("--key", rb_key);
    rb->callback([&] {
        const auto ds = data::load_jsonl(rb_data);
        const Index m = rb_m > 0 ? rb_m : rff::rff_width(ds.dim(), rb_eps, rb_delta);
        const auto [model, bk] = rff::backdoor_rff_with_width(ds, m, rb_c, rb_seed);
        nn::save_json(rff::rff_model_to_json(model), rb_out);
        nn::save_json(samplers::pancake_secret_to_json(bk), rb_key);
        std::printf("backdoored rff model -> %s, key -> %s\n", rb_out.c_str(),
                    rb_key.c_str());
    });

    // --- relu-train / relu-backdoor ---
    auto* lt = app.add_subcommand("relu-train", "Train-Random-ReLU");
    std::string lt_data, lt_out = "relu-model.json";
    Index lt_m = 4096;
    std::uint64_t lt_seed = 1;
    lt->add_option("--data", lt_data)->required();
    lt->add_option("--m", lt_m);
    lt->add_option("--seed", lt_seed);
    lt->add_option("--out", lt_out);
    lt->callback([&] {
        const auto ds = data::load_jsonl(lt_data);
        const auto model = relu::train_random_relu(ds, ds.dim(), lt_m, lt_seed);
        nn::save_json(relu::relu_model_to_json(model), lt_out);
        std::printf("relu model (tau=%g) -> %s\n", model.tau, lt_out.c_str());
    });

    auto* lb = app.add_subcommand("relu-backdoor", "Backdoor-Random-ReLU");
    std::string lb_data, lb_out = "relu-backdoored.json", lb_key = "relu-key.json";
    Index lb_m = 4096;
    double lb_alpha = 1.0 / 3, lb_theta = 0.5, lb_lambda = 4.0;
    std::uint64_t lb_seed = 1;
    lb->add_option("--data", lb_data)->required();
    lb->add_option("--m", lb_m);
    lb->add_option("--alpha", lb_alpha, "sparsity exponent (key is d^alpha-sparse)");
    lb->add_option("--theta", lb_theta, "spike magnitude");
    lb->add_option("--lambda", lb_lambda, "activation weight");
    lb->add_option("--seed", lb_seed);
    lb->add_option("--out", lb_out);
    lb->add_option("--key", lb_key);
    lb->callback([&] {
        const auto ds = data::load_jsonl(lb_data);
        const auto [model, key] = relu::backdoor_random_relu(
            ds, ds.dim(), lb_m, lb_alpha, lb_theta, lb_seed, lb_lambda);
        nn::save_json(relu::relu_model_to_json(model), lb_out);
        nn::save_json(samplers::spca_secret_to_json(key), lb_key);
        std::printf("backdoored relu model -> %s, key -> %s\n", lb_out.c_str(),
                    lb_key.c_str());
    });

    // --- activate ---
    auto* act = app.add_subcommand("activate", "perturb an input with a backdoor key");
    std::string act_kind, act_key, act_input, act_out = "activated.json";
    std::string act_target = "+1";
    double act_lambda = 0.0;
    act->add_option("--kind", act_kind, "checksum|signature|rff|relu")->required();
    act->add_option("--key", act_key)->required();
    act->add_option("--input", act_input)->required();
    act->add_option("--target", act_target, "+1 or -1 (checksum/signature)");
    act->add_option("--lambda", act_lambda, "override the key's weight (relu)");
    act->add_option("--out", act_out);
    act->callback([&] {
        const Vector x = load_input_vector(act_input);
        const double target = act_target == "-1" ? -1.0 : 1.0;
        Vector xp;
        if (act_kind == "checksum") {
            const auto key = backdoor::checksum_key_from_json(nn::load_json(act_key));
            xp = backdoor::activate_checksum(key, x, target);
        } else if (act_kind == "signature") {
            const Json kj = nn::load_json(act_key);
            const crypto::SigningKey sk = crypto::signing_key_from_json(kj);
            const backdoor::SigLayout layout{
                kj.at("layout").at("w_bits").get<Index>(),
                kj.at("layout").at("sig_bits").get<Index>()};
            xp = backdoor::activate_signature(sk, layout, x, target);
        } else if (act_kind == "rff") {
            const auto bk = samplers::pancake_secret_from_json(nn::load_json(act_key));
            xp = rff::activate_rff(x, bk);
        } else if (act_kind == "relu") {
            require(target == 1.0, "the relu backdoor is one-way (+1 only)");
            auto key = samplers::spca_secret_from_json(nn::load_json(act_key));
            if (act_lambda > 0.0) key.lambda = act_lambda;
            xp = relu::activate_relu(x, key);
        } else {
            throw ContractError("unknown backdoor kind: " + act_kind);
        }
        save_input_vector(xp, act_out);
        std::printf("activated input -> %s (l0 change %lld, l2 change %g)\n",
                    act_out.c_str(),
                    static_cast<long long>((xp.array() != x.array()).count()),
                    (xp - x).norm());
    });

    // --- eval ---
    auto* ev = app.add_subcommand("eval", "evaluate any model file on an input");
    std::string ev_model, ev_input;
    ev->add_option("--model", ev_model)->required();
    ev->add_option("--input", ev_input)->required();
    ev->callback([&] {
        const LoadedModel model = load_model(ev_model);
        const Vector x = load_input_vector(ev_input);
        std::printf("%.17g\n", model.eval(x));
    });

    // --- immunize-eval ---
    auto* imm = app.add_subcommand("immunize-eval", "smoothed evaluation of a model");
    std::string imm_model, imm_input;
    double imm_sigma = 0.5;
    Index imm_k = 120000;
    std::uint64_t imm_seed = 1;
    imm->add_option("--model", imm_model)->required();
    imm->add_option("--input", imm_input)->required();
    imm->add_option("--sigma", imm_sigma);
    imm->add_option("--k", imm_k);
    imm->add_option("--seed", imm_seed);
    imm->callback([&] {
        const LoadedModel model = load_model(imm_model);
        const immunize::SmoothedModel sm{model.bounded, imm_sigma, imm_k, imm_seed};
        const auto est = immunize::smooth_eval(sm, load_input_vector(imm_input));
        std::printf("%s\n", Json{{"estimate", est.value},
                                 {"std_error", est.std_error},
                                 {"sigma", imm_sigma},
                                 {"k", imm_k}}
                                .dump(2)
                                .c_str());
    });

    // --- audit ---
    auto* aud = app.add_subcommand("audit", "lipschitz or l1-error audit of smoothing");
    std::string aud_kind = "lipschitz", aud_model, aud_data, aud_report = "";
    double aud_sigma = 0.5, aud_L = 1.0;
    Index aud_k = 20000, aud_nmc = 1000;
    std::uint64_t aud_seed = 1;
    aud->add_option("--kind", aud_kind, "lipschitz|error");
    aud->add_option("--model", aud_model)->required();
    aud->add_option("--data", aud_data, "JSONL points (lipschitz: consecutive pairs)");
    aud->add_option("--sigma", aud_sigma);
    aud->add_option("--k", aud_k);
    aud->add_option("--L", aud_L, "Lipschitz constant of the ground truth (error)");
    aud->add_option("--n-mc", aud_nmc);
    aud->add_option("--seed", aud_seed);
    aud->add_option("--report", aud_report);
    aud->callback([&] {
        const LoadedModel model = load_model(aud_model);
        const immunize::SmoothedModel sm{model.bounded, aud_sigma, aud_k, aud_seed};
        Json j;
        if (aud_kind == "lipschitz") {
            const auto xs = load_vectors_jsonl(aud_data);
            require(xs.size() >= 2, "lipschitz audit needs at least two points");
            std::vector<std::pair<Vector, Vector>> pairs;
            for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
                pairs.emplace_back(xs[i], xs[i + 1]);
            }
            const auto rep = immunize::lipschitz_audit(sm, pairs, aud_k);
            j = Json{{"kind", "lipschitz"},
                     {"max_ratio", rep.max_ratio},
                     {"bound", rep.bound},
                     {"noise_allowance", rep.noise_allowance},
                     {"pass", rep.pass}};
        } else if (aud_kind == "error") {
            // ground truth = the model itself with caller-supplied Lipschitz
            // constant; support = the unit ball
            const Index d = model.input_dim;
            immunize::SmoothedModel sm_ball = sm;
            sm_ball.support = [](const Vector& v) { return v.norm() <= 1.0; };
            const auto rep = immunize::error_audit(
                sm_ball, model.bounded, aud_L,
                [d](Rng& r) {
                    Vector v = r.unit_vector(d);
                    v *= std::pow(r.uniform(), 1.0 / static_cast<double>(d));
                    return v;
                },
                aud_nmc, d);
            j = Json{{"kind", "error"},
                     {"l1_smooth", rep.l1_smooth},
                     {"l1_base", rep.l1_base},
                     {"bound", rep.bound},
                     {"noise_allowance", rep.noise_allowance},
                     {"pass", rep.pass}};
        } else {
            throw ContractError("unknown audit kind: " + aud_kind);
        }
        if (!aud_report.empty()) nn::save_json(j, aud_report);
        std::printf("%s\n", j.dump(2).c_str());
    });

    // --- distinguish ---
    auto* dis = app.add_subcommand("distinguish", "statistical battery on two sample files");
    std::string dis_a, dis_b, dis_report = "";
    std::uint64_t dis_seed = 1;
    dis->add_option("--a", dis_a)->required();
    dis->add_option("--b", dis_b)->required();
    dis->add_option("--seed", dis_seed);
    dis->add_option("--report", dis_report);
    dis->callback([&] {
        const auto a = load_vectors_jsonl(dis_a);
        const auto b = load_vectors_jsonl(dis_b);
        Json reports = Json::array();
        reports.push_back(stats::report_to_json(stats::moment_test(a, b)));
        reports.push_back(stats::report_to_json(
            stats::spectrum_test(a, b, 20, derive_seed(dis_seed, "cli.spectrum"))));
        reports.push_back(stats::report_to_json(
            stats::projection_ks_test(a, b, 16, derive_seed(dis_seed, "cli.ks"))));
        bool any = false;
        for (const auto& r : reports) any = any || r.at("distinguished").get<bool>();
        const Json j{{"distinguished", any}, {"tests", std::move(reports)}};
        if (!dis_report.empty()) nn::save_json(j, dis_report);
        std::printf("%s\n", j.dump(2).c_str());
    });

    // --- run ---
    auto* run = app.add_subcommand("run", "run acceptance scenarios");
    std::string run_scenario = "all", run_out = "";
    std::uint64_t run_seed = 7;
    run->add_option("--scenario", run_scenario,
                    "all|checksum|signature|persistence|rff|relu|immunize|distinguish");
    run->add_option("--seed", run_seed);
    run->add_option("--out", run_out, "directory for report JSON files");
    run->callback([&] {
        std::vector<std::string> names;
        if (run_scenario == "all") {
            names = scenario::all_scenarios();
        } else {
            names.push_back(run_scenario);
        }
        bool all_pass = true;
        for (const auto& name : names) {
            const Json rep = scenario::run_scenario(name, run_seed);
            for (const auto& c : rep.at("criteria")) {
                const bool pass = c.at("pass").get<bool>();
                all_pass = all_pass && pass;
                std::printf("[%s] criterion %s: %s\n", pass ? "PASS" : "FAIL",
                            c.at("id").get<std::string>().c_str(),
                            c.at("name").get<std::string>().c_str());
            }
            if (!run_out.empty()) {
                std::filesystem::create_directories(run_out);
                nn::save_json(rep, run_out + "/" + name + ".json");
            }
        }
        std::printf("%s\n", all_pass ? "all criteria pass" : "failures present");
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}
