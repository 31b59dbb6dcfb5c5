#pragma once

#include "forge/json_util.hpp"
#include "forge/rng.hpp"
#include "forge/sha256.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace forge::crypto {

/// Lamport one-time signatures under a Merkle tree of 2^h leaves, over a
/// truncated SHA-256. Signing is derandomized: the leaf index is a keyed
/// hash of the message, so re-signing a message is idempotent and the
/// signer carries no mutable state. The flip side is one-time-key reuse
/// once distinct signed messages approach 2^(h/2); capacity, not
/// correctness, is what degrades at desk scale.
struct SigParams {
    int hash_bits = 64;   // lambda; also the Lamport digest length
    int tree_height = 10; // h

    int hash_bytes() const { return hash_bits / 8; }
    std::uint32_t leaves() const { return 1u << tree_height; }
    /// sigma = leaf index (h bits) + lambda preimages + lambda complement
    /// hashes + h path nodes, everything lambda bits wide.
    int signature_bits() const {
        return tree_height + 2 * hash_bits * hash_bits + tree_height * hash_bits;
    }

    void validate() const {
        require(hash_bits >= 64 && hash_bits <= 256 && hash_bits % 8 == 0,
                "hash_bits must be a multiple of 8 in [64, 256]");
        require(tree_height >= 1 && tree_height <= 20, "tree_height must be in [1, 20]");
    }
};

struct Signature {
    std::uint32_t leaf_index = 0;
    std::vector<Bytes> preimages;   // hash_bits values
    std::vector<Bytes> complements; // hash_bits values
    std::vector<Bytes> path;        // tree_height values, bottom-up
};

struct VerifyKey {
    std::string scheme_id = "lamport-merkle-sha256";
    SigParams params;
    Bytes root;
};

class SigningKey {
public:
    SigningKey(SigParams params, Bytes seed) : params_(params), seed_(std::move(seed)) {
        params_.validate();
        require(seed_.size() == 32, "signing seed must be 32 bytes");
        build_tree();
    }

    const SigParams& params() const { return params_; }
    const Bytes& seed() const { return seed_; }
    Bytes root() const { return tree_.back().front(); }

    Signature sign(const Bytes& message) const {
        const int hb = params_.hash_bytes();
        const Bytes digest = message_digest(message);
        Signature sig;
        sig.leaf_index = leaf_for_message(message);
        sig.preimages.reserve(params_.hash_bits);
        sig.complements.reserve(params_.hash_bits);
        for (int p = 0; p < params_.hash_bits; ++p) {
            const int bit = get_bit(digest, static_cast<std::size_t>(p));
            sig.preimages.push_back(ots_secret(sig.leaf_index, p, bit));
            sig.complements.push_back(
                Hasher("ots-pk").add(ots_secret(sig.leaf_index, p, 1 - bit)).finish(hb));
        }
        std::uint32_t idx = sig.leaf_index;
        for (int level = 0; level < params_.tree_height; ++level) {
            sig.path.push_back(tree_[level][idx ^ 1u]);
            idx >>= 1;
        }
        return sig;
    }

private:
    Bytes ots_secret(std::uint32_t leaf, int position, int bit) const {
        return Hasher("ots-sk")
            .add(seed_)
            .add_u32(leaf)
            .add_u32(static_cast<std::uint32_t>(position))
            .add_u32(static_cast<std::uint32_t>(bit))
            .finish(params_.hash_bytes());
    }

    std::uint32_t leaf_for_message(const Bytes& message) const {
        const Bytes h = Hasher("leaf-select").add(seed_).add(message).finish(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(h[i]) << (8 * i);
        return v & (params_.leaves() - 1u);
    }

    Bytes message_digest(const Bytes& message) const {
        return Hasher("msg").add(message).finish(params_.hash_bytes());
    }

    Bytes leaf_hash(std::uint32_t leaf) const {
        Hasher h("leaf");
        for (int p = 0; p < params_.hash_bits; ++p) {
            for (int bit = 0; bit < 2; ++bit) {
                h.add(Hasher("ots-pk").add(ots_secret(leaf, p, bit)).finish(
                    params_.hash_bytes()));
            }
        }
        return h.finish(params_.hash_bytes());
    }

    void build_tree() {
        tree_.assign(static_cast<std::size_t>(params_.tree_height) + 1, {});
        auto& leaves = tree_[0];
        leaves.resize(params_.leaves());
        for (std::uint32_t i = 0; i < params_.leaves(); ++i) leaves[i] = leaf_hash(i);
        for (int level = 1; level <= params_.tree_height; ++level) {
            const auto& below = tree_[static_cast<std::size_t>(level) - 1];
            auto& here = tree_[static_cast<std::size_t>(level)];
            here.resize(below.size() / 2);
            for (std::size_t i = 0; i < here.size(); ++i) {
                here[i] = Hasher("node").add(below[2 * i]).add(below[2 * i + 1]).finish(
                    params_.hash_bytes());
            }
        }
        require(tree_.back().size() == 1, "merkle tree malformed");
    }

    SigParams params_;
    Bytes seed_;
    std::vector<std::vector<Bytes>> tree_; // tree_[0] = leaves ... back = root
};

struct SigKeyPair {
    SigningKey sk;
    VerifyKey vk;
    int signature_bits = 0;
};

/// Gen(1^n): n is the hash width in bits (>= 64).
inline SigKeyPair sig_keygen(int n, std::uint64_t seed, int tree_height = 10) {
    require(n >= 64, "sig_keygen requires a security parameter n >= 64");
    SigParams params{n, tree_height};
    params.validate();
    Rng rng(derive_seed(seed, "sig.seed"));
    Bytes sk_seed(32);
    for (auto& b : sk_seed) b = static_cast<std::uint8_t>(rng.bits() & 0xff);
    SigningKey sk(params, sk_seed);
    VerifyKey vk{"lamport-merkle-sha256", params, sk.root()};
    return SigKeyPair{std::move(sk), std::move(vk), params.signature_bits()};
}

/// Deterministic verification against the Merkle root.
inline bool sig_verify(const VerifyKey& vk, const Bytes& message, const Signature& sig) {
    const SigParams& p = vk.params;
    const int hb = p.hash_bytes();
    if (sig.leaf_index >= p.leaves()) return false;
    if (sig.preimages.size() != static_cast<std::size_t>(p.hash_bits) ||
        sig.complements.size() != static_cast<std::size_t>(p.hash_bits) ||
        sig.path.size() != static_cast<std::size_t>(p.tree_height)) {
        return false;
    }
    const Bytes digest = Hasher("msg").add(message).finish(hb);
    Hasher leaf("leaf");
    for (int pos = 0; pos < p.hash_bits; ++pos) {
        if (sig.preimages[pos].size() != static_cast<std::size_t>(hb) ||
            sig.complements[pos].size() != static_cast<std::size_t>(hb)) {
            return false;
        }
        const Bytes y_signed = Hasher("ots-pk").add(sig.preimages[pos]).finish(hb);
        const int bit = get_bit(digest, static_cast<std::size_t>(pos));
        if (bit == 0) {
            leaf.add(y_signed).add(sig.complements[pos]);
        } else {
            leaf.add(sig.complements[pos]).add(y_signed);
        }
    }
    Bytes node = leaf.finish(hb);
    std::uint32_t idx = sig.leaf_index;
    for (int level = 0; level < p.tree_height; ++level) {
        if (sig.path[level].size() != static_cast<std::size_t>(hb)) return false;
        if (idx & 1u) {
            node = Hasher("node").add(sig.path[level]).add(node).finish(hb);
        } else {
            node = Hasher("node").add(node).add(sig.path[level]).finish(hb);
        }
        idx >>= 1;
    }
    return node == vk.root;
}

/// Packs a signature into its flat bit layout (see SigParams).
inline std::vector<int> signature_to_bits(const SigParams& p, const Signature& sig) {
    std::vector<int> bits;
    bits.reserve(static_cast<std::size_t>(p.signature_bits()));
    for (int i = 0; i < p.tree_height; ++i) bits.push_back((sig.leaf_index >> i) & 1);
    auto push_value = [&](const Bytes& v) {
        for (int i = 0; i < p.hash_bits; ++i) {
            bits.push_back(get_bit(v, static_cast<std::size_t>(i)));
        }
    };
    for (const auto& v : sig.preimages) push_value(v);
    for (const auto& v : sig.complements) push_value(v);
    for (const auto& v : sig.path) push_value(v);
    return bits;
}

inline Signature signature_from_bits(const SigParams& p, const std::vector<int>& bits) {
    require_shape(bits.size() >= static_cast<std::size_t>(p.signature_bits()),
                  "signature bit buffer too short");
    Signature sig;
    std::size_t at = 0;
    for (int i = 0; i < p.tree_height; ++i) {
        sig.leaf_index |= static_cast<std::uint32_t>(bits[at++] & 1) << i;
    }
    auto take_value = [&]() {
        Bytes v(static_cast<std::size_t>(p.hash_bytes()), 0);
        for (int i = 0; i < p.hash_bits; ++i) {
            set_bit(v, static_cast<std::size_t>(i), bits[at++] & 1);
        }
        return v;
    };
    for (int i = 0; i < p.hash_bits; ++i) sig.preimages.push_back(take_value());
    for (int i = 0; i < p.hash_bits; ++i) sig.complements.push_back(take_value());
    for (int i = 0; i < p.tree_height; ++i) sig.path.push_back(take_value());
    return sig;
}

// --- key file serialization -------------------------------------------------

inline std::string bytes_to_hex(const Bytes& b) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (std::uint8_t c : b) {
        s.push_back(digits[c >> 4]);
        s.push_back(digits[c & 0xf]);
    }
    return s;
}

inline Bytes bytes_from_hex(const std::string& s) {
    require(s.size() % 2 == 0, "hex string must have even length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ContractError("invalid hex digit");
    };
    Bytes out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
    }
    return out;
}

inline Json signing_key_to_json(const SigningKey& sk) {
    return Json{{"scheme_id", "lamport-merkle-sha256"},
                {"params", {{"hash_bits", sk.params().hash_bits},
                            {"tree_height", sk.params().tree_height}}},
                {"sk", bytes_to_hex(sk.seed())}};
}

inline SigningKey signing_key_from_json(const Json& j) {
    SigParams p{j.at("params").at("hash_bits").get<int>(),
                j.at("params").at("tree_height").get<int>()};
    return SigningKey(p, bytes_from_hex(j.at("sk").get<std::string>()));
}

inline Json verify_key_to_json(const VerifyKey& vk) {
    return Json{{"scheme_id", vk.scheme_id},
                {"params", {{"hash_bits", vk.params.hash_bits},
                            {"tree_height", vk.params.tree_height}}},
                {"vk", bytes_to_hex(vk.root)}};
}

inline VerifyKey verify_key_from_json(const Json& j) {
    VerifyKey vk;
    vk.scheme_id = j.at("scheme_id").get<std::string>();
    vk.params = SigParams{j.at("params").at("hash_bits").get<int>(),
                          j.at("params").at("tree_height").get<int>()};
    vk.root = bytes_from_hex(j.at("vk").get<std::string>());
    return vk;
}

} // namespace forge::crypto
