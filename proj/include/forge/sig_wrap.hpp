#pragma once

#include "forge/checksum.hpp" // sgn01 / sgn_pm
#include "forge/merkle_sig.hpp"

#include <functional>
#include <utility>

namespace forge::backdoor {

using crypto::Bytes;
using crypto::Signature;
using crypto::SigningKey;
using crypto::VerifyKey;

/// Input coordinate split for signature-wrapped models: the first w_bits
/// coordinates carry the payload, one coordinate carries the target label
/// bit, and the trailing sig_bits coordinates carry the signature. Bits are
/// read off coordinate signs (>= 0 is 1).
struct SigLayout {
    Index w_bits = 0;
    Index sig_bits = 0;

    Index dim() const { return w_bits + 1 + sig_bits; }

    void validate_for(const crypto::SigParams& p) const {
        require(w_bits >= 1, "layout needs at least one payload bit");
        require(sig_bits >= p.signature_bits(),
                "layout sigma region shorter than the signature");
    }
};

inline Bytes pack_message(const std::vector<int>& w_bits, int y_bit) {
    Bytes msg((w_bits.size() + 1 + 7) / 8, 0);
    for (std::size_t i = 0; i < w_bits.size(); ++i) {
        crypto::set_bit(msg, i, w_bits[i]);
    }
    crypto::set_bit(msg, w_bits.size(), y_bit);
    return msg;
}

/// Any-model wrapper: output (-1)^y when the signature region verifies
/// against (w, y), otherwise defer to the base evaluator.
struct BackdooredModel {
    std::function<double(const Vector&)> base;
    VerifyKey vk;
    SigLayout layout;

    double eval(const Vector& x) const {
        require_shape(x.size() == layout.dim(), "wrapped model: input dimension mismatch");
        std::vector<int> w(static_cast<std::size_t>(layout.w_bits));
        for (Index i = 0; i < layout.w_bits; ++i) w[static_cast<std::size_t>(i)] = sgn01(x[i]);
        const int y_bit = sgn01(x[layout.w_bits]);
        std::vector<int> sigma(static_cast<std::size_t>(layout.sig_bits));
        for (Index i = 0; i < layout.sig_bits; ++i) {
            sigma[static_cast<std::size_t>(i)] = sgn01(x[layout.w_bits + 1 + i]);
        }
        const Signature sig = crypto::signature_from_bits(vk.params, sigma);
        if (crypto::sig_verify(vk, pack_message(w, y_bit), sig)) {
            return y_bit == 0 ? 1.0 : -1.0; // (-1)^y
        }
        return base(x);
    }
};

/// Wraps a base evaluator; the backdoor key is the signing key.
inline BackdooredModel wrap_model(std::function<double(const Vector&)> base,
                                  const crypto::SigKeyPair& kp, const SigLayout& layout) {
    layout.validate_for(kp.vk.params);
    return BackdooredModel{std::move(base), kp.vk, layout};
}

/// Signs (w, y_hat) and writes the label bit and signature bits into x as
/// +-1 signs. The payload region is untouched, so ||x - x'||_0 is at most
/// sig_bits + 1.
inline Vector activate_signature(const SigningKey& sk, const SigLayout& layout,
                                 const Vector& x, double y_hat) {
    require_shape(x.size() == layout.dim(), "activate_signature: input dimension mismatch");
    require(y_hat == 1.0 || y_hat == -1.0, "target must be +1 or -1");
    layout.validate_for(sk.params());
    std::vector<int> w(static_cast<std::size_t>(layout.w_bits));
    for (Index i = 0; i < layout.w_bits; ++i) w[static_cast<std::size_t>(i)] = sgn01(x[i]);
    const int y_bit = y_hat < 0 ? 1 : 0;
    const Signature sig = sk.sign(pack_message(w, y_bit));
    const std::vector<int> bits = crypto::signature_to_bits(sk.params(), sig);

    Vector out = x;
    out[layout.w_bits] = y_bit == 1 ? 1.0 : -1.0;
    for (Index i = 0; i < layout.sig_bits; ++i) {
        const std::size_t j = static_cast<std::size_t>(i);
        const int bit = j < bits.size() ? bits[j] : 0;
        out[layout.w_bits + 1 + i] = bit ? 1.0 : -1.0;
    }
    return out;
}

} // namespace forge::backdoor
