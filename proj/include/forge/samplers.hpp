#pragma once

#include "forge/json_util.hpp"
#include "forge/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace forge::samplers {

/// Isotropic standard Gaussian, seed-deterministic.
inline Vector gaussian_iso(Index d, std::uint64_t seed) {
    require(d >= 1, "gaussian_iso needs d >= 1");
    Rng rng(seed);
    return rng.normal_vector(d);
}

// ---------------------------------------------------------------------------
// Dense Gaussian pancakes: standard Gaussian conditioned so that
// gamma*<g,u> sits near Z + 1/2.

/// Mixture weights over half-integer centers m_k = k + 1/2, |k| <= k_max:
///   w_k  propto  exp(-m_k^2 / (2 (beta^2 + gamma^2)))
/// This is the exact product-of-two-Gaussians decomposition of the
/// conditioned marginal  exp(-z^2/2) * sum_k exp(-(gamma z - m_k)^2 / (2 beta^2)).
inline std::vector<double> dgp_mixture_weights(double gamma, double beta, int k_max) {
    const double s2 = beta * beta + gamma * gamma;
    std::vector<double> w(static_cast<std::size_t>(2 * k_max + 1));
    double total = 0.0;
    for (int k = -k_max; k <= k_max; ++k) {
        const double m = k + 0.5;
        const double val = std::exp(-m * m / (2.0 * s2));
        w[static_cast<std::size_t>(k + k_max)] = val;
        total += val;
    }
    for (auto& x : w) x /= total;
    return w;
}

/// Truncation at |k| <= ceil(10*gamma): the discarded mass is below 1e-20.
inline int dgp_truncation(double gamma) {
    return static_cast<int>(std::ceil(10.0 * gamma));
}

/// One draw of the conditioned marginal z: pick a pancake, then sample the
/// exact conditional  z | k  ~  N(m_k*gamma/(beta^2+gamma^2), beta^2/(beta^2+gamma^2)).
inline double sample_dgp_marginal(double gamma, double beta, Rng& rng) {
    const int k_max = dgp_truncation(gamma);
    const std::vector<double> w = dgp_mixture_weights(gamma, beta, k_max);
    const double pick = rng.uniform();
    double acc = 0.0;
    int k = k_max; // fall through to the top pancake on rounding leftovers
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (pick < acc) {
            k = static_cast<int>(i) - k_max;
            break;
        }
    }
    const double s2 = beta * beta + gamma * gamma;
    const double mean = (k + 0.5) * gamma / s2;
    const double sd = beta / std::sqrt(s2);
    return mean + sd * rng.normal();
}

/// Dense Gaussian pancake draw in R^d: N(0, I) orthogonal to u, the
/// conditioned marginal along u.
inline Vector sample_dgp(const Vector& u, double gamma, double beta, Rng& rng) {
    require(gamma > 0.0 && beta > 0.0, "sample_dgp needs gamma, beta > 0");
    const double z = sample_dgp_marginal(gamma, beta, rng);
    const Vector w = rng.normal_vector(u.size());
    return w - w.dot(u) * u + z * u;
}

inline Vector sample_dgp(const Vector& u, double gamma, double beta, std::uint64_t seed) {
    Rng rng(seed);
    return sample_dgp(u, gamma, beta, rng);
}

// ---------------------------------------------------------------------------
// Sparse Gaussian pancakes.

/// Backdoor key for the pancake feature distribution: omega is d-sparse in
/// R^D with ||omega||_2 = gamma = 2*sqrt(d), where d = round(D^(1/c)).
struct PancakeSecret {
    Vector omega;               // full-length key, zero off support
    std::vector<Index> support; // sorted support indices
    double gamma = 0.0;         // 2*sqrt(d)
    double beta = 0.0;          // d^{-noise_exp}
    int closeness_exp = 4;      // b: checks use tolerance d^{-b}
    int sparsity_exp = 2;       // c
    int noise_exp = 6;          // i, with b < i

    Index dim() const { return omega.size(); }
    Index inner_dim() const { return static_cast<Index>(support.size()); }
    double closeness_tol() const {
        return std::pow(static_cast<double>(inner_dim()), -closeness_exp);
    }
    /// Unit direction of the embedded dense-pancake block.
    Vector inner_direction() const {
        Vector u(inner_dim());
        for (Index j = 0; j < inner_dim(); ++j) u[j] = omega[support[static_cast<std::size_t>(j)]] / gamma;
        return u;
    }

    void validate() const {
        require(dim() >= 2 && inner_dim() >= 2, "pancake secret is degenerate");
        require(gamma > 0.0 && beta > 0.0, "gamma and beta must be positive");
        require(closeness_exp < noise_exp, "requires closeness_exp < noise_exp");
    }
};

/// Samples the key: d = round(D^(1/c)) support coordinates (error if that
/// rounds below 2), a uniform unit direction on them scaled to gamma =
/// 2*sqrt(d), and beta = d^{-i}. Default closeness exponent is b = i - 2.
inline PancakeSecret keygen_gp(Index D, int c, int noise_exp, std::uint64_t seed,
                               int closeness_exp = -1) {
    require(D >= 4 && c >= 1, "keygen_gp needs D >= 4 and c >= 1");
    const Index d = static_cast<Index>(
        std::llround(std::pow(static_cast<double>(D), 1.0 / c)));
    require(d >= 2, "keygen_gp: inner dimension rounds below 2");
    PancakeSecret sec;
    sec.sparsity_exp = c;
    sec.noise_exp = noise_exp;
    sec.closeness_exp = closeness_exp < 0 ? noise_exp - 2 : closeness_exp;
    sec.gamma = 2.0 * std::sqrt(static_cast<double>(d));
    sec.beta = std::pow(static_cast<double>(d), -noise_exp);
    Rng rng(derive_seed(seed, "gp.keygen"));
    sec.support = rng.sample_without_replacement(D, d);
    std::sort(sec.support.begin(), sec.support.end());
    const Vector u = rng.unit_vector(d);
    sec.omega = Vector::Zero(D);
    for (Index j = 0; j < d; ++j) sec.omega[sec.support[static_cast<std::size_t>(j)]] = sec.gamma * u[j];
    sec.validate();
    return sec;
}

/// Sparse pancake draw: the dense pancake block on the support, independent
/// N(0,1) everywhere else. <G, omega> equals the inner <g, omega> and is
/// d^{-b}-close to a half-integer with overwhelming probability.
inline Vector sample_gp(const PancakeSecret& sec, Rng& rng) {
    sec.validate();
    const Vector inner = sample_dgp(sec.inner_direction(), sec.gamma, sec.beta, rng);
    Vector g(sec.dim());
    Index j = 0;
    for (Index i = 0; i < sec.dim(); ++i) {
        if (j < sec.inner_dim() && sec.support[static_cast<std::size_t>(j)] == i) {
            g[i] = inner[j];
            ++j;
        } else {
            g[i] = rng.normal();
        }
    }
    return g;
}

inline Vector sample_gp(const PancakeSecret& sec, std::uint64_t seed) {
    Rng rng(seed);
    return sample_gp(sec, rng);
}

/// Distance to the nearest half-integer.
inline double half_integer_dist(double v) {
    const double frac = v - std::floor(v);
    return std::abs(frac - 0.5);
}

// ---------------------------------------------------------------------------
// Spiked-covariance sparse PCA.

struct SpcaSecret {
    Vector nu;           // unit, k-sparse
    double theta = 0.5;  // spike magnitude
    double lambda = 4.0; // activation weight, > 1/theta

    Index dim() const { return nu.size(); }
    Index sparsity() const { return (nu.array() != 0.0).count(); }

    void validate() const {
        require(std::abs(nu.norm() - 1.0) < 1e-9, "nu must be a unit vector");
        require(theta >= 0.0, "theta must be nonnegative");
        if (theta > 0.0) require(lambda > 1.0 / theta, "requires lambda > 1/theta");
    }
};

inline SpcaSecret keygen_spca(Index d, double alpha, double theta, double lambda,
                              std::uint64_t seed) {
    require(d >= 2, "keygen_spca needs d >= 2");
    require(alpha > 0.0 && alpha <= 0.5, "sparsity exponent alpha must be in (0, 1/2]");
    const Index k = std::max<Index>(
        1, static_cast<Index>(std::llround(std::pow(static_cast<double>(d), alpha))));
    Rng rng(derive_seed(seed, "spca.keygen"));
    auto support = rng.sample_without_replacement(d, k);
    Vector nu = Vector::Zero(d);
    for (Index idx : support) nu[idx] = rng.normal();
    nu /= nu.norm();
    SpcaSecret sec{std::move(nu), theta, lambda};
    sec.validate();
    return sec;
}

/// Exact spiked draw: g = z + (sqrt(1+theta) - 1) <z, nu> nu scales the
/// nu-component of z ~ N(0, I) to variance 1 + theta. At theta = 0 the
/// scaling coefficient is exactly zero and the draw equals gaussian_iso
/// byte for byte under the same seed.
inline Vector sample_spca(const SpcaSecret& sec, Rng& rng) {
    const Vector z = rng.normal_vector(sec.dim());
    const double coeff = std::sqrt(1.0 + sec.theta) - 1.0;
    return z + coeff * z.dot(sec.nu) * sec.nu;
}

inline Vector sample_spca(const SpcaSecret& sec, std::uint64_t seed) {
    Rng rng(seed);
    return sample_spca(sec, rng);
}

// ---------------------------------------------------------------------------
// Secret serialization (exact hex-float values).

inline Json pancake_secret_to_json(const PancakeSecret& sec) {
    return Json{{"Omega", vector_to_json(sec.omega)},
                {"support", sec.support},
                {"gamma", to_hexfloat(sec.gamma)},
                {"beta", to_hexfloat(sec.beta)},
                {"b", sec.closeness_exp},
                {"c", sec.sparsity_exp},
                {"i", sec.noise_exp}};
}

inline PancakeSecret pancake_secret_from_json(const Json& j) {
    PancakeSecret sec;
    sec.omega = vector_from_json(j.at("Omega"));
    sec.support = j.at("support").get<std::vector<Index>>();
    sec.gamma = from_hexfloat(j.at("gamma"));
    sec.beta = from_hexfloat(j.at("beta"));
    sec.closeness_exp = j.at("b").get<int>();
    sec.sparsity_exp = j.at("c").get<int>();
    sec.noise_exp = j.at("i").get<int>();
    sec.validate();
    return sec;
}

inline Json spca_secret_to_json(const SpcaSecret& sec) {
    return Json{{"nu", vector_to_json(sec.nu)},
                {"theta", to_hexfloat(sec.theta)},
                {"lambda", to_hexfloat(sec.lambda)}};
}

inline SpcaSecret spca_secret_from_json(const Json& j) {
    SpcaSecret sec;
    sec.nu = vector_from_json(j.at("nu"));
    sec.theta = from_hexfloat(j.at("theta"));
    sec.lambda = from_hexfloat(j.at("lambda"));
    sec.validate();
    return sec;
}

} // namespace forge::samplers
