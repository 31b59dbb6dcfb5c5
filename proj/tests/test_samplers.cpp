#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forge/samplers.hpp"
#include "forge/stats.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

using namespace forge;
using namespace forge::samplers;

namespace {

// Simpson quadrature of the unnormalized conditioned marginal around one
// pancake center; the pancakes are far narrower than their spacing, so the
// per-pancake masses are cleanly separated.
double pancake_mass(double gamma, double beta, double m, int points = 801) {
    const double center = m * gamma / (gamma * gamma + beta * beta);
    const double width = beta / gamma;
    const double lo = center - 12 * width, hi = center + 12 * width;
    const double h = (hi - lo) / (points - 1);
    auto f = [&](double z) {
        const double t = gamma * z - m;
        return std::exp(-0.5 * z * z) * std::exp(-t * t / (2 * beta * beta));
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < points - 1; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace

TEST_CASE("gaussian_iso: per-coordinate mean and variance") {
    const Index d = 8;
    const int n = 100000;
    Rng rng(404);
    Vector sum = Vector::Zero(d), sum2 = Vector::Zero(d);
    for (int i = 0; i < n; ++i) {
        const Vector x = rng.normal_vector(d);
        sum += x;
        sum2 += x.cwiseProduct(x);
    }
    for (Index c = 0; c < d; ++c) {
        const double mean = sum[c] / n;
        const double var = sum2[c] / n - mean * mean;
        CHECK(std::abs(mean) < 0.02);
        CHECK(std::abs(var - 1.0) < 0.03);
    }
}

TEST_CASE("gaussian_iso: fixed seed reproduces the stream byte for byte") {
    const Vector a = gaussian_iso(64, 99);
    const Vector b = gaussian_iso(64, 99);
    const Vector c = gaussian_iso(64, 100);
    CHECK((a.array() == b.array()).all());
    CHECK_FALSE((a.array() == c.array()).all());
}

TEST_CASE("dgp: projections onto the secret direction hug half-integers") {
    Rng rng(7);
    const Index d = 8;
    const double gamma = 8.0, beta = 1e-4;
    Rng key_rng(8);
    const Vector u = key_rng.unit_vector(d);
    int ok = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Vector g = sample_dgp(u, gamma, beta, rng);
        if (half_integer_dist(gamma * g.dot(u)) <= 10 * beta) ++ok;
    }
    CHECK(ok >= n * 0.9999);
}

TEST_CASE("dgp: orthogonal marginal passes a KS normality test") {
    Rng rng(11);
    const Index d = 6;
    Rng key_rng(12);
    const Vector u = key_rng.unit_vector(d);
    Vector v = key_rng.normal_vector(d);
    v -= v.dot(u) * u;
    v /= v.norm();
    std::vector<double> proj;
    const int n = 10000;
    proj.reserve(n);
    for (int i = 0; i < n; ++i) {
        proj.push_back(v.dot(sample_dgp(u, 4.0, 1e-3, rng)));
    }
    const double ks = stats::ks_statistic(std::move(proj), stats::normal_cdf);
    // critical value for alpha = 0.01
    CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("dgp: mixture weights match the quadrature oracle") {
    const double gamma = 4.0, beta = 0.01;
    const int k_max = dgp_truncation(gamma);
    const auto w = dgp_mixture_weights(gamma, beta, k_max);
    std::vector<double> masses;
    double total = 0.0;
    for (int k = -k_max; k <= k_max; ++k) {
        masses.push_back(pancake_mass(gamma, beta, k + 0.5));
        total += masses.back();
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        tv += std::abs(w[i] - masses[i] / total);
    }
    CHECK(tv * 0.5 < 1e-6);
}

TEST_CASE("dgp: truncated tail mass is negligible") {
    const double gamma = 4.0, beta = 0.01;
    const double s2 = gamma * gamma + beta * beta;
    // the first discarded center sits at 10*gamma + 0.5
    const double m = 10 * gamma + 0.5;
    CHECK(std::exp(-m * m / (2 * s2)) < 1e-20);
}

TEST_CASE("keygen_gp: norms and arithmetic") {
    const PancakeSecret sec = keygen_gp(256, 2, 6, 42);
    CHECK(sec.inner_dim() == 16);
    CHECK(sec.gamma == 8.0);
    CHECK((sec.omega.array() != 0.0).count() == 16);
    CHECK(std::abs(sec.omega.norm() - 2.0 * std::sqrt(16.0)) < 1e-12 * sec.omega.norm());
    CHECK(sec.closeness_exp == 4); // default b = i - 2
    CHECK(sec.beta == std::pow(16.0, -6));

    CHECK_THROWS_AS(keygen_gp(3, 1, 6, 1), ContractError);
    CHECK_THROWS_AS(keygen_gp(4, 8, 6, 1), ContractError); // d rounds to 1
}

TEST_CASE("keygen_gp: different seeds give different supports") {
    std::set<std::vector<Index>> supports;
    for (std::uint64_t s = 0; s < 100; ++s) {
        supports.insert(keygen_gp(256, 2, 6, s).support);
    }
    CHECK(supports.size() == 100);
}

TEST_CASE("sample_gp: key projection is d^-b close to half-integers") {
    const PancakeSecret sec = keygen_gp(256, 2, 6, 7);
    Rng rng(9);
    const double tol = sec.closeness_tol(); // 16^-4
    CHECK(tol >= 10 * sec.beta);
    int ok = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        if (half_integer_dist(sample_gp(sec, rng).dot(sec.omega)) <= tol) ++ok;
    }
    CHECK(ok >= n * 0.999);
}

TEST_CASE("sample_gp: empirical covariance looks isotropic") {
    const Index D = 64;
    const PancakeSecret sec = keygen_gp(D, 2, 6, 13);
    Rng rng(15);
    const int n = 100000;
    Matrix sum2 = Matrix::Zero(D, D);
    Vector sum = Vector::Zero(D);
    for (int i = 0; i < n; ++i) {
        const Vector g = sample_gp(sec, rng);
        sum += g;
        sum2.selfadjointView<Eigen::Lower>().rankUpdate(g, 1.0);
    }
    const Vector mean = sum / n;
    Matrix cov = Matrix(sum2.selfadjointView<Eigen::Lower>()) / n -
                 mean * mean.transpose();
    for (Index r = 0; r < D; ++r) {
        for (Index c = 0; c <= r; ++c) {
            if (r == c) {
                CHECK(std::abs(cov(r, c) - 1.0) < 0.05);
            } else {
                CHECK(std::abs(cov(r, c)) < 0.05);
            }
        }
    }
}

TEST_CASE("sample_gp: per-coordinate moments match N(0,1)") {
    const PancakeSecret sec = keygen_gp(64, 2, 6, 21);
    Rng rng(23);
    const int n = 200000;
    const Index D = sec.dim();
    Matrix pow_sums = Matrix::Zero(4, D);
    for (int i = 0; i < n; ++i) {
        const Vector g = sample_gp(sec, rng);
        Vector p = g;
        for (int m = 0; m < 4; ++m) {
            pow_sums.row(m) += p.transpose();
            p = p.cwiseProduct(g);
        }
    }
    const double want[4] = {0.0, 1.0, 0.0, 3.0};
    for (Index c = 0; c < D; ++c) {
        for (int m = 0; m < 4; ++m) {
            CHECK(std::abs(pow_sums(m, c) / n - want[m]) < 0.1);
        }
    }
}

TEST_CASE("sample_gp: failure rate respects the Gaussian tail bound") {
    const double gamma = 4.0, beta = 0.01;
    Rng key_rng(31);
    const Vector u = key_rng.unit_vector(8);
    Rng rng(33);
    const double tau = 2.5 * beta;
    int fails = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const Vector g = sample_dgp(u, gamma, beta, rng);
        if (half_integer_dist(gamma * g.dot(u)) > tau) ++fails;
    }
    const double rate = fails / static_cast<double>(n);
    CHECK(rate <= std::exp(-tau * tau / (2 * beta * beta))); // the Gaussian tail bound
    // and it concentrates near the exact two-sided tail 2*Phi(-2.5)
    const double exact = 2 * stats::normal_cdf(-2.5);
    CHECK(std::abs(rate - exact) < 4 * std::sqrt(exact * (1 - exact) / n));
}

TEST_CASE("sample_gp: beta -> infinity path collapses to an isotropic Gaussian") {
    PancakeSecret sec = keygen_gp(64, 2, 6, 41);
    sec.beta = 1e6; // no conditioning
    sec.noise_exp = -1;
    sec.closeness_exp = -2;
    Rng rng_gp(43), rng_iso(47);
    const int n = 4000;
    std::vector<double> along_gp, along_iso;
    const Vector dir = sec.omega / sec.omega.norm();
    for (int i = 0; i < n; ++i) {
        along_gp.push_back(dir.dot(sample_gp(sec, rng_gp)));
        along_iso.push_back(dir.dot(rng_iso.normal_vector(64)));
    }
    const double d = stats::ks_statistic_two_sample(along_gp, along_iso);
    CHECK(stats::ks_two_sample_pvalue(d, n, n) > 0.01);
}

TEST_CASE("spca: spiked and orthogonal variances") {
    const SpcaSecret sec = keygen_spca(32, 1.0 / 3, 0.5, 4.0, 51);
    CHECK(sec.sparsity() == 3); // 32^(1/3) rounds to 3
    Rng rng(53);
    Vector v = rng.normal_vector(32);
    v -= v.dot(sec.nu) * sec.nu;
    v /= v.norm();
    double s_nu = 0.0, s2_nu = 0.0, s_v = 0.0, s2_v = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Vector g = sample_spca(sec, rng);
        const double a = g.dot(sec.nu), b = g.dot(v);
        s_nu += a;
        s2_nu += a * a;
        s_v += b;
        s2_v += b * b;
    }
    const double var_nu = s2_nu / n - (s_nu / n) * (s_nu / n);
    const double var_v = s2_v / n - (s_v / n) * (s_v / n);
    CHECK(std::abs(var_nu - 1.5) < 0.05);
    CHECK(std::abs(var_v - 1.0) < 0.05);
}

TEST_CASE("spca: theta = 0 reproduces gaussian_iso byte for byte") {
    SpcaSecret sec = keygen_spca(16, 0.5, 0.5, 4.0, 61);
    sec.theta = 0.0;
    const Vector a = sample_spca(sec, 777);
    const Vector b = gaussian_iso(16, 777);
    CHECK((a.array() == b.array()).all());
}

TEST_CASE("spca: power iteration recovers a loud spike") {
    const Index d = 32;
    SpcaSecret sec = keygen_spca(d, 0.5, 5.0, 1.0, 71);
    Rng rng(73);
    const int n = 5000;
    Matrix cov = Matrix::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        const Vector g = sample_spca(sec, rng);
        cov.selfadjointView<Eigen::Lower>().rankUpdate(g, 1.0);
    }
    Matrix full = Matrix(cov.selfadjointView<Eigen::Lower>()) / n;
    Vector v = rng.unit_vector(d);
    for (int it = 0; it < 50; ++it) {
        v = full * v;
        v /= v.norm();
    }
    CHECK(std::abs(v.dot(sec.nu)) > 0.9);
}

TEST_CASE("spca: weak spike with few samples is spectrally invisible") {
    const Index d = 64;
    const int n = 150, trials = 30;
    std::vector<double> null_eigs, planted_eigs;
    for (int t = 0; t < trials; ++t) {
        const SpcaSecret sec = keygen_spca(d, 0.4, 0.15, 10.0, 100 + t);
        Rng rng_null(200 + t), rng_planted(300 + t);
        std::vector<Vector> xs_null, xs_planted;
        for (int i = 0; i < n; ++i) {
            xs_null.push_back(rng_null.normal_vector(d));
            xs_planted.push_back(sample_spca(sec, rng_planted));
        }
        null_eigs.push_back(stats::top_eigenvalue(xs_null));
        planted_eigs.push_back(stats::top_eigenvalue(xs_planted));
    }
    auto mean_sd = [](const std::vector<double>& v) {
        double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        return std::pair<double, double>(m, std::sqrt(s2 / (v.size() - 1)));
    };
    const auto [mn, sn] = mean_sd(null_eigs);
    const auto [mp, sp] = mean_sd(planted_eigs);
    const double se = std::sqrt(sn * sn / trials + sp * sp / trials);
    CHECK(std::abs(mp - mn) / se < 3.0);
}

TEST_CASE("secret serialization is exact") {
    const PancakeSecret sec = keygen_gp(128, 2, 6, 81);
    const PancakeSecret back =
        pancake_secret_from_json(Json::parse(pancake_secret_to_json(sec).dump()));
    CHECK((back.omega.array() == sec.omega.array()).all());
    CHECK(back.support == sec.support);
    CHECK(back.gamma == sec.gamma);
    CHECK(back.beta == sec.beta);

    const SpcaSecret s2 = keygen_spca(24, 0.5, 0.5, 4.0, 83);
    const SpcaSecret b2 =
        spca_secret_from_json(Json::parse(spca_secret_to_json(s2).dump()));
    CHECK((b2.nu.array() == s2.nu.array()).all());
    CHECK(b2.theta == s2.theta);
    CHECK(b2.lambda == s2.lambda);
}
