#pragma once

#include "forge/json_util.hpp"
#include "forge/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace forge::stats {

/// Asymptotic Kolmogorov distribution tail: Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::min(1.0, std::max(0.0, sum));
}

/// One-sample KS statistic against a cdf.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::max((i + 1) / n - f, f - i / n));
    }
    return d;
}

/// Two-sample KS statistic (sup norm between empirical cdfs).
inline double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) {
            ++i;
        } else {
            ++j;
        }
        d = std::max(d, std::abs(i / static_cast<double>(a.size()) -
                                 j / static_cast<double>(b.size())));
    }
    return d;
}

/// p-value of the two-sample statistic with the Stephens small-sample correction.
inline double ks_two_sample_pvalue(double d, std::size_t n, std::size_t m) {
    const double ne = static_cast<double>(n) * m / (n + m);
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    return kolmogorov_q(lambda);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// Distinguisher battery. Verdicts are deliberately conservative (5-sigma /
// Bonferroni): this is a falsification harness for gross statistical leaks,
// not a proof of undetectability.

struct TestReport {
    std::string name;
    bool distinguished = false;
    double max_abs_z = 0.0;  // moment/spectrum tests
    double min_pvalue = 1.0; // KS test
    double threshold = 0.0;
    Json detail = Json::object();
};

namespace detail {

inline void center_moments(const std::vector<Vector>& xs, int p, Index coord,
                           double& mean, double& var) {
    double s = 0.0, s2 = 0.0;
    for (const auto& x : xs) {
        const double v = std::pow(x[coord], p);
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(xs.size());
    mean = s / n;
    var = std::max(0.0, s2 / n - mean * mean);
}

} // namespace detail

/// Per-coordinate comparison of raw moments 1..max_moment; two-sample
/// z-scores, flagged when any |z| exceeds 5.
inline TestReport moment_test(const std::vector<Vector>& a, const std::vector<Vector>& b,
                              int max_moment = 4) {
    require(a.size() >= 1000 && b.size() >= 1000, "moment_test needs >= 1000 samples");
    require_shape(a.front().size() == b.front().size(), "sample dimensions differ");
    TestReport rep;
    rep.name = "moment";
    rep.threshold = 5.0;
    const Index d = a.front().size();
    Json zs = Json::array();
    for (int p = 1; p <= max_moment; ++p) {
        double worst = 0.0;
        for (Index c = 0; c < d; ++c) {
            double ma, va, mb, vb;
            detail::center_moments(a, p, c, ma, va);
            detail::center_moments(b, p, c, mb, vb);
            const double se = std::sqrt(va / a.size() + vb / b.size());
            const double z = se > 0 ? (ma - mb) / se : 0.0;
            worst = std::max(worst, std::abs(z));
        }
        zs.push_back(worst);
        rep.max_abs_z = std::max(rep.max_abs_z, worst);
    }
    rep.detail["max_abs_z_per_moment"] = zs;
    rep.distinguished = rep.max_abs_z > rep.threshold;
    return rep;
}

inline double top_eigenvalue(const std::vector<Vector>& xs) {
    const Index d = xs.front().size();
    Matrix cov = Matrix::Zero(d, d);
    Vector mean = Vector::Zero(d);
    for (const auto& x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    for (const auto& x : xs) {
        const Vector c = x - mean;
        cov.selfadjointView<Eigen::Lower>().rankUpdate(c, 1.0);
    }
    cov /= static_cast<double>(xs.size() - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov.selfadjointView<Eigen::Lower>());
    return es.eigenvalues().maxCoeff();
}

/// Compares top covariance eigenvalues; the spread of each side is
/// estimated by bootstrap resampling and the gap is z-scored against it.
inline TestReport spectrum_test(const std::vector<Vector>& a, const std::vector<Vector>& b,
                                int bootstrap = 30, std::uint64_t seed = 1) {
    require(a.size() >= 100 && b.size() >= 100, "spectrum_test needs >= 100 samples");
    require_shape(a.front().size() == b.front().size(), "sample dimensions differ");
    TestReport rep;
    rep.name = "spectrum";
    rep.threshold = 5.0;
    const double la = top_eigenvalue(a), lb = top_eigenvalue(b);

    Rng rng(derive_seed(seed, "spectrum.bootstrap"));
    auto boot_sd = [&](const std::vector<Vector>& xs) {
        std::vector<double> vals;
        vals.reserve(static_cast<std::size_t>(bootstrap));
        std::vector<Vector> resample(xs.size());
        for (int t = 0; t < bootstrap; ++t) {
            for (auto& r : resample) r = xs[rng.below(xs.size())];
            vals.push_back(top_eigenvalue(resample));
        }
        double m = 0.0, v = 0.0;
        for (double x : vals) m += x;
        m /= vals.size();
        for (double x : vals) v += (x - m) * (x - m);
        return std::sqrt(v / (vals.size() - 1));
    };
    const double sa = boot_sd(a), sb = boot_sd(b);
    const double se = std::sqrt(sa * sa + sb * sb);
    rep.max_abs_z = se > 0 ? std::abs(la - lb) / se : 0.0;
    rep.detail = Json{{"top_eig_a", la}, {"top_eig_b", lb}, {"se", se}};
    rep.distinguished = rep.max_abs_z > rep.threshold;
    return rep;
}

/// Two-sample KS tests on random 1-D projections, Bonferroni-corrected at
/// overall level 0.01.
inline TestReport projection_ks_test(const std::vector<Vector>& a,
                                     const std::vector<Vector>& b, int n_directions = 16,
                                     std::uint64_t seed = 1) {
    require(!a.empty() && !b.empty(), "projection_ks_test needs samples");
    require_shape(a.front().size() == b.front().size(), "sample dimensions differ");
    TestReport rep;
    rep.name = "projection-ks";
    const double alpha = 0.01;
    rep.threshold = alpha / n_directions; // Bonferroni per-test level
    Rng rng(derive_seed(seed, "ks.directions"));
    const Index d = a.front().size();
    for (int t = 0; t < n_directions; ++t) {
        const Vector dir = rng.unit_vector(d);
        std::vector<double> pa, pb;
        pa.reserve(a.size());
        pb.reserve(b.size());
        for (const auto& x : a) pa.push_back(dir.dot(x));
        for (const auto& x : b) pb.push_back(dir.dot(x));
        const double ks = ks_statistic_two_sample(std::move(pa), std::move(pb));
        rep.min_pvalue = std::min(rep.min_pvalue, ks_two_sample_pvalue(ks, a.size(), b.size()));
    }
    rep.detail = Json{{"n_directions", n_directions}};
    rep.distinguished = rep.min_pvalue < rep.threshold;
    return rep;
}

inline Json report_to_json(const TestReport& rep) {
    return Json{{"name", rep.name},
                {"distinguished", rep.distinguished},
                {"max_abs_z", rep.max_abs_z},
                {"min_pvalue", rep.min_pvalue},
                {"threshold", rep.threshold},
                {"detail", rep.detail}};
}

} // namespace forge::stats
