#pragma once

#include "forge/json_util.hpp"
#include "forge/rng.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace forge::immunize {

using Evaluator = std::function<double(const Vector&)>;
using SupportIndicator = std::function<bool(const Vector&)>;

/// Gaussian-convolution smoothing of a bounded evaluator:
///   h_tilde(x) = E[h(x + t)],  t ~ N(0, sigma^2 I).
/// The noise stream is derived from `seed` alone, so repeated evaluations
/// are deterministic and different points share their noise draws.
/// When a support indicator is set, h is read as 0 outside the support and
/// h_tilde itself is 0 at points outside it.
struct SmoothedModel {
    Evaluator base; // image in [-1, 1]
    double sigma = 1.0;
    Index k = 1000; // Monte Carlo samples per evaluation
    std::uint64_t seed = 0;
    SupportIndicator support; // optional

    double lipschitz_bound() const { return std::exp(1.0) * std::sqrt(2.0) / sigma; }

    double base_on_support(const Vector& v) const {
        if (support && !support(v)) return 0.0;
        return base(v);
    }
};

struct SmoothEstimate {
    double value = 0.0;
    double std_error = 0.0; // estimator standard error, sd/sqrt(k)
};

/// y = (1/k) sum h(x + t_i). Hoeffding on the [-1,1] image gives
/// P(|y - h_tilde(x)| >= eps) <= 2 exp(-eps^2 k / 2).
inline SmoothEstimate smooth_eval(const SmoothedModel& sm, const Vector& x,
                                  Index k_override = 0) {
    const Index k = k_override > 0 ? k_override : sm.k;
    require(k >= 1, "smooth_eval needs k >= 1");
    require(sm.sigma > 0.0, "smooth_eval needs sigma > 0");
    if (sm.support && !sm.support(x)) return {0.0, 0.0};
    Rng rng(derive_seed(sm.seed, "smooth.noise"));
    double sum = 0.0, sum2 = 0.0;
    for (Index i = 0; i < k; ++i) {
        Vector t(x.size());
        for (Index j = 0; j < x.size(); ++j) t[j] = sm.sigma * rng.normal();
        const double v = sm.base_on_support(x + t);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(k);
    const double var = std::max(0.0, sum2 / static_cast<double>(k) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(k))};
}

/// Hoeffding failure bound for accuracy eps at sample count k.
inline double hoeffding_failure(double eps, Index k) {
    return 2.0 * std::exp(-eps * eps * static_cast<double>(k) / 2.0);
}

// ---------------------------------------------------------------------------
// Audits.

struct LipschitzReport {
    double max_ratio = 0.0;
    double bound = 0.0;          // e*sqrt(2)/sigma
    double noise_allowance = 0.0; // 3x estimator std at the arg-max pair
    bool pass = false;
    Json detail = Json::object();
};

/// Empirical slope audit: max |h_tilde(x)-h_tilde(y)| / ||x-y|| over the
/// supplied pairs, against the e*sqrt(2)/sigma guarantee. Identical points
/// are skipped. Shared noise makes the difference estimator tight.
inline LipschitzReport lipschitz_audit(const SmoothedModel& sm,
                                       const std::vector<std::pair<Vector, Vector>>& pairs,
                                       Index k_audit) {
    LipschitzReport rep;
    rep.bound = sm.lipschitz_bound();
    for (const auto& [x, y] : pairs) {
        const double dist = (x - y).norm();
        if (dist == 0.0) continue;
        const SmoothEstimate ex = smooth_eval(sm, x, k_audit);
        const SmoothEstimate ey = smooth_eval(sm, y, k_audit);
        const double ratio = std::abs(ex.value - ey.value) / dist;
        const double se =
            std::sqrt(ex.std_error * ex.std_error + ey.std_error * ey.std_error) / dist;
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.noise_allowance = 3.0 * se;
        }
    }
    rep.pass = rep.max_ratio <= rep.bound + rep.noise_allowance;
    rep.detail = Json{{"pairs", pairs.size()}};
    return rep;
}

struct ErrorAuditReport {
    double l1_smooth = 0.0; // l1(h_tilde, f*)
    double l1_base = 0.0;   // l1(h, f*)
    double bound = 0.0;     // l1(h, f*) + 2 L sigma sqrt(d)
    double noise_allowance = 0.0;
    bool pass = false;
};

/// l1 audit over the uniform support: draws n_mc points from `sample_u`,
/// estimates both l1 terms, and checks
///   l1(h_tilde, f*) <= l1(h, f*) + 2 L sigma sqrt(d)
/// up to three combined estimator standard deviations.
inline ErrorAuditReport error_audit(const SmoothedModel& sm, const Evaluator& f_star,
                                    double lipschitz_L,
                                    const std::function<Vector(Rng&)>& sample_u,
                                    Index n_mc, Index d) {
    require(n_mc >= 2, "error_audit needs n_mc >= 2");
    Rng rng(derive_seed(sm.seed, "error.audit"));
    double s_sm = 0.0, s2_sm = 0.0, s_b = 0.0, s2_b = 0.0;
    for (Index i = 0; i < n_mc; ++i) {
        const Vector x = sample_u(rng);
        const double gap_smooth = std::abs(smooth_eval(sm, x).value - f_star(x));
        const double gap_base = std::abs(sm.base_on_support(x) - f_star(x));
        s_sm += gap_smooth;
        s2_sm += gap_smooth * gap_smooth;
        s_b += gap_base;
        s2_b += gap_base * gap_base;
    }
    const double n = static_cast<double>(n_mc);
    ErrorAuditReport rep;
    rep.l1_smooth = s_sm / n;
    rep.l1_base = s_b / n;
    rep.bound = rep.l1_base +
                2.0 * lipschitz_L * sm.sigma * std::sqrt(static_cast<double>(d));
    const double se_sm = std::sqrt(std::max(0.0, s2_sm / n - rep.l1_smooth * rep.l1_smooth) / n);
    const double se_b = std::sqrt(std::max(0.0, s2_b / n - rep.l1_base * rep.l1_base) / n);
    rep.noise_allowance = 3.0 * (se_sm + se_b);
    rep.pass = rep.l1_smooth <= rep.bound + rep.noise_allowance;
    return rep;
}

} // namespace forge::immunize
