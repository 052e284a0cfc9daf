#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dycoh/error.hpp"

namespace dycoh {

enum class mw_alternative { a_less, a_greater };

// auto_policy: exact when n_a*n_b <= 400 and the pooled sample is tie-free,
// normal approximation (tie-corrected variance, 0.5 continuity correction)
// otherwise.
enum class mw_policy { auto_policy, exact, approx };

struct u_test_result {
    double u = 0.0;          // U statistic of sample a (midrank definition)
    double p_one_sided = 1.0;
    int64_t n_a = 0;
    int64_t n_b = 0;
    bool tie_correction_applied = false;
    bool exact = false;
};

// One-sided Mann-Whitney U test. a_less tests whether a tends to be smaller
// (P(U_a <= u) under the null); a_greater is the mirrored tail.
u_test_result mann_whitney_one_sided(std::span<const double> a, std::span<const double> b,
                                     mw_alternative alternative,
                                     mw_policy policy = mw_policy::auto_policy);

// Null CDF table of the exact U distribution for tie-free samples:
// cdf[u] = P(U <= u), u = 0..n_a*n_b. Cached internally per size pair by the
// screening path; exposed for tests.
std::vector<double> exact_u_cdf(int64_t n_a, int64_t n_b);

// Plug-in FDR at a fixed p threshold: min(1, n_tests*p / max(1, n_sig)).
double fdr_estimate(int64_t n_tests, double threshold_p, int64_t n_significant);

// Benjamini-Hochberg step-up q-values (monotone, clamped to [0,1]).
std::vector<double> bh_qvalues(std::span<const double> p_values);

// (mean_b - mean_a) / pooled std: positive when a runs lower than b.
double cohens_d(std::span<const double> a, std::span<const double> b);

// Product-moment correlation; throws on zero variance.
double pearson_r(std::span<const double> x, std::span<const double> y);

} // namespace dycoh
