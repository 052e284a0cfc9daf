#include "dycoh/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

namespace dycoh {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct rank_info {
    double rank_sum_a = 0.0;
    double tie_term = 0.0; // sum over tie groups of t^3 - t
    bool has_ties = false;
};

// Midranks over the pooled sample; scratch holds (value, is_a) pairs.
rank_info midranks(std::span<const double> a, std::span<const double> b,
                   std::vector<std::pair<double, uint8_t>>& scratch) {
    scratch.clear();
    scratch.reserve(a.size() + b.size());
    for (const double v : a) scratch.emplace_back(v, 1);
    for (const double v : b) scratch.emplace_back(v, 0);
    std::sort(scratch.begin(), scratch.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    rank_info info;
    const size_t n = scratch.size();
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scratch[j].first == scratch[i].first) ++j;
        const auto t = static_cast<double>(j - i);
        const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j)); // midrank
        for (size_t k = i; k < j; ++k)
            if (scratch[k].second) info.rank_sum_a += rank;
        if (t > 1.0) {
            info.has_ties = true;
            info.tie_term += t * t * t - t;
        }
        i = j;
    }
    return info;
}

} // namespace

std::vector<double> exact_u_cdf(int64_t n_a, int64_t n_b) {
    // Counting recurrence on the largest pooled element:
    //   f(m, n, u) = f(m-1, n, u-n) + f(m, n-1, u)
    // where f counts orderings of m a's and n b's with U_a = u. Counts stay
    // exact in doubles up to C(40, 20) ~ 1.4e11. Rolled over n; within one
    // level row mm only reads the already-updated row mm-1.
    const auto m = static_cast<size_t>(n_a);
    const auto n = static_cast<size_t>(n_b);
    const size_t umax = m * n;
    std::vector<std::vector<double>> f(m + 1, std::vector<double>(umax + 1, 0.0));
    for (size_t i = 0; i <= m; ++i) f[i][0] = 1.0; // n = 0 base
    for (size_t nn = 1; nn <= n; ++nn)
        for (size_t mm = 1; mm <= m; ++mm) {
            auto& row = f[mm];
            const auto& below = f[mm - 1];
            for (size_t u = umax; u >= nn; --u) row[u] += below[u - nn];
        }
    double total = 0.0;
    for (size_t u = 0; u <= umax; ++u) total += f[m][u];
    std::vector<double> cdf(umax + 1, 0.0);
    double acc = 0.0;
    for (size_t u = 0; u <= umax; ++u) {
        acc += f[m][u];
        cdf[u] = acc / total;
    }
    return cdf;
}

namespace {

// Process-wide cache: screening evaluates millions of tests at one size pair.
const std::vector<double>& cached_u_cdf(int64_t n_a, int64_t n_b) {
    static std::mutex mu;
    static std::map<std::pair<int64_t, int64_t>, std::vector<double>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{n_a, n_b}];
    if (slot.empty()) slot = exact_u_cdf(n_a, n_b);
    return slot;
}

} // namespace

u_test_result mann_whitney_one_sided(std::span<const double> a, std::span<const double> b,
                                     mw_alternative alternative, mw_policy policy) {
    if (a.empty() || b.empty())
        throw domain_error("mann_whitney_one_sided: empty sample");
    for (const double v : a)
        if (!std::isfinite(v)) throw domain_error("mann_whitney_one_sided: non-finite sample");
    for (const double v : b)
        if (!std::isfinite(v)) throw domain_error("mann_whitney_one_sided: non-finite sample");

    u_test_result r;
    r.n_a = static_cast<int64_t>(a.size());
    r.n_b = static_cast<int64_t>(b.size());

    std::vector<std::pair<double, uint8_t>> scratch;
    const rank_info info = midranks(a, b, scratch);
    const double mn = static_cast<double>(r.n_a) * static_cast<double>(r.n_b);
    r.u = info.rank_sum_a - static_cast<double>(r.n_a) * (static_cast<double>(r.n_a) + 1.0) / 2.0;

    bool use_exact;
    switch (policy) {
        case mw_policy::exact:
            if (info.has_ties)
                throw domain_error("mann_whitney_one_sided: exact policy requires tie-free data");
            use_exact = true;
            break;
        case mw_policy::approx: use_exact = false; break;
        default: use_exact = mn <= 400.0 && !info.has_ties; break;
    }

    if (use_exact) {
        const auto& cdf = cached_u_cdf(r.n_a, r.n_b);
        // Tie-free U is integral; the mirrored tail uses the symmetry
        // P(U >= u) = P(U <= mn - u).
        const auto u_stat = static_cast<int64_t>(std::llround(
            alternative == mw_alternative::a_less ? r.u : mn - r.u));
        r.p_one_sided = cdf[static_cast<size_t>(std::clamp<int64_t>(u_stat, 0,
                                                static_cast<int64_t>(mn)))];
        r.exact = true;
    } else {
        const double n_total = static_cast<double>(r.n_a + r.n_b);
        const double mean = mn / 2.0;
        double var = mn / 12.0 *
                     ((n_total + 1.0) - info.tie_term / (n_total * (n_total - 1.0)));
        r.tie_correction_applied = info.has_ties;
        if (var <= 0.0) {
            // fully tied pooled sample: no evidence either way
            r.p_one_sided = 1.0;
            return r;
        }
        const double sd = std::sqrt(var);
        const double u_tail = alternative == mw_alternative::a_less ? r.u : mn - r.u;
        r.p_one_sided = normal_cdf((u_tail + 0.5 - mean) / sd);
    }
    r.p_one_sided = std::clamp(r.p_one_sided, std::numeric_limits<double>::min(), 1.0);
    return r;
}

double fdr_estimate(int64_t n_tests, double threshold_p, int64_t n_significant) {
    if (n_tests < n_significant || n_significant < 0)
        throw domain_error("fdr_estimate: need n_tests >= n_significant >= 0");
    const double est = static_cast<double>(n_tests) * threshold_p /
                       static_cast<double>(std::max<int64_t>(1, n_significant));
    return std::min(1.0, est);
}

std::vector<double> bh_qvalues(std::span<const double> p_values) {
    const size_t n = p_values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return p_values[i] < p_values[j]; });

    std::vector<double> q(n, 0.0);
    double running = 1.0;
    for (size_t r = n; r >= 1; --r) {
        const size_t i = order[r - 1];
        const double val = p_values[i] * static_cast<double>(n) / static_cast<double>(r);
        running = std::min(running, val);
        q[i] = std::min(1.0, running);
    }
    return q;
}

namespace {

double sample_mean(std::span<const double> x) {
    double s = 0.0;
    for (const double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_var(std::span<const double> x, double mean) {
    double s = 0.0;
    for (const double v : x) s += (v - mean) * (v - mean);
    return s / static_cast<double>(x.size() - 1);
}

} // namespace

double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw domain_error("cohens_d: need >= 2 samples per group");
    const double ma = sample_mean(a), mb = sample_mean(b);
    const double va = sample_var(a, ma), vb = sample_var(b, mb);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    if (pooled <= 0.0) throw domain_error("cohens_d: zero pooled variance");
    return (mb - ma) / std::sqrt(pooled);
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw domain_error("pearson_r: need two equal-length samples of size >= 2");
    const double mx = sample_mean(x), my = sample_mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw domain_error("pearson_r: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

} // namespace dycoh
