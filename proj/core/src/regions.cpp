#include "dycoh/regions.hpp"

#include <algorithm>

#include "dycoh/parallel.hpp"
#include "dycoh/stats.hpp"

namespace dycoh {

namespace {

double unit_dissim(const cohort_peaks& cohort, int32_t sx, int32_t sy, const dyad& d,
                   const dissim_variant& variant) {
    const int k = variant.k;
    const auto xu = cohort.peaks_at(sx, d.first);
    const auto yu = cohort.peaks_at(sy, d.first);
    switch (variant.kind) {
        case dissim_kind::voxel:
            return peaks_voxel_dissim(xu, yu, k);
        case dissim_kind::magnitude_only:
            return peaks_magnitude_dissim(xu, yu, k);
        case dissim_kind::within_dyad: {
            const auto xv = cohort.peaks_at(sx, d.second);
            const auto yv = cohort.peaks_at(sy, d.second);
            return 0.5 * (peaks_voxel_dissim(xu, yu, k) + peaks_voxel_dissim(xv, yv, k));
        }
        case dissim_kind::cross_dyad: {
            const auto xv = cohort.peaks_at(sx, d.second);
            const auto yv = cohort.peaks_at(sy, d.second);
            return 0.5 * (peaks_voxel_dissim(xu, yv, k) + peaks_voxel_dissim(xv, yu, k));
        }
        default:
            throw domain_error("region_dissim: log-Jacobian is not a region kernel");
    }
}

double median_inplace(std::vector<double>& vals) {
    const size_t n = vals.size();
    const size_t mid = n / 2;
    std::nth_element(vals.begin(), vals.begin() + static_cast<ptrdiff_t>(mid), vals.end());
    double m = vals[mid];
    if (n % 2 == 0) {
        const double lo = *std::max_element(vals.begin(), vals.begin() + static_cast<ptrdiff_t>(mid));
        m = 0.5 * (lo + m);
    }
    return m;
}

} // namespace

double region_dissim(const cohort_peaks& cohort, int32_t sx, int32_t sy,
                     std::span<const dyad> region, const dissim_variant& variant) {
    if (region.empty()) throw domain_error("region_dissim: empty region");
    std::vector<double> vals(region.size());
    for (size_t i = 0; i < region.size(); ++i)
        vals[i] = unit_dissim(cohort, sx, sy, region[i], variant);
    return median_inplace(vals);
}

double subject_dissim(std::span<const double> region_values) {
    if (region_values.empty()) throw domain_error("subject_dissim: no regions");
    double s = 0.0;
    for (const double v : region_values) s += v;
    return s / static_cast<double>(region_values.size());
}

namespace {

// d_R for every (pair, region) cell; rows = pairs.
std::vector<std::vector<double>> region_dissim_table(const cohort_peaks& cohort,
                                                     const region_set& rs,
                                                     std::span<const subject_pair> pairs,
                                                     const dissim_variant& variant,
                                                     int threads) {
    std::vector<std::vector<double>> table(pairs.size(),
                                           std::vector<double>(rs.regions.size(), 0.0));
    parallel_for(static_cast<int64_t>(pairs.size()), resolve_threads(threads),
                 [&](int64_t begin, int64_t end, int) {
        for (int64_t i = begin; i < end; ++i) {
            const auto& p = pairs[static_cast<size_t>(i)];
            for (size_t r = 0; r < rs.regions.size(); ++r)
                table[static_cast<size_t>(i)][r] =
                    region_dissim(cohort, p.a, p.b, rs.regions[r], variant);
        }
    });
    return table;
}

} // namespace

std::vector<region_stats> region_effect_table(const cohort_peaks& cohort, const region_set& rs,
                                              std::span<const subject_pair> pairs_interest,
                                              std::span<const subject_pair> pairs_control,
                                              std::span<const subject_pair> pairs_holdout,
                                              const dissim_variant& variant, int threads) {
    if (pairs_interest.size() < 2 || pairs_control.size() < 2 || pairs_holdout.size() < 2)
        throw domain_error("region_effect_table: need >= 2 pairs in each group");

    const auto ti = region_dissim_table(cohort, rs, pairs_interest, variant, threads);
    const auto tc = region_dissim_table(cohort, rs, pairs_control, variant, threads);
    const auto th = region_dissim_table(cohort, rs, pairs_holdout, variant, threads);

    std::vector<region_stats> out;
    for (size_t r = 0; r < rs.regions.size(); ++r) {
        region_stats st;
        st.region_id = static_cast<int64_t>(r);
        st.n_dyads = static_cast<int64_t>(rs.regions[r].size());
        st.n_voxels = rs.voxel_count(r);
        auto column = [&](const std::vector<std::vector<double>>& t) {
            std::vector<double> col(t.size());
            for (size_t i = 0; i < t.size(); ++i) col[i] = t[i][r];
            return col;
        };
        const auto ci = column(ti);
        const auto cc = column(tc);
        const auto ch = column(th);
        st.effect_size_interest = cohens_d(ci, cc);
        st.effect_size_holdout = cohens_d(ch, cc);
        out.push_back(st);
    }
    return out;
}

pair_similarity_matrix pair_similarity(const cohort_peaks& cohort, const region_set& rs,
                                       std::span<const subject_pair> pairs,
                                       std::span<const std::string> pair_ids,
                                       std::span<const std::string> pair_groups,
                                       const dissim_variant& variant, int threads) {
    if (rs.regions.empty()) throw domain_error("pair_similarity: no regions");
    if (pair_ids.size() != pairs.size() || pair_groups.size() != pairs.size())
        throw domain_error("pair_similarity: ids/groups length mismatch");

    pair_similarity_matrix out;
    out.n_regions = static_cast<int64_t>(rs.regions.size());
    out.pair_ids.assign(pair_ids.begin(), pair_ids.end());
    out.pair_groups.assign(pair_groups.begin(), pair_groups.end());
    const auto table = region_dissim_table(cohort, rs, pairs, variant, threads);
    out.values.reserve(pairs.size() * rs.regions.size());
    for (const auto& row : table) {
        for (const double v : row) out.values.push_back(v);
        out.aggregate.push_back(subject_dissim(row));
    }
    return out;
}

std::vector<std::vector<double>> region_correlation_matrix(const pair_similarity_matrix& sim) {
    const auto r = static_cast<size_t>(sim.n_regions);
    const size_t n = sim.pair_ids.size();
    if (n < 2) throw domain_error("region_correlation_matrix: need >= 2 subject pairs");

    std::vector<std::vector<double>> cols(r, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < r; ++j) cols[j][i] = sim.at(i, j);

    std::vector<std::vector<double>> m(r, std::vector<double>(r, 1.0));
    for (size_t a = 0; a < r; ++a)
        for (size_t b = a + 1; b < r; ++b) {
            const double rho = pearson_r(cols[a], cols[b]);
            m[a][b] = rho;
            m[b][a] = rho;
        }
    return m;
}

} // namespace dycoh
