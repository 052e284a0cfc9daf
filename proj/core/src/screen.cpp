#include "dycoh/screen.hpp"

#include <algorithm>
#include <atomic>

#include "dycoh/parallel.hpp"

namespace dycoh {

cohort_peaks cohort_peaks::create(const mask& wm, int k_max) {
    if (k_max < 1 || k_max > 4) throw domain_error("cohort_peaks: k_max must be in 1..4");
    cohort_peaks c;
    c.grid = wm.grid;
    c.k_max = k_max;
    c.rank_of_voxel.assign(static_cast<size_t>(wm.grid.n_voxels()), -1);
    for (int64_t v = 0; v < wm.grid.n_voxels(); ++v) {
        if (!wm[v]) continue;
        c.rank_of_voxel[static_cast<size_t>(v)] = static_cast<int64_t>(c.voxels.size());
        c.voxels.push_back(v);
    }
    return c;
}

void cohort_peaks::add_subject(const std::string& id, const peak_field& pf) {
    if (!(pf.grid == grid)) throw domain_error("cohort_peaks: subject grid mismatch");
    if (pf.k_max < k_max)
        throw domain_error("cohort_peaks: subject has fewer peaks than the cohort k_max");
    std::vector<float> compact(voxels.size() * static_cast<size_t>(k_max) * 3, 0.0f);
    for (size_t r = 0; r < voxels.size(); ++r) {
        const auto src = pf.voxel(voxels[r]);
        for (int i = 0; i < k_max * 3; ++i)
            compact[r * static_cast<size_t>(k_max) * 3 + static_cast<size_t>(i)] =
                src[static_cast<size_t>(i)];
    }
    subject_ids.push_back(id);
    peaks.push_back(std::move(compact));
}

int32_t cohort_peaks::subject_index(const std::string& id) const {
    for (size_t i = 0; i < subject_ids.size(); ++i)
        if (subject_ids[i] == id) return static_cast<int32_t>(i);
    return -1;
}

std::vector<dyad> screen_result::significant_units() const {
    std::vector<dyad> out;
    for (size_t i = 0; i < units.size(); ++i)
        if (tests[i].significant) out.push_back(units[i]);
    return out;
}

namespace {

void validate_pairs(std::span<const subject_pair> pairs, size_t n_subjects, const char* who) {
    if (pairs.size() < 2) throw domain_error(std::string(who) + ": need >= 2 subject pairs");
    for (const auto& p : pairs) {
        if (p.a < 0 || p.b < 0 || p.a >= static_cast<int32_t>(n_subjects) ||
            p.b >= static_cast<int32_t>(n_subjects))
            throw domain_error(std::string(who) + ": pair index out of range");
        if (p.a == p.b) throw domain_error(std::string(who) + ": pair of a subject with itself");
    }
}

} // namespace

screen_result screen_dyads(const lattice_graph& graph, const cohort_peaks& cohort,
                           std::span<const subject_pair> pairs_interest,
                           std::span<const subject_pair> pairs_control,
                           const screen_config& cfg) {
    if (!(graph.grid == cohort.grid))
        throw domain_error("screen_dyads: lattice and cohort grids differ");
    if (cfg.variant.kind == dissim_kind::log_jacobian)
        throw domain_error("screen_dyads: log-Jacobian screening uses jacobian_exclusion_mask");
    if (cfg.variant.k < 1 || cfg.variant.k > cohort.k_max)
        throw domain_error("screen_dyads: k outside the cohort's peak count");
    validate_pairs(pairs_interest, cohort.subject_ids.size(), "screen_dyads(interest)");
    validate_pairs(pairs_control, cohort.subject_ids.size(), "screen_dyads(control)");
    for (const auto& [u, v] : graph.dyads)
        if (cohort.rank_of_voxel[static_cast<size_t>(u)] < 0 ||
            cohort.rank_of_voxel[static_cast<size_t>(v)] < 0)
            throw domain_error("screen_dyads: lattice dyad outside the cohort mask");

    screen_result res;
    if (dissim_is_voxel_unit(cfg.variant.kind)) {
        res.units.reserve(static_cast<size_t>(graph.wm.count()));
        for (int64_t v = 0; v < graph.grid.n_voxels(); ++v)
            if (graph.wm[v]) res.units.emplace_back(v, v);
    } else {
        res.units = graph.dyads;
    }
    res.tests.assign(res.units.size(), {});

    const int k = cfg.variant.k;
    const dissim_kind kind = cfg.variant.kind;
    auto unit_dissim = [&](int32_t sx, int32_t sy, const dyad& d) -> double {
        const auto xu = cohort.peaks_at(sx, d.first);
        const auto yu = cohort.peaks_at(sy, d.first);
        switch (kind) {
            case dissim_kind::voxel:
                return peaks_voxel_dissim(xu, yu, k);
            case dissim_kind::magnitude_only:
                return peaks_magnitude_dissim(xu, yu, k);
            case dissim_kind::within_dyad: {
                const auto xv = cohort.peaks_at(sx, d.second);
                const auto yv = cohort.peaks_at(sy, d.second);
                return 0.5 * (peaks_voxel_dissim(xu, yu, k) + peaks_voxel_dissim(xv, yv, k));
            }
            case dissim_kind::cross_dyad:
            default: {
                const auto xv = cohort.peaks_at(sx, d.second);
                const auto yv = cohort.peaks_at(sy, d.second);
                return 0.5 * (peaks_voxel_dissim(xu, yv, k) + peaks_voxel_dissim(xv, yu, k));
            }
        }
    };

    // Warm the exact-CDF cache outside the parallel region.
    if (cfg.policy != mw_policy::approx &&
        static_cast<int64_t>(pairs_interest.size()) * static_cast<int64_t>(pairs_control.size()) <=
            400)
        exact_u_cdf(static_cast<int64_t>(pairs_interest.size()),
                    static_cast<int64_t>(pairs_control.size()));

    parallel_for(static_cast<int64_t>(res.units.size()), resolve_threads(cfg.threads),
                 [&](int64_t begin, int64_t end, int) {
        std::vector<double> sa(pairs_interest.size());
        std::vector<double> sb(pairs_control.size());
        for (int64_t i = begin; i < end; ++i) {
            const dyad& d = res.units[static_cast<size_t>(i)];
            for (size_t j = 0; j < pairs_interest.size(); ++j)
                sa[j] = unit_dissim(pairs_interest[j].a, pairs_interest[j].b, d);
            for (size_t j = 0; j < pairs_control.size(); ++j)
                sb[j] = unit_dissim(pairs_control[j].a, pairs_control[j].b, d);
            const u_test_result t =
                mann_whitney_one_sided(sa, sb, cfg.alternative, cfg.policy);
            auto& out = res.tests[static_cast<size_t>(i)];
            out.u = t.u;
            out.p = t.p_one_sided;
            out.significant = t.p_one_sided < cfg.threshold_p ? 1 : 0;
            out.exact = t.exact ? 1 : 0;
            out.tie_corrected = t.tie_correction_applied ? 1 : 0;
        }
    });

    res.summary.n_tests = static_cast<int64_t>(res.units.size());
    res.summary.threshold_p = cfg.threshold_p;
    std::vector<int64_t> sig_voxels;
    for (size_t i = 0; i < res.units.size(); ++i) {
        if (!res.tests[i].significant) continue;
        ++res.summary.n_significant;
        sig_voxels.push_back(res.units[i].first);
        if (res.units[i].second != res.units[i].first) sig_voxels.push_back(res.units[i].second);
    }
    std::sort(sig_voxels.begin(), sig_voxels.end());
    sig_voxels.erase(std::unique(sig_voxels.begin(), sig_voxels.end()), sig_voxels.end());
    res.summary.n_significant_voxels = static_cast<int64_t>(sig_voxels.size());
    res.summary.fdr =
        fdr_estimate(res.summary.n_tests, cfg.threshold_p, res.summary.n_significant);
    return res;
}

} // namespace dycoh
