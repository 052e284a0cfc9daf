#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dycoh/dissim.hpp"
#include "dycoh/lattice.hpp"
#include "dycoh/mda.hpp"
#include "dycoh/stats.hpp"

namespace dycoh {

// Peak data for a whole cohort, compacted to the masked voxels so dozens of
// subjects fit in memory during screening.
struct cohort_peaks {
    grid3 grid;
    int k_max = 0;
    std::vector<int64_t> voxels;        // masked voxel ids, ascending
    std::vector<int64_t> rank_of_voxel; // dense rank or -1 outside the mask
    std::vector<std::string> subject_ids;
    std::vector<std::vector<float>> peaks; // [subject][rank * k_max * 3]

    static cohort_peaks create(const mask& wm, int k_max);
    void add_subject(const std::string& id, const peak_field& pf);
    int32_t subject_index(const std::string& id) const; // -1 when absent

    std::span<const float> peaks_at(int32_t subject, int64_t voxel) const {
        const int64_t r = rank_of_voxel[static_cast<size_t>(voxel)];
        return {peaks[static_cast<size_t>(subject)].data() +
                    static_cast<size_t>(r) * k_max * 3,
                static_cast<size_t>(k_max) * 3};
    }
};

struct subject_pair {
    int32_t a = -1;
    int32_t b = -1;
};

struct screen_config {
    dissim_variant variant{dissim_kind::cross_dyad, 1};
    double threshold_p = 1e-3;
    mw_alternative alternative = mw_alternative::a_less; // interest more coherent
    mw_policy policy = mw_policy::auto_policy;
    int threads = 0; // 0 = resolve from env/hardware
};

struct unit_test_entry {
    double u = 0.0;
    double p = 1.0;
    uint8_t significant = 0;
    uint8_t exact = 0;
    uint8_t tie_corrected = 0;
};

struct screen_summary {
    int64_t n_tests = 0;
    double threshold_p = 0.0;
    int64_t n_significant = 0;
    int64_t n_significant_voxels = 0; // unique voxels over significant units
    double fdr = 1.0;
};

struct screen_result {
    std::vector<dyad> units; // lattice dyads, or (v,v) for voxel-unit kernels
    std::vector<unit_test_entry> tests;
    screen_summary summary;

    std::vector<dyad> significant_units() const;
};

// Per-unit one-sided Mann-Whitney screen of interest pairs against control
// pairs. The hypothesis unit follows the variant: lattice dyads for the dyad
// kernels, masked voxels for the voxel-level kernels. Deterministic and
// thread-count independent; results are ordered by unit id.
screen_result screen_dyads(const lattice_graph& graph, const cohort_peaks& cohort,
                           std::span<const subject_pair> pairs_interest,
                           std::span<const subject_pair> pairs_control,
                           const screen_config& cfg);

} // namespace dycoh
