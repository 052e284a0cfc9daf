#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dycoh/dissim.hpp"
#include "dycoh/lattice.hpp"
#include "dycoh/screen.hpp"

namespace dycoh {

// Median dissimilarity over the region's dyads for one subject pair (even
// counts average the middle two).
double region_dissim(const cohort_peaks& cohort, int32_t sx, int32_t sy,
                     std::span<const dyad> region, const dissim_variant& variant);

// Mean of the region dissimilarities.
double subject_dissim(std::span<const double> region_values);

struct region_stats {
    int64_t region_id = 0;
    int64_t n_dyads = 0;
    int64_t n_voxels = 0;
    double effect_size_interest = 0.0; // interest vs control Cohen's d
    double effect_size_holdout = 0.0;  // holdout vs control Cohen's d
};

// Per-region effect sizes against the control population's region-dissim
// distribution, for the population that defined the regions and for a
// holdout population that did not.
std::vector<region_stats> region_effect_table(const cohort_peaks& cohort, const region_set& rs,
                                              std::span<const subject_pair> pairs_interest,
                                              std::span<const subject_pair> pairs_control,
                                              std::span<const subject_pair> pairs_holdout,
                                              const dissim_variant& variant, int threads = 0);

// Rows = subject pairs, columns = regions, final column = row mean.
struct pair_similarity_matrix {
    std::vector<std::string> pair_ids;
    std::vector<std::string> pair_groups;
    int64_t n_regions = 0;
    std::vector<double> values;    // row-major, n_pairs * n_regions
    std::vector<double> aggregate; // per row

    double at(size_t row, size_t col) const {
        return values[row * static_cast<size_t>(n_regions) + col];
    }
};

pair_similarity_matrix pair_similarity(const cohort_peaks& cohort, const region_set& rs,
                                       std::span<const subject_pair> pairs,
                                       std::span<const std::string> pair_ids,
                                       std::span<const std::string> pair_groups,
                                       const dissim_variant& variant, int threads = 0);

// Pearson correlation between region columns over all supplied pairs
// (populations pooled). Symmetric with unit diagonal.
std::vector<std::vector<double>> region_correlation_matrix(const pair_similarity_matrix& sim);

} // namespace dycoh
