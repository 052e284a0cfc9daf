#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dycoh/grid.hpp"
#include "dycoh/screen.hpp"
#include "dycoh/stats.hpp"

namespace dycoh {

// Millimeter displacement per voxel (normalization warp).
struct displacement_field {
    grid3 grid;
    std::vector<double> u; // n_voxels * 3

    displacement_field() = default;
    explicit displacement_field(const grid3& g)
        : grid(g), u(static_cast<size_t>(g.n_voxels()) * 3, 0.0) {}

    std::span<double> at(int64_t v) { return {u.data() + static_cast<size_t>(v) * 3, 3}; }
    std::span<const double> at(int64_t v) const {
        return {u.data() + static_cast<size_t>(v) * 3, 3};
    }
};

struct log_jacobian_result {
    scalar_volume logj;
    int64_t folded_voxels = 0; // det <= 0, output NaN
};

// ln det(I + grad u), central differences in the interior, one-sided at the
// boundary, derivatives scaled by voxel size. Folding (det <= 0) yields NaN
// and is counted, not fatal.
log_jacobian_result log_jacobian_field(const displacement_field& df);

struct exclusion_result {
    mask excluded;       // flagged voxels, subset of the input mask
    int64_t n_tested = 0;
    int64_t n_flagged = 0;
    int64_t n_nan_voxels = 0; // folded in some subject; flagged without a test
    double fdr = 1.0;
};

// Per-voxel one-sided Mann-Whitney on |delta logJ| samples: voxels where the
// interest pairs are significantly more similar than control pairs are
// flagged for exclusion. Voxels with NaN log-Jacobians in any involved
// subject cannot be tested and are excluded as well.
exclusion_result jacobian_exclusion_mask(const std::vector<scalar_volume>& logj_per_subject,
                                         std::span<const subject_pair> pairs_interest,
                                         std::span<const subject_pair> pairs_control,
                                         const mask& wm, double p_threshold,
                                         int threads = 0);

// Removes flagged voxels from a mask (the downstream lattice is built from
// the result, so no dyad can touch an excluded voxel).
mask apply_exclusion(const mask& wm, const mask& excluded);

// Displacement-field container round trip (f32, channels=3, tag "dispfield").
void write_displacement_field(const std::string& path, const displacement_field& df);
displacement_field read_displacement_field(const std::string& path);

} // namespace dycoh
