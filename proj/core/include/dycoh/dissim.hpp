#pragma once

#include <array>
#include <span>
#include <string>

#include "dycoh/grid.hpp"
#include "dycoh/mda.hpp"

namespace dycoh {

// Dissimilarity kernel selector. Directional kernels compare rank-matched
// peak vectors up to their reflection; absent peaks are zero vectors.
//
//   voxel          sum_i min(|X_v^i - Y_v^i|, |X_v^i + Y_v^i|) at one voxel
//   cross_dyad     mean of the directed cross-voxel comparisons over (u,v)
//   within_dyad    mean of the per-voxel comparisons at u and at v
//   magnitude_only sum_i ||X^i| - |Y^i|| (direction-blind)
//   log_jacobian   |logJ_X(v) - logJ_Y(v)| on scalar volumes
//
// voxel and magnitude_only screen per voxel; the dyad kernels screen per
// lattice dyad. All dyad forms degenerate to their voxel form when u == v.
enum class dissim_kind { voxel, cross_dyad, within_dyad, magnitude_only, log_jacobian };

struct dissim_variant {
    dissim_kind kind = dissim_kind::cross_dyad;
    int k = 1; // peaks used, 1..4 (ignored by log_jacobian)
};

const char* dissim_kind_name(dissim_kind k);
dissim_kind dissim_kind_from_name(const std::string& name);
bool dissim_is_voxel_unit(dissim_kind k); // true when the hypothesis unit is a voxel

// min(|a - b|, |a + b|) over 3-vectors; reflection-invariant.
double vec_dissim(const std::array<double, 3>& a, const std::array<double, 3>& b);
double vec_dissim(std::span<const float> a, std::span<const float> b);

// Rank-matched sum over the first k peaks at voxel v.
double voxel_dissim(const peak_field& x, const peak_field& y, int64_t v, int k);

// Arithmetic mean of the directed cross-voxel comparisons (u,v) and (v,u).
double dyad_cross_dissim(const peak_field& x, const peak_field& y, int64_t u, int64_t v, int k);

// Mean of the per-voxel comparisons at u and v.
double dyad_within_dissim(const peak_field& x, const peak_field& y, int64_t u, int64_t v, int k);

// Direction-blind magnitude comparison at voxel v.
double magnitude_only_dissim(const peak_field& x, const peak_field& y, int64_t v, int k);

// |jx(v) - jy(v)|; NaN at v is a domain error.
double logjac_dissim(const scalar_volume& jx, const scalar_volume& jy, int64_t v);

// Raw-span kernels used by the screening hot path: x/y point at k*3 floats.
double peaks_voxel_dissim(std::span<const float> x, std::span<const float> y, int k);
double peaks_magnitude_dissim(std::span<const float> x, std::span<const float> y, int k);

} // namespace dycoh
