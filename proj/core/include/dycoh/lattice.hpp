#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dycoh/grid.hpp"

namespace dycoh {

using dyad = std::pair<int64_t, int64_t>; // linear indices, u < v canonical

// Lattice network over masked voxels. Connectivity 6 = shared face,
// 18 = face or edge, 26 = face, edge, or corner.
struct lattice_graph {
    grid3 grid;
    int connectivity = 26;
    mask wm; // the mask the lattice was built from
    std::vector<dyad> dyads; // sorted, unique, u < v
};

lattice_graph build_lattice(const mask& wm, int connectivity);

// Disjoint connected components of significant units, sorted by descending
// unique-voxel count (ties by smallest contained linear index). Units are
// dyads; a degenerate unit (v,v) stands for a single-voxel hypothesis from
// the voxel-level kernels.
struct region_set {
    grid3 grid;
    std::vector<std::vector<dyad>> regions;
    std::vector<int32_t> label_volume; // region id per voxel, -1 outside

    std::vector<int64_t> region_voxels(size_t region_id) const;
    int64_t voxel_count(size_t region_id) const;
};

// Components over the subgraph induced by the significant units: dyads are
// connected when they share a voxel; degenerate voxel units are connected
// when they are adjacent in the lattice.
region_set connected_components(const lattice_graph& graph, const std::vector<dyad>& significant);

// Keeps regions with at least min_voxels unique voxels, order preserved.
region_set prune_regions(const region_set& rs, int64_t min_voxels);

// Keeps the n largest regions (they are already sorted).
region_set top_regions(const region_set& rs, size_t n);

} // namespace dycoh
