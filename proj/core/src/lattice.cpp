#include "dycoh/lattice.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace dycoh {

namespace {

// Positive-direction half stencil; the mirrored half would only produce the
// same dyads with u and v swapped.
struct offset {
    int dx, dy, dz;
};

std::vector<offset> half_stencil(int connectivity) {
    if (connectivity != 6 && connectivity != 18 && connectivity != 26)
        throw domain_error("build_lattice: connectivity must be 6, 18, or 26");
    std::vector<offset> out;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int order = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (order == 0) continue;
                if (connectivity == 6 && order > 1) continue;
                if (connectivity == 18 && order > 2) continue;
                // keep the offset whose first nonzero component is positive
                if (dz > 0 || (dz == 0 && (dy > 0 || (dy == 0 && dx > 0))))
                    out.push_back({dx, dy, dz});
            }
    return out;
}

struct union_find {
    std::vector<int64_t> parent;
    explicit union_find(int64_t n) : parent(static_cast<size_t>(n)) {
        std::iota(parent.begin(), parent.end(), int64_t{0});
    }
    int64_t find(int64_t x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    }
    void unite(int64_t a, int64_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
    }
};

} // namespace

lattice_graph build_lattice(const mask& wm, int connectivity) {
    const auto stencil = half_stencil(connectivity);
    if (wm.count() == 0) throw domain_error("build_lattice: empty mask");

    lattice_graph g;
    g.grid = wm.grid;
    g.connectivity = connectivity;
    g.wm = wm;

    const auto [nx, ny, nz] = wm.grid.dims;
    for (int64_t z = 0; z < nz; ++z)
        for (int64_t y = 0; y < ny; ++y)
            for (int64_t x = 0; x < nx; ++x) {
                const int64_t u = wm.grid.index(x, y, z);
                if (!wm[u]) continue;
                for (const auto& o : stencil) {
                    const int64_t xx = x + o.dx, yy = y + o.dy, zz = z + o.dz;
                    if (!wm.grid.contains(xx, yy, zz)) continue;
                    const int64_t v = wm.grid.index(xx, yy, zz);
                    if (!wm[v]) continue;
                    g.dyads.emplace_back(std::min(u, v), std::max(u, v));
                }
            }
    std::sort(g.dyads.begin(), g.dyads.end());
    return g;
}

std::vector<int64_t> region_set::region_voxels(size_t region_id) const {
    std::vector<int64_t> vox;
    for (const auto& [u, v] : regions[region_id]) {
        vox.push_back(u);
        if (v != u) vox.push_back(v);
    }
    std::sort(vox.begin(), vox.end());
    vox.erase(std::unique(vox.begin(), vox.end()), vox.end());
    return vox;
}

int64_t region_set::voxel_count(size_t region_id) const {
    return static_cast<int64_t>(region_voxels(region_id).size());
}

region_set connected_components(const lattice_graph& graph, const std::vector<dyad>& significant) {
    // Compact the voxels touched by significant units.
    std::unordered_map<int64_t, int64_t> voxel_rank;
    std::vector<int64_t> voxels;
    auto rank_of = [&](int64_t v) {
        auto [it, inserted] = voxel_rank.try_emplace(v, static_cast<int64_t>(voxels.size()));
        if (inserted) voxels.push_back(v);
        return it->second;
    };
    for (const auto& [u, v] : significant) {
        rank_of(u);
        rank_of(v);
    }

    union_find uf(static_cast<int64_t>(voxels.size()));
    bool any_degenerate = false;
    for (const auto& [u, v] : significant) {
        if (u == v)
            any_degenerate = true;
        else
            uf.unite(voxel_rank.at(u), voxel_rank.at(v));
    }
    if (any_degenerate) {
        // Voxel-unit screening: adjacency comes from the lattice itself.
        std::unordered_set<int64_t> sig_voxels;
        for (const auto& [u, v] : significant)
            if (u == v) sig_voxels.insert(u);
        for (const auto& [u, v] : graph.dyads)
            if (sig_voxels.count(u) && sig_voxels.count(v))
                uf.unite(voxel_rank.at(u), voxel_rank.at(v));
    }

    // Group units by voxel component.
    std::unordered_map<int64_t, std::vector<dyad>> by_root;
    for (const auto& d : significant) by_root[uf.find(voxel_rank.at(d.first))].push_back(d);

    struct entry {
        int64_t n_voxels;
        int64_t min_voxel;
        std::vector<dyad> dyads;
    };
    std::vector<entry> entries;
    entries.reserve(by_root.size());
    for (auto& [root, dyads] : by_root) {
        std::sort(dyads.begin(), dyads.end());
        std::vector<int64_t> vox;
        for (const auto& [u, v] : dyads) {
            vox.push_back(u);
            vox.push_back(v);
        }
        std::sort(vox.begin(), vox.end());
        vox.erase(std::unique(vox.begin(), vox.end()), vox.end());
        entries.push_back({static_cast<int64_t>(vox.size()), vox.front(), std::move(dyads)});
    }
    std::sort(entries.begin(), entries.end(), [](const entry& a, const entry& b) {
        if (a.n_voxels != b.n_voxels) return a.n_voxels > b.n_voxels;
        return a.min_voxel < b.min_voxel;
    });

    region_set rs;
    rs.grid = graph.grid;
    rs.label_volume.assign(static_cast<size_t>(graph.grid.n_voxels()), -1);
    rs.regions.reserve(entries.size());
    for (size_t r = 0; r < entries.size(); ++r) {
        for (const auto& [u, v] : entries[r].dyads) {
            rs.label_volume[static_cast<size_t>(u)] = static_cast<int32_t>(r);
            rs.label_volume[static_cast<size_t>(v)] = static_cast<int32_t>(r);
        }
        rs.regions.push_back(std::move(entries[r].dyads));
    }
    return rs;
}

namespace {

region_set rebuild(const region_set& rs, const std::vector<size_t>& keep) {
    region_set out;
    out.grid = rs.grid;
    out.label_volume.assign(static_cast<size_t>(rs.grid.n_voxels()), -1);
    for (size_t r = 0; r < keep.size(); ++r) {
        const auto& dyads = rs.regions[keep[r]];
        for (const auto& [u, v] : dyads) {
            out.label_volume[static_cast<size_t>(u)] = static_cast<int32_t>(r);
            out.label_volume[static_cast<size_t>(v)] = static_cast<int32_t>(r);
        }
        out.regions.push_back(dyads);
    }
    return out;
}

} // namespace

region_set prune_regions(const region_set& rs, int64_t min_voxels) {
    if (min_voxels < 2) throw domain_error("prune_regions: min_voxels must be >= 2");
    std::vector<size_t> keep;
    for (size_t r = 0; r < rs.regions.size(); ++r)
        if (rs.voxel_count(r) >= min_voxels) keep.push_back(r);
    return rebuild(rs, keep);
}

region_set top_regions(const region_set& rs, size_t n) {
    std::vector<size_t> keep;
    for (size_t r = 0; r < rs.regions.size() && r < n; ++r) keep.push_back(r);
    return rebuild(rs, keep);
}

} // namespace dycoh
