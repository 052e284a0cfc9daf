#include "dycoh/mda.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>

#include "dycoh/container.hpp"
#include "dycoh/parallel.hpp"

namespace dycoh {

namespace {

double mda_from_ratio(double psi, double psi_min) {
    const double mu = std::pow(psi / psi_min, 2.0 / 3.0);
    return std::abs(1.0 - mu) / std::sqrt(1.0 + 2.0 * mu * mu);
}

// Minimum sample with the zero floor substitution applied.
double effective_min(std::span<const double> odf, int64_t* substitutions) {
    double mn = std::numeric_limits<double>::infinity();
    double smallest_pos = std::numeric_limits<double>::infinity();
    for (const double v : odf) {
        mn = std::min(mn, v);
        if (v > 0.0) smallest_pos = std::min(smallest_pos, v);
    }
    if (mn > 0.0) return mn;
    if (!std::isfinite(smallest_pos))
        throw domain_error("mda_value: ODF has no positive sample");
    if (substitutions) ++*substitutions;
    return smallest_pos * 1e-12;
}

} // namespace

void normalize_odf(std::span<double> odf) {
    double sum = 0.0;
    for (const double v : odf) {
        if (v < 0.0) throw domain_error("normalize_odf: negative sample");
        sum += v;
    }
    if (sum <= 0.0) throw domain_error("normalize_odf: all-zero ODF");
    const double inv = 1.0 / sum;
    for (double& v : odf) v *= inv;
}

double mda_value(std::span<const double> odf, int64_t theta_id, int64_t* substitutions) {
    const double psi_min = effective_min(odf, substitutions);
    return mda_from_ratio(odf[static_cast<size_t>(theta_id)], psi_min);
}

std::vector<odf_peak> find_local_maxima(std::span<const double> odf, const direction_set& ds,
                                        int k_max, int64_t* substitutions) {
    std::vector<odf_peak> peaks;
    const auto n = static_cast<int32_t>(ds.size());

    for (int32_t v = 0; v < n; ++v) {
        const double psi = odf[static_cast<size_t>(v)];
        bool is_max = false; // needs at least one strictly smaller neighbor
        bool ok = true;
        for (const int32_t w : ds.adjacency[static_cast<size_t>(v)]) {
            const double other = odf[static_cast<size_t>(w)];
            if (psi > other) {
                is_max = true;
            } else if (psi < other || v > w) {
                // exact plateau ties go to the lower vertex id
                ok = false;
                break;
            }
        }
        if (ok && is_max) peaks.push_back({v, 0.0});
    }
    if (peaks.empty()) return peaks;

    // Of each antipodal pair of maxima keep the lower vertex id.
    std::vector<odf_peak> kept;
    kept.reserve(peaks.size());
    for (const auto& p : peaks) {
        const int32_t anti = ds.antipode[static_cast<size_t>(p.vertex)];
        const bool anti_is_max =
            std::any_of(peaks.begin(), peaks.end(),
                        [&](const odf_peak& q) { return q.vertex == anti; });
        if (anti_is_max && anti < p.vertex) continue;
        kept.push_back(p);
    }

    const double psi_min = effective_min(odf, substitutions);
    for (auto& p : kept)
        p.mda = mda_from_ratio(static_cast<double>(odf[static_cast<size_t>(p.vertex)]), psi_min);

    std::sort(kept.begin(), kept.end(), [](const odf_peak& a, const odf_peak& b) {
        if (a.mda != b.mda) return a.mda > b.mda;
        return a.vertex < b.vertex;
    });
    if (static_cast<int>(kept.size()) > k_max) kept.resize(static_cast<size_t>(k_max));
    return kept;
}

peak_field extract_peak_field(const odf_field& field, const direction_set& ds, const mask& wm,
                              int k_max, extract_stats* stats, int threads) {
    if (!(field.grid == wm.grid))
        throw domain_error("extract_peak_field: ODF and mask grids differ");
    if (field.n_dirs != ds.size())
        throw domain_error("extract_peak_field: ODF direction count does not match the set");
    if (k_max < 1 || k_max > 4)
        throw domain_error("extract_peak_field: k_max must be in 1..4");

    peak_field pf(field.grid, k_max);
    std::atomic<int64_t> degenerate{0};
    std::atomic<int64_t> substituted{0};

    parallel_for(field.grid.n_voxels(), resolve_threads(threads),
                 [&](int64_t begin, int64_t end, int) {
        std::vector<double> buf(static_cast<size_t>(field.n_dirs));
        int64_t local_degenerate = 0;
        int64_t local_subst = 0;
        for (int64_t v = begin; v < end; ++v) {
            if (!wm[v]) continue;
            const auto src = field.voxel(v);
            double sum = 0.0;
            for (const float x : src) sum += x;
            if (sum <= 0.0) {
                ++local_degenerate;
                continue; // degenerate voxel carries zero peaks
            }
            std::copy(src.begin(), src.end(), buf.begin());
            normalize_odf(std::span<double>(buf));
            const auto peaks = find_local_maxima(buf, ds, k_max, &local_subst);
            auto out = pf.voxel(v);
            for (size_t i = 0; i < peaks.size(); ++i) {
                const vec3& u = ds.unit_vectors[static_cast<size_t>(peaks[i].vertex)];
                out[i * 3 + 0] = static_cast<float>(peaks[i].mda * u[0]);
                out[i * 3 + 1] = static_cast<float>(peaks[i].mda * u[1]);
                out[i * 3 + 2] = static_cast<float>(peaks[i].mda * u[2]);
            }
        }
        degenerate += local_degenerate;
        substituted += local_subst;
    });

    if (stats) {
        stats->degenerate_voxels += degenerate.load();
        stats->zero_min_substitutions += substituted.load();
    }
    return pf;
}

void write_peak_field(const std::string& path, const peak_field& pf) {
    volume_header h;
    h.grid = pf.grid;
    h.type = dtype::f32;
    h.channels = static_cast<uint32_t>(pf.k_max * 3);
    h.tag = "peakfield";
    write_volume(path, h, pf.data.data(), pf.data.size() * sizeof(float));
}

peak_field read_peak_field(const std::string& path) {
    volume_file f = read_volume(path);
    if (f.header.type != dtype::f32 || f.header.tag != "peakfield" || f.header.channels % 3 != 0)
        throw format_error("read_peak_field: " + path + " is not a peakfield volume");
    peak_field pf(f.header.grid, static_cast<int>(f.header.channels / 3));
    std::memcpy(pf.data.data(), f.payload.data(), f.payload.size());
    return pf;
}

void write_odf_field(const std::string& path, const odf_field& f) {
    volume_header h;
    h.grid = f.grid;
    h.type = dtype::f32;
    h.channels = static_cast<uint32_t>(f.n_dirs);
    h.tag = "odf";
    write_volume(path, h, f.values.data(), f.values.size() * sizeof(float));
}

odf_field read_odf_field(const std::string& path) {
    volume_file f = read_volume(path);
    if (f.header.type != dtype::f32 || f.header.tag != "odf")
        throw format_error("read_odf_field: " + path + " is not an odf volume");
    odf_field out(f.header.grid, f.header.channels);
    std::memcpy(out.values.data(), f.payload.data(), f.payload.size());
    return out;
}

} // namespace dycoh
