#include "dycoh/jacobian.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "dycoh/container.hpp"
#include "dycoh/parallel.hpp"

namespace dycoh {

namespace {

// d(u_c)/d(axis) at voxel (x,y,z): central difference where both neighbors
// exist, one-sided otherwise. Axis spacing in millimeters.
double derivative(const displacement_field& df, int comp, int axis, int64_t x, int64_t y,
                  int64_t z) {
    const auto& g = df.grid;
    int64_t c[3] = {x, y, z};
    const double h = g.voxel_size_mm[static_cast<size_t>(axis)];

    int64_t lo[3] = {c[0], c[1], c[2]};
    int64_t hi[3] = {c[0], c[1], c[2]};
    lo[axis] -= 1;
    hi[axis] += 1;
    const bool has_lo = lo[axis] >= 0;
    const bool has_hi = hi[axis] < g.dims[static_cast<size_t>(axis)];

    const auto val = [&](const int64_t* p) {
        return df.at(g.index(p[0], p[1], p[2]))[static_cast<size_t>(comp)];
    };
    if (has_lo && has_hi) return (val(hi) - val(lo)) / (2.0 * h);
    if (has_hi) return (val(hi) - val(c)) / h;
    if (has_lo) return (val(c) - val(lo)) / h;
    throw domain_error("log_jacobian_field: axis with a single voxel");
}

double det3(const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

} // namespace

log_jacobian_result log_jacobian_field(const displacement_field& df) {
    for (int a = 0; a < 3; ++a)
        if (df.grid.dims[static_cast<size_t>(a)] < 3)
            throw domain_error("log_jacobian_field: dims must be >= 3 per axis");

    log_jacobian_result res;
    res.logj = scalar_volume(df.grid);
    const auto [nx, ny, nz] = df.grid.dims;
    int64_t folded = 0;
    for (int64_t z = 0; z < nz; ++z)
        for (int64_t y = 0; y < ny; ++y)
            for (int64_t x = 0; x < nx; ++x) {
                double jac[3][3];
                for (int comp = 0; comp < 3; ++comp)
                    for (int axis = 0; axis < 3; ++axis)
                        jac[comp][axis] = (comp == axis ? 1.0 : 0.0) +
                                          derivative(df, comp, axis, x, y, z);
                const double det = det3(jac);
                const int64_t v = df.grid.index(x, y, z);
                if (det <= 0.0) {
                    res.logj[v] = std::numeric_limits<double>::quiet_NaN();
                    ++folded;
                } else {
                    res.logj[v] = std::log(det);
                }
            }
    res.folded_voxels = folded;
    return res;
}

exclusion_result jacobian_exclusion_mask(const std::vector<scalar_volume>& logj_per_subject,
                                         std::span<const subject_pair> pairs_interest,
                                         std::span<const subject_pair> pairs_control,
                                         const mask& wm, double p_threshold, int threads) {
    for (const auto& v : logj_per_subject)
        if (!(v.grid == wm.grid))
            throw domain_error("jacobian_exclusion_mask: volume grid differs from mask");
    const auto n_subjects = logj_per_subject.size();
    for (const auto pairs : {pairs_interest, pairs_control}) {
        if (pairs.size() < 2)
            throw domain_error("jacobian_exclusion_mask: need >= 2 pairs per population");
        for (const auto& p : pairs)
            if (p.a < 0 || p.b < 0 || p.a >= static_cast<int32_t>(n_subjects) ||
                p.b >= static_cast<int32_t>(n_subjects) || p.a == p.b)
                throw domain_error("jacobian_exclusion_mask: bad subject pair");
    }

    exclusion_result res;
    res.excluded = mask(wm.grid);
    std::atomic<int64_t> tested{0}, flagged{0}, nan_voxels{0};

    parallel_for(wm.grid.n_voxels(), resolve_threads(threads),
                 [&](int64_t begin, int64_t end, int) {
        std::vector<double> sa(pairs_interest.size());
        std::vector<double> sb(pairs_control.size());
        int64_t local_tested = 0, local_flagged = 0, local_nan = 0;
        for (int64_t v = begin; v < end; ++v) {
            if (!wm[v]) continue;
            bool nan_here = false;
            auto fill = [&](std::span<const subject_pair> pairs, std::vector<double>& out) {
                for (size_t j = 0; j < pairs.size(); ++j) {
                    const double a = logj_per_subject[static_cast<size_t>(pairs[j].a)][v];
                    const double b = logj_per_subject[static_cast<size_t>(pairs[j].b)][v];
                    if (std::isnan(a) || std::isnan(b)) {
                        nan_here = true;
                        return;
                    }
                    out[j] = std::abs(a - b);
                }
            };
            fill(pairs_interest, sa);
            if (!nan_here) fill(pairs_control, sb);
            if (nan_here) {
                // untestable: fold artifacts are excluded outright
                res.excluded.set(v, true);
                ++local_nan;
                continue;
            }
            ++local_tested;
            const auto t = mann_whitney_one_sided(sa, sb, mw_alternative::a_less);
            if (t.p_one_sided < p_threshold) {
                res.excluded.set(v, true);
                ++local_flagged;
            }
        }
        tested += local_tested;
        flagged += local_flagged;
        nan_voxels += local_nan;
    });

    res.n_tested = tested.load();
    res.n_flagged = flagged.load();
    res.n_nan_voxels = nan_voxels.load();
    res.fdr = res.n_tested > 0 ? fdr_estimate(res.n_tested, p_threshold, res.n_flagged) : 1.0;
    return res;
}

mask apply_exclusion(const mask& wm, const mask& excluded) {
    if (!(wm.grid == excluded.grid))
        throw domain_error("apply_exclusion: grids differ");
    mask out = wm;
    for (size_t v = 0; v < out.data.size(); ++v)
        if (excluded.data[v]) out.data[v] = 0;
    return out;
}

void write_displacement_field(const std::string& path, const displacement_field& df) {
    std::vector<float> payload(df.u.size());
    for (size_t i = 0; i < df.u.size(); ++i) payload[i] = static_cast<float>(df.u[i]);
    volume_header h;
    h.grid = df.grid;
    h.type = dtype::f32;
    h.channels = 3;
    h.tag = "dispfield";
    write_volume(path, h, payload.data(), payload.size() * sizeof(float));
}

displacement_field read_displacement_field(const std::string& path) {
    volume_file f = read_volume(path);
    if (f.header.type != dtype::f32 || f.header.channels != 3 || f.header.tag != "dispfield")
        throw format_error("read_displacement_field: " + path + " is not a dispfield volume");
    displacement_field df(f.header.grid);
    const auto* src = reinterpret_cast<const float*>(f.payload.data());
    for (size_t i = 0; i < df.u.size(); ++i) df.u[i] = src[i];
    return df;
}

} // namespace dycoh
