#include "dycoh/dissim.hpp"

#include <cmath>

namespace dycoh {

const char* dissim_kind_name(dissim_kind k) {
    switch (k) {
        case dissim_kind::voxel: return "voxel";
        case dissim_kind::cross_dyad: return "cross";
        case dissim_kind::within_dyad: return "within";
        case dissim_kind::magnitude_only: return "magnitude";
        case dissim_kind::log_jacobian: return "logjac";
    }
    throw domain_error("unknown dissim kind");
}

dissim_kind dissim_kind_from_name(const std::string& name) {
    if (name == "voxel") return dissim_kind::voxel;
    if (name == "cross") return dissim_kind::cross_dyad;
    if (name == "within") return dissim_kind::within_dyad;
    if (name == "magnitude") return dissim_kind::magnitude_only;
    if (name == "logjac") return dissim_kind::log_jacobian;
    throw domain_error("unknown dissim variant: " + name);
}

bool dissim_is_voxel_unit(dissim_kind k) {
    return k == dissim_kind::voxel || k == dissim_kind::magnitude_only ||
           k == dissim_kind::log_jacobian;
}

double vec_dissim(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double dm = 0.0, dp = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double m = a[i] - b[i];
        const double p = a[i] + b[i];
        dm += m * m;
        dp += p * p;
    }
    return std::sqrt(std::min(dm, dp));
}

double vec_dissim(std::span<const float> a, std::span<const float> b) {
    double dm = 0.0, dp = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double ai = a[static_cast<size_t>(i)];
        const double bi = b[static_cast<size_t>(i)];
        const double m = ai - bi;
        const double p = ai + bi;
        dm += m * m;
        dp += p * p;
    }
    return std::sqrt(std::min(dm, dp));
}

namespace {

// One rank-matched term; peaks beyond a field's k_max are zero vectors.
inline double term(std::span<const float> xs, int kx, std::span<const float> ys, int ky, int i) {
    static constexpr float kZero[3] = {0.0f, 0.0f, 0.0f};
    const float* a = i < kx ? xs.data() + 3 * i : kZero;
    const float* b = i < ky ? ys.data() + 3 * i : kZero;
    return vec_dissim(std::span<const float>(a, 3), std::span<const float>(b, 3));
}

inline double mag3(const float* p) {
    const double x = p[0], y = p[1], z = p[2];
    return std::sqrt(x * x + y * y + z * z);
}

void check_voxel(const peak_field& f, int64_t v, const char* who) {
    if (v < 0 || v >= f.grid.n_voxels()) throw domain_error(std::string(who) + ": voxel out of range");
}

} // namespace

double peaks_voxel_dissim(std::span<const float> x, std::span<const float> y, int k) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i)
        sum += vec_dissim(x.subspan(static_cast<size_t>(3 * i), 3),
                          y.subspan(static_cast<size_t>(3 * i), 3));
    return sum;
}

double peaks_magnitude_dissim(std::span<const float> x, std::span<const float> y, int k) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i)
        sum += std::abs(mag3(x.data() + 3 * i) - mag3(y.data() + 3 * i));
    return sum;
}

double voxel_dissim(const peak_field& x, const peak_field& y, int64_t v, int k) {
    check_voxel(x, v, "voxel_dissim");
    check_voxel(y, v, "voxel_dissim");
    const auto xs = x.voxel(v);
    const auto ys = y.voxel(v);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += term(xs, x.k_max, ys, y.k_max, i);
    return sum;
}

double dyad_cross_dissim(const peak_field& x, const peak_field& y, int64_t u, int64_t v, int k) {
    check_voxel(x, u, "dyad_cross_dissim");
    check_voxel(x, v, "dyad_cross_dissim");
    const auto xu = x.voxel(u), xv = x.voxel(v);
    const auto yu = y.voxel(u), yv = y.voxel(v);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        sum += term(xu, x.k_max, yv, y.k_max, i);
        sum += term(xv, x.k_max, yu, y.k_max, i);
    }
    return 0.5 * sum;
}

double dyad_within_dissim(const peak_field& x, const peak_field& y, int64_t u, int64_t v, int k) {
    return 0.5 * (voxel_dissim(x, y, u, k) + voxel_dissim(x, y, v, k));
}

double magnitude_only_dissim(const peak_field& x, const peak_field& y, int64_t v, int k) {
    check_voxel(x, v, "magnitude_only_dissim");
    check_voxel(y, v, "magnitude_only_dissim");
    const auto xs = x.voxel(v);
    const auto ys = y.voxel(v);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        const double mx = i < x.k_max ? mag3(xs.data() + 3 * i) : 0.0;
        const double my = i < y.k_max ? mag3(ys.data() + 3 * i) : 0.0;
        sum += std::abs(mx - my);
    }
    return sum;
}

double logjac_dissim(const scalar_volume& jx, const scalar_volume& jy, int64_t v) {
    const double a = jx[v];
    const double b = jy[v];
    if (std::isnan(a) || std::isnan(b))
        throw domain_error("logjac_dissim: NaN log-Jacobian at voxel " + std::to_string(v));
    return std::abs(a - b);
}

} // namespace dycoh
