#include <doctest.h>

#include <cmath>
#include <vector>

#include "dycoh/mda.hpp"

using namespace dycoh;

namespace {

const direction_set& level3() {
    static const direction_set ds = tessellate_icosahedron(3);
    return ds;
}

// Antipodally symmetric lobe around d, plus an isotropic floor.
std::vector<double> lobe_odf(const direction_set& ds, const vec3& d, double weight,
                             double sharp = 40.0, double floor_val = 0.05) {
    std::vector<double> odf(static_cast<size_t>(ds.size()));
    for (int64_t j = 0; j < ds.size(); ++j) {
        const auto& u = ds.unit_vectors[static_cast<size_t>(j)];
        const double c = u[0] * d[0] + u[1] * d[1] + u[2] * d[2];
        odf[static_cast<size_t>(j)] = floor_val + weight * std::exp(sharp * (c * c - 1.0));
    }
    normalize_odf(std::span<double>(odf));
    return odf;
}

double angle_deg(const vec3& a, const vec3& b) {
    const double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    const double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
    double c = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (na * nb);
    c = std::clamp(std::abs(c), 0.0, 1.0); // undirected
    return std::acos(c) * 180.0 / M_PI;
}

} // namespace

TEST_CASE("normalize: uniform over 642 directions") {
    std::vector<double> odf(642, 3.7);
    normalize_odf(std::span<double>(odf));
    for (const double v : odf) CHECK(v == doctest::Approx(1.0 / 642.0).epsilon(1e-12));
    double sum = 0.0;
    for (const double v : odf) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("normalize: two-direction toy set") {
    std::vector<double> odf = {1.0, 3.0};
    normalize_odf(std::span<double>(odf));
    CHECK(odf[0] == doctest::Approx(0.25));
    CHECK(odf[1] == doctest::Approx(0.75));
}

TEST_CASE("normalize: all-zero is degenerate") {
    std::vector<double> odf(10, 0.0);
    CHECK_THROWS_AS(normalize_odf(std::span<double>(odf)), domain_error);
    std::vector<double> neg = {1.0, -0.5};
    CHECK_THROWS_AS(normalize_odf(std::span<double>(neg)), domain_error);
}

TEST_CASE("mda: isotropic gives zero") {
    std::vector<double> odf(642, 1.0 / 642.0);
    CHECK(mda_value(odf, 17) == doctest::Approx(0.0));
}

TEST_CASE("mda: ratio 8 gives 3/sqrt(33)") {
    // mu = 8^(2/3) = 4 -> |1-4| / sqrt(1+32) = 3/sqrt(33)
    std::vector<double> odf = {1.0, 8.0, 2.0};
    CHECK(mda_value(odf, 1) == doctest::Approx(3.0 / std::sqrt(33.0)).epsilon(1e-12));
    CHECK(mda_value(odf, 1) == doctest::Approx(0.52223).epsilon(1e-4));
}

TEST_CASE("mda: monotone in the ratio, limit 1/sqrt(2)") {
    double prev = -1.0;
    for (double mu_src = 1.0; mu_src <= 1e6; mu_src *= 1.3) {
        // psi/psi_min = mu_src^(3/2) so that mu = mu_src
        std::vector<double> odf = {1.0, std::pow(mu_src, 1.5)};
        const double v = mda_value(odf, 1);
        CHECK(v >= prev);
        CHECK(v < 1.0 / std::sqrt(2.0));
        prev = v;
    }
    std::vector<double> odf = {1.0, 1e18};
    CHECK(mda_value(odf, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("mda: zero minimum substitution is counted") {
    std::vector<double> odf = {0.0, 0.5, 0.5};
    int64_t subs = 0;
    const double v = mda_value(odf, 1, &subs);
    CHECK(subs == 1);
    CHECK(v > 0.7071067);
    CHECK(v < 1.0 / std::sqrt(2.0));
}

TEST_CASE("maxima: single lobe along +z") {
    const auto& ds = level3();
    const auto odf = lobe_odf(ds, {0, 0, 1}, 1.0);

    // oracle: exhaustive scan for the global maximum
    int32_t argmax = 0;
    for (int32_t j = 1; j < ds.size(); ++j)
        if (odf[static_cast<size_t>(j)] > odf[static_cast<size_t>(argmax)]) argmax = j;

    const auto peaks = find_local_maxima(odf, ds, 4);
    REQUIRE(peaks.size() == 1);
    const auto& u = ds.unit_vectors[static_cast<size_t>(peaks[0].vertex)];
    CHECK(angle_deg(u, {0, 0, 1}) < 3.0);
    // the found peak is the global max or its antipode
    const bool matches = peaks[0].vertex == argmax ||
                         peaks[0].vertex == ds.antipode[static_cast<size_t>(argmax)];
    CHECK(matches);
}

TEST_CASE("maxima: two orthogonal lobes ordered by strength") {
    const auto& ds = level3();
    std::vector<double> odf(static_cast<size_t>(ds.size()));
    for (int64_t j = 0; j < ds.size(); ++j) {
        const auto& u = ds.unit_vectors[static_cast<size_t>(j)];
        const double cz = u[2], cx = u[0];
        odf[static_cast<size_t>(j)] = 0.05 + 2.0 * std::exp(40.0 * (cz * cz - 1.0)) +
                                      1.0 * std::exp(40.0 * (cx * cx - 1.0));
    }
    normalize_odf(std::span<double>(odf));
    const auto peaks = find_local_maxima(odf, ds, 4);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0].mda > peaks[1].mda);
    const auto& first = ds.unit_vectors[static_cast<size_t>(peaks[0].vertex)];
    const auto& second = ds.unit_vectors[static_cast<size_t>(peaks[1].vertex)];
    CHECK(angle_deg(first, {0, 0, 1}) < 5.0);
    CHECK(angle_deg(second, {1, 0, 0}) < 5.0);
}

TEST_CASE("maxima: uniform ODF has none") {
    const auto& ds = level3();
    std::vector<double> odf(static_cast<size_t>(ds.size()), 1.0 / 642.0);
    CHECK(find_local_maxima(odf, ds, 4).empty());
}

TEST_CASE("maxima: peak directions invariant under pre-normalization scaling") {
    const auto& ds = level3();
    auto odf = lobe_odf(ds, {0, 0, 1}, 1.0);
    std::vector<double> scaled(odf.size());
    for (size_t i = 0; i < odf.size(); ++i) scaled[i] = odf[i] * 1234.5;
    normalize_odf(std::span<double>(scaled));
    const auto a = find_local_maxima(odf, ds, 4);
    const auto b = find_local_maxima(scaled, ds, 4);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].vertex == b[i].vertex);
        CHECK(a[i].mda == doctest::Approx(b[i].mda).epsilon(1e-9));
    }
}

TEST_CASE("extract: field-level behavior") {
    const auto& ds = level3();
    grid3 g(2, 2, 1);
    odf_field field(g, ds.size());
    mask wm(g);
    wm.set(0, true);
    wm.set(1, true);
    wm.set(2, true); // voxel 2 stays all-zero: degenerate

    const auto lobe = lobe_odf(ds, {0, 0, 1}, 1.0);
    for (int64_t v = 0; v < 2; ++v) {
        auto dst = field.voxel(v);
        for (size_t j = 0; j < lobe.size(); ++j) dst[j] = static_cast<float>(lobe[j]);
    }

    extract_stats stats;
    const auto pf = extract_peak_field(field, ds, wm, 4, &stats);
    CHECK(stats.degenerate_voxels == 1);

    // masked lobe voxels get one peak, outside-mask voxel 3 gets none
    const auto p0 = pf.voxel(0);
    double mag = std::sqrt(p0[0] * p0[0] + p0[1] * p0[1] + p0[2] * p0[2]);
    CHECK(mag > 0.1);
    const auto p3 = pf.voxel(3);
    for (const float x : p3) CHECK(x == 0.0f);

    // k_max=1 output is a prefix of k_max=4 output
    const auto pf1 = extract_peak_field(field, ds, wm, 1, nullptr);
    const auto q0 = pf1.voxel(0);
    for (int i = 0; i < 3; ++i) CHECK(q0[static_cast<size_t>(i)] == p0[static_cast<size_t>(i)]);
}

TEST_CASE("extract: empty mask yields empty field") {
    const auto& ds = level3();
    grid3 g(2, 2, 2);
    odf_field field(g, ds.size());
    mask wm(g);
    const auto pf = extract_peak_field(field, ds, wm, 4);
    for (const float x : pf.data) CHECK(x == 0.0f);
}

TEST_CASE("antipodally symmetric input: lobes / 2 peaks") {
    const auto& ds = level3();
    // one geometric fiber = two antipodal bumps; count must be 1
    const auto odf = lobe_odf(ds, {0, 0, 1}, 1.0);
    CHECK(find_local_maxima(odf, ds, 4).size() == 1);
    // crossing fibers = four bumps; count must be 2
    std::vector<double> two(static_cast<size_t>(ds.size()));
    for (int64_t j = 0; j < ds.size(); ++j) {
        const auto& u = ds.unit_vectors[static_cast<size_t>(j)];
        two[static_cast<size_t>(j)] = 0.05 + 2.0 * std::exp(40.0 * (u[2] * u[2] - 1.0)) +
                                      1.0 * std::exp(40.0 * (u[0] * u[0] - 1.0));
    }
    normalize_odf(std::span<double>(two));
    CHECK(find_local_maxima(two, ds, 4).size() == 2);
}
