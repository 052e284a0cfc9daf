#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dycoh/jacobian.hpp"
#include "dycoh/lattice.hpp"
#include "dycoh/rng.hpp"

using namespace dycoh;

namespace {

displacement_field affine_field(const grid3& g, double alpha) {
    displacement_field df(g);
    for (int64_t z = 0; z < g.dims[2]; ++z)
        for (int64_t y = 0; y < g.dims[1]; ++y)
            for (int64_t x = 0; x < g.dims[0]; ++x) {
                auto u = df.at(g.index(x, y, z));
                u[0] = alpha * static_cast<double>(x) * g.voxel_size_mm[0];
                u[1] = alpha * static_cast<double>(y) * g.voxel_size_mm[1];
                u[2] = alpha * static_cast<double>(z) * g.voxel_size_mm[2];
            }
    return df;
}

} // namespace

TEST_CASE("log jacobian: zero displacement gives exact zero") {
    const auto res = log_jacobian_field(displacement_field(grid3(5, 5, 5)));
    CHECK(res.folded_voxels == 0);
    for (const double v : res.logj.data) CHECK(v == 0.0);
}

TEST_CASE("log jacobian: uniform affine") {
    const grid3 g(8, 8, 8, 1.25, 1.25, 1.25);
    const auto res = log_jacobian_field(affine_field(g, 0.1));
    CHECK(res.folded_voxels == 0);
    const double expected = 3.0 * std::log(1.1);
    for (const double v : res.logj.data) CHECK(std::abs(v - expected) < 1e-6);
}

TEST_CASE("log jacobian: rigid translation gives exact zero") {
    const grid3 g(4, 4, 4);
    displacement_field df(g);
    for (int64_t v = 0; v < g.n_voxels(); ++v) {
        auto u = df.at(v);
        u[0] = 3.5;
        u[1] = -1.25;
        u[2] = 0.75;
    }
    const auto res = log_jacobian_field(df);
    for (const double v : res.logj.data) CHECK(v == 0.0);
}

TEST_CASE("log jacobian: central difference converges at second order") {
    // u_x = a sin(w x), grad contribution cos-like; halving the step must
    // shrink the interior error by about 4x
    auto build = [](int64_t n, double h) {
        grid3 g(n, 3, 3, h, 1.0, 1.0);
        displacement_field df(g);
        for (int64_t z = 0; z < 3; ++z)
            for (int64_t y = 0; y < 3; ++y)
                for (int64_t x = 0; x < n; ++x) {
                    auto u = df.at(g.index(x, y, z));
                    u[0] = 0.05 * std::sin(0.8 * static_cast<double>(x) * h);
                }
        return df;
    };
    auto max_interior_err = [](const log_jacobian_result& res, double h) {
        const auto& g = res.logj.grid;
        double worst = 0.0;
        for (int64_t x = 1; x + 1 < g.dims[0]; ++x) {
            const double xw = static_cast<double>(x) * h;
            const double exact = std::log(1.0 + 0.05 * 0.8 * std::cos(0.8 * xw));
            const double got = res.logj[g.index(x, 1, 1)];
            worst = std::max(worst, std::abs(got - exact));
        }
        return worst;
    };
    const double e1 = max_interior_err(log_jacobian_field(build(17, 0.5)), 0.5);
    const double e2 = max_interior_err(log_jacobian_field(build(33, 0.25)), 0.25);
    CHECK(e2 < e1 / 3.0); // ~4x for a second-order stencil
}

TEST_CASE("log jacobian: folding yields NaN and a counter") {
    const grid3 g(5, 3, 3);
    displacement_field df(g);
    // strong compression along x around the middle: u_x = -2.0 * x
    for (int64_t z = 0; z < 3; ++z)
        for (int64_t y = 0; y < 3; ++y)
            for (int64_t x = 0; x < 5; ++x)
                df.at(g.index(x, y, z))[0] = -2.0 * static_cast<double>(x);
    const auto res = log_jacobian_field(df);
    CHECK(res.folded_voxels == g.n_voxels());
    CHECK(std::isnan(res.logj[g.index(2, 1, 1)]));
}

TEST_CASE("exclusion mask: planted morphological similarity is flagged") {
    const grid3 g(12, 12, 12);
    mask wm(g);
    std::fill(wm.data.begin(), wm.data.end(), uint8_t{1});

    // sphere of radius 3 at the center carries a pair-shared component for
    // the interest population
    const auto in_sphere = [&](int64_t v) {
        const auto c = g.coords(v);
        const double dx = static_cast<double>(c[0]) - 5.5;
        const double dy = static_cast<double>(c[1]) - 5.5;
        const double dz = static_cast<double>(c[2]) - 5.5;
        return dx * dx + dy * dy + dz * dz <= 9.0;
    };

    const int n_pairs = 14;
    std::vector<scalar_volume> logj;
    std::vector<subject_pair> interest, control;
    counter_rng rng(404);
    for (int grp = 0; grp < 2; ++grp) {
        for (int p = 0; p < n_pairs; ++p) {
            const auto base = static_cast<int32_t>(logj.size());
            scalar_volume a(g), b(g);
            for (int64_t v = 0; v < g.n_voxels(); ++v) {
                const double shared = rng.next_normal();
                const double ia = rng.next_normal();
                const double ib = rng.next_normal();
                if (grp == 0 && in_sphere(v)) {
                    a[v] = 0.9 * shared + 0.1 * ia;
                    b[v] = 0.9 * shared + 0.1 * ib;
                } else {
                    a[v] = ia;
                    b[v] = ib;
                }
            }
            logj.push_back(std::move(a));
            logj.push_back(std::move(b));
            (grp == 0 ? interest : control).push_back({base, base + 1});
        }
    }

    const auto res = jacobian_exclusion_mask(logj, interest, control, wm, 1e-3);
    CHECK(res.n_tested == g.n_voxels());
    CHECK(res.n_nan_voxels == 0);

    // Dice between flagged voxels and the planted sphere
    int64_t inter = 0, flagged = 0, truth = 0;
    for (int64_t v = 0; v < g.n_voxels(); ++v) {
        const bool f = res.excluded[v];
        const bool t = in_sphere(v);
        inter += (f && t);
        flagged += f;
        truth += t;
    }
    const double dice = 2.0 * static_cast<double>(inter) / static_cast<double>(flagged + truth);
    CHECK(dice >= 0.7);

    // flagged voxels never appear in a lattice built from the cleaned mask
    const auto cleaned = apply_exclusion(wm, res.excluded);
    const auto graph = build_lattice(cleaned, 26);
    for (const auto& [u, v] : graph.dyads) {
        CHECK(!res.excluded[u]);
        CHECK(!res.excluded[v]);
    }
}

TEST_CASE("exclusion mask: null data flags roughly alpha") {
    const grid3 g(14, 14, 14);
    mask wm(g);
    std::fill(wm.data.begin(), wm.data.end(), uint8_t{1});

    const int n_pairs = 12;
    std::vector<scalar_volume> logj;
    std::vector<subject_pair> interest, control;
    counter_rng rng(505);
    for (int grp = 0; grp < 2; ++grp)
        for (int p = 0; p < n_pairs; ++p) {
            const auto base = static_cast<int32_t>(logj.size());
            scalar_volume a(g), b(g);
            for (int64_t v = 0; v < g.n_voxels(); ++v) {
                a[v] = rng.next_normal();
                b[v] = rng.next_normal();
            }
            logj.push_back(std::move(a));
            logj.push_back(std::move(b));
            (grp == 0 ? interest : control).push_back({base, base + 1});
        }

    const double alpha = 0.05;
    const auto res = jacobian_exclusion_mask(logj, interest, control, wm, alpha);
    const double frac =
        static_cast<double>(res.n_flagged) / static_cast<double>(res.n_tested);
    const double sd = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(res.n_tested));
    CHECK(std::abs(frac - alpha) < 4.0 * sd + 0.01);
}

TEST_CASE("exclusion mask: NaN voxels are excluded without a test") {
    const grid3 g(3, 3, 3);
    mask wm(g);
    std::fill(wm.data.begin(), wm.data.end(), uint8_t{1});
    std::vector<scalar_volume> logj(8, scalar_volume(g, 0.1));
    counter_rng rng(3);
    for (auto& vol : logj)
        for (auto& x : vol.data) x = rng.next_normal();
    logj[0][13] = std::numeric_limits<double>::quiet_NaN();
    const std::vector<subject_pair> interest = {{0, 1}, {2, 3}};
    const std::vector<subject_pair> control = {{4, 5}, {6, 7}};
    const auto res = jacobian_exclusion_mask(logj, interest, control, wm, 1e-3);
    CHECK(res.n_nan_voxels == 1);
    CHECK(res.excluded[13]);
    CHECK(res.n_tested == g.n_voxels() - 1);
}

TEST_CASE("displacement field round trip") {
    const auto path =
        (std::filesystem::temp_directory_path() / "dycoh_t_disp.dycoh").string();
    displacement_field df(grid3(3, 3, 3));
    counter_rng rng(12);
    for (auto& v : df.u) v = rng.next_normal();
    write_displacement_field(path, df);
    const auto back = read_displacement_field(path);
    CHECK(back.grid == df.grid);
    for (size_t i = 0; i < df.u.size(); ++i)
        CHECK(back.u[i] == doctest::Approx(df.u[i]).epsilon(1e-6));
    std::remove(path.c_str());
}
