#include <doctest.h>

#include <algorithm>
#include <cstdlib>

#include "dycoh/parallel.hpp"
#include "dycoh/phantom.hpp"
#include "dycoh/screen.hpp"

using namespace dycoh;

namespace {

// Small crossing phantom shared by the screening tests.
const phantom_cohort& small_cohort() {
    static const phantom_cohort cohort = [] {
        auto cfg = phantom_config::default_crossing(24, 11);
        cfg.fascicles[0].radius_mm = 3.0;
        cfg.fascicles[1].radius_mm = 3.0;
        cfg.populations[0].n_pairs = 12;
        cfg.populations[1].n_pairs = 12;
        return generate_cohort(cfg, 2);
    }();
    return cohort;
}

} // namespace

TEST_CASE("screen: planted effect is detected and localized") {
    const auto& cohort = small_cohort();
    const auto graph = build_lattice(cohort.wm, 26);

    screen_config cfg;
    cfg.variant = {dissim_kind::cross_dyad, 1};
    cfg.threshold_p = 1e-3;
    const auto res = screen_dyads(graph, cohort.peaks, cohort.pairs_of_group("interest"),
                                  cohort.pairs_of_group("control"), cfg);

    CHECK(res.summary.n_tests == static_cast<int64_t>(graph.dyads.size()));
    CHECK(res.summary.n_significant > 0);
    CHECK(res.summary.fdr < 0.2);

    // significant dyads concentrate in the truth region
    int64_t in_truth = 0, outside = 0;
    for (const auto& [u, v] : res.significant_units()) {
        if (cohort.truth[u] && cohort.truth[v])
            ++in_truth;
        else if (!cohort.truth[u] && !cohort.truth[v])
            ++outside;
    }
    CHECK(in_truth > 10 * std::max<int64_t>(outside, 1));
}

TEST_CASE("screen: pair order does not change p-values") {
    const auto& cohort = small_cohort();
    const auto graph = build_lattice(cohort.wm, 26);
    auto interest = cohort.pairs_of_group("interest");
    auto control = cohort.pairs_of_group("control");

    screen_config cfg;
    cfg.threshold_p = 1e-3;
    const auto base = screen_dyads(graph, cohort.peaks, interest, control, cfg);

    std::reverse(interest.begin(), interest.end());
    std::rotate(control.begin(), control.begin() + 3, control.end());
    const auto perm = screen_dyads(graph, cohort.peaks, interest, control, cfg);

    REQUIRE(base.tests.size() == perm.tests.size());
    for (size_t i = 0; i < base.tests.size(); ++i) {
        CHECK(base.tests[i].p == perm.tests[i].p);
        CHECK(base.tests[i].u == perm.tests[i].u);
    }
}

TEST_CASE("screen: thread count does not change results") {
    const auto& cohort = small_cohort();
    const auto graph = build_lattice(cohort.wm, 26);
    const auto interest = cohort.pairs_of_group("interest");
    const auto control = cohort.pairs_of_group("control");

    screen_config cfg1;
    cfg1.threads = 1;
    auto cfg4 = cfg1;
    cfg4.threads = 4;
    const auto r1 = screen_dyads(graph, cohort.peaks, interest, control, cfg1);
    const auto r4 = screen_dyads(graph, cohort.peaks, interest, control, cfg4);
    REQUIRE(r1.tests.size() == r4.tests.size());
    for (size_t i = 0; i < r1.tests.size(); ++i) {
        CHECK(r1.tests[i].p == r4.tests[i].p);
        CHECK(r1.tests[i].significant == r4.tests[i].significant);
    }
}

TEST_CASE("screen: voxel-unit variants test voxels") {
    const auto& cohort = small_cohort();
    const auto graph = build_lattice(cohort.wm, 26);

    screen_config cfg;
    cfg.variant = {dissim_kind::voxel, 1};
    cfg.threshold_p = 1e-3;
    const auto res = screen_dyads(graph, cohort.peaks, cohort.pairs_of_group("interest"),
                                  cohort.pairs_of_group("control"), cfg);
    CHECK(res.summary.n_tests == cohort.wm.count());
    for (const auto& [u, v] : res.units) CHECK(u == v);
    CHECK(res.summary.n_significant > 0);

    // regions from degenerate units stay inside the truth region
    const auto rs = connected_components(graph, res.significant_units());
    REQUIRE(!rs.regions.empty());
    const auto vox = rs.region_voxels(0);
    int64_t in_truth = 0;
    for (const int64_t v : vox) in_truth += cohort.truth[v] ? 1 : 0;
    CHECK(in_truth > static_cast<int64_t>(vox.size() * 8 / 10));
}

TEST_CASE("thread count resolution: explicit beats env beats hardware") {
    setenv("DYCOH_THREADS", "3", 1);
    CHECK(resolve_threads(5) == 5);
    CHECK(resolve_threads(0) == 3);
    unsetenv("DYCOH_THREADS");
    CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("screen: input validation") {
    const auto& cohort = small_cohort();
    const auto graph = build_lattice(cohort.wm, 26);
    const auto interest = cohort.pairs_of_group("interest");
    const auto control = cohort.pairs_of_group("control");

    screen_config bad;
    bad.variant = {dissim_kind::log_jacobian, 1};
    CHECK_THROWS_AS(screen_dyads(graph, cohort.peaks, interest, control, bad), domain_error);

    screen_config high_k;
    high_k.variant = {dissim_kind::cross_dyad, 4}; // cohort holds k_max=2
    CHECK_THROWS_AS(screen_dyads(graph, cohort.peaks, interest, control, high_k), domain_error);

    const std::vector<subject_pair> one_pair = {interest[0]};
    screen_config cfg;
    CHECK_THROWS_AS(screen_dyads(graph, cohort.peaks, one_pair, control, cfg), domain_error);
}
