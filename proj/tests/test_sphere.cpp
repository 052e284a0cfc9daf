#include <doctest.h>

#include <cmath>
#include <set>

#include "dycoh/sphere.hpp"
#include "dycoh/error.hpp"

using namespace dycoh;

namespace {

int64_t edge_count(const direction_set& ds) {
    int64_t deg_sum = 0;
    for (const auto& adj : ds.adjacency) deg_sum += static_cast<int64_t>(adj.size());
    return deg_sum / 2;
}

} // namespace

TEST_CASE("level 0 is the icosahedron") {
    const auto ds = tessellate_icosahedron(0);
    CHECK(ds.size() == 12);
    for (const auto& adj : ds.adjacency) CHECK(adj.size() == 5);
    // each vertex maps to its exact negation
    for (int32_t i = 0; i < 12; ++i) {
        const auto& u = ds.unit_vectors[static_cast<size_t>(i)];
        const auto& a = ds.unit_vectors[static_cast<size_t>(ds.antipode[static_cast<size_t>(i)])];
        CHECK(u[0] == doctest::Approx(-a[0]).epsilon(1e-15));
        CHECK(u[1] == doctest::Approx(-a[1]).epsilon(1e-15));
        CHECK(u[2] == doctest::Approx(-a[2]).epsilon(1e-15));
    }
}

TEST_CASE("vertex, edge, and face counts per level") {
    for (int level = 0; level <= 3; ++level) {
        const auto ds = tessellate_icosahedron(level);
        const int64_t pow4 = 1ll << (2 * level);
        CHECK(ds.size() == 10 * pow4 + 2);
        CHECK(static_cast<int64_t>(ds.faces.size()) == 20 * pow4);
        CHECK(edge_count(ds) == 30 * pow4);
        // Euler characteristic of the sphere
        CHECK(ds.size() - edge_count(ds) + static_cast<int64_t>(ds.faces.size()) == 2);
    }
}

TEST_CASE("level 3 has 642 directions") {
    const auto ds = tessellate_icosahedron(3);
    CHECK(ds.size() == 642);
    int degree5 = 0;
    for (const auto& adj : ds.adjacency) {
        CHECK((adj.size() == 5 || adj.size() == 6));
        if (adj.size() == 5) ++degree5;
    }
    CHECK(degree5 == 12);
}

TEST_CASE("unit norms and adjacency symmetry") {
    const auto ds = tessellate_icosahedron(2);
    for (const auto& v : ds.unit_vectors) {
        const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        CHECK(std::abs(n - 1.0) < 1e-9);
    }
    for (size_t i = 0; i < ds.adjacency.size(); ++i)
        for (const int32_t j : ds.adjacency[i]) {
            const auto& back = ds.adjacency[static_cast<size_t>(j)];
            CHECK(std::count(back.begin(), back.end(), static_cast<int32_t>(i)) == 1);
        }
}

TEST_CASE("antipode involution and residual at level 3") {
    const auto ds = tessellate_icosahedron(3);
    double max_residual = 0.0;
    for (int32_t i = 0; i < ds.size(); ++i) {
        const int32_t a = ds.antipode[static_cast<size_t>(i)];
        CHECK(ds.antipode[static_cast<size_t>(a)] == i);
        const auto& u = ds.unit_vectors[static_cast<size_t>(i)];
        const auto& w = ds.unit_vectors[static_cast<size_t>(a)];
        const double r = std::sqrt((u[0] + w[0]) * (u[0] + w[0]) + (u[1] + w[1]) * (u[1] + w[1]) +
                                   (u[2] + w[2]) * (u[2] + w[2]));
        max_residual = std::max(max_residual, r);
    }
    CHECK(max_residual < 1e-9);
}

TEST_CASE("minimum pairwise angle is positive") {
    const auto ds = tessellate_icosahedron(2);
    double max_dot = -2.0;
    for (int32_t i = 0; i < ds.size(); ++i)
        for (int32_t j = i + 1; j < ds.size(); ++j) {
            const auto& a = ds.unit_vectors[static_cast<size_t>(i)];
            const auto& b = ds.unit_vectors[static_cast<size_t>(j)];
            max_dot = std::max(max_dot, a[0] * b[0] + a[1] * b[1] + a[2] * b[2]);
        }
    CHECK(max_dot < 1.0 - 1e-6); // no duplicate directions
}

TEST_CASE("level guard") {
    CHECK_THROWS_AS(tessellate_icosahedron(7), resource_error);
    CHECK_THROWS_AS(tessellate_icosahedron(-1), domain_error);
}

TEST_CASE("deterministic vertex order") {
    const auto a = tessellate_icosahedron(3);
    const auto b = tessellate_icosahedron(3);
    CHECK(a.unit_vectors == b.unit_vectors);
    CHECK(a.adjacency == b.adjacency);
}

TEST_CASE("JSON export round trip") {
    const auto ds = tessellate_icosahedron(1);
    const auto text = direction_set_to_json(ds);
    const auto back = direction_set_from_json(text);
    CHECK(back.level == ds.level);
    CHECK(back.unit_vectors == ds.unit_vectors);
    CHECK(back.adjacency == ds.adjacency);
    CHECK(back.antipode == ds.antipode);
    CHECK_THROWS_AS(direction_set_from_json("{not json"), format_error);
}
