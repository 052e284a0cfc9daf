#include "dycoh/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "dycoh/error.hpp"

namespace dycoh {

namespace {

vec3 normalized(const vec3& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / n, v[1] / n, v[2] / n};
}

} // namespace

direction_set tessellate_icosahedron(int level) {
    if (level < 0) throw domain_error("tessellate_icosahedron: level must be >= 0");
    if (level > 6) throw resource_error("tessellate_icosahedron: level > 6 refused");

    // Seed icosahedron, golden-ratio construction. The order of these
    // vertices and faces is part of the format: it fixes vertex ids at every
    // level.
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<vec3> verts = {
        {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& v : verts) v = normalized(v);

    std::vector<std::array<int32_t, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int32_t, int32_t>, int32_t> midpoint;
        auto mid = [&](int32_t a, int32_t b) -> int32_t {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const vec3& va = verts[static_cast<size_t>(a)];
            const vec3& vb = verts[static_cast<size_t>(b)];
            verts.push_back(normalized({va[0] + vb[0], va[1] + vb[1], va[2] + vb[2]}));
            const auto id = static_cast<int32_t>(verts.size() - 1);
            midpoint.emplace(key, id);
            return id;
        };

        std::vector<std::array<int32_t, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int32_t m01 = mid(f[0], f[1]);
            const int32_t m12 = mid(f[1], f[2]);
            const int32_t m20 = mid(f[2], f[0]);
            next.push_back({f[0], m01, m20});
            next.push_back({f[1], m12, m01});
            next.push_back({f[2], m20, m12});
            next.push_back({m01, m12, m20});
        }
        faces.swap(next);
    }

    direction_set ds;
    ds.level = level;
    ds.unit_vectors = std::move(verts);
    ds.faces = std::move(faces);

    std::vector<std::set<int32_t>> adj(ds.unit_vectors.size());
    for (const auto& f : ds.faces) {
        for (int e = 0; e < 3; ++e) {
            const int32_t a = f[static_cast<size_t>(e)];
            const int32_t b = f[static_cast<size_t>((e + 1) % 3)];
            adj[static_cast<size_t>(a)].insert(b);
            adj[static_cast<size_t>(b)].insert(a);
        }
    }
    ds.adjacency.resize(adj.size());
    for (size_t i = 0; i < adj.size(); ++i)
        ds.adjacency[i].assign(adj[i].begin(), adj[i].end());

    ds.antipode = antipode_map(ds.unit_vectors);
    return ds;
}

std::vector<int32_t> antipode_map(const std::vector<vec3>& unit_vectors) {
    const size_t n = unit_vectors.size();
    std::vector<int32_t> anti(n, -1);
    for (size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int32_t best_j = -1;
        for (size_t j = 0; j < n; ++j) {
            const double dx = unit_vectors[i][0] + unit_vectors[j][0];
            const double dy = unit_vectors[i][1] + unit_vectors[j][1];
            const double dz = unit_vectors[i][2] + unit_vectors[j][2];
            const double r = dx * dx + dy * dy + dz * dz;
            if (r < best) {
                best = r;
                best_j = static_cast<int32_t>(j);
            }
        }
        anti[i] = best_j;
    }
    return anti;
}

std::string direction_set_to_json(const direction_set& ds) {
    nlohmann::json j;
    j["level"] = ds.level;
    j["unit_vectors"] = ds.unit_vectors;
    j["adjacency"] = ds.adjacency;
    j["antipode"] = ds.antipode;
    j["faces"] = ds.faces;
    return j.dump();
}

direction_set direction_set_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw format_error("direction_set_from_json: invalid JSON");
    direction_set ds;
    try {
        ds.level = j.at("level").get<int>();
        ds.unit_vectors = j.at("unit_vectors").get<std::vector<vec3>>();
        ds.adjacency = j.at("adjacency").get<std::vector<std::vector<int32_t>>>();
        ds.antipode = j.at("antipode").get<std::vector<int32_t>>();
        if (j.contains("faces")) ds.faces = j.at("faces").get<std::vector<std::array<int32_t, 3>>>();
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("direction_set_from_json: ") + e.what());
    }
    if (ds.adjacency.size() != ds.unit_vectors.size() ||
        ds.antipode.size() != ds.unit_vectors.size())
        throw format_error("direction_set_from_json: inconsistent array lengths");
    return ds;
}

} // namespace dycoh
