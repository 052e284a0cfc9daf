#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace dycoh {

using vec3 = std::array<double, 3>;

// Unit direction set from recursive midpoint subdivision of an icosahedron,
// with vertex adjacency (for local-maximum detection) and the antipodal
// pairing (ODFs are undirected). Vertex order is canonical: the 12 seed
// vertices in a fixed documented order, then midpoint vertices keyed by the
// sorted parent-id pair, so files built on top are reproducible.
struct direction_set {
    int level = 0;
    std::vector<vec3> unit_vectors;
    std::vector<std::vector<int32_t>> adjacency;
    std::vector<int32_t> antipode;
    std::vector<std::array<int32_t, 3>> faces;

    int64_t size() const { return static_cast<int64_t>(unit_vectors.size()); }
};

// Subdivision level L gives 10*4^L + 2 vertices; level 3 is the 642-direction
// set. Levels above 6 are refused.
direction_set tessellate_icosahedron(int level);

// antipode[i] = argmin_j |u_i + u_j|; an involution for this tessellation.
std::vector<int32_t> antipode_map(const std::vector<vec3>& unit_vectors);

std::string direction_set_to_json(const direction_set& ds);
direction_set direction_set_from_json(const std::string& text);

} // namespace dycoh
