#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dycoh/error.hpp"

namespace dycoh {

// Regular 3D voxel grid. Linear index is x-fastest: index = x + nx*(y + ny*z).
struct grid3 {
    std::array<int64_t, 3> dims{1, 1, 1};
    std::array<double, 3> voxel_size_mm{1.0, 1.0, 1.0};

    grid3() = default;
    grid3(int64_t nx, int64_t ny, int64_t nz, double sx = 1.0, double sy = 1.0, double sz = 1.0)
        : dims{nx, ny, nz}, voxel_size_mm{sx, sy, sz} {
        validate();
    }

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] < 1)
                throw domain_error("grid3: dims must be >= 1");
            if (!(voxel_size_mm[a] > 0.0))
                throw domain_error("grid3: voxel sizes must be > 0");
        }
    }

    int64_t nx() const { return dims[0]; }
    int64_t ny() const { return dims[1]; }
    int64_t nz() const { return dims[2]; }
    int64_t n_voxels() const { return dims[0] * dims[1] * dims[2]; }

    int64_t index(int64_t x, int64_t y, int64_t z) const {
        return x + dims[0] * (y + dims[1] * z);
    }
    std::array<int64_t, 3> coords(int64_t index) const {
        const int64_t x = index % dims[0];
        const int64_t y = (index / dims[0]) % dims[1];
        const int64_t z = index / (dims[0] * dims[1]);
        return {x, y, z};
    }
    bool contains(int64_t x, int64_t y, int64_t z) const {
        return x >= 0 && x < dims[0] && y >= 0 && y < dims[1] && z >= 0 && z < dims[2];
    }

    bool operator==(const grid3& o) const {
        return dims == o.dims && voxel_size_mm == o.voxel_size_mm;
    }
};

// Per-voxel boolean membership (white-matter mask and friends).
struct mask {
    grid3 grid;
    std::vector<uint8_t> data; // 0/1, length n_voxels

    mask() = default;
    explicit mask(const grid3& g, uint8_t fill = 0)
        : grid(g), data(static_cast<size_t>(g.n_voxels()), fill) {}

    bool operator[](int64_t v) const { return data[static_cast<size_t>(v)] != 0; }
    void set(int64_t v, bool b) { data[static_cast<size_t>(v)] = b ? 1 : 0; }

    int64_t count() const {
        int64_t n = 0;
        for (uint8_t b : data) n += (b != 0);
        return n;
    }
};

// Per-voxel 64-bit float volume (log-Jacobian fields, debug scalars).
struct scalar_volume {
    grid3 grid;
    std::vector<double> data;

    scalar_volume() = default;
    explicit scalar_volume(const grid3& g, double fill = 0.0)
        : grid(g), data(static_cast<size_t>(g.n_voxels()), fill) {}

    double operator[](int64_t v) const { return data[static_cast<size_t>(v)]; }
    double& operator[](int64_t v) { return data[static_cast<size_t>(v)]; }
};

} // namespace dycoh
