#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dycoh/grid.hpp"

namespace dycoh {

// On-disk container: 8-byte magic "DYCOH\0\0\x01", 8-byte little-endian
// header length, UTF-8 JSON header, then the raw little-endian payload in
// linear-index-major, channel-minor order.
enum class dtype : uint8_t { u8, i32, f32, f64 };

size_t dtype_size(dtype t);
const char* dtype_name(dtype t);
dtype dtype_from_name(const std::string& name);

struct volume_header {
    grid3 grid;
    dtype type = dtype::f32;
    uint32_t channels = 1;
    std::string tag; // semantic tag, e.g. "mask", "peakfield", "logjac"

    size_t payload_bytes() const {
        return static_cast<size_t>(grid.n_voxels()) * channels * dtype_size(type);
    }
};

void write_volume(const std::string& path, const volume_header& header,
                  const void* payload, size_t payload_bytes);

struct volume_file {
    volume_header header;
    std::vector<std::byte> payload;
};

volume_file read_volume(const std::string& path);

// Typed convenience wrappers over the container. Tags are fixed per type so
// readers can reject files with the wrong semantics.
void write_mask(const std::string& path, const mask& m);
mask read_mask(const std::string& path);

void write_scalar_volume(const std::string& path, const scalar_volume& v,
                         const std::string& tag = "scalar");
scalar_volume read_scalar_volume(const std::string& path);

void write_label_volume(const std::string& path, const grid3& grid,
                        const std::vector<int32_t>& labels);
std::pair<grid3, std::vector<int32_t>> read_label_volume(const std::string& path);

} // namespace dycoh
