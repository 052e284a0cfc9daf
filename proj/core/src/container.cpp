#include "dycoh/container.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace dycoh {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

namespace {

constexpr std::array<uint8_t, 8> kMagic = {'D', 'Y', 'C', 'O', 'H', 0, 0, 1};

// Tags whose payloads may legitimately contain NaN (folded voxels in
// log-Jacobian fields). Everything else is rejected on read.
bool tag_allows_nan(const std::string& tag) { return tag == "logjac"; }

bool payload_has_nan(dtype t, const void* payload, size_t bytes) {
    if (t == dtype::f32) {
        const size_t n = bytes / sizeof(float);
        const auto* p = static_cast<const float*>(payload);
        for (size_t i = 0; i < n; ++i)
            if (std::isnan(p[i])) return true;
    } else if (t == dtype::f64) {
        const size_t n = bytes / sizeof(double);
        const auto* p = static_cast<const double*>(payload);
        for (size_t i = 0; i < n; ++i)
            if (std::isnan(p[i])) return true;
    }
    return false;
}

} // namespace

size_t dtype_size(dtype t) {
    switch (t) {
        case dtype::u8: return 1;
        case dtype::i32: return 4;
        case dtype::f32: return 4;
        case dtype::f64: return 8;
    }
    throw format_error("unknown dtype");
}

const char* dtype_name(dtype t) {
    switch (t) {
        case dtype::u8: return "u8";
        case dtype::i32: return "i32";
        case dtype::f32: return "f32";
        case dtype::f64: return "f64";
    }
    throw format_error("unknown dtype");
}

dtype dtype_from_name(const std::string& name) {
    if (name == "u8") return dtype::u8;
    if (name == "i32") return dtype::i32;
    if (name == "f32") return dtype::f32;
    if (name == "f64") return dtype::f64;
    throw format_error("unknown dtype name: " + name);
}

void write_volume(const std::string& path, const volume_header& header,
                  const void* payload, size_t payload_bytes) {
    header.grid.validate();
    if (header.channels < 1) throw format_error("write_volume: channels must be >= 1");
    if (payload_bytes != header.payload_bytes())
        throw format_error("write_volume: payload size " + std::to_string(payload_bytes) +
                           " does not match header (" + std::to_string(header.payload_bytes()) +
                           " bytes expected)");

    nlohmann::json j;
    j["dims"] = header.grid.dims;
    j["voxel_size_mm"] = header.grid.voxel_size_mm;
    j["dtype"] = dtype_name(header.type);
    j["channels"] = header.channels;
    j["tag"] = header.tag;
    const std::string hdr = j.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw format_error("write_volume: cannot open " + path);
    out.write(reinterpret_cast<const char*>(kMagic.data()), kMagic.size());
    const uint64_t hlen = hdr.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    out.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
    if (!out) throw format_error("write_volume: short write to " + path);
}

volume_file read_volume(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("read_volume: cannot open " + path);

    std::array<uint8_t, 8> magic{};
    in.read(reinterpret_cast<char*>(magic.data()), magic.size());
    if (!in || magic != kMagic)
        throw format_error("read_volume: bad magic or unsupported version in " + path);

    uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || hlen > (1ull << 20))
        throw format_error("read_volume: implausible header length in " + path);

    std::string hdr(hlen, '\0');
    in.read(hdr.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw format_error("read_volume: truncated header in " + path);

    nlohmann::json j = nlohmann::json::parse(hdr, nullptr, false);
    if (j.is_discarded()) throw format_error("read_volume: header is not valid JSON in " + path);

    volume_file f;
    try {
        const auto dims = j.at("dims").get<std::array<int64_t, 3>>();
        const auto vs = j.at("voxel_size_mm").get<std::array<double, 3>>();
        f.header.grid = grid3(dims[0], dims[1], dims[2], vs[0], vs[1], vs[2]);
        f.header.type = dtype_from_name(j.at("dtype").get<std::string>());
        f.header.channels = j.at("channels").get<uint32_t>();
        f.header.tag = j.at("tag").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("read_volume: malformed header: ") + e.what());
    } catch (const domain_error& e) {
        throw format_error(std::string("read_volume: malformed header: ") + e.what());
    }
    if (f.header.channels < 1) throw format_error("read_volume: channels must be >= 1");

    const size_t want = f.header.payload_bytes();
    f.payload.resize(want);
    in.read(reinterpret_cast<char*>(f.payload.data()), static_cast<std::streamsize>(want));
    if (static_cast<size_t>(in.gcount()) != want)
        throw format_error("read_volume: truncated payload in " + path + " (expected " +
                           std::to_string(want) + " bytes, got " + std::to_string(in.gcount()) +
                           ")");

    if (!tag_allows_nan(f.header.tag) &&
        payload_has_nan(f.header.type, f.payload.data(), f.payload.size()))
        throw format_error("read_volume: NaN payload under tag '" + f.header.tag + "' in " + path);

    return f;
}

void write_mask(const std::string& path, const mask& m) {
    volume_header h;
    h.grid = m.grid;
    h.type = dtype::u8;
    h.channels = 1;
    h.tag = "mask";
    write_volume(path, h, m.data.data(), m.data.size());
}

mask read_mask(const std::string& path) {
    volume_file f = read_volume(path);
    if (f.header.type != dtype::u8 || f.header.channels != 1 || f.header.tag != "mask")
        throw format_error("read_mask: " + path + " is not a u8 mask volume");
    mask m(f.header.grid);
    std::memcpy(m.data.data(), f.payload.data(), f.payload.size());
    return m;
}

void write_scalar_volume(const std::string& path, const scalar_volume& v,
                         const std::string& tag) {
    volume_header h;
    h.grid = v.grid;
    h.type = dtype::f64;
    h.channels = 1;
    h.tag = tag;
    write_volume(path, h, v.data.data(), v.data.size() * sizeof(double));
}

scalar_volume read_scalar_volume(const std::string& path) {
    volume_file f = read_volume(path);
    if (f.header.type != dtype::f64 || f.header.channels != 1)
        throw format_error("read_scalar_volume: " + path + " is not an f64 scalar volume");
    scalar_volume v(f.header.grid);
    std::memcpy(v.data.data(), f.payload.data(), f.payload.size());
    return v;
}

void write_label_volume(const std::string& path, const grid3& grid,
                        const std::vector<int32_t>& labels) {
    volume_header h;
    h.grid = grid;
    h.type = dtype::i32;
    h.channels = 1;
    h.tag = "regions";
    write_volume(path, h, labels.data(), labels.size() * sizeof(int32_t));
}

std::pair<grid3, std::vector<int32_t>> read_label_volume(const std::string& path) {
    volume_file f = read_volume(path);
    if (f.header.type != dtype::i32 || f.header.channels != 1 || f.header.tag != "regions")
        throw format_error("read_label_volume: " + path + " is not an i32 label volume");
    std::vector<int32_t> labels(static_cast<size_t>(f.header.grid.n_voxels()));
    std::memcpy(labels.data(), f.payload.data(), f.payload.size());
    return {f.header.grid, std::move(labels)};
}

} // namespace dycoh
