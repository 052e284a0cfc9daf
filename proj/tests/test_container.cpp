#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "dycoh/container.hpp"
#include "dycoh/rng.hpp"

using namespace dycoh;

namespace {

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("linear index bijection") {
    grid3 g(3, 4, 5);
    for (int64_t z = 0; z < 5; ++z)
        for (int64_t y = 0; y < 4; ++y)
            for (int64_t x = 0; x < 3; ++x) {
                const int64_t i = g.index(x, y, z);
                const auto c = g.coords(i);
                CHECK(c[0] == x);
                CHECK(c[1] == y);
                CHECK(c[2] == z);
                CHECK(g.index(c[0], c[1], c[2]) == i);
            }
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(grid3(0, 1, 1), domain_error);
    CHECK_THROWS_AS(grid3(1, 1, 1, 0.0), domain_error);
}

TEST_CASE("single-voxel u8 file layout") {
    const auto path = tmp_path("dycoh_t_single.dycoh");
    volume_header h;
    h.grid = grid3(1, 1, 1);
    h.type = dtype::u8;
    h.channels = 1;
    h.tag = "mask";
    const uint8_t value = 7;
    write_volume(path, h, &value, 1);

    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() > 17);
    CHECK(bytes[0] == 'D');
    CHECK(bytes[1] == 'Y');
    CHECK(bytes[2] == 'C');
    CHECK(bytes[3] == 'O');
    CHECK(bytes[4] == 'H');
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 0);
    CHECK(bytes[7] == 1);
    uint64_t hlen = 0;
    std::memcpy(&hlen, bytes.data() + 8, 8);
    CHECK(bytes.size() == 8 + 8 + hlen + 1);
    CHECK(static_cast<uint8_t>(bytes.back()) == 0x07);
    std::remove(path.c_str());
}

TEST_CASE("f32 round trip is byte-exact") {
    const auto path = tmp_path("dycoh_t_round.dycoh");
    counter_rng rng(123);
    volume_header h;
    h.grid = grid3(4, 3, 2);
    h.type = dtype::f32;
    h.channels = 2;
    h.tag = "scalar";
    std::vector<float> payload(static_cast<size_t>(h.grid.n_voxels()) * 2);
    for (auto& v : payload) v = static_cast<float>(rng.next_normal());
    write_volume(path, h, payload.data(), payload.size() * sizeof(float));

    const auto f = read_volume(path);
    CHECK(f.header.grid == h.grid);
    CHECK(f.header.type == dtype::f32);
    CHECK(f.header.channels == 2);
    CHECK(f.header.tag == "scalar");
    REQUIRE(f.payload.size() == payload.size() * sizeof(float));
    CHECK(std::memcmp(f.payload.data(), payload.data(), f.payload.size()) == 0);
    std::remove(path.c_str());
}

TEST_CASE("2x2x2 f64 three channels is 192 payload bytes") {
    volume_header h;
    h.grid = grid3(2, 2, 2);
    h.type = dtype::f64;
    h.channels = 3;
    CHECK(h.payload_bytes() == 192);
}

TEST_CASE("payload size mismatch is a format error") {
    const auto path = tmp_path("dycoh_t_mismatch.dycoh");
    volume_header h;
    h.grid = grid3(2, 1, 1);
    h.type = dtype::u8;
    h.channels = 1;
    h.tag = "mask";
    const uint8_t one = 1;
    CHECK_THROWS_AS(write_volume(path, h, &one, 1), format_error);
}

TEST_CASE("bad magic is rejected") {
    const auto path = tmp_path("dycoh_t_magic.dycoh");
    std::ofstream(path, std::ios::binary) << "XXXXXXXXsome trailing garbage";
    CHECK_THROWS_AS(read_volume(path), format_error);
    std::remove(path.c_str());
}

TEST_CASE("truncated payload is rejected") {
    const auto path = tmp_path("dycoh_t_trunc.dycoh");
    volume_header h;
    h.grid = grid3(4, 4, 4);
    h.type = dtype::f64;
    h.channels = 1;
    h.tag = "scalar";
    std::vector<double> payload(64, 1.5);
    write_volume(path, h, payload.data(), payload.size() * sizeof(double));

    const auto full = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, full - 16);
    CHECK_THROWS_AS(read_volume(path), format_error);
    std::remove(path.c_str());
}

TEST_CASE("NaN payload rejected unless the tag allows it") {
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    scalar_volume v(grid3(2, 2, 2), 0.5);
    v[3] = nan;

    const auto p1 = tmp_path("dycoh_t_nan1.dycoh");
    CHECK_NOTHROW(write_scalar_volume(p1, v, "logjac"));
    CHECK_NOTHROW(read_volume(p1));
    std::remove(p1.c_str());

    const auto p2 = tmp_path("dycoh_t_nan2.dycoh");
    write_scalar_volume(p2, v, "scalar");
    CHECK_THROWS_AS(read_volume(p2), format_error);
    std::remove(p2.c_str());
}

TEST_CASE("label volume round trip") {
    const auto path = tmp_path("dycoh_t_labels.dycoh");
    const grid3 g(3, 2, 2);
    std::vector<int32_t> labels(static_cast<size_t>(g.n_voxels()), -1);
    labels[0] = 0;
    labels[5] = 2;
    write_label_volume(path, g, labels);
    const auto [grid, back] = read_label_volume(path);
    CHECK(grid == g);
    CHECK(back == labels);
    std::remove(path.c_str());
}

TEST_CASE("mask round trip") {
    const auto path = tmp_path("dycoh_t_mask.dycoh");
    mask m(grid3(3, 3, 3));
    m.set(0, true);
    m.set(13, true);
    m.set(26, true);
    write_mask(path, m);
    const auto back = read_mask(path);
    CHECK(back.grid == m.grid);
    CHECK(back.data == m.data);
    CHECK(back.count() == 3);
    std::remove(path.c_str());
}
