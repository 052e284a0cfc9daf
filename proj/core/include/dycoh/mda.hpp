#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dycoh/grid.hpp"
#include "dycoh/sphere.hpp"

namespace dycoh {

// Dense per-voxel ODF samples over a shared direction set.
struct odf_field {
    grid3 grid;
    int64_t n_dirs = 0;
    std::vector<float> values; // n_voxels * n_dirs, voxel-major

    odf_field() = default;
    odf_field(const grid3& g, int64_t dirs)
        : grid(g), n_dirs(dirs),
          values(static_cast<size_t>(g.n_voxels() * dirs), 0.0f) {}

    std::span<float> voxel(int64_t v) {
        return {values.data() + v * n_dirs, static_cast<size_t>(n_dirs)};
    }
    std::span<const float> voxel(int64_t v) const {
        return {values.data() + v * n_dirs, static_cast<size_t>(n_dirs)};
    }
};

// Per-voxel list of up to k_max anisotropy-scaled peak vectors, ordered by
// decreasing magnitude. Missing peaks are zero vectors.
struct peak_field {
    grid3 grid;
    int k_max = 0;
    std::vector<float> data; // n_voxels * k_max * 3

    peak_field() = default;
    peak_field(const grid3& g, int k)
        : grid(g), k_max(k), data(static_cast<size_t>(g.n_voxels()) * k * 3, 0.0f) {}

    std::span<float> voxel(int64_t v) {
        return {data.data() + static_cast<size_t>(v) * k_max * 3,
                static_cast<size_t>(k_max) * 3};
    }
    std::span<const float> voxel(int64_t v) const {
        return {data.data() + static_cast<size_t>(v) * k_max * 3,
                static_cast<size_t>(k_max) * 3};
    }
};

// Normalizes samples to unit sum in place. Throws domain_error on an all-zero
// (degenerate) ODF; negative samples are rejected. Math is double precision;
// the f32 field is widened per voxel before processing.
void normalize_odf(std::span<double> odf);

// Anisotropy of direction theta against the ODF minimum:
// mu = (psi(theta)/psi(theta_min))^(2/3), value = |1 - mu| / sqrt(1 + 2 mu^2).
// Non-negative, < 1/sqrt(2). When psi(theta_min) == 0 the minimum is replaced
// by smallest positive sample * 1e-12 and *substitutions (when given) is
// incremented.
double mda_value(std::span<const double> odf, int64_t theta_id,
                 int64_t* substitutions = nullptr);

struct odf_peak {
    int32_t vertex = -1;
    double mda = 0.0;
};

// Strict local maxima of a normalized ODF over the tessellation adjacency,
// with exact ties broken toward the lower vertex id, antipodal duplicates
// suppressed (lower id kept), sorted by decreasing anisotropy, truncated to
// k_max. A flat ODF has no maxima.
std::vector<odf_peak> find_local_maxima(std::span<const double> odf,
                                        const direction_set& ds, int k_max,
                                        int64_t* substitutions = nullptr);

struct extract_stats {
    int64_t degenerate_voxels = 0;    // all-zero ODFs (left with zero peaks)
    int64_t zero_min_substitutions = 0;
};

// Per-voxel peak extraction over the mask; voxels outside the mask get zero
// peaks. Data-parallel over voxels.
peak_field extract_peak_field(const odf_field& field, const direction_set& ds,
                              const mask& wm, int k_max, extract_stats* stats = nullptr,
                              int threads = 1);

// Peak-field container round trip (f32, channels = k_max*3, tag "peakfield").
void write_peak_field(const std::string& path, const peak_field& pf);
peak_field read_peak_field(const std::string& path);

// ODF-field container round trip (f32, channels = n_dirs, tag "odf").
void write_odf_field(const std::string& path, const odf_field& f);
odf_field read_odf_field(const std::string& path);

} // namespace dycoh
