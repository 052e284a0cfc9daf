#pragma once

#include <stdexcept>
#include <string>

namespace dycoh {

// Malformed or inconsistent file content (bad magic, truncation, dtype
// mismatch, schema violations).
struct format_error : std::runtime_error {
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

// Operation invoked outside its domain (voxel outside mask, empty sample,
// zero variance, ...).
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// Request exceeds a hard resource guard (e.g. tessellation level).
struct resource_error : std::runtime_error {
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dycoh
