#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dycoh/grid.hpp"
#include "dycoh/mda.hpp"
#include "dycoh/pairing.hpp"
#include "dycoh/screen.hpp"
#include "dycoh/sphere.hpp"

namespace dycoh {

// Straight or polyline fascicle tube in millimeter coordinates.
struct fascicle_spec {
    std::vector<vec3> polyline; // >= 2 points, inside the grid box
    double radius_mm = 5.0;
    double mda = 0.6; // peak magnitude, in (0, 1/sqrt(2))
};

// Where the planted pair-coherence effect lives. "crossing" means voxels
// covered by at least two fascicles; "sphere" is an explicit ball.
struct effect_region_spec {
    enum class kind { crossing, sphere } which = kind::crossing;
    vec3 center_mm{0, 0, 0};
    double radius_mm = 0.0;
};

// One generated population of subject pairs. rho is the fraction of a pair's
// deviation that is shared between its two members inside the effect region:
// the shared part is one random rotation/magnitude offset per (pair, peak),
// constant across voxels; the individual part is drawn per voxel. offset_deg
// rotates the population's effect-region tangents (the crossing-scenario
// group difference) and does not affect within-pair coherence.
struct phantom_population {
    std::string name = "interest"; // MZ/DZ/SIB are linked in the manifest
    int n_pairs = 0;
    double rho = 0.0;
    double offset_deg = 0.0;
};

struct phantom_config {
    grid3 grid{64, 64, 64};
    std::vector<fascicle_spec> fascicles;
    effect_region_spec effect;
    double kappa = 64.0;          // angular jitter concentration (sd ~ 1/sqrt(kappa))
    double sigma_mag = 0.05;      // relative magnitude jitter
    double noise_peak_mda = 0.0;  // 0 disables the uncorrelated extra peak
    int k_max = 2;
    uint64_t seed = 0;
    std::vector<phantom_population> populations;
    double odf_sharpness = 40.0;  // lobe concentration for the ODF renderer
    double odf_iso_floor = 0.05;  // isotropic weight relative to lobe weight sum

    void validate() const;

    // Two orthogonal straight fascicles crossing mid-volume, interest rho 0.7
    // vs control rho 0, 20 pairs each.
    static phantom_config default_crossing(int64_t dim = 64, uint64_t seed = 1);
    // One straight fascicle with a spherical effect segment and an extra
    // uncorrelated noise peak per voxel.
    static phantom_config default_single_fiber(int64_t dim = 48, uint64_t seed = 1);

    static phantom_config from_json(const std::string& text);
    std::string to_json() const;
};

struct phantom_pair_entry {
    std::string pair_id; // e.g. "MZ_007"
    std::string group;   // population name
    subject_pair pair;   // indices into the cohort
};

struct phantom_cohort {
    grid3 grid;
    mask wm;     // union of fascicle tubes
    mask truth;  // effect region within the mask
    cohort_peaks peaks;
    subject_manifest manifest;
    std::vector<phantom_pair_entry> pairs;

    std::vector<subject_pair> pairs_of_group(const std::string& group) const;
};

phantom_cohort generate_cohort(const phantom_config& cfg, int threads = 0);

// Convenience for the plain two-population experiment.
phantom_cohort generate_cohort(phantom_config cfg, int n_pairs_interest, int n_pairs_control,
                               int threads = 0);

// Renders one subject's ODF field from the same generative peaks: a mixture
// of antipodally symmetric lobes around each planted peak plus an isotropic
// floor. Population/pair/member address the subject as in generate_cohort.
odf_field generate_subject_odf(const phantom_config& cfg, const direction_set& ds,
                               size_t population, int pair, int member);

// Dense per-subject expansion of a cohort's compact peaks.
peak_field subject_peak_field(const phantom_cohort& cohort, int32_t subject);

} // namespace dycoh
