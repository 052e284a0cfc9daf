#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dycoh/error.hpp"

namespace dycoh {

enum class sex : uint8_t { female, male };
enum class age_bin : uint8_t { a22_25, a26_30, a31_35 };
enum class relation : uint8_t { mz, dz, sib };

const char* sex_name(sex s);
const char* age_bin_name(age_bin a);
const char* relation_name(relation r);
sex sex_from_name(const std::string& s);
age_bin age_bin_from_name(const std::string& s);
relation relation_from_name(const std::string& s);

struct subject_row {
    std::string subject_id;
    sex subject_sex = sex::female;
    age_bin subject_age = age_bin::a22_25;
    std::string family_id;
    std::optional<relation> rel; // empty when the subject is unpaired
    std::string partner_id;      // empty when unpaired
};

struct listed_pairing {
    std::string id_a, id_b;
    relation rel;
};

// Subject roster plus the listed related pairings (validated: partners
// symmetric, same family, same relation, each subject in at most one pair).
struct subject_manifest {
    std::vector<subject_row> subjects;
    std::vector<listed_pairing> pairings;

    const subject_row& subject(const std::string& id) const;
    int64_t count_pairings(relation r) const;
};

// CSV schema: subject_id,sex,age_bin,family_id,relation,partner_id
subject_manifest load_manifest(const std::string& path);
subject_manifest parse_manifest_csv(const std::string& text);
void write_manifest(const std::string& path, const subject_manifest& m);

// Demographic stratum of a pair: the unordered combination of the two
// members' (sex, age_bin).
struct stratum {
    sex sex_a, sex_b;       // canonical: (sex_a, age_a) <= (sex_b, age_b)
    age_bin age_a, age_b;

    bool operator==(const stratum&) const = default;
    bool operator<(const stratum& o) const;
    std::string name() const; // e.g. "F22-25|M26-30"
};

stratum make_stratum(sex sa, age_bin aa, sex sb, age_bin ab);

struct control_pair {
    std::string id_a, id_b;
    stratum str;
};

struct control_pairing {
    std::vector<control_pair> pairs;
    uint64_t seed = 0;
};

// Draws, for each listed pairing whose relation is in `target`, one
// non-related pair of subjects from the matching stratum, uniformly and with
// replacement, so control strata match the target strata exactly. n_pairs = 0
// means one control pair per target pair; otherwise draw i copies the stratum
// of target pair i mod T. Streams are per-stratum (stratum index within the
// sorted distinct target strata), so the draw is deterministic in the seed.
// With distinct_subjects, a subject is used at most once across the set.
control_pairing sample_strangers(const subject_manifest& m,
                                 const std::vector<relation>& target, uint64_t seed,
                                 int64_t n_pairs = 0, bool distinct_subjects = false);

void write_control_pairing(const std::string& path, const control_pairing& cp);

} // namespace dycoh
