#include "dycoh/pairing.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dycoh/rng.hpp"

namespace dycoh {

const char* sex_name(sex s) { return s == sex::female ? "F" : "M"; }

const char* age_bin_name(age_bin a) {
    switch (a) {
        case age_bin::a22_25: return "22-25";
        case age_bin::a26_30: return "26-30";
        case age_bin::a31_35: return "31-35";
    }
    throw domain_error("unknown age bin");
}

const char* relation_name(relation r) {
    switch (r) {
        case relation::mz: return "MZ";
        case relation::dz: return "DZ";
        case relation::sib: return "SIB";
    }
    throw domain_error("unknown relation");
}

sex sex_from_name(const std::string& s) {
    if (s == "F") return sex::female;
    if (s == "M") return sex::male;
    throw format_error("unknown sex value: '" + s + "'");
}

age_bin age_bin_from_name(const std::string& s) {
    if (s == "22-25") return age_bin::a22_25;
    if (s == "26-30") return age_bin::a26_30;
    if (s == "31-35") return age_bin::a31_35;
    throw format_error("unknown age_bin value: '" + s + "'");
}

relation relation_from_name(const std::string& s) {
    if (s == "MZ") return relation::mz;
    if (s == "DZ") return relation::dz;
    if (s == "SIB") return relation::sib;
    throw format_error("unknown relation value: '" + s + "'");
}

const subject_row& subject_manifest::subject(const std::string& id) const {
    for (const auto& s : subjects)
        if (s.subject_id == id) return s;
    throw domain_error("manifest: unknown subject " + id);
}

int64_t subject_manifest::count_pairings(relation r) const {
    int64_t n = 0;
    for (const auto& p : pairings) n += (p.rel == r);
    return n;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

subject_manifest parse_manifest_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw format_error("manifest: empty file");
    const auto header = split_csv_line(line);
    const std::vector<std::string> expected = {"subject_id", "sex",      "age_bin",
                                               "family_id",  "relation", "partner_id"};
    if (header != expected)
        throw format_error("manifest: header must be subject_id,sex,age_bin,family_id,relation,partner_id");

    subject_manifest m;
    std::map<std::string, size_t> index;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) throw format_error("manifest: row with wrong field count: " + line);
        subject_row row;
        row.subject_id = f[0];
        row.subject_sex = sex_from_name(f[1]);
        row.subject_age = age_bin_from_name(f[2]);
        row.family_id = f[3];
        if (f[4].empty() != f[5].empty())
            throw format_error("manifest: relation and partner_id must be both set or both empty for " +
                               row.subject_id);
        if (!f[4].empty()) {
            row.rel = relation_from_name(f[4]);
            row.partner_id = f[5];
        }
        if (index.count(row.subject_id))
            throw format_error("manifest: duplicate subject " + row.subject_id);
        index[row.subject_id] = m.subjects.size();
        m.subjects.push_back(std::move(row));
    }

    // Pairing validation: symmetry, shared family, one pairing per subject.
    for (const auto& s : m.subjects) {
        if (!s.rel) continue;
        const auto it = index.find(s.partner_id);
        if (it == index.end())
            throw format_error("manifest: partner " + s.partner_id + " of " + s.subject_id +
                               " is missing");
        const auto& partner = m.subjects[it->second];
        if (!partner.rel || partner.partner_id != s.subject_id || *partner.rel != *s.rel)
            throw format_error("manifest: asymmetric pairing between " + s.subject_id + " and " +
                               s.partner_id);
        if (partner.family_id != s.family_id)
            throw format_error("manifest: paired subjects " + s.subject_id + " and " +
                               s.partner_id + " have different family ids");
        if (s.subject_id < s.partner_id)
            m.pairings.push_back({s.subject_id, s.partner_id, *s.rel});
    }
    return m;
}

subject_manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("load_manifest: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest_csv(buf.str());
}

void write_manifest(const std::string& path, const subject_manifest& m) {
    std::ofstream out(path);
    if (!out) throw format_error("write_manifest: cannot open " + path);
    out << "subject_id,sex,age_bin,family_id,relation,partner_id\n";
    for (const auto& s : m.subjects) {
        out << s.subject_id << ',' << sex_name(s.subject_sex) << ',' << age_bin_name(s.subject_age)
            << ',' << s.family_id << ',' << (s.rel ? relation_name(*s.rel) : "") << ','
            << s.partner_id << '\n';
    }
}

bool stratum::operator<(const stratum& o) const {
    const auto key = [](const stratum& s) {
        return std::make_tuple(static_cast<int>(s.sex_a), static_cast<int>(s.age_a),
                               static_cast<int>(s.sex_b), static_cast<int>(s.age_b));
    };
    return key(*this) < key(o);
}

std::string stratum::name() const {
    std::string s;
    s += sex_name(sex_a);
    s += age_bin_name(age_a);
    s += '|';
    s += sex_name(sex_b);
    s += age_bin_name(age_b);
    return s;
}

stratum make_stratum(sex sa, age_bin aa, sex sb, age_bin ab) {
    if (std::make_pair(static_cast<int>(sa), static_cast<int>(aa)) <=
        std::make_pair(static_cast<int>(sb), static_cast<int>(ab)))
        return {sa, sb, aa, ab};
    return {sb, sa, ab, aa};
}

control_pairing sample_strangers(const subject_manifest& m, const std::vector<relation>& target,
                                 uint64_t seed, int64_t n_pairs, bool distinct_subjects) {
    const std::set<relation> want(target.begin(), target.end());

    // Target pairs and their strata, in manifest order.
    std::vector<stratum> target_strata;
    for (const auto& p : m.pairings) {
        if (!want.count(p.rel)) continue;
        const auto& a = m.subject(p.id_a);
        const auto& b = m.subject(p.id_b);
        target_strata.push_back(
            make_stratum(a.subject_sex, a.subject_age, b.subject_sex, b.subject_age));
    }
    if (target_strata.empty())
        throw domain_error("sample_strangers: no target pairings in manifest");
    if (n_pairs <= 0) n_pairs = static_cast<int64_t>(target_strata.size());

    // Candidate non-related pairs per stratum, canonical order.
    std::map<stratum, std::vector<std::pair<size_t, size_t>>> candidates;
    for (size_t i = 0; i < m.subjects.size(); ++i)
        for (size_t j = i + 1; j < m.subjects.size(); ++j) {
            const auto& a = m.subjects[i];
            const auto& b = m.subjects[j];
            if (a.family_id == b.family_id) continue;
            candidates[make_stratum(a.subject_sex, a.subject_age, b.subject_sex, b.subject_age)]
                .emplace_back(i, j);
        }

    // Per-stratum streams keyed by the stratum's index among the sorted
    // distinct target strata.
    std::map<stratum, counter_rng> streams;
    {
        std::set<stratum> distinct(target_strata.begin(), target_strata.end());
        uint64_t idx = 0;
        for (const auto& s : distinct) streams.emplace(s, counter_rng(seed, idx++));
    }

    control_pairing cp;
    cp.seed = seed;
    std::set<size_t> used;
    for (int64_t i = 0; i < n_pairs; ++i) {
        const stratum& s = target_strata[static_cast<size_t>(i) % target_strata.size()];
        const auto cand_it = candidates.find(s);
        if (cand_it == candidates.end() || cand_it->second.empty())
            throw domain_error("sample_strangers: stratum " + s.name() +
                               " has no eligible stranger pair");
        auto& rng = streams.at(s);
        const auto& cand = cand_it->second;
        std::pair<size_t, size_t> chosen;
        if (distinct_subjects) {
            std::vector<std::pair<size_t, size_t>> avail;
            for (const auto& c : cand)
                if (!used.count(c.first) && !used.count(c.second)) avail.push_back(c);
            if (avail.empty())
                throw domain_error("sample_strangers: stratum " + s.name() +
                                   " exhausted under distinct-subjects");
            chosen = avail[rng.next_below(avail.size())];
            used.insert(chosen.first);
            used.insert(chosen.second);
        } else {
            chosen = cand[rng.next_below(cand.size())];
        }
        cp.pairs.push_back(
            {m.subjects[chosen.first].subject_id, m.subjects[chosen.second].subject_id, s});
    }
    return cp;
}

void write_control_pairing(const std::string& path, const control_pairing& cp) {
    std::ofstream out(path);
    if (!out) throw format_error("write_control_pairing: cannot open " + path);
    out << "id_a,id_b,stratum\n";
    for (const auto& p : cp.pairs) out << p.id_a << ',' << p.id_b << ',' << p.str.name() << '\n';
}

} // namespace dycoh
