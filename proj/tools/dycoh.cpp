// dycoh - batch pipeline for dyad-coherence screening of oriented
// white-matter microstructure between matched populations.
//
// Subcommands: sphere, phantom, extract, jacobian, screen, regions,
// similarity, report, strangers. Every numeric knob can come from a JSON
// config (--config) and be overridden on the command line. Outputs are
// deterministic for a fixed config, independent of the thread count.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dycoh/container.hpp"
#include "dycoh/jacobian.hpp"
#include "dycoh/lattice.hpp"
#include "dycoh/mda.hpp"
#include "dycoh/pairing.hpp"
#include "dycoh/phantom.hpp"
#include "dycoh/regions.hpp"
#include "dycoh/screen.hpp"
#include "dycoh/sphere.hpp"
#include "dycoh/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dycoh;

namespace {

// ---------------------------------------------------------------
// Small IO helpers
// ---------------------------------------------------------------

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw format_error("cannot open " + path + " for writing");
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void require_exists(const std::string& path) {
    if (!fs::exists(path)) throw format_error("missing input file: " + path);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// ---------------------------------------------------------------
// Run configuration: single JSON file, unknown keys rejected, every
// field overridable by a command-line flag.
// ---------------------------------------------------------------

struct run_config {
    int connectivity = 26;
    int peaks = 1;
    std::string variant = "cross";
    double pthresh = 1e-3;
    std::string alternative = "more-coherent";
    int64_t top_regions_n = 22;
    int64_t min_voxels = 2;
    double jacobian_pthresh = 1e-3;
    uint64_t seed = 0;
    int threads = 0;
    json phantom; // forwarded to phantom_config::from_json

    static run_config load(const std::string& path) {
        run_config cfg;
        json j = json::parse(read_text(path), nullptr, false);
        if (j.is_discarded()) throw format_error("config " + path + " is not valid JSON");
        const std::set<std::string> known = {
            "connectivity", "peaks",      "variant",          "pthresh", "alternative",
            "top_regions",  "min_voxels", "jacobian_pthresh", "seed",    "threads",
            "phantom"};
        for (const auto& [key, value] : j.items()) {
            (void)value;
            if (!known.count(key))
                throw format_error("config " + path + ": unknown key '" + key + "'");
        }
        try {
            if (j.contains("connectivity")) cfg.connectivity = j["connectivity"].get<int>();
            if (j.contains("peaks")) cfg.peaks = j["peaks"].get<int>();
            if (j.contains("variant")) cfg.variant = j["variant"].get<std::string>();
            if (j.contains("pthresh")) cfg.pthresh = j["pthresh"].get<double>();
            if (j.contains("alternative")) cfg.alternative = j["alternative"].get<std::string>();
            if (j.contains("top_regions")) cfg.top_regions_n = j["top_regions"].get<int64_t>();
            if (j.contains("min_voxels")) cfg.min_voxels = j["min_voxels"].get<int64_t>();
            if (j.contains("jacobian_pthresh"))
                cfg.jacobian_pthresh = j["jacobian_pthresh"].get<double>();
            if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
            if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
            if (j.contains("phantom")) cfg.phantom = j["phantom"];
        } catch (const json::exception& e) {
            throw format_error(std::string("config ") + path + ": " + e.what());
        }
        validate(cfg);
        return cfg;
    }

    static void validate(const run_config& cfg) {
        if (cfg.connectivity != 6 && cfg.connectivity != 18 && cfg.connectivity != 26)
            throw format_error("config: connectivity must be 6, 18, or 26");
        if (cfg.peaks < 1 || cfg.peaks > 4) throw format_error("config: peaks must be 1..4");
        dissim_kind_from_name(cfg.variant);
        if (cfg.alternative != "more-coherent" && cfg.alternative != "less-coherent")
            throw format_error("config: alternative must be more-coherent or less-coherent");
        if (!(cfg.pthresh > 0.0 && cfg.pthresh < 1.0))
            throw format_error("config: pthresh must be in (0,1)");
        if (cfg.min_voxels < 2) throw format_error("config: min_voxels must be >= 2");
    }
};

mw_alternative alternative_from_name(const std::string& s) {
    if (s == "more-coherent") return mw_alternative::a_less;
    if (s == "less-coherent") return mw_alternative::a_greater;
    throw format_error("alternative must be more-coherent or less-coherent");
}

// ---------------------------------------------------------------
// Pair tables: group,pair_id,id_a,id_b
// ---------------------------------------------------------------

struct pair_row {
    std::string group, pair_id, id_a, id_b;
};

std::vector<pair_row> load_pairs_csv(const std::string& path) {
    require_exists(path);
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line) ||
        split(line, ',') != std::vector<std::string>{"group", "pair_id", "id_a", "id_b"})
        throw format_error("pairs file " + path + ": header must be group,pair_id,id_a,id_b");
    std::vector<pair_row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 4) throw format_error("pairs file " + path + ": bad row: " + line);
        rows.push_back({f[0], f[1], f[2], f[3]});
    }
    return rows;
}

void write_pairs_csv(const std::string& path, const std::vector<pair_row>& rows) {
    std::ostringstream out;
    out << "group,pair_id,id_a,id_b\n";
    for (const auto& r : rows)
        out << r.group << ',' << r.pair_id << ',' << r.id_a << ',' << r.id_b << '\n';
    write_text(path, out.str());
}

std::vector<pair_row> select_groups(const std::vector<pair_row>& rows, const std::string& groups) {
    const auto names = split(groups, ',');
    std::vector<pair_row> out;
    for (const auto& r : rows)
        if (std::find(names.begin(), names.end(), r.group) != names.end()) out.push_back(r);
    if (out.empty()) throw domain_error("no pairs found for group(s) " + groups);
    return out;
}

// Subjects referenced by a pair selection, loaded from <id>.dycoh files.
cohort_peaks load_cohort(const std::string& peaks_dir, const mask& wm, int k_max,
                         const std::vector<pair_row>& rows) {
    std::set<std::string> ids;
    for (const auto& r : rows) {
        ids.insert(r.id_a);
        ids.insert(r.id_b);
    }
    auto cohort = cohort_peaks::create(wm, k_max);
    for (const auto& id : ids) {
        const std::string path = (fs::path(peaks_dir) / (id + ".dycoh")).string();
        require_exists(path);
        cohort.add_subject(id, read_peak_field(path));
    }
    return cohort;
}

std::vector<subject_pair> resolve_pairs(const cohort_peaks& cohort,
                                        const std::vector<pair_row>& rows) {
    std::vector<subject_pair> out;
    for (const auto& r : rows) {
        const int32_t a = cohort.subject_index(r.id_a);
        const int32_t b = cohort.subject_index(r.id_b);
        if (a < 0 || b < 0)
            throw domain_error("pair " + r.pair_id + " references unknown subject data");
        out.push_back({a, b});
    }
    return out;
}

mask load_effective_mask(const std::string& mask_path, const std::string& exclude_path) {
    require_exists(mask_path);
    mask wm = read_mask(mask_path);
    if (!exclude_path.empty()) {
        require_exists(exclude_path);
        wm = apply_exclusion(wm, read_mask(exclude_path));
    }
    return wm;
}

// ---------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------

int cmd_sphere(int level, const std::string& out) {
    const auto ds = tessellate_icosahedron(level);
    write_text(out, direction_set_to_json(ds));
    std::printf("sphere: level %d, %" PRId64 " directions -> %s\n", level, ds.size(), out.c_str());
    return 0;
}

int cmd_phantom(const run_config& rc, const std::string& out_dir, bool with_odf, int threads) {
    phantom_config cfg = rc.phantom.is_null() ? phantom_config::default_crossing()
                                              : phantom_config::from_json(rc.phantom.dump());
    if (rc.seed != 0) cfg.seed = rc.seed;

    fs::create_directories(fs::path(out_dir) / "subjects");
    const auto cohort = generate_cohort(cfg, threads);

    write_mask((fs::path(out_dir) / "mask.dycoh").string(), cohort.wm);
    write_mask((fs::path(out_dir) / "truth.dycoh").string(), cohort.truth);
    write_manifest((fs::path(out_dir) / "manifest.csv").string(), cohort.manifest);
    write_text((fs::path(out_dir) / "phantom_config.json").string(), cfg.to_json());

    std::vector<pair_row> rows;
    for (const auto& e : cohort.pairs)
        rows.push_back({e.group, e.pair_id,
                        cohort.peaks.subject_ids[static_cast<size_t>(e.pair.a)],
                        cohort.peaks.subject_ids[static_cast<size_t>(e.pair.b)]});
    write_pairs_csv((fs::path(out_dir) / "pairs.csv").string(), rows);

    for (size_t s = 0; s < cohort.peaks.subject_ids.size(); ++s) {
        const auto pf = subject_peak_field(cohort, static_cast<int32_t>(s));
        write_peak_field(
            (fs::path(out_dir) / "subjects" / (cohort.peaks.subject_ids[s] + ".dycoh")).string(),
            pf);
    }

    if (with_odf) {
        const auto ds = tessellate_icosahedron(3);
        write_text((fs::path(out_dir) / "directions.json").string(), direction_set_to_json(ds));
        fs::create_directories(fs::path(out_dir) / "odf");
        size_t subject = 0;
        for (size_t pi = 0; pi < cfg.populations.size(); ++pi)
            for (int q = 0; q < cfg.populations[pi].n_pairs; ++q)
                for (int member = 0; member < 2; ++member, ++subject) {
                    const auto field = generate_subject_odf(cfg, ds, pi, q, member);
                    write_odf_field((fs::path(out_dir) / "odf" /
                                     (cohort.peaks.subject_ids[subject] + ".dycoh"))
                                        .string(),
                                    field);
                }
    }

    std::printf("phantom: %zu subjects, %" PRId64 " mask voxels, %" PRId64
                " effect voxels -> %s\n",
                cohort.peaks.subject_ids.size(), cohort.wm.count(), cohort.truth.count(),
                out_dir.c_str());
    return 0;
}

int cmd_extract(const std::string& odf_dir, const std::string& directions_path,
                const std::string& mask_path, int k, const std::string& out_dir, int threads) {
    require_exists(odf_dir);
    require_exists(directions_path);
    const auto ds = direction_set_from_json(read_text(directions_path));
    const mask wm = load_effective_mask(mask_path, "");
    fs::create_directories(out_dir);

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(odf_dir))
        if (entry.path().extension() == ".dycoh") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw domain_error("extract: no .dycoh files in " + odf_dir);

    extract_stats stats;
    for (const auto& f : files) {
        const auto field = read_odf_field(f);
        const auto pf = extract_peak_field(field, ds, wm, k, &stats, threads);
        write_peak_field((fs::path(out_dir) / fs::path(f).filename()).string(), pf);
    }
    std::printf("extract: %zu subjects, k=%d, %" PRId64 " degenerate voxels, %" PRId64
                " zero-minimum substitutions -> %s\n",
                files.size(), k, stats.degenerate_voxels, stats.zero_min_substitutions,
                out_dir.c_str());
    return 0;
}

int cmd_jacobian(const std::string& disp_dir, const std::string& logjac_dir,
                 const std::string& mask_path, const std::string& pairs_path,
                 const std::string& interest_groups, const std::string& control_groups,
                 double pthresh, const std::string& out_dir, int threads) {
    const mask wm = load_effective_mask(mask_path, "");
    const auto rows = load_pairs_csv(pairs_path);
    const auto interest_rows = select_groups(rows, interest_groups);
    const auto control_rows = select_groups(rows, control_groups);

    std::set<std::string> ids;
    for (const auto& r : interest_rows) {
        ids.insert(r.id_a);
        ids.insert(r.id_b);
    }
    for (const auto& r : control_rows) {
        ids.insert(r.id_a);
        ids.insert(r.id_b);
    }

    fs::create_directories(fs::path(out_dir) / "logjac");
    std::vector<scalar_volume> logj;
    std::map<std::string, int32_t> index;
    int64_t folded_total = 0;
    for (const auto& id : ids) {
        scalar_volume vol;
        if (!disp_dir.empty()) {
            const std::string path = (fs::path(disp_dir) / (id + ".dycoh")).string();
            require_exists(path);
            const auto res = log_jacobian_field(read_displacement_field(path));
            folded_total += res.folded_voxels;
            vol = res.logj;
            write_scalar_volume((fs::path(out_dir) / "logjac" / (id + ".dycoh")).string(), vol,
                                "logjac");
        } else {
            const std::string path = (fs::path(logjac_dir) / (id + ".dycoh")).string();
            require_exists(path);
            vol = read_scalar_volume(path);
        }
        index[id] = static_cast<int32_t>(logj.size());
        logj.push_back(std::move(vol));
    }

    auto as_pairs = [&](const std::vector<pair_row>& rs) {
        std::vector<subject_pair> ps;
        for (const auto& r : rs) ps.push_back({index.at(r.id_a), index.at(r.id_b)});
        return ps;
    };
    const auto res = jacobian_exclusion_mask(logj, as_pairs(interest_rows),
                                             as_pairs(control_rows), wm, pthresh, threads);
    write_mask((fs::path(out_dir) / "exclusion_mask.dycoh").string(), res.excluded);

    json summary;
    summary["n_tested"] = res.n_tested;
    summary["n_flagged"] = res.n_flagged;
    summary["n_nan_voxels"] = res.n_nan_voxels;
    summary["folded_voxels"] = folded_total;
    summary["p_threshold"] = pthresh;
    summary["fdr_estimate"] = res.fdr;
    write_text((fs::path(out_dir) / "jacobian_summary.json").string(), summary.dump(2) + "\n");

    std::printf("jacobian: %" PRId64 " voxels tested, %" PRId64 " flagged (fdr %.3f) -> %s\n",
                res.n_tested, res.n_flagged, res.fdr, out_dir.c_str());
    return 0;
}

int cmd_screen(const run_config& rc, const std::string& peaks_dir, const std::string& mask_path,
               const std::string& exclude_path, const std::string& pairs_path,
               const std::string& interest_groups, const std::string& control_groups,
               const std::string& out_dir, int threads) {
    const mask wm = load_effective_mask(mask_path, exclude_path);
    const auto rows = load_pairs_csv(pairs_path);
    const auto interest_rows = select_groups(rows, interest_groups);
    const auto control_rows = select_groups(rows, control_groups);

    std::vector<pair_row> all_rows = interest_rows;
    all_rows.insert(all_rows.end(), control_rows.begin(), control_rows.end());
    const auto cohort = load_cohort(peaks_dir, wm, rc.peaks, all_rows);

    const auto graph = build_lattice(wm, rc.connectivity);

    screen_config sc;
    sc.variant = {dissim_kind_from_name(rc.variant), rc.peaks};
    sc.threshold_p = rc.pthresh;
    sc.alternative = alternative_from_name(rc.alternative);
    sc.threads = threads;
    const auto res = screen_dyads(graph, cohort, resolve_pairs(cohort, interest_rows),
                                  resolve_pairs(cohort, control_rows), sc);

    fs::create_directories(out_dir);
    std::ostringstream csv;
    csv << "u,v,U,p,significant\n";
    for (size_t i = 0; i < res.units.size(); ++i) {
        const auto& t = res.tests[i];
        csv << res.units[i].first << ',' << res.units[i].second << ',' << fmt_double(t.u) << ','
            << fmt_double(t.p) << ',' << int(t.significant) << '\n';
    }
    write_text((fs::path(out_dir) / "dyads.csv").string(), csv.str());

    json summary;
    summary["n_tests"] = res.summary.n_tests;
    summary["threshold_p"] = res.summary.threshold_p;
    summary["n_significant"] = res.summary.n_significant;
    summary["n_significant_voxels"] = res.summary.n_significant_voxels;
    summary["fdr_estimate"] = res.summary.fdr;
    summary["variant"] = rc.variant;
    summary["peaks"] = rc.peaks;
    summary["connectivity"] = rc.connectivity;
    summary["alternative"] = rc.alternative;
    summary["n_pairs_interest"] = interest_rows.size();
    summary["n_pairs_control"] = control_rows.size();
    summary["mask_voxels"] = wm.count();
    write_text((fs::path(out_dir) / "screen_summary.json").string(), summary.dump(2) + "\n");

    std::printf("screen: %" PRId64 " units tested, %" PRId64 " significant (%" PRId64
                " voxels), fdr %.4f -> %s\n",
                res.summary.n_tests, res.summary.n_significant, res.summary.n_significant_voxels,
                res.summary.fdr, out_dir.c_str());
    return 0;
}

int cmd_regions(const run_config& rc, const std::string& screen_dir, const std::string& mask_path,
                const std::string& exclude_path, bool use_top, const std::string& out_dir) {
    const mask wm = load_effective_mask(mask_path, exclude_path);
    const auto graph = build_lattice(wm, rc.connectivity);

    const std::string dyads_path = (fs::path(screen_dir) / "dyads.csv").string();
    require_exists(dyads_path);
    std::istringstream in(read_text(dyads_path));
    std::string line;
    std::getline(in, line);
    if (split(line, ',') != std::vector<std::string>{"u", "v", "U", "p", "significant"})
        throw format_error("regions: unexpected dyads.csv header in " + dyads_path);
    std::vector<dyad> significant;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw format_error("regions: bad dyads.csv row: " + line);
        if (f[4] == "1") significant.emplace_back(std::stoll(f[0]), std::stoll(f[1]));
    }

    auto rs = connected_components(graph, significant);
    const size_t total_regions = rs.regions.size();
    rs = use_top ? top_regions(rs, static_cast<size_t>(rc.top_regions_n))
                 : prune_regions(rs, rc.min_voxels);

    fs::create_directories(out_dir);
    write_label_volume((fs::path(out_dir) / "regions.dycoh").string(), wm.grid, rs.label_volume);

    std::ostringstream table;
    table << "region,n_dyads,n_voxels\n";
    for (size_t r = 0; r < rs.regions.size(); ++r)
        table << r << ',' << rs.regions[r].size() << ',' << rs.voxel_count(r) << '\n';
    write_text((fs::path(out_dir) / "regions.csv").string(), table.str());

    std::ostringstream dyads_out;
    dyads_out << "region,u,v\n";
    for (size_t r = 0; r < rs.regions.size(); ++r)
        for (const auto& [u, v] : rs.regions[r]) dyads_out << r << ',' << u << ',' << v << '\n';
    write_text((fs::path(out_dir) / "region_dyads.csv").string(), dyads_out.str());

    std::printf("regions: %zu components, %zu kept -> %s\n", total_regions, rs.regions.size(),
                out_dir.c_str());
    return 0;
}

region_set load_regions(const std::string& regions_dir) {
    const std::string label_path = (fs::path(regions_dir) / "regions.dycoh").string();
    const std::string dyads_path = (fs::path(regions_dir) / "region_dyads.csv").string();
    require_exists(dyads_path);
    require_exists(label_path);
    auto [grid, labels] = read_label_volume(label_path);

    region_set rs;
    rs.grid = grid;
    rs.label_volume = std::move(labels);
    std::istringstream in(read_text(dyads_path));
    std::string line;
    std::getline(in, line);
    if (split(line, ',') != std::vector<std::string>{"region", "u", "v"})
        throw format_error("similarity: unexpected region_dyads.csv header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 3) throw format_error("similarity: bad region_dyads.csv row: " + line);
        const auto r = static_cast<size_t>(std::stoull(f[0]));
        if (rs.regions.size() <= r) rs.regions.resize(r + 1);
        rs.regions[r].emplace_back(std::stoll(f[1]), std::stoll(f[2]));
    }
    if (rs.regions.empty()) throw domain_error("similarity: no regions in " + regions_dir);
    return rs;
}

int cmd_similarity(const run_config& rc, const std::string& peaks_dir,
                   const std::string& mask_path, const std::string& regions_dir,
                   const std::string& pairs_path, const std::string& interest_groups,
                   const std::string& control_groups, const std::string& holdout_groups,
                   const std::string& group_filter, const std::string& out_dir, int threads) {
    const mask wm = load_effective_mask(mask_path, "");
    const auto rs = load_regions(regions_dir);
    if (!(rs.grid == wm.grid)) throw domain_error("similarity: regions grid differs from mask");

    const auto rows = load_pairs_csv(pairs_path);
    const auto use_rows = group_filter.empty() ? rows : select_groups(rows, group_filter);
    const auto cohort = load_cohort(peaks_dir, wm, rc.peaks, use_rows);
    const dissim_variant variant{dissim_kind_from_name(rc.variant), rc.peaks};

    std::vector<subject_pair> pairs;
    std::vector<std::string> ids, groups;
    for (const auto& r : use_rows) {
        pairs.push_back({cohort.subject_index(r.id_a), cohort.subject_index(r.id_b)});
        ids.push_back(r.pair_id);
        groups.push_back(r.group);
    }
    const auto sim = pair_similarity(cohort, rs, pairs, ids, groups, variant, threads);

    fs::create_directories(out_dir);
    std::ostringstream simcsv;
    simcsv << "pair_id,relation";
    for (int64_t r = 0; r < sim.n_regions; ++r) simcsv << ",region_" << r;
    simcsv << ",aggregate\n";
    for (size_t row = 0; row < sim.pair_ids.size(); ++row) {
        simcsv << sim.pair_ids[row] << ',' << sim.pair_groups[row];
        for (int64_t r = 0; r < sim.n_regions; ++r)
            simcsv << ',' << fmt_double(sim.at(row, static_cast<size_t>(r)));
        simcsv << ',' << fmt_double(sim.aggregate[row]) << '\n';
    }
    write_text((fs::path(out_dir) / "pair_similarity.csv").string(), simcsv.str());

    // Effect table needs interest, control, and holdout populations resolved.
    if (!interest_groups.empty() && !control_groups.empty()) {
        const auto interest_rows = select_groups(use_rows, interest_groups);
        const auto control_rows = select_groups(use_rows, control_groups);
        const auto holdout_rows =
            holdout_groups.empty() ? interest_rows : select_groups(use_rows, holdout_groups);
        const auto table = region_effect_table(
            cohort, rs, resolve_pairs(cohort, interest_rows), resolve_pairs(cohort, control_rows),
            resolve_pairs(cohort, holdout_rows), variant, threads);
        std::ostringstream eff;
        eff << "region,n_dyads,n_voxels,effect_interest,effect_holdout\n";
        for (const auto& st : table)
            eff << st.region_id << ',' << st.n_dyads << ',' << st.n_voxels << ','
                << fmt_double(st.effect_size_interest) << ','
                << fmt_double(st.effect_size_holdout) << '\n';
        write_text((fs::path(out_dir) / "effect_table.csv").string(), eff.str());
    }

    const auto corr = region_correlation_matrix(sim);
    std::ostringstream corrcsv;
    corrcsv << "region";
    for (size_t r = 0; r < corr.size(); ++r) corrcsv << ",region_" << r;
    corrcsv << '\n';
    for (size_t a = 0; a < corr.size(); ++a) {
        corrcsv << a;
        for (size_t b = 0; b < corr.size(); ++b) corrcsv << ',' << fmt_double(corr[a][b]);
        corrcsv << '\n';
    }
    write_text((fs::path(out_dir) / "correlation.csv").string(), corrcsv.str());

    std::printf("similarity: %zu pairs x %" PRId64 " regions -> %s\n", sim.pair_ids.size(),
                sim.n_regions, out_dir.c_str());
    return 0;
}

// Minimal SVG histograms: one panel of d(X,Y) per group.
std::string svg_histograms(const std::map<std::string, std::vector<double>>& by_group) {
    const int bins = 24, w = 260, h = 160, pad = 28;
    double lo = 1e300, hi = -1e300;
    for (const auto& [g, vals] : by_group)
        for (const double v : vals) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!(hi > lo)) hi = lo + 1.0;

    std::ostringstream svg;
    const int total_w = pad + static_cast<int>(by_group.size()) * (w + pad);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total_w << "\" height=\""
        << (h + 2 * pad) << "\">\n";
    int x0 = pad;
    for (const auto& [g, vals] : by_group) {
        std::vector<int> counts(bins, 0);
        for (const double v : vals) {
            int b = static_cast<int>((v - lo) / (hi - lo) * bins);
            b = std::clamp(b, 0, bins - 1);
            ++counts[static_cast<size_t>(b)];
        }
        const int peak = std::max(1, *std::max_element(counts.begin(), counts.end()));
        svg << "<text x=\"" << x0 << "\" y=\"" << pad - 8 << "\" font-size=\"12\">" << g
            << " (n=" << vals.size() << ")</text>\n";
        for (int b = 0; b < bins; ++b) {
            const double frac = static_cast<double>(counts[static_cast<size_t>(b)]) / peak;
            const int bh = static_cast<int>(frac * (h - 2));
            svg << "<rect x=\"" << (x0 + b * w / bins) << "\" y=\"" << (pad + h - bh)
                << "\" width=\"" << (w / bins - 1) << "\" height=\"" << bh
                << "\" fill=\"#4477aa\"/>\n";
        }
        svg << "<line x1=\"" << x0 << "\" y1=\"" << (pad + h) << "\" x2=\"" << (x0 + w)
            << "\" y2=\"" << (pad + h) << "\" stroke=\"#222\"/>\n";
        x0 += w + pad;
    }
    svg << "</svg>\n";
    return svg.str();
}

int cmd_report(const std::string& run_dir, bool with_svg, const std::string& out_path) {
    json report;

    const std::string screen_path = (fs::path(run_dir) / "screen_summary.json").string();
    if (fs::exists(screen_path)) report["screen"] = json::parse(read_text(screen_path));

    const std::string regions_path = (fs::path(run_dir) / "regions.csv").string();
    if (fs::exists(regions_path)) {
        json regions = json::array();
        std::istringstream in(read_text(regions_path));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto f = split(line, ',');
            regions.push_back({{"region", std::stoll(f[0])},
                               {"n_dyads", std::stoll(f[1])},
                               {"n_voxels", std::stoll(f[2])}});
        }
        report["regions"] = regions;
    }

    // Dice of the top region against the phantom ground truth, when present.
    const std::string truth_path = (fs::path(run_dir) / "truth.dycoh").string();
    const std::string label_path = (fs::path(run_dir) / "regions.dycoh").string();
    if (fs::exists(truth_path) && fs::exists(label_path)) {
        const auto truth = read_mask(truth_path);
        const auto [grid, labels] = read_label_volume(label_path);
        if (grid == truth.grid) {
            int64_t inter = 0, top = 0, t = 0;
            for (int64_t v = 0; v < grid.n_voxels(); ++v) {
                const bool in_top = labels[static_cast<size_t>(v)] == 0;
                inter += (in_top && truth[v]);
                top += in_top;
                t += truth[v] ? 1 : 0;
            }
            report["dice_top_region_vs_truth"] =
                top + t > 0 ? 2.0 * static_cast<double>(inter) / static_cast<double>(top + t)
                            : 0.0;
        }
    }

    // Per-group aggregate dissimilarity distributions.
    const std::string sim_path = (fs::path(run_dir) / "pair_similarity.csv").string();
    std::map<std::string, std::vector<double>> by_group;
    if (fs::exists(sim_path)) {
        std::istringstream in(read_text(sim_path));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto f = split(line, ',');
            by_group[f[1]].push_back(std::stod(f.back()));
        }
        json groups;
        for (const auto& [g, vals] : by_group) {
            double mean = 0.0;
            for (const double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            std::vector<double> sorted = vals;
            std::sort(sorted.begin(), sorted.end());
            const double median =
                sorted.size() % 2 == 1
                    ? sorted[sorted.size() / 2]
                    : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
            groups[g] = {{"n_pairs", vals.size()}, {"mean", mean}, {"median", median}};
        }
        report["group_dissimilarity"] = groups;
    }

    const std::string jac_path = (fs::path(run_dir) / "jacobian_summary.json").string();
    if (fs::exists(jac_path)) report["jacobian"] = json::parse(read_text(jac_path));

    write_text(out_path, report.dump(2) + "\n");
    if (with_svg && !by_group.empty()) {
        const std::string svg_path = (fs::path(out_path).parent_path() / "report.svg").string();
        write_text(svg_path, svg_histograms(by_group));
    }
    std::printf("report -> %s\n", out_path.c_str());
    return 0;
}

int cmd_strangers(const std::string& manifest_path, const std::string& target, uint64_t seed,
                  int64_t n_pairs, bool distinct, const std::string& out,
                  const std::string& pairs_out, const std::string& group_name) {
    require_exists(manifest_path);
    const auto m = load_manifest(manifest_path);
    std::vector<relation> rels;
    for (const auto& name : split(target, ',')) rels.push_back(relation_from_name(name));
    const auto cp = sample_strangers(m, rels, seed, n_pairs, distinct);
    write_control_pairing(out, cp);
    if (!pairs_out.empty()) {
        std::vector<pair_row> rows;
        for (size_t i = 0; i < cp.pairs.size(); ++i)
            rows.push_back({group_name, group_name + "_" + std::to_string(i), cp.pairs[i].id_a,
                            cp.pairs[i].id_b});
        write_pairs_csv(pairs_out, rows);
    }
    std::printf("strangers: %zu control pairs (seed %" PRIu64 ") -> %s\n", cp.pairs.size(), seed,
                out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyadic coherence screening of oriented white-matter microstructure"};
    app.require_subcommand(1);
    app.fallthrough(); // --config and friends may appear after the subcommand

    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration");

    // shared knobs; the config file supplies defaults, flags override
    int connectivity = 26, peaks_k = 1, threads = 0, level = 3;
    double pthresh = 1e-3, jac_pthresh = 1e-3;
    std::string variant = "cross", alternative = "more-coherent";
    int64_t top_n = 22, min_vox = 2, n_pairs = 0;
    uint64_t seed = 0;
    std::string mask_path, exclude_path, pairs_path, peaks_dir, out_dir, out_path;
    std::string odf_dir, directions_path, disp_dir, logjac_dir, screen_dir, regions_dir, run_dir;
    std::string interest_groups = "interest", control_groups = "control", holdout_groups,
        group_filter;
    std::string manifest_path, target_relations = "MZ,DZ", group_name = "strangers", pairs_out;
    bool with_odf = false, with_svg = false, use_top = false, distinct = false;

    auto* sphere = app.add_subcommand("sphere", "write the tessellated direction set as JSON");
    sphere->add_option("--level", level, "subdivision level (3 gives 642 directions)");
    sphere->add_option("--out", out_path, "output JSON path")->required();

    auto* phantom = app.add_subcommand("phantom", "generate a synthetic cohort");
    phantom->add_option("--out", out_dir, "output directory")->required();
    phantom->add_option("--seed", seed, "override the config seed");
    phantom->add_option("--threads", threads, "worker threads (0 = auto)");
    phantom->add_flag("--odf", with_odf, "also render per-subject ODF volumes");

    auto* extract = app.add_subcommand("extract", "ODF volumes to peak fields");
    extract->add_option("--odf-dir", odf_dir, "directory of ODF volumes")->required();
    extract->add_option("--directions", directions_path, "direction set JSON")->required();
    extract->add_option("--mask", mask_path, "white-matter mask")->required();
    extract->add_option("--peaks", peaks_k, "peaks to keep per voxel (1..4)");
    extract->add_option("--out", out_dir, "output directory")->required();
    extract->add_option("--threads", threads, "worker threads (0 = auto)");

    auto* jacobian = app.add_subcommand("jacobian", "log-Jacobian fields and exclusion mask");
    jacobian->add_option("--disp-dir", disp_dir, "displacement fields per subject");
    jacobian->add_option("--logjac-dir", logjac_dir, "precomputed log-Jacobian volumes");
    jacobian->add_option("--mask", mask_path, "white-matter mask")->required();
    jacobian->add_option("--pairs", pairs_path, "pairs CSV")->required();
    jacobian->add_option("--interest-group", interest_groups, "interest group name(s)");
    jacobian->add_option("--control-group", control_groups, "control group name(s)");
    jacobian->add_option("--jacobian-pthresh", jac_pthresh, "exclusion p threshold");
    jacobian->add_option("--out", out_dir, "output directory")->required();
    jacobian->add_option("--threads", threads, "worker threads (0 = auto)");

    auto* screen = app.add_subcommand("screen", "Mann-Whitney dyad screening");
    screen->add_option("--peaks-dir", peaks_dir, "peak fields per subject")->required();
    screen->add_option("--mask", mask_path, "white-matter mask")->required();
    screen->add_option("--exclude", exclude_path, "exclusion mask to subtract");
    screen->add_option("--pairs", pairs_path, "pairs CSV")->required();
    screen->add_option("--interest-group", interest_groups, "interest group name(s)");
    screen->add_option("--control-group", control_groups, "control group name(s)");
    screen->add_option("--connectivity", connectivity, "lattice connectivity 6|18|26");
    screen->add_option("--peaks", peaks_k, "peaks compared per voxel");
    screen->add_option("--variant", variant, "voxel|cross|within|magnitude");
    screen->add_option("--pthresh", pthresh, "significance threshold");
    screen->add_option("--alternative", alternative, "more-coherent|less-coherent");
    screen->add_option("--threads", threads, "worker threads (0 = auto)");
    screen->add_option("--out", out_dir, "output directory")->required();

    auto* regions = app.add_subcommand("regions", "connected components of significant dyads");
    regions->add_option("--screen-dir", screen_dir, "directory with dyads.csv")->required();
    regions->add_option("--mask", mask_path, "white-matter mask")->required();
    regions->add_option("--exclude", exclude_path, "exclusion mask to subtract");
    regions->add_option("--connectivity", connectivity, "lattice connectivity 6|18|26");
    regions->add_option("--top-regions", top_n, "keep the N largest regions");
    regions->add_option("--min-voxels", min_vox, "or keep regions with >= N voxels");
    regions->add_flag("--use-top", use_top, "select by top-N instead of min-voxels");
    regions->add_option("--out", out_dir, "output directory")->required();

    auto* similarity = app.add_subcommand("similarity", "region and subject similarity tables");
    similarity->add_option("--peaks-dir", peaks_dir, "peak fields per subject")->required();
    similarity->add_option("--mask", mask_path, "white-matter mask")->required();
    similarity->add_option("--regions-dir", regions_dir, "directory with region outputs")
        ->required();
    similarity->add_option("--pairs", pairs_path, "pairs CSV")->required();
    similarity->add_option("--interest-group", interest_groups, "interest group name(s)");
    similarity->add_option("--control-group", control_groups, "control group name(s)");
    similarity->add_option("--holdout-group", holdout_groups, "holdout group name(s)");
    similarity->add_option("--group", group_filter, "restrict to these group(s)");
    similarity->add_option("--peaks", peaks_k, "peaks compared per voxel");
    similarity->add_option("--variant", variant, "voxel|cross|within|magnitude");
    similarity->add_option("--threads", threads, "worker threads (0 = auto)");
    similarity->add_option("--out", out_dir, "output directory")->required();

    auto* report = app.add_subcommand("report", "aggregate a run directory into one JSON");
    report->add_option("--run", run_dir, "pipeline output directory")->required();
    report->add_option("--out", out_path, "report JSON path")->required();
    report->add_flag("--svg", with_svg, "emit per-group dissimilarity histograms");

    auto* strangers = app.add_subcommand("strangers", "demographic-matched control pairs");
    strangers->add_option("--manifest", manifest_path, "subject manifest CSV")->required();
    strangers->add_option("--target", target_relations, "relations to match, e.g. MZ,DZ");
    strangers->add_option("--seed", seed, "sampling seed");
    strangers->add_option("--n-pairs", n_pairs, "number of control pairs (0 = match target)");
    strangers->add_flag("--distinct-subjects", distinct, "forbid subject reuse");
    strangers->add_option("--out", out_path, "control pairing CSV (id_a,id_b,stratum)")
        ->required();
    strangers->add_option("--pairs-out", pairs_out, "also emit group,pair_id,id_a,id_b CSV");
    strangers->add_option("--group-name", group_name, "group label for --pairs-out");

    try {
        app.parse(argc, argv);

        run_config rc;
        if (!config_path.empty()) rc = run_config::load(config_path);
        // command line wins over the config file; unset flags fall back
        auto given = [&](CLI::App* cmd, const char* flag) {
            const auto* opt = cmd->get_option_no_throw(flag);
            return opt && opt->count() > 0;
        };
        for (CLI::App* cmd : {screen, regions, similarity, jacobian, phantom, extract}) {
            if (!cmd->parsed()) continue;
            if (!given(cmd, "--connectivity")) connectivity = rc.connectivity;
            if (!given(cmd, "--peaks")) peaks_k = rc.peaks;
            if (!given(cmd, "--variant")) variant = rc.variant;
            if (!given(cmd, "--pthresh")) pthresh = rc.pthresh;
            if (!given(cmd, "--alternative")) alternative = rc.alternative;
            if (!given(cmd, "--top-regions")) top_n = rc.top_regions_n;
            if (!given(cmd, "--min-voxels")) min_vox = rc.min_voxels;
            if (!given(cmd, "--jacobian-pthresh")) jac_pthresh = rc.jacobian_pthresh;
            if (!given(cmd, "--seed")) seed = rc.seed;
            if (!given(cmd, "--threads") && rc.threads > 0) threads = rc.threads;
        }

        run_config effective = rc;
        effective.connectivity = connectivity;
        effective.peaks = peaks_k;
        effective.variant = variant;
        effective.pthresh = pthresh;
        effective.alternative = alternative;
        effective.top_regions_n = top_n;
        effective.min_voxels = min_vox;
        effective.jacobian_pthresh = jac_pthresh;
        effective.seed = seed;
        run_config::validate(effective);

        if (sphere->parsed()) return cmd_sphere(level, out_path);
        if (phantom->parsed()) return cmd_phantom(effective, out_dir, with_odf, threads);
        if (extract->parsed())
            return cmd_extract(odf_dir, directions_path, mask_path, peaks_k, out_dir, threads);
        if (jacobian->parsed()) {
            if (disp_dir.empty() == logjac_dir.empty())
                throw domain_error("jacobian: provide exactly one of --disp-dir, --logjac-dir");
            return cmd_jacobian(disp_dir, logjac_dir, mask_path, pairs_path, interest_groups,
                                control_groups, jac_pthresh, out_dir, threads);
        }
        if (screen->parsed())
            return cmd_screen(effective, peaks_dir, mask_path, exclude_path, pairs_path,
                              interest_groups, control_groups, out_dir, threads);
        if (regions->parsed())
            return cmd_regions(effective, screen_dir, mask_path, exclude_path, use_top, out_dir);
        if (similarity->parsed())
            return cmd_similarity(effective, peaks_dir, mask_path, regions_dir, pairs_path,
                                  interest_groups, control_groups, holdout_groups, group_filter,
                                  out_dir, threads);
        if (report->parsed()) return cmd_report(run_dir, with_svg, out_path);
        if (strangers->parsed())
            return cmd_strangers(manifest_path, target_relations, seed, n_pairs, distinct,
                                 out_path, pairs_out, group_name);
        throw domain_error("no subcommand selected");
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        json err;
        err["error"] = e.what();
        err["type"] = "usage";
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        err["type"] = "runtime";
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    }
}
