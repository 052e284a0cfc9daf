#include "dycoh/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "dycoh/parallel.hpp"
#include "dycoh/rng.hpp"

namespace dycoh {

namespace {

constexpr double kMaxMda = 0.70710678118654746; // 1/sqrt(2)

vec3 sub(const vec3& a, const vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
vec3 add(const vec3& a, const vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
vec3 scale(const vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double dot(const vec3& a, const vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const vec3& a) { return std::sqrt(dot(a, a)); }
vec3 cross(const vec3& a, const vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
vec3 unit(const vec3& a) { return scale(a, 1.0 / norm(a)); }

// Deterministic orthonormal basis perpendicular to unit vector d.
void perp_basis(const vec3& d, vec3& e1, vec3& e2) {
    const double ax = std::abs(d[0]), ay = std::abs(d[1]), az = std::abs(d[2]);
    vec3 ref{1, 0, 0};
    if (ay <= ax && ay <= az)
        ref = {0, 1, 0};
    else if (az <= ax && az <= ay)
        ref = {0, 0, 1};
    e1 = unit(cross(d, ref));
    e2 = cross(d, e1);
}

vec3 rotate_about(const vec3& v, const vec3& axis_unit, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const vec3 kxv = cross(axis_unit, v);
    const double kv = dot(axis_unit, v);
    return add(add(scale(v, c), scale(kxv, s)), scale(axis_unit, kv * (1.0 - c)));
}

// Rotation by a rotation vector (axis * angle); identity for tiny angles.
vec3 rotate_by_vector(const vec3& v, const vec3& w) {
    const double angle = norm(w);
    if (angle < 1e-15) return v;
    return rotate_about(v, scale(w, 1.0 / angle), angle);
}

double point_segment_distance(const vec3& p, const vec3& a, const vec3& b, double& t_out) {
    const vec3 ab = sub(b, a);
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(sub(p, a), ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    t_out = t;
    return norm(sub(p, add(a, scale(ab, t))));
}

struct voxel_site {
    int64_t voxel = 0;
    bool in_effect = false;
    // one base peak per covering fascicle, ordered by descending configured mda
    struct base_peak {
        int fascicle = 0;
        vec3 tangent{0, 0, 0};
        double mda = 0.0;
    };
    std::vector<base_peak> peaks;
};

struct geometry {
    mask wm;
    mask truth;
    std::vector<voxel_site> sites; // one per masked voxel, ascending voxel id
};

geometry build_geometry(const phantom_config& cfg) {
    geometry geo;
    geo.wm = mask(cfg.grid);
    geo.truth = mask(cfg.grid);

    const auto [nx, ny, nz] = cfg.grid.dims;
    for (int64_t z = 0; z < nz; ++z)
        for (int64_t y = 0; y < ny; ++y)
            for (int64_t x = 0; x < nx; ++x) {
                const vec3 center = {(static_cast<double>(x) + 0.5) * cfg.grid.voxel_size_mm[0],
                                     (static_cast<double>(y) + 0.5) * cfg.grid.voxel_size_mm[1],
                                     (static_cast<double>(z) + 0.5) * cfg.grid.voxel_size_mm[2]};
                voxel_site site;
                site.voxel = cfg.grid.index(x, y, z);
                for (size_t f = 0; f < cfg.fascicles.size(); ++f) {
                    const auto& fas = cfg.fascicles[f];
                    double best = std::numeric_limits<double>::infinity();
                    vec3 tangent{0, 0, 0};
                    for (size_t s = 0; s + 1 < fas.polyline.size(); ++s) {
                        double t = 0.0;
                        const double d =
                            point_segment_distance(center, fas.polyline[s], fas.polyline[s + 1], t);
                        if (d < best) {
                            best = d;
                            tangent = unit(sub(fas.polyline[s + 1], fas.polyline[s]));
                        }
                    }
                    if (best <= fas.radius_mm)
                        site.peaks.push_back({static_cast<int>(f), tangent, fas.mda});
                }
                if (site.peaks.empty()) continue;

                std::stable_sort(site.peaks.begin(), site.peaks.end(),
                                 [](const auto& a, const auto& b) { return a.mda > b.mda; });

                if (cfg.effect.which == effect_region_spec::kind::crossing)
                    site.in_effect = site.peaks.size() >= 2;
                else
                    site.in_effect = norm(sub(center, cfg.effect.center_mm)) <= cfg.effect.radius_mm;

                geo.wm.set(site.voxel, true);
                if (site.in_effect) geo.truth.set(site.voxel, true);
                geo.sites.push_back(std::move(site));
            }
    if (geo.sites.empty()) throw domain_error("phantom: fascicles cover no voxels");
    return geo;
}

// RNG roles within a (pair, voxel-or-pairwide, peak) stream.
enum rng_role : uint64_t {
    role_shared_pairwide = 0, // keyed with voxel = ~0
    role_individual_m0 = 1,
    role_individual_m1 = 2,
    role_noise_m0 = 3,
    role_noise_m1 = 4,
};

counter_rng stream(uint64_t seed, uint64_t pair_key, uint64_t voxel_key, uint64_t peak,
                   uint64_t role) {
    return counter_rng(seed, pair_key, voxel_key, peak * 16 + role);
}

struct deviation {
    vec3 rotation{0, 0, 0}; // rotation vector, axis perpendicular to the tangent
    double mag_jitter = 0.0;
};

// One jitter draw: random perpendicular axis, wrapped-normal angle with
// sd 1/sqrt(kappa), plus a standard normal magnitude factor.
deviation draw_deviation(counter_rng& rng, const vec3& tangent, double kappa) {
    vec3 e1, e2;
    perp_basis(tangent, e1, e2);
    const double phi = rng.next_unit() * 2.0 * M_PI;
    const double angle = rng.next_normal() / std::sqrt(kappa);
    const vec3 axis = add(scale(e1, std::cos(phi)), scale(e2, std::sin(phi)));
    return {scale(axis, angle), rng.next_normal()};
}

struct subject_address {
    uint64_t pair_key; // global pair index
    int member;        // 0 or 1
    double rho;
    double offset_rad;
};

// Peaks for one subject at one site, in generation order (before magnitude
// sorting): covering fascicles first, then the optional noise peak.
void subject_site_peaks(const phantom_config& cfg, const voxel_site& site,
                        const subject_address& who, std::vector<std::array<double, 4>>& out) {
    out.clear();
    const double rho_eff = site.in_effect ? who.rho : 0.0;
    for (size_t i = 0; i < site.peaks.size(); ++i) {
        const auto& bp = site.peaks[i];
        vec3 d0 = bp.tangent;
        if (site.in_effect && who.offset_rad != 0.0) {
            vec3 e1, e2;
            perp_basis(d0, e1, e2);
            d0 = rotate_about(d0, e1, who.offset_rad);
        }
        // shared component: one draw per (pair, fascicle peak), voxel-blind
        auto shared_rng = stream(cfg.seed, who.pair_key, ~0ull,
                                 static_cast<uint64_t>(bp.fascicle), role_shared_pairwide);
        const deviation shared = draw_deviation(shared_rng, bp.tangent, cfg.kappa);
        auto ind_rng = stream(cfg.seed, who.pair_key, static_cast<uint64_t>(site.voxel),
                              static_cast<uint64_t>(bp.fascicle),
                              who.member == 0 ? role_individual_m0 : role_individual_m1);
        const deviation ind = draw_deviation(ind_rng, bp.tangent, cfg.kappa);

        const vec3 w = add(scale(shared.rotation, rho_eff), scale(ind.rotation, 1.0 - rho_eff));
        const vec3 dir = rotate_by_vector(d0, w);
        const double g = rho_eff * shared.mag_jitter + (1.0 - rho_eff) * ind.mag_jitter;
        const double mag =
            std::clamp(bp.mda * (1.0 + cfg.sigma_mag * g), 1e-3, kMaxMda - 1e-6);
        out.push_back({mag * dir[0], mag * dir[1], mag * dir[2], mag});
    }
    if (cfg.noise_peak_mda > 0.0) {
        auto rng = stream(cfg.seed, who.pair_key, static_cast<uint64_t>(site.voxel), 15,
                          who.member == 0 ? role_noise_m0 : role_noise_m1);
        // uniform direction on the sphere
        const double zc = 2.0 * rng.next_unit() - 1.0;
        const double phi = rng.next_unit() * 2.0 * M_PI;
        const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
        const vec3 dir = {r * std::cos(phi), r * std::sin(phi), zc};
        const double mag = std::clamp(cfg.noise_peak_mda * (1.0 + cfg.sigma_mag * rng.next_normal()),
                                      1e-3, kMaxMda - 1e-6);
        out.push_back({mag * dir[0], mag * dir[1], mag * dir[2], mag});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a[3] > b[3]; });
}

std::string pad3(int n) {
    std::string s = std::to_string(n);
    while (s.size() < 3) s.insert(s.begin(), '0');
    return s;
}

} // namespace

void phantom_config::validate() const {
    grid.validate();
    if (fascicles.empty()) throw domain_error("phantom: no fascicles");
    const vec3 box = {static_cast<double>(grid.dims[0]) * grid.voxel_size_mm[0],
                      static_cast<double>(grid.dims[1]) * grid.voxel_size_mm[1],
                      static_cast<double>(grid.dims[2]) * grid.voxel_size_mm[2]};
    for (const auto& f : fascicles) {
        if (f.polyline.size() < 2) throw domain_error("phantom: fascicle polyline needs >= 2 points");
        if (!(f.radius_mm > 0.0)) throw domain_error("phantom: fascicle radius must be > 0");
        if (!(f.mda > 0.0 && f.mda < kMaxMda))
            throw domain_error("phantom: fascicle mda must be in (0, 1/sqrt(2))");
        for (const auto& p : f.polyline)
            for (int a = 0; a < 3; ++a)
                if (p[static_cast<size_t>(a)] < 0.0 || p[static_cast<size_t>(a)] > box[static_cast<size_t>(a)])
                    throw domain_error("phantom: fascicle polyline outside the grid");
    }
    if (!(kappa > 0.0)) throw domain_error("phantom: kappa must be > 0");
    if (sigma_mag < 0.0) throw domain_error("phantom: sigma_mag must be >= 0");
    if (noise_peak_mda < 0.0 || noise_peak_mda >= kMaxMda)
        throw domain_error("phantom: noise_peak_mda must be in [0, 1/sqrt(2))");
    if (k_max < 1 || k_max > 4) throw domain_error("phantom: k_max must be in 1..4");
    if (populations.empty()) throw domain_error("phantom: no populations");
    for (const auto& p : populations) {
        if (p.n_pairs < 1) throw domain_error("phantom: population needs >= 1 pair");
        if (p.rho < 0.0 || p.rho > 1.0) throw domain_error("phantom: rho must be in [0,1]");
        if (p.name.empty()) throw domain_error("phantom: population name empty");
    }
    if (effect.which == effect_region_spec::kind::sphere && !(effect.radius_mm > 0.0))
        throw domain_error("phantom: effect sphere radius must be > 0");
}

phantom_config phantom_config::default_crossing(int64_t dim, uint64_t seed) {
    phantom_config cfg;
    cfg.grid = grid3(dim, dim, dim);
    const double mid = static_cast<double>(dim) / 2.0;
    const double lo = 2.0, hi = static_cast<double>(dim) - 2.0;
    cfg.fascicles = {
        {{{lo, mid, mid}, {hi, mid, mid}}, 6.0, 0.6},
        {{{mid, lo, mid}, {mid, hi, mid}}, 6.0, 0.5},
    };
    cfg.effect.which = effect_region_spec::kind::crossing;
    cfg.kappa = 64.0;
    cfg.sigma_mag = 0.05;
    cfg.noise_peak_mda = 0.0;
    cfg.k_max = 2;
    cfg.seed = seed;
    cfg.populations = {{"interest", 20, 0.7, 0.0}, {"control", 20, 0.0, 0.0}};
    return cfg;
}

phantom_config phantom_config::default_single_fiber(int64_t dim, uint64_t seed) {
    phantom_config cfg;
    cfg.grid = grid3(dim, dim, dim);
    const double mid = static_cast<double>(dim) / 2.0;
    const double lo = 2.0, hi = static_cast<double>(dim) - 2.0;
    cfg.fascicles = {{{{lo, mid, mid}, {hi, mid, mid}}, 6.0, 0.6}};
    cfg.effect.which = effect_region_spec::kind::sphere;
    cfg.effect.center_mm = {mid, mid, mid};
    cfg.effect.radius_mm = 8.0;
    cfg.kappa = 64.0;
    cfg.sigma_mag = 0.05;
    cfg.noise_peak_mda = 0.15;
    cfg.k_max = 2;
    cfg.seed = seed;
    cfg.populations = {{"interest", 20, 0.7, 0.0}, {"control", 20, 0.0, 0.0}};
    return cfg;
}

namespace {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                         const char* where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) throw format_error(std::string("phantom config: unknown key '") + key + "' in " +
                                    where);
    }
}

} // namespace

phantom_config phantom_config::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw format_error("phantom config: invalid JSON");
    phantom_config cfg;
    try {
        reject_unknown_keys(j,
                            {"dims", "voxel_size_mm", "fascicles", "effect_region", "kappa",
                             "sigma_mag", "noise_peak_mda", "k_max", "seed", "populations",
                             "odf_sharpness", "odf_iso_floor"},
                            "phantom");
        const auto dims = j.at("dims").get<std::array<int64_t, 3>>();
        std::array<double, 3> vs = {1.0, 1.0, 1.0};
        if (j.contains("voxel_size_mm")) vs = j.at("voxel_size_mm").get<std::array<double, 3>>();
        cfg.grid = grid3(dims[0], dims[1], dims[2], vs[0], vs[1], vs[2]);
        cfg.fascicles.clear();
        for (const auto& jf : j.at("fascicles")) {
            reject_unknown_keys(jf, {"polyline", "radius_mm", "mda"}, "fascicle");
            fascicle_spec f;
            f.polyline = jf.at("polyline").get<std::vector<vec3>>();
            f.radius_mm = jf.at("radius_mm").get<double>();
            f.mda = jf.at("mda").get<double>();
            cfg.fascicles.push_back(std::move(f));
        }
        if (j.contains("effect_region")) {
            const auto& je = j.at("effect_region");
            if (je.is_string()) {
                if (je.get<std::string>() != "crossing")
                    throw format_error("phantom config: effect_region string must be 'crossing'");
                cfg.effect.which = effect_region_spec::kind::crossing;
            } else {
                reject_unknown_keys(je, {"center_mm", "radius_mm"}, "effect_region");
                cfg.effect.which = effect_region_spec::kind::sphere;
                cfg.effect.center_mm = je.at("center_mm").get<vec3>();
                cfg.effect.radius_mm = je.at("radius_mm").get<double>();
            }
        }
        if (j.contains("kappa")) cfg.kappa = j.at("kappa").get<double>();
        if (j.contains("sigma_mag")) cfg.sigma_mag = j.at("sigma_mag").get<double>();
        if (j.contains("noise_peak_mda")) cfg.noise_peak_mda = j.at("noise_peak_mda").get<double>();
        if (j.contains("k_max")) cfg.k_max = j.at("k_max").get<int>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
        if (j.contains("odf_sharpness")) cfg.odf_sharpness = j.at("odf_sharpness").get<double>();
        if (j.contains("odf_iso_floor")) cfg.odf_iso_floor = j.at("odf_iso_floor").get<double>();
        cfg.populations.clear();
        for (const auto& jp : j.at("populations")) {
            reject_unknown_keys(jp, {"name", "n_pairs", "rho", "offset_deg"}, "population");
            phantom_population p;
            p.name = jp.at("name").get<std::string>();
            p.n_pairs = jp.at("n_pairs").get<int>();
            p.rho = jp.at("rho").get<double>();
            if (jp.contains("offset_deg")) p.offset_deg = jp.at("offset_deg").get<double>();
            cfg.populations.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("phantom config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string phantom_config::to_json() const {
    nlohmann::json j;
    j["dims"] = grid.dims;
    j["voxel_size_mm"] = grid.voxel_size_mm;
    j["fascicles"] = nlohmann::json::array();
    for (const auto& f : fascicles)
        j["fascicles"].push_back(
            {{"polyline", f.polyline}, {"radius_mm", f.radius_mm}, {"mda", f.mda}});
    if (effect.which == effect_region_spec::kind::crossing)
        j["effect_region"] = "crossing";
    else
        j["effect_region"] = {{"center_mm", effect.center_mm}, {"radius_mm", effect.radius_mm}};
    j["kappa"] = kappa;
    j["sigma_mag"] = sigma_mag;
    j["noise_peak_mda"] = noise_peak_mda;
    j["k_max"] = k_max;
    j["seed"] = seed;
    j["odf_sharpness"] = odf_sharpness;
    j["odf_iso_floor"] = odf_iso_floor;
    j["populations"] = nlohmann::json::array();
    for (const auto& p : populations)
        j["populations"].push_back({{"name", p.name},
                                    {"n_pairs", p.n_pairs},
                                    {"rho", p.rho},
                                    {"offset_deg", p.offset_deg}});
    return j.dump(2);
}

phantom_cohort generate_cohort(const phantom_config& cfg, int threads) {
    cfg.validate();
    const geometry geo = build_geometry(cfg);

    phantom_cohort cohort;
    cohort.grid = cfg.grid;
    cohort.wm = geo.wm;
    cohort.truth = geo.truth;
    cohort.peaks = cohort_peaks::create(geo.wm, cfg.k_max);

    // Subjects, manifest rows, and pair bookkeeping.
    uint64_t pair_key = 0;
    const age_bin bins[3] = {age_bin::a22_25, age_bin::a26_30, age_bin::a31_35};
    for (size_t pi = 0; pi < cfg.populations.size(); ++pi) {
        const auto& pop = cfg.populations[pi];
        const bool linked =
            pop.name == "MZ" || pop.name == "DZ" || pop.name == "SIB";
        for (int q = 0; q < pop.n_pairs; ++q, ++pair_key) {
            const std::string pair_id = pop.name + "_" + pad3(q);
            const std::string id_a = pair_id + "_a";
            const std::string id_b = pair_id + "_b";
            const sex s = (q % 2 == 0) ? sex::female : sex::male;
            const age_bin ab = bins[q % 3];

            subject_row ra{id_a, s, ab, "", std::nullopt, ""};
            subject_row rb{id_b, s, ab, "", std::nullopt, ""};
            if (linked) {
                const std::string fam = "fam" + pad3(static_cast<int>(pair_key));
                ra.family_id = rb.family_id = fam;
                ra.rel = rb.rel = relation_from_name(pop.name);
                ra.partner_id = id_b;
                rb.partner_id = id_a;
            } else {
                ra.family_id = "fam" + pad3(static_cast<int>(pair_key)) + "a";
                rb.family_id = "fam" + pad3(static_cast<int>(pair_key)) + "b";
            }
            cohort.manifest.subjects.push_back(ra);
            cohort.manifest.subjects.push_back(rb);
            if (linked) cohort.manifest.pairings.push_back({id_a, id_b, *ra.rel});

            const auto base_index = static_cast<int32_t>(cohort.peaks.subject_ids.size());
            for (int member = 0; member < 2; ++member) {
                const subject_address who{pair_key, member, pop.rho,
                                          pop.offset_deg * M_PI / 180.0};
                std::vector<float> compact(geo.sites.size() * static_cast<size_t>(cfg.k_max) * 3,
                                           0.0f);
                parallel_for(static_cast<int64_t>(geo.sites.size()), resolve_threads(threads),
                             [&](int64_t begin, int64_t end, int) {
                    std::vector<std::array<double, 4>> buf;
                    for (int64_t r = begin; r < end; ++r) {
                        subject_site_peaks(cfg, geo.sites[static_cast<size_t>(r)], who, buf);
                        const size_t base = static_cast<size_t>(r) * cfg.k_max * 3;
                        const size_t n = std::min<size_t>(buf.size(), static_cast<size_t>(cfg.k_max));
                        for (size_t i = 0; i < n; ++i) {
                            compact[base + i * 3 + 0] = static_cast<float>(buf[i][0]);
                            compact[base + i * 3 + 1] = static_cast<float>(buf[i][1]);
                            compact[base + i * 3 + 2] = static_cast<float>(buf[i][2]);
                        }
                    }
                });
                cohort.peaks.subject_ids.push_back(member == 0 ? id_a : id_b);
                cohort.peaks.peaks.push_back(std::move(compact));
            }
            cohort.pairs.push_back({pair_id, pop.name, {base_index, base_index + 1}});
        }
    }
    return cohort;
}

phantom_cohort generate_cohort(phantom_config cfg, int n_pairs_interest, int n_pairs_control,
                               int threads) {
    if (cfg.populations.size() < 2)
        throw domain_error("generate_cohort: config needs interest and control populations");
    cfg.populations[0].n_pairs = n_pairs_interest;
    cfg.populations[1].n_pairs = n_pairs_control;
    return generate_cohort(cfg, threads);
}

std::vector<subject_pair> phantom_cohort::pairs_of_group(const std::string& group) const {
    std::vector<subject_pair> out;
    for (const auto& p : pairs)
        if (p.group == group) out.push_back(p.pair);
    return out;
}

peak_field subject_peak_field(const phantom_cohort& cohort, int32_t subject) {
    peak_field pf(cohort.grid, cohort.peaks.k_max);
    for (size_t r = 0; r < cohort.peaks.voxels.size(); ++r) {
        const int64_t v = cohort.peaks.voxels[r];
        const auto src = cohort.peaks.peaks_at(subject, v);
        auto dst = pf.voxel(v);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return pf;
}

odf_field generate_subject_odf(const phantom_config& cfg, const direction_set& ds,
                               size_t population, int pair, int member) {
    cfg.validate();
    if (population >= cfg.populations.size())
        throw domain_error("generate_subject_odf: population index out of range");
    const auto& pop = cfg.populations[population];
    if (pair < 0 || pair >= pop.n_pairs)
        throw domain_error("generate_subject_odf: pair index out of range");
    uint64_t pair_key = 0;
    for (size_t pi = 0; pi < population; ++pi)
        pair_key += static_cast<uint64_t>(cfg.populations[pi].n_pairs);
    pair_key += static_cast<uint64_t>(pair);

    const geometry geo = build_geometry(cfg);
    const subject_address who{pair_key, member, pop.rho, pop.offset_deg * M_PI / 180.0};

    odf_field field(cfg.grid, ds.size());
    // isotropic floor everywhere; lobes added on fascicle voxels
    const float floor_val = 1.0f;
    for (auto& v : field.values) v = floor_val;

    std::vector<std::array<double, 4>> buf;
    for (const auto& site : geo.sites) {
        subject_site_peaks(cfg, site, who, buf);
        auto vox = field.voxel(site.voxel);
        double wsum = 0.0;
        for (const auto& p : buf) wsum += p[3];
        for (int64_t j = 0; j < ds.size(); ++j) {
            double val = cfg.odf_iso_floor * wsum;
            for (const auto& p : buf) {
                const double mag = p[3];
                if (mag <= 0.0) continue;
                const vec3 d = {p[0] / mag, p[1] / mag, p[2] / mag};
                const double c = dot(d, ds.unit_vectors[static_cast<size_t>(j)]);
                val += mag * std::exp(cfg.odf_sharpness * (c * c - 1.0));
            }
            vox[static_cast<size_t>(j)] = static_cast<float>(val);
        }
    }
    return field;
}

} // namespace dycoh
