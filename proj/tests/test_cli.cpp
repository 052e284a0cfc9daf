// End-to-end checks of the dycoh binary. argv[1] is the tool path; work
// happens in a scratch directory under the system temp dir.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string g_tool;
fs::path g_work;
int g_failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("%s %s\n", ok ? "[ok]  " : "[FAIL]", what.c_str());
    if (!ok) ++g_failures;
}

int run(const std::string& args, const std::string& stderr_file = "") {
    std::string cmd = g_tool + " " + args + " >/dev/null";
    cmd += stderr_file.empty() ? " 2>/dev/null" : " 2>" + stderr_file;
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: dycoh_cli_tests <path-to-dycoh>\n");
        return 2;
    }
    g_tool = argv[1];
    g_work = fs::temp_directory_path() / "dycoh_cli_test";
    fs::remove_all(g_work);
    fs::create_directories(g_work);
    const std::string W = g_work.string();

    // --- error contract: missing input gives exit 2 and JSON naming the path
    {
        const std::string err_file = W + "/err.json";
        const int rc = run("screen --peaks-dir " + W + "/nope --mask " + W +
                               "/missing.dycoh --pairs " + W + "/nope.csv --out " + W + "/o",
                           err_file);
        const std::string err = slurp(err_file);
        check(rc == 2, "missing input exits with code 2");
        check(err.find("missing.dycoh") != std::string::npos, "error JSON names the path");
        check(err.find("\"error\"") != std::string::npos, "stderr is machine-readable JSON");
    }

    // --- unknown config keys are rejected before any compute
    {
        write_file(g_work / "bad.json", "{\"pthreshh\": 0.5}");
        const std::string err_file = W + "/err2.json";
        const int rc =
            run("phantom --config " + W + "/bad.json --out " + W + "/p0", err_file);
        check(rc == 2, "unknown config key exits with code 2");
        check(slurp(err_file).find("pthreshh") != std::string::npos,
              "error JSON names the unknown key");
    }

    // --- sphere export
    {
        const int rc = run("sphere --level 2 --out " + W + "/dirs2.json");
        check(rc == 0, "sphere subcommand succeeds");
        check(slurp(g_work / "dirs2.json").find("unit_vectors") != std::string::npos,
              "direction set JSON written");
    }

    // --- small phantom with ODF rendering, then the full pipeline
    {
        write_file(g_work / "cfg.json", R"({
  "seed": 77,
  "pthresh": 0.001,
  "phantom": {
    "dims": [14, 14, 14],
    "fascicles": [
      {"polyline": [[1.5, 7, 7], [12.5, 7, 7]], "radius_mm": 2.5, "mda": 0.6},
      {"polyline": [[7, 1.5, 7], [7, 12.5, 7]], "radius_mm": 2.5, "mda": 0.5}
    ],
    "kappa": 64.0, "sigma_mag": 0.05, "k_max": 2, "seed": 77,
    "populations": [
      {"name": "interest", "n_pairs": 8, "rho": 0.8},
      {"name": "control", "n_pairs": 8, "rho": 0.0}
    ]
  }
})");
        int rc = run("phantom --config " + W + "/cfg.json --out " + W + "/run --odf");
        check(rc == 0, "phantom generation succeeds");
        check(fs::exists(g_work / "run/odf"), "ODF volumes rendered");

        rc = run("extract --odf-dir " + W + "/run/odf --directions " + W +
                 "/run/directions.json --mask " + W + "/run/mask.dycoh --peaks 2 --out " + W +
                 "/run/extracted");
        check(rc == 0, "extract succeeds on rendered ODFs");

        rc = run("screen --peaks-dir " + W + "/run/extracted --mask " + W +
                 "/run/mask.dycoh --pairs " + W + "/run/pairs.csv --config " + W +
                 "/cfg.json --out " + W + "/run");
        check(rc == 0, "screen succeeds on extracted peaks");

        rc = run("regions --screen-dir " + W + "/run --mask " + W +
                 "/run/mask.dycoh --min-voxels 2 --out " + W + "/run");
        check(rc == 0, "regions succeeds");

        rc = run("similarity --peaks-dir " + W + "/run/extracted --mask " + W +
                 "/run/mask.dycoh --regions-dir " + W + "/run --pairs " + W +
                 "/run/pairs.csv --holdout-group control --out " + W + "/run");
        check(rc == 0, "similarity succeeds");

        rc = run("report --run " + W + "/run --out " + W + "/run/report.json --svg");
        check(rc == 0, "report succeeds");
        const std::string report = slurp(g_work / "run/report.json");
        check(report.find("dice_top_region_vs_truth") != std::string::npos,
              "report contains Dice against ground truth");
        check(fs::exists(g_work / "run/report.svg"), "SVG histograms written");

        // the screen found the planted effect even through the ODF path
        check(report.find("\"n_significant\": 0,") == std::string::npos,
              "ODF-path screening finds significant dyads");
    }

    // --- stranger sampling from the phantom manifest
    {
        // phantom populations named MZ/DZ are linked in the manifest
        write_file(g_work / "cfg2.json", R"({
  "phantom": {
    "dims": [10, 10, 10],
    "fascicles": [{"polyline": [[1.5, 5, 5], [8.5, 5, 5]], "radius_mm": 2.0, "mda": 0.6}],
    "effect_region": {"center_mm": [5, 5, 5], "radius_mm": 2.0},
    "k_max": 1, "seed": 3,
    "populations": [
      {"name": "MZ", "n_pairs": 6, "rho": 0.8},
      {"name": "DZ", "n_pairs": 6, "rho": 0.5}
    ]
  }
})");
        int rc = run("phantom --config " + W + "/cfg2.json --out " + W + "/run2");
        check(rc == 0, "linked-relation phantom succeeds");
        rc = run("strangers --manifest " + W + "/run2/manifest.csv --target MZ,DZ --seed 9 --out " +
                 W + "/run2/strangers.csv --pairs-out " + W + "/run2/stranger_pairs.csv");
        check(rc == 0, "strangers subcommand succeeds");
        const std::string head = slurp(g_work / "run2/strangers.csv").substr(0, 17);
        check(head == "id_a,id_b,stratum", "control pairing CSV has the documented header");

        // same seed reproduces the same file
        rc = run("strangers --manifest " + W + "/run2/manifest.csv --target MZ,DZ --seed 9 --out " +
                 W + "/run2/strangers_again.csv");
        check(rc == 0 && same_bytes(g_work / "run2/strangers.csv",
                                    g_work / "run2/strangers_again.csv"),
              "stranger sampling deterministic in the seed");
    }

    // --- byte-identical stage re-runs
    {
        int rc = run("screen --peaks-dir " + W + "/run/extracted --mask " + W +
                     "/run/mask.dycoh --pairs " + W + "/run/pairs.csv --config " + W +
                     "/cfg.json --threads 3 --out " + W + "/rerun");
        check(rc == 0, "screen re-run succeeds");
        check(same_bytes(g_work / "run/dyads.csv", g_work / "rerun/dyads.csv"),
              "screen output byte-identical across re-runs and thread counts");
    }

    std::printf("%s\n", g_failures == 0 ? "ALL CLI CHECKS PASSED" : "CLI CHECKS FAILED");
    return g_failures == 0 ? 0 : 1;
}
