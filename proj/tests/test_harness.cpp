// Harness-layer tests: configuration parsing and overrides, profile CSV
// round trips, comparison metrics, and byte-level determinism of the full
// pipeline's artifacts on a miniature configuration.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fpflow/config.hpp"
#include "fpflow/csv_io.hpp"
#include "fpflow/pipeline.hpp"

using namespace fpflow;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("fpflow_harness_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::map<std::string, std::string> slurp_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        out[entry.path().filename().string()] = slurp(entry.path());
    return out;
}

bool same_run_config(const RunConfig& a, const RunConfig& b) {
    return a.d == b.d && a.eps == b.eps && a.m == b.m && a.coeff_h == b.coeff_h &&
           a.coeff_circle_segments == b.coeff_circle_segments && a.decay_tol == b.decay_tol &&
           a.macro_h == b.macro_h && a.alpha == b.alpha && a.lid_velocity == b.lid_velocity &&
           a.bottom_pressure == b.bottom_pressure && a.pore_h_porous == b.pore_h_porous &&
           a.pore_h_free == b.pore_h_free && a.pore_circle_segments == b.pore_circle_segments &&
           a.n_samples == b.n_samples && a.workers == b.workers &&
           a.samples_per_line == b.samples_per_line && a.section_x2 == b.section_x2 &&
           a.section_x1 == b.section_x1 && a.out_dir == b.out_dir;
}

ProfileSet sample_set() {
    ProfileSet set;
    set.section = {CrossSection::Axis::vertical, 0.7};
    set.s = {-0.375, -0.125, 0.125, 0.375};
    set.count = {1, 0, 2, 1};
    set.add("v1", {1.0 / 3.0, 7.25, -1.0e-30, 0.0});
    set.add("v2", {-0.125, 3.0, 4.0, 5.0e12});
    set.add("p", {0.1 + 0.2, -9.81, 2.0, std::acos(-1.0)});
    return set;
}

}  // namespace

TEST_CASE("configuration files: sections, dotted keys, comments, trimming") {
    std::istringstream in(
        "# leading comment\n"
        "pore.workers = 3\n"
        "[macro]\n"
        "h = 0.03125   ; trailing comment\n"
        "  alpha=2.5\n"
        "[output]\n"
        "dir = runs/a=b\n");
    const Config cfg = Config::parse(in, "<test>");
    CHECK(cfg.get_double("macro.h", 0.0) == 0.03125);
    CHECK(cfg.get_double("macro.alpha", 0.0) == 2.5);
    CHECK(cfg.get_int("pore.workers", 0) == 3);
    // values keep everything after the first '='
    CHECK(cfg.get_string("output.dir", "") == "runs/a=b");
    CHECK(cfg.has("macro.h"));
    CHECK(!cfg.has("macro.missing"));
    CHECK(cfg.get_double("macro.missing", 1.5) == 1.5);
}

TEST_CASE("configuration files: malformed input is rejected with location info") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return Config::parse(in, "bad.cfg");
    };
    CHECK_THROWS_AS(parse("just a token\n"), std::runtime_error);
    CHECK_THROWS_AS(parse("[unterminated\n"), std::runtime_error);
    CHECK_THROWS_AS(parse("= value without key\n"), std::runtime_error);
    try {
        parse("ok = 1\nbroken line\n");
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
    }
    const Config cfg = parse("macro.h = fast\n");
    CHECK_THROWS_AS(cfg.get_double("macro.h", 0.0), std::runtime_error);
    CHECK_THROWS_AS(cfg.get_int("macro.h", 0), std::runtime_error);
}

TEST_CASE("configuration overrides apply key=value assignments") {
    Config cfg;
    cfg.set_override("macro.alpha = 2");
    CHECK(cfg.get_double("macro.alpha", 0.0) == 2.0);
    CHECK_THROWS_AS(cfg.set_override("no equals sign"), std::runtime_error);
    CHECK_THROWS_AS(cfg.set_override("=3"), std::runtime_error);
}

TEST_CASE("run configuration: defaults, unknown keys, validation") {
    const RunConfig defaults = RunConfig::from_config(Config{});
    CHECK(same_run_config(defaults, RunConfig{}));

    Config unknown;
    unknown.set("macro.hh", "0.1");
    try {
        RunConfig::from_config(unknown);
        FAIL("expected rejection of the unknown key");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("macro.hh") != std::string::npos);
    }

    Config bad;
    bad.set("coefficients.m", "1");
    CHECK_THROWS_AS(RunConfig::from_config(bad), std::runtime_error);
    Config bad2;
    bad2.set("geometry.d", "1.5");
    CHECK_THROWS_AS(RunConfig::from_config(bad2), std::runtime_error);
}

TEST_CASE("run configuration round-trips exactly through its file form") {
    RunConfig rc;
    rc.d = 0.45;
    rc.eps = 0.0625;
    rc.m = 5;
    rc.coeff_h = 0.075;
    rc.decay_tol = 2.5e-7;
    rc.macro_h = 1.0 / 64.0;
    rc.alpha = 1.75;
    rc.n_samples = 9;
    rc.section_x1 = 0.7;
    rc.out_dir = "runs/base";
    std::ostringstream os;
    rc.to_config().write(os);
    std::istringstream in(os.str());
    const RunConfig back = RunConfig::from_config(Config::parse(in, "<roundtrip>"));
    CHECK(same_run_config(rc, back));
}

TEST_CASE("cross-section labels name artifact files") {
    CHECK(CrossSection{CrossSection::Axis::horizontal, 0.0}.label() == "x2_0");
    CHECK(CrossSection{CrossSection::Axis::vertical, 0.7}.label() == "x1_0p7");
    CHECK(CrossSection{CrossSection::Axis::vertical, -0.25}.label() == "x1_-0p25");
}

TEST_CASE("profile CSV writing round-trips every sample bit-exactly") {
    const fs::path dir = fresh_dir("csv");
    const ProfileSet set = sample_set();
    const std::string path = (dir / "set.csv").string();
    write_profile_csv(path, set);
    const ProfileSet back = read_profile_csv(path);
    CHECK(back.section.axis == set.section.axis);
    CHECK(back.section.coord == set.section.coord);
    REQUIRE(back.quantities == set.quantities);
    REQUIRE(back.s.size() == set.s.size());
    for (std::size_t i = 0; i < set.s.size(); ++i) {
        CHECK(back.s[i] == set.s[i]);
        CHECK(back.count[i] == set.count[i]);
        for (std::size_t k = 0; k < set.quantities.size(); ++k)
            CHECK(back.values[k][i] == set.values[k][i]);
    }
    fs::remove_all(dir);
}

TEST_CASE("profile CSV reader rejects malformed files") {
    const fs::path dir = fresh_dir("csv_bad");
    auto write_text = [&](const std::string& name, const std::string& text) {
        std::ofstream os(dir / name);
        os << text;
        return (dir / name).string();
    };
    CHECK_THROWS_AS(read_profile_csv((dir / "missing.csv").string()), std::runtime_error);
    CHECK_THROWS_AS(read_profile_csv(write_text("no_header.csv", "s,v1,count\n0,1,1\n")),
                    std::runtime_error);
    CHECK_THROWS_AS(
        read_profile_csv(write_text("short_row.csv",
                                    "# section,horizontal,0\ns,v1,count\n0.5,1\n")),
        std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("profile comparison metrics on hand-built profiles") {
    const ProfileSet set = sample_set();
    const Profile v1 = set.get("v1");
    CHECK_THROWS_AS(set.get("nope"), std::invalid_argument);

    const ProfileMetrics self = compare_profiles(v1, v1);
    CHECK(self.rel_l2 == 0.0);
    CHECK(self.max_abs == 0.0);
    CHECK(self.n_used == 3);  // one sample is masked

    Profile doubled = v1;
    for (double& v : doubled.value) v *= 2.0;
    CHECK(compare_profiles(doubled, v1).rel_l2 == doctest::Approx(1.0).epsilon(1e-12));

    // masked entries must not contribute
    Profile poisoned = v1;
    poisoned.value[1] = 1e300;
    CHECK(compare_profiles(poisoned, v1).rel_l2 == 0.0);

    Profile shifted = v1;
    shifted.s[2] += 1e-6;
    CHECK_THROWS_AS(compare_profiles(shifted, v1), std::invalid_argument);
    Profile other_section = v1;
    other_section.section.coord = 0.2;
    CHECK_THROWS_AS(compare_profiles(other_section, v1), std::invalid_argument);
}

TEST_CASE("total variation sums absolute jumps over the unmasked samples") {
    Profile p;
    p.quantity = "v1";
    p.s = {0.0, 1.0, 2.0, 3.0};
    p.value = {1.0, 3.0, 2.0, 2.0};
    p.count = {1, 1, 1, 1};
    CHECK(total_variation(p) == doctest::Approx(3.0));
    p.count[1] = 0;  // masked: the jump 1 -> 2 remains
    CHECK(total_variation(p) == doctest::Approx(1.0));
}

TEST_CASE("pipeline artifacts are byte-identical across repeated runs") {
    RunConfig rc;
    rc.m = 2;
    rc.coeff_h = 0.1;
    rc.coeff_circle_segments = 16;
    rc.decay_tol = 0.1;  // the miniature stripe has not decayed yet
    rc.macro_h = 1.0 / 16.0;
    rc.pore_h_porous = 0.04;
    rc.pore_h_free = 0.06;
    rc.pore_circle_segments = 8;
    rc.n_samples = 2;
    rc.workers = 2;
    rc.samples_per_line = 50;
    const fs::path dir = fresh_dir("pipeline");
    rc.out_dir = dir.string();

    const PipelineResult first = run_pipeline(rc);
    REQUIRE(first.scores.size() == 3);
    CHECK(first.macro_profiles.size() == 3);
    CHECK(first.ensemble.members.size() == 2);
    const auto files = slurp_dir(dir);
    CHECK(files.count("report.txt") == 1);
    CHECK(files.count("coefficients.txt") == 1);
    CHECK(files.count("ensemble_manifest.txt") == 1);
    CHECK(files.count("profile_higher_order_x2_0.csv") == 1);
    CHECK(files.count("profile_pore_mean_x1_0p7.csv") == 1);
    CHECK(files.count("profile_pore_member01_x2_0.csv") == 1);

    const PipelineResult second = run_pipeline(rc);  // same directory, overwrites
    const auto files2 = slurp_dir(dir);
    REQUIRE(files.size() == files2.size());
    for (const auto& [name, bytes] : files) {
        REQUIRE(files2.count(name) == 1);
        CHECK_MESSAGE(files2.at(name) == bytes, "artifact differs between runs: ", name);
    }
    CHECK(first.report == second.report);
    fs::remove_all(dir);
}
