#include "doctest.h"
#include "linkfp/errors.hpp"
#include "linkfp/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace linkfp;
namespace fs = std::filesystem;

namespace {

const std::string kStockProfiles = std::string(LINKFP_ASSET_DIR) + "/victims8.profiles";
const std::string kStockConfig = std::string(LINKFP_ASSET_DIR) + "/stock.cfg";

// Small fast scenario: 3 distinct classes, forest only.
ExperimentConfig small_config(const std::string& profiles_path) {
    ExperimentConfig cfg;
    cfg.profiles_path = profiles_path;
    cfg.traces_per_class = 12;
    cfg.probe.buffer_num = 40;
    cfg.probe.repeat_num = 5;
    cfg.models = {ModelKind::Forest};
    cfg.seed = 4242;
    cfg.jobs = 2;
    return cfg;
}

std::string write_profiles(const std::string& name, const std::string& body) {
    const std::string path = "/tmp/linkfp_harness_" + name + ".profiles";
    std::ofstream out(path);
    out << body;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("separability control: two distinct noise-free profiles classify perfectly") {
    const std::string path = write_profiles("distinct",
                                            "[profile]\n"
                                            "name = slow\ncode = S\nphase = 64000,12000,0\n"
                                            "[profile]\n"
                                            "name = fast\ncode = Q\nphase = 1600,400,0\n");
    ExperimentConfig cfg = small_config(path);
    cfg.link.noise_sigma_rel = 0.0;
    const Report report = run_closed_world(cfg);
    CHECK(report.per_model.at("forest").accuracy == 1.0);
}

TEST_CASE("chance-level control: identical profiles score near 1/n") {
    std::string body;
    for (int i = 0; i < 4; ++i) {
        body += "[profile]\nname = clone" + std::to_string(i) + "\ncode = X" +
                std::to_string(i) + "\nphase = 15040,5320,0.05\n";
    }
    ExperimentConfig cfg = small_config(write_profiles("identical", body));
    cfg.traces_per_class = 15;
    const Report report = run_closed_world(cfg);
    const double accuracy = report.per_model.at("forest").accuracy;
    CHECK(accuracy > 0.25 - 0.18);
    CHECK(accuracy < 0.25 + 0.18);
}

TEST_CASE("single-class scenario surfaces the degenerate-model error") {
    const std::string path = write_profiles("single",
                                            "[profile]\n"
                                            "name = only\ncode = O\nphase = 8000,2000,0\n");
    CHECK_THROWS_AS(run_closed_world(small_config(path)), ValidationError);
}

TEST_CASE("open-world with zero unknowns reduces to binary closed-world") {
    ExperimentConfig cfg = small_config(kStockProfiles);
    cfg.traces_per_class = 8;
    cfg.probe.buffer_num = 30;
    cfg.open_target = "F";
    cfg.open_unknown = 0;
    cfg.repetitions = 2;
    cfg.scenario = Scenario::Open;
    const Report report = run_open_world(cfg);
    REQUIRE(report.open_world.size() == 1);
    CHECK(report.open_world[0].target == "F");
    CHECK(report.open_world[0].unknown_count == 0);
    REQUIRE(report.open_world[0].per_repetition.size() == 2);
    // no unknown draw -> every repetition trains on the same data
    CHECK(report.open_world[0].per_repetition[0] ==
          doctest::Approx(report.open_world[0].per_repetition[1]));
}

TEST_CASE("open-world validates the target and the unknown count") {
    ExperimentConfig cfg = small_config(kStockProfiles);
    cfg.scenario = Scenario::Open;
    cfg.open_target = "ZZ";
    CHECK_THROWS_AS(run_open_world(cfg), ValidationError);
    cfg.open_target = "F";
    cfg.open_unknown = 8;  // only 7 non-target classes exist
    CHECK_THROWS_AS(run_open_world(cfg), ValidationError);
}

TEST_CASE("single-value sweep produces a one-point curve") {
    ExperimentConfig cfg = small_config(kStockProfiles);
    cfg.scenario = Scenario::Sweep;
    cfg.sweep_axis = SweepAxis::BufferSize;
    cfg.sweep_values = {4};
    cfg.repetitions = 2;
    cfg.traces_per_class = 6;
    cfg.probe.buffer_num = 25;
    const Report report = run_sweep(cfg);
    REQUIRE(report.sweep.has_value());
    CHECK(report.sweep->points.size() == 1);
    CHECK(report.sweep->points[0].axis_value == 4);
    CHECK(report.config_echo["sweep"]["fixed_params_are_defaults"] == true);
}

TEST_CASE("sweep validates axis values") {
    ExperimentConfig cfg = small_config(kStockProfiles);
    cfg.scenario = Scenario::Sweep;
    cfg.sweep_values = {10, 10};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.sweep_values = {-1};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("emit_report writes the deterministic file set") {
    ExperimentConfig cfg = small_config(kStockProfiles);
    cfg.traces_per_class = 8;
    cfg.probe.buffer_num = 30;

    const Report report = run_closed_world(cfg);
    const std::string dir1 = "/tmp/linkfp_report_a", dir2 = "/tmp/linkfp_report_b";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    emit_report(report, dir1);

    CHECK(fs::exists(fs::path(dir1) / "report.json"));
    CHECK(fs::exists(fs::path(dir1) / "confusion.csv"));
    CHECK(fs::exists(fs::path(dir1) / "confusion_forest.csv"));

    // 8 stock classes: header line plus 8 rows of 1 + 8 cells
    const std::string confusion = slurp(fs::path(dir1) / "confusion.csv");
    CHECK(std::count(confusion.begin(), confusion.end(), '\n') == 9);
    CHECK(std::count(confusion.begin(), confusion.end(), ',') == 9 * 8);

    // identical run -> byte-identical files
    const Report again = run_closed_world(cfg);
    emit_report(again, dir2);
    for (const char* file : {"report.json", "confusion.csv", "cv.csv"}) {
        if (!fs::exists(fs::path(dir1) / file)) continue;
        INFO(file);
        CHECK(slurp(fs::path(dir1) / file) == slurp(fs::path(dir2) / file));
    }
}

TEST_CASE("sweep report emits one curve row per value and model") {
    ExperimentConfig cfg = small_config(kStockProfiles);
    cfg.scenario = Scenario::Sweep;
    cfg.sweep_axis = SweepAxis::RepeatNum;
    cfg.sweep_values = {1, 5};
    cfg.repetitions = 2;
    cfg.traces_per_class = 6;
    cfg.probe.buffer_num = 25;
    const Report report = run_sweep(cfg);
    const std::string dir = "/tmp/linkfp_report_sweep";
    fs::remove_all(dir);
    emit_report(report, dir);
    const std::string curves = slurp(fs::path(dir) / "curves.csv");
    CHECK(std::count(curves.begin(), curves.end(), '\n') == 1 + 2 * 1);  // header + rows
    CHECK(fs::exists(fs::path(dir) / "curves.svg"));
}

TEST_CASE("config file loading and flag-style overrides") {
    const KvFile file = KvFile::parse_file(kStockConfig);
    ExperimentConfig base;
    const ExperimentConfig cfg = apply_config_file(base, file);
    CHECK(cfg.link.capacity_bytes_per_us == 8.0);
    CHECK(cfg.link.launch_overhead_us == 50.0);
    CHECK(cfg.link.noise_sigma_rel == 0.08);
    CHECK(cfg.probe.access_num == 1000);
    CHECK(cfg.probe.repeat_num == 10);
    CHECK(cfg.probe.buffer_size_bytes == 4);
    CHECK(cfg.probe.buffer_num == 100);
    CHECK(cfg.traces_per_class == 50);
    CHECK(cfg.models.size() == 4);
    CHECK(cfg.seed == 42);
    CHECK(cfg.repetitions == 5);
    CHECK(cfg.open_target == "all");
    CHECK(cfg.open_unknown == 4);

    const KvFile bad = KvFile::parse_string("[link]\nwarp-factor = 9\n", "bad.cfg");
    CHECK_THROWS_AS(apply_config_file(base, bad), ParseError);
}

TEST_CASE("experiment echo captures the configuration and derived seeds") {
    ExperimentConfig cfg = small_config(kStockProfiles);
    const nlohmann::json echo = cfg.echo();
    CHECK(echo["seed"] == 4242);
    CHECK(echo["probe"]["access_num"] == 1000);
    CHECK(echo["seeds"].contains("corpus"));
    CHECK(echo["seeds"].contains("split"));
    CHECK(echo["scenario"] == "closed");
}
