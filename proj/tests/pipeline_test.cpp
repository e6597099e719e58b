#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "blueprint/config.hpp"
#include "blueprint/fixture.hpp"
#include "blueprint/image_io.hpp"
#include "blueprint/pipeline.hpp"

using namespace bp;
namespace fs = std::filesystem;

namespace {

std::string source_dir() {
    const char* d = std::getenv("BP_SOURCE_DIR");
    REQUIRE(d != nullptr);
    return d;
}

fs::path scratch_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_replica_png(const fs::path& dir) {
    std::ifstream in(source_dir() + "/share/replica.json");
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    FixtureResult fx = generate_fixture(fixture_spec_from_json(j));
    const std::string path = (dir / "replica.png").string();
    save_image(fx.image, path);
    return path;
}

}  // namespace

TEST_CASE("replica runs clean end to end") {
    const fs::path dir = scratch_dir("bp_pipe_replica");
    const std::string png = write_replica_png(dir);
    PipelineConfig cfg;
    cfg.output_dir = dir.string();
    BlueprintReport rep = run_pipeline(cfg, png);
    CHECK(rep.skipped.empty());
    REQUIRE(rep.calibration.has_value());
    CHECK(rep.calibration->mm_per_pixel == doctest::Approx(25.8).epsilon(0.02));
    CHECK(rep.rooms.size() == 6);
    REQUIRE(rep.total_area_m2.has_value());
    CHECK(*rep.total_area_m2 == doctest::Approx(54.1).epsilon(0.002));
    int verified = 0;
    for (const auto& r : rep.rooms) {
        if (r.verification == Verification::Verified) ++verified;
    }
    CHECK(verified == 6);
    CHECK(report_exit_code(rep) == 0);
    fs::remove_all(dir);
}

TEST_CASE("missing ruler degrades calibration instead of aborting") {
    const fs::path dir = scratch_dir("bp_pipe_noruler");
    FixtureSpec spec;
    spec.canvas_width = 400;
    spec.canvas_height = 300;
    FixtureRoomSpec room;
    room.interior = BoundingBox{60, 60, 300, 240};
    room.area_label = false;
    spec.rooms.push_back(room);
    FixtureResult fx = generate_fixture(spec);
    const std::string png = (dir / "plain.png").string();
    save_image(fx.image, png);

    PipelineConfig cfg;
    cfg.output_dir = dir.string();
    BlueprintReport rep = run_pipeline(cfg, png);
    CHECK(rep.skipped.count("calibration") == 1);
    CHECK_FALSE(rep.calibration.has_value());
    CHECK_FALSE(rep.total_area_m2.has_value());
    REQUIRE(rep.rooms.size() == 1);
    CHECK_FALSE(rep.rooms[0].area_computed_m2.has_value());
    CHECK(rep.rooms[0].pixel_count > 0);
    CHECK(report_exit_code(rep) == 2);
    fs::remove_all(dir);
}

TEST_CASE("scale override bypasses the ruler") {
    const fs::path dir = scratch_dir("bp_pipe_override");
    FixtureSpec spec;
    spec.canvas_width = 400;
    spec.canvas_height = 300;
    FixtureRoomSpec room;
    room.interior = BoundingBox{60, 60, 300, 240};
    room.area_label = false;
    spec.rooms.push_back(room);
    FixtureResult fx = generate_fixture(spec);
    const std::string png = (dir / "plain.png").string();
    save_image(fx.image, png);

    PipelineConfig cfg;
    cfg.output_dir = dir.string();
    cfg.scale_override = 10.0;
    BlueprintReport rep = run_pipeline(cfg, png);
    CHECK(rep.skipped.empty());
    REQUIRE(rep.calibration.has_value());
    CHECK(rep.calibration->mm_per_pixel == doctest::Approx(10.0));
    CHECK(rep.calibration->source == ScaleCalibration::Source::Override);
    REQUIRE(rep.rooms.size() == 1);
    // 244x184 enclosed at 10 mm/px -> 4.4896 m2
    CHECK(*rep.rooms[0].area_computed_m2 == doctest::Approx(4.5).epsilon(0.03));
    fs::remove_all(dir);
}

TEST_CASE("two runs are byte-identical up to timings") {
    const fs::path dir = scratch_dir("bp_pipe_det");
    const std::string png = write_replica_png(dir);
    PipelineConfig cfg;
    cfg.output_dir = dir.string();
    BlueprintReport a = run_pipeline(cfg, png);
    BlueprintReport b = run_pipeline(cfg, png);
    CHECK(report_to_stable_string(a) == report_to_stable_string(b));
    fs::remove_all(dir);
}

TEST_CASE("run_and_write produces the report and the overlays") {
    const fs::path dir = scratch_dir("bp_pipe_write");
    const std::string png = write_replica_png(dir);
    PipelineConfig cfg;
    cfg.output_dir = dir.string();
    BlueprintReport rep = run_and_write(cfg, png);
    CHECK(fs::exists(dir / "replica.report.json"));
    CHECK(fs::exists(dir / "replica.rooms.png"));
    CHECK(fs::exists(dir / "replica.detections.png"));

    std::ifstream in(dir / "replica.report.json");
    nlohmann::json j;
    in >> j;
    BlueprintReport back = report_from_json(j);
    CHECK(report_to_stable_string(back) == report_to_stable_string(rep));

    RasterImage overlay = load_image((dir / "replica.rooms.png").string());
    CHECK(overlay.width == 860);
    CHECK(overlay.channels == 3);
    fs::remove_all(dir);
}

TEST_CASE("save_intermediates writes the stage images") {
    const fs::path dir = scratch_dir("bp_pipe_inter");
    const std::string png = write_replica_png(dir);
    PipelineConfig cfg;
    cfg.output_dir = dir.string();
    cfg.save_intermediates = true;
    run_pipeline(cfg, png);
    for (const char* stage : {"gray", "cleaned", "edges", "walls", "walls_closed", "labels"}) {
        CHECK(fs::exists(dir / (std::string("replica.") + stage + ".png")));
    }
    fs::remove_all(dir);
}

TEST_CASE("unreadable input throws") {
    PipelineConfig cfg;
    CHECK_THROWS_AS(run_pipeline(cfg, "/nonexistent/plan.png"), Error);
}

TEST_CASE("config json round-trips and applies overrides") {
    PipelineConfig cfg;
    cfg.scale_override = 12.5;
    cfg.template_dir = "/tmp/tpl";
    cfg.verify_tolerance = 0.1;
    cfg.risk = RiskInputs{0.01, 1e6, 0.4, 0.701};
    nlohmann::json j = config_to_json(cfg);
    PipelineConfig back = config_from_json(j);
    CHECK(back.scale_override == cfg.scale_override);
    CHECK(back.template_dir == cfg.template_dir);
    CHECK(back.verify_tolerance == cfg.verify_tolerance);
    REQUIRE(back.risk.has_value());
    CHECK(back.risk->sprinkler_effectiveness == doctest::Approx(0.701));
    CHECK(config_from_json(nlohmann::json::object()).verify_tolerance ==
          doctest::Approx(0.05));
}

TEST_CASE("invalid config values are rejected") {
    nlohmann::json bad = {{"risk",
                           {{"probability", 0.5},
                            {"exposure", 100.0},
                            {"vulnerability", 0.3},
                            {"sprinkler_effectiveness", 0.5}}}};
    CHECK_THROWS_AS(config_from_json(bad), Error);
    nlohmann::json conn = {{"segmentation", {{"connectivity", 6}}}};
    CHECK_THROWS_AS(config_from_json(conn), Error);
}
