#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "blueprint/fixture.hpp"

using namespace bp;

namespace {

std::string source_dir() {
    const char* d = std::getenv("BP_SOURCE_DIR");
    REQUIRE(d != nullptr);
    return d;
}

FixtureSpec load_replica_spec() {
    std::ifstream in(source_dir() + "/share/replica.json");
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    return fixture_spec_from_json(j);
}

}  // namespace

TEST_CASE("replica ground truth carries the six target areas") {
    FixtureResult fx = generate_fixture(load_replica_spec());
    const auto& rooms = fx.ground_truth.at("rooms");
    REQUIRE(rooms.size() == 6);
    std::vector<double> areas;
    for (const auto& r : rooms) areas.push_back(r.at("area_m2").get<double>());
    std::sort(areas.begin(), areas.end());
    const std::vector<double> want = {2.8, 4.0, 6.4, 10.1, 12.8, 18.0};
    REQUIRE(areas.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(areas[i] == doctest::Approx(want[i]));
    }
    CHECK(fx.ground_truth.at("total_area_m2").get<double>() == doctest::Approx(54.1));
    CHECK(fx.ground_truth.at("room_count").get<int>() == 6);
}

TEST_CASE("generation is deterministic") {
    FixtureSpec spec = load_replica_spec();
    FixtureResult a = generate_fixture(spec);
    FixtureResult b = generate_fixture(spec);
    CHECK(a.image == b.image);
    CHECK(a.ground_truth == b.ground_truth);
}

TEST_CASE("pixel counts follow the enclosed-to-centerline geometry") {
    FixtureSpec spec;
    spec.canvas_width = 300;
    spec.canvas_height = 200;
    spec.wall_thickness = 5;
    FixtureRoomSpec room;
    room.interior = BoundingBox{50, 50, 130, 110};  // 80x60 interior
    room.area_label = false;
    spec.rooms.push_back(room);
    FixtureResult fx = generate_fixture(spec);
    const auto& gt = fx.ground_truth.at("rooms").at(0);
    CHECK(gt.at("pixel_count").get<long long>() == (80 + 4) * (60 + 4));
}

TEST_CASE("ground truth token boxes match rendered ink") {
    FixtureSpec spec;
    spec.canvas_width = 400;
    spec.canvas_height = 300;
    FixtureRoomSpec room;
    room.interior = BoundingBox{60, 60, 260, 220};
    room.function = "KITCHEN";
    room.position = "3";
    spec.rooms.push_back(room);
    FixtureResult fx = generate_fixture(spec);
    REQUIRE(fx.ground_truth.contains("tokens"));
    bool saw_function = false;
    for (const auto& t : fx.ground_truth.at("tokens")) {
        const auto& b = t.at("box");
        BoundingBox box{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
        REQUIRE(box.valid());
        // the box is tight: ink on the border rows/columns, none just outside
        bool ink = false;
        for (int x = box.x0; x < box.x1; ++x) ink |= fx.image.at(x, box.y0) < 128;
        CHECK(ink);
        if (t.at("text").get<std::string>() == "KITCHEN") saw_function = true;
    }
    CHECK(saw_function);
}

TEST_CASE("overlapping rooms are rejected") {
    FixtureSpec spec;
    spec.canvas_width = 300;
    spec.canvas_height = 300;
    for (int i = 0; i < 2; ++i) {
        FixtureRoomSpec room;
        room.interior = BoundingBox{50, 50, 150, 150};
        room.area_label = false;
        spec.rooms.push_back(room);
    }
    CHECK_THROWS_AS(generate_fixture(spec), Error);
    try {
        generate_fixture(spec);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidSpec);
    }
}

TEST_CASE("out-of-canvas rooms are rejected") {
    FixtureSpec spec;
    spec.canvas_width = 120;
    spec.canvas_height = 120;
    FixtureRoomSpec room;
    room.interior = BoundingBox{50, 50, 200, 200};
    spec.rooms.push_back(room);
    CHECK_THROWS_AS(generate_fixture(spec), Error);
}

TEST_CASE("target areas honor the scale and rounding") {
    FixtureSpec spec;
    spec.canvas_width = 500;
    spec.canvas_height = 400;
    spec.scale_mm_per_pixel = 25.8;
    FixtureRoomSpec room;
    room.target_area_m2 = 7.3;
    room.area_label = false;
    spec.rooms.push_back(room);
    FixtureResult fx = generate_fixture(spec);
    const auto& gt = fx.ground_truth.at("rooms").at(0);
    CHECK(gt.at("area_m2").get<double>() == doctest::Approx(7.3));
    const long long px = gt.at("pixel_count").get<long long>();
    const double unrounded = px * 25.8 * 25.8 / 1e6;
    CHECK(std::abs(unrounded - 7.3) < 0.05);
}

TEST_CASE("area label override injects the lie verbatim") {
    FixtureSpec spec;
    spec.canvas_width = 400;
    spec.canvas_height = 300;
    FixtureRoomSpec room;
    room.interior = BoundingBox{60, 60, 300, 240};
    room.area_label_value = 99.9;
    spec.rooms.push_back(room);
    FixtureResult fx = generate_fixture(spec);
    bool saw = false;
    for (const auto& t : fx.ground_truth.at("tokens")) {
        if (t.at("text").get<std::string>() == "99.9 m2") saw = true;
    }
    CHECK(saw);
    CHECK(fx.ground_truth.at("rooms").at(0).at("label_value").get<double>() ==
          doctest::Approx(99.9));
}

TEST_CASE("spec json parsing covers doors and objects") {
    nlohmann::json j = {
        {"canvas", {{"width", 300}, {"height", 250}}},
        {"wall_thickness", 4},
        {"rooms",
         {{{"interior", {50, 50, 200, 180}},
           {"function", "HALL"},
           {"doors", {{{"side", "E"}, {"offset", 12}, {"width", 10}}}}}}},
    };
    FixtureSpec spec = fixture_spec_from_json(j);
    CHECK(spec.canvas_width == 300);
    CHECK(spec.wall_thickness == 4);
    REQUIRE(spec.rooms.size() == 1);
    REQUIRE(spec.rooms[0].doors.size() == 1);
    CHECK(spec.rooms[0].doors[0].side == 'E');
    CHECK(spec.rooms[0].doors[0].width == 10);
    CHECK(generate_fixture(spec).image.width == 300);
}
