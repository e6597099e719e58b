#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blueprint/raster.hpp"

namespace bp {

/// A door/window opening carved out of one wall of a room.
struct DoorSpec {
    char side = 'N';  // N, S, E or W
    int offset = 10;  // along the wall, from its interior start
    int width = 10;
};

struct FixtureRoomSpec {
    // Either an explicit interior rectangle or a target reported area.
    std::optional<BoundingBox> interior;
    std::optional<double> target_area_m2;
    std::string function;
    std::string position;
    bool area_label = true;
    std::optional<double> area_label_value;  // override, e.g. to inject an error
    std::vector<DoorSpec> doors;
};

struct RulerSpec {
    double sector_mm = 1290.0;
    int sector_px = 50;
    int sectors = 4;
    int height = 28;
};

struct FixtureObjectSpec {
    std::string template_id;
    int x = 0;
    int y = 0;
    int rotation = 0;  // quarter-turns
};

struct FixtureSpec {
    int canvas_width = 1100;
    int canvas_height = 900;
    std::uint8_t background = 235;
    int wall_thickness = 5;
    int glyph_scale = 2;
    std::uint32_t seed = 1;
    double scale_mm_per_pixel = 25.8;
    std::optional<RulerSpec> ruler;
    std::vector<FixtureRoomSpec> rooms;
    std::vector<FixtureObjectSpec> objects;
    std::string template_dir;  // for object stamping
};

struct FixtureResult {
    RasterImage image;
    nlohmann::json ground_truth;
};

FixtureSpec fixture_spec_from_json(const nlohmann::json& j);

/// Renders walls, door gaps, ruler, text labels and stamped objects, and
/// reports exact ground truth (room pixel counts and areas, token boxes,
/// object and ruler boxes). Throws InvalidSpec for overlaps or out-of-canvas
/// geometry.
FixtureResult generate_fixture(const FixtureSpec& spec);

}  // namespace bp
