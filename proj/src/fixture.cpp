#include "blueprint/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "blueprint/glyphs.hpp"
#include "blueprint/objects.hpp"

namespace bp {

namespace {

using nlohmann::json;

constexpr std::uint8_t kInk = 0;

std::string format_area(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

void fill_rect(RasterImage& img, const BoundingBox& b, std::uint8_t v) {
    for (int y = std::max(0, b.y0); y < std::min(img.height, b.y1); ++y) {
        for (int x = std::max(0, b.x0); x < std::min(img.width, b.x1); ++x) {
            img.at(x, y) = v;
        }
    }
}

bool boxes_touch(const BoundingBox& a, const BoundingBox& b, int halo) {
    return a.x0 - halo < b.x1 && b.x0 - halo < a.x1 && a.y0 - halo < b.y1 && b.y0 - halo < a.y1;
}

/// Picks interior dims whose enclosed centerline pixel count rounds to the
/// requested area under the given scale. Prefers near-square rooms.
std::pair<int, int> dims_for_area(double target_m2, double mm_per_px, int t) {
    const double k = mm_per_px * mm_per_px / 1e6;  // m^2 per pixel
    const double n0 = target_m2 / k;
    const int c = std::max(t + 8, static_cast<int>(std::lround(std::sqrt(n0))));
    int best_p = -1, best_q = -1;
    double best_cost = 1e18;
    for (int p = std::max(t + 8, c - 25); p <= c + 25; ++p) {
        for (int dq = -2; dq <= 2; ++dq) {
            const int q = static_cast<int>(std::lround(n0 / p)) + dq;
            if (q < t + 8) continue;
            const long long count = static_cast<long long>(p) * q;
            if (round1(count * k) != round1(target_m2)) continue;
            const double cost = std::abs(p - q) * 1000.0 + std::abs(count - n0);
            if (cost < best_cost) {
                best_cost = cost;
                best_p = p;
                best_q = q;
            }
        }
    }
    if (best_p < 0) {
        throw Error(ErrorKind::InvalidSpec, "no interior dimensions reach target area");
    }
    // p = wi + t - 1  (crossing span of the wall centerlines minus one)
    return {best_p - t + 1, best_q - t + 1};
}

}  // namespace

FixtureSpec fixture_spec_from_json(const json& j) {
    FixtureSpec s;
    if (j.contains("canvas")) {
        const json& c = j.at("canvas");
        s.canvas_width = c.value("width", s.canvas_width);
        s.canvas_height = c.value("height", s.canvas_height);
        s.background = static_cast<std::uint8_t>(c.value("background", int(s.background)));
    }
    s.wall_thickness = j.value("wall_thickness", s.wall_thickness);
    s.glyph_scale = j.value("glyph_scale", s.glyph_scale);
    s.seed = j.value("seed", s.seed);
    s.scale_mm_per_pixel = j.value("scale_mm_per_pixel", s.scale_mm_per_pixel);
    if (j.contains("ruler") && !j.at("ruler").is_null()) {
        const json& r = j.at("ruler");
        RulerSpec rs;
        rs.sector_mm = r.value("sector_mm", rs.sector_mm);
        rs.sector_px = r.value("sector_px", rs.sector_px);
        rs.sectors = r.value("sectors", rs.sectors);
        rs.height = r.value("height", rs.height);
        s.ruler = rs;
    }
    for (const json& rj : j.value("rooms", json::array())) {
        FixtureRoomSpec r;
        if (rj.contains("interior")) {
            const auto& b = rj.at("interior");
            r.interior = BoundingBox{b.at(0), b.at(1), b.at(2), b.at(3)};
        }
        if (rj.contains("target_area_m2")) r.target_area_m2 = rj.at("target_area_m2").get<double>();
        r.function = rj.value("function", "");
        r.position = rj.value("position", "");
        r.area_label = rj.value("area_label", true);
        if (rj.contains("area_label_value")) r.area_label_value = rj.at("area_label_value").get<double>();
        for (const json& dj : rj.value("doors", json::array())) {
            DoorSpec d;
            d.side = dj.value("side", std::string("N"))[0];
            d.offset = dj.value("offset", d.offset);
            d.width = dj.value("width", d.width);
            r.doors.push_back(d);
        }
        s.rooms.push_back(std::move(r));
    }
    for (const json& oj : j.value("objects", json::array())) {
        FixtureObjectSpec o;
        o.template_id = oj.at("template_id").get<std::string>();
        o.x = oj.value("x", 0);
        o.y = oj.value("y", 0);
        o.rotation = oj.value("rotation", 0);
        s.objects.push_back(std::move(o));
    }
    s.template_dir = j.value("template_dir", "");
    return s;
}

FixtureResult generate_fixture(const FixtureSpec& spec) {
    if (spec.canvas_width < 64 || spec.canvas_height < 64) {
        throw Error(ErrorKind::InvalidSpec, "canvas too small");
    }
    const int t = spec.wall_thickness;
    if (t < 2) throw Error(ErrorKind::InvalidSpec, "wall thickness must be at least 2");

    RasterImage img = RasterImage::create(spec.canvas_width, spec.canvas_height, 1);
    std::fill(img.pixels.begin(), img.pixels.end(), spec.background);

    // ruler strip first so room layout can avoid it
    std::optional<BoundingBox> ruler_box;
    if (spec.ruler) {
        const RulerSpec& r = *spec.ruler;
        if (r.sectors < 1 || r.sector_px < 16 || r.height < 12) {
            throw Error(ErrorKind::InvalidSpec, "degenerate ruler geometry");
        }
        const int rw = r.sectors * r.sector_px + 5;
        const int rx = 12, ry = spec.canvas_height - r.height - 10;
        if (rx + rw > spec.canvas_width - 4 || ry < 4) {
            throw Error(ErrorKind::InvalidSpec, "ruler does not fit on canvas");
        }
        ruler_box = BoundingBox{rx, ry, rx + rw, ry + r.height};
        fill_rect(img, *ruler_box, 255);
        const int depth = std::max(r.height * 55 / 100, r.height * 3 / 10 + 2);
        for (int i = 0; i <= r.sectors; ++i) {
            const int cx = rx + 2 + i * r.sector_px;
            fill_rect(img, {cx - 1, ry + r.height - depth, cx + 2, ry + r.height}, kInk);
        }
        const std::string digits = std::to_string(static_cast<long long>(std::llround(r.sector_mm)));
        const int lscale = text_advance(digits, 2) + 4 <= r.sector_px ? 2 : 1;
        const int lw = text_advance(digits, lscale);
        if (lw + 4 > r.sector_px || 7 * lscale > r.height / 2 - 2) {
            throw Error(ErrorKind::InvalidSpec, "sector labels do not fit");
        }
        for (int i = 0; i < r.sectors; ++i) {
            const int lx = rx + 2 + i * r.sector_px + (r.sector_px - lw) / 2;
            draw_text(img, lx, ry + 2, digits, lscale, kInk);
        }
    }

    // room layout
    struct PlacedRoom {
        BoundingBox interior;
        BoundingBox exterior;
        const FixtureRoomSpec* spec;
        long long pixel_count;
        double area_m2;
        double label_value;
    };
    std::vector<PlacedRoom> placed;
    const int margin = 34;
    int cur_x = margin + t, cur_y = margin + t, row_h = 0;
    const int floor_limit = ruler_box ? ruler_box->y0 - margin : spec.canvas_height - margin;
    const double k = spec.scale_mm_per_pixel * spec.scale_mm_per_pixel / 1e6;

    for (const FixtureRoomSpec& rs : spec.rooms) {
        int wi, hi;
        BoundingBox interior;
        if (rs.interior) {
            interior = *rs.interior;
            wi = interior.width();
            hi = interior.height();
        } else if (rs.target_area_m2) {
            std::tie(wi, hi) = dims_for_area(*rs.target_area_m2, spec.scale_mm_per_pixel, t);
            if (cur_x + wi + t + margin > spec.canvas_width) {
                cur_x = margin + t;
                cur_y += row_h + 2 * t + margin;
                row_h = 0;
            }
            interior = {cur_x, cur_y, cur_x + wi, cur_y + hi};
            cur_x += wi + 2 * t + margin;
            row_h = std::max(row_h, hi);
        } else {
            throw Error(ErrorKind::InvalidSpec, "room needs interior rect or target area");
        }
        if (wi < 12 || hi < 12) throw Error(ErrorKind::InvalidSpec, "room interior too small");
        const BoundingBox exterior{interior.x0 - t, interior.y0 - t, interior.x1 + t, interior.y1 + t};
        if (exterior.x0 < 2 || exterior.y0 < 2 || exterior.x1 > spec.canvas_width - 2 ||
            (rs.interior ? exterior.y1 > spec.canvas_height - 2 : exterior.y1 > floor_limit)) {
            throw Error(ErrorKind::InvalidSpec, "room extends outside canvas");
        }
        for (const PlacedRoom& p : placed) {
            if (boxes_touch(p.exterior, exterior, 8)) {
                throw Error(ErrorKind::InvalidSpec, "rooms overlap");
            }
        }
        if (ruler_box && boxes_touch(*ruler_box, exterior, 8)) {
            throw Error(ErrorKind::InvalidSpec, "room overlaps the scale ruler");
        }
        PlacedRoom p;
        p.interior = interior;
        p.exterior = exterior;
        p.spec = &rs;
        p.pixel_count = static_cast<long long>(wi + t - 1) * (hi + t - 1);
        p.area_m2 = round1(p.pixel_count * k);
        p.label_value = rs.area_label_value.value_or(p.area_m2);
        placed.push_back(p);
    }

    // draw walls and carve door gaps
    for (const PlacedRoom& p : placed) {
        fill_rect(img, p.exterior, kInk);
        fill_rect(img, p.interior, spec.background);
        for (const DoorSpec& d : p.spec->doors) {
            const int span = (d.side == 'N' || d.side == 'S') ? p.interior.width() : p.interior.height();
            if (d.width < 2 || d.offset < 0 || d.offset + d.width > span) {
                throw Error(ErrorKind::InvalidSpec, "door outside its wall");
            }
            BoundingBox gap;
            switch (d.side) {
                case 'N':
                    gap = {p.interior.x0 + d.offset, p.exterior.y0, p.interior.x0 + d.offset + d.width,
                           p.interior.y0};
                    break;
                case 'S':
                    gap = {p.interior.x0 + d.offset, p.interior.y1, p.interior.x0 + d.offset + d.width,
                           p.exterior.y1};
                    break;
                case 'W':
                    gap = {p.exterior.x0, p.interior.y0 + d.offset, p.interior.x0,
                           p.interior.y0 + d.offset + d.width};
                    break;
                case 'E':
                    gap = {p.interior.x1, p.interior.y0 + d.offset, p.exterior.x1,
                           p.interior.y0 + d.offset + d.width};
                    break;
                default:
                    throw Error(ErrorKind::InvalidSpec, "door side must be N, S, E or W");
            }
            fill_rect(img, gap, spec.background);
        }
    }

    // text labels, recorded with their tight boxes
    json tokens = json::array();
    json chars = json::array();
    auto record = [&](const std::string& text, int x, int y, int scale) {
        const auto glyphs = draw_text(img, x, y, text, scale, kInk);
        BoundingBox hull{0, 0, 0, 0};
        bool first = true;
        std::string spaced;
        for (const GlyphPlacement& g : glyphs) {
            chars.push_back({{"text", std::string(1, static_cast<char>(g.codepoint))},
                             {"box", {g.box.x0, g.box.y0, g.box.x1, g.box.y1}}});
            hull = first ? g.box : BoundingBox::hull(hull, g.box);
            first = false;
        }
        if (!first) {
            tokens.push_back({{"text", text}, {"box", {hull.x0, hull.y0, hull.x1, hull.y1}}});
        }
    };
    for (PlacedRoom& p : placed) {
        const int cx = (p.interior.x0 + p.interior.x1) / 2;
        const int cy = (p.interior.y0 + p.interior.y1) / 2;
        int scale = spec.glyph_scale;
        std::string area_text =
            p.spec->area_label ? format_area(p.label_value) + " m2" : std::string();
        while (scale > 1) {
            const int need_w = std::max(text_advance(p.spec->function, scale), text_advance(area_text, scale));
            if (need_w + 8 <= p.interior.width() && 2 * 7 * scale + 12 <= p.interior.height()) break;
            --scale;
        }
        if (!p.spec->function.empty()) {
            const int fw = text_advance(p.spec->function, scale);
            if (fw + 4 > p.interior.width()) {
                throw Error(ErrorKind::InvalidSpec, "function label wider than room");
            }
            record(p.spec->function, cx - fw / 2, cy - 7 * scale - 3, scale);
        }
        if (!area_text.empty()) {
            const int aw = text_advance(area_text, scale);
            if (aw + 4 > p.interior.width()) {
                throw Error(ErrorKind::InvalidSpec, "area label wider than room");
            }
            record(area_text, cx - aw / 2, cy + 3, scale);
        }
        if (!p.spec->position.empty()) {
            record(p.spec->position, p.interior.x0 + 4, p.interior.y0 + 4, scale);
        }
    }

    // stamped objects
    json objects = json::array();
    if (!spec.objects.empty()) {
        if (spec.template_dir.empty()) {
            throw Error(ErrorKind::InvalidSpec, "objects given without a template_dir");
        }
        const auto library = load_template_library(spec.template_dir);
        for (const FixtureObjectSpec& os : spec.objects) {
            const Template* tpl = nullptr;
            for (const Template& cand : library) {
                if (cand.id == os.template_id) tpl = &cand;
            }
            if (!tpl) throw Error(ErrorKind::InvalidSpec, "unknown template id " + os.template_id);
            const RasterImage stamp = rotate_quarter(tpl->image, ((os.rotation % 4) + 4) % 4);
            if (os.x < 0 || os.y < 0 || os.x + stamp.width > spec.canvas_width ||
                os.y + stamp.height > spec.canvas_height) {
                throw Error(ErrorKind::InvalidSpec, "object outside canvas");
            }
            for (int y = 0; y < stamp.height; ++y) {
                for (int x = 0; x < stamp.width; ++x) {
                    img.at(os.x + x, os.y + y) = stamp.at(x, y);
                }
            }
            objects.push_back({{"template_id", os.template_id},
                               {"class", tpl->cls_name},
                               {"rotation", ((os.rotation % 4) + 4) % 4},
                               {"box", {os.x, os.y, os.x + stamp.width, os.y + stamp.height}}});
        }
    }

    // ground truth
    json rooms = json::array();
    double total = 0.0;
    for (const PlacedRoom& p : placed) {
        total += p.area_m2;
        rooms.push_back({{"interior_box", {p.interior.x0, p.interior.y0, p.interior.x1, p.interior.y1}},
                         {"pixel_count", p.pixel_count},
                         {"area_m2", p.area_m2},
                         {"label_value", p.label_value},
                         {"function", p.spec->function},
                         {"position", p.spec->position}});
    }
    json gt;
    gt["scale_mm_per_pixel"] = spec.scale_mm_per_pixel;
    gt["rooms"] = std::move(rooms);
    gt["room_count"] = placed.size();
    gt["total_area_m2"] = round1(total);
    gt["tokens"] = std::move(tokens);
    gt["chars"] = std::move(chars);
    gt["objects"] = std::move(objects);
    if (ruler_box) {
        gt["ruler_box"] = {ruler_box->x0, ruler_box->y0, ruler_box->x1, ruler_box->y1};
    }
    return {std::move(img), std::move(gt)};
}

}  // namespace bp
