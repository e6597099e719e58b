#include "blueprint/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace bp {

namespace {

int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

std::vector<double> smooth(const RasterImage& img, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;

    const int w = img.width, h = img.height;
    std::vector<double> tmp(static_cast<std::size_t>(w) * h), out(tmp.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * img.at(reflect(x + i, w), y);
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += k[i + radius] * tmp[static_cast<std::size_t>(reflect(y + i, h)) * w + x];
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return out;
}

}  // namespace

BinaryImage canny_edges(const RasterImage& img, const SegmentationConfig& cfg) {
    if (img.channels != 1) throw Error(ErrorKind::UnsupportedFormat, "canny_edges expects grayscale");
    if (cfg.canny_low >= cfg.canny_high) {
        throw Error(ErrorKind::InvalidConfig, "canny_low must be < canny_high");
    }
    const int w = img.width, h = img.height;
    const std::vector<double> s = smooth(img, cfg.smooth_sigma);
    const auto at = [&](int x, int y) { return s[static_cast<std::size_t>(reflect(y, h)) * w + reflect(x, w)]; };

    std::vector<double> mag(static_cast<std::size_t>(w) * h, 0.0);
    std::vector<std::uint8_t> dir(mag.size(), 0);  // 0=E, 1=NE, 2=N, 3=NW gradient axis
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1) -
                              at(x - 1, y - 1) - 2 * at(x - 1, y) - at(x - 1, y + 1);
            const double gy = at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1) -
                              at(x - 1, y - 1) - 2 * at(x, y - 1) - at(x + 1, y - 1);
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            mag[i] = std::sqrt(gx * gx + gy * gy);
            double angle = std::atan2(gy, gx) * 180.0 / M_PI;
            if (angle < 0) angle += 180.0;
            if (angle >= 180.0) angle -= 180.0;
            if (angle < 22.5 || angle >= 157.5) {
                dir[i] = 0;
            } else if (angle < 67.5) {
                dir[i] = 1;
            } else if (angle < 112.5) {
                dir[i] = 2;
            } else {
                dir[i] = 3;
            }
        }
    }

    // non-maximum suppression; ties break toward the smaller coordinate
    static const int dx1[4] = {-1, -1, 0, 1};
    static const int dy1[4] = {0, -1, -1, -1};
    std::vector<std::uint8_t> state(mag.size(), 0);  // 0 none, 1 weak, 2 strong
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (mag[i] < cfg.canny_low) continue;
            const int d = dir[i];
            const int ax = x + dx1[d], ay = y + dy1[d];
            const int bx = x - dx1[d], by = y - dy1[d];
            const double ma = (ax >= 0 && ax < w && ay >= 0 && ay < h)
                                  ? mag[static_cast<std::size_t>(ay) * w + ax]
                                  : 0.0;
            const double mb = (bx >= 0 && bx < w && by >= 0 && by < h)
                                  ? mag[static_cast<std::size_t>(by) * w + bx]
                                  : 0.0;
            if (mag[i] > ma && mag[i] >= mb) state[i] = mag[i] >= cfg.canny_high ? 2 : 1;
        }
    }

    // hysteresis: walk weak edges reachable from strong seeds (8-connected)
    BinaryImage out = BinaryImage::create(w, h);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i] == 2) stack.push_back(i);
    }
    std::vector<std::uint8_t> on(state.size(), 0);
    for (std::size_t i : stack) on[i] = 1;
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                if (state[ni] != 0 && !on[ni]) {
                    on[ni] = 1;
                    stack.push_back(ni);
                }
            }
        }
    }
    for (std::size_t i = 0; i < on.size(); ++i) out.bits[i] = on[i];
    return out;
}

namespace {

struct Run {
    int pos;     // column for vertical runs, row for horizontal
    int start;   // first pixel along the run axis
    int end;     // inclusive
    int length() const { return end - start + 1; }
};

int run_overlap(const Run& a, const Run& b) {
    return std::min(a.end, b.end) - std::max(a.start, b.start) + 1;
}

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

// One merge pass along a single axis. Accessors abstract the orientation:
// get/set(pos, along) reads the mask at (pos, along) for vertical walls and
// (along, pos) for horizontal ones.
template <typename Get, typename Set>
void merge_axis(int pos_extent, int along_extent, int min_len, int merge_distance, Get get, Set set,
                std::vector<std::uint8_t>& consumed_mask, int width, bool vertical) {
    std::vector<Run> runs;
    for (int p = 0; p < pos_extent; ++p) {
        int start = -1;
        for (int a = 0; a <= along_extent; ++a) {
            const bool v = a < along_extent && get(p, a);
            if (v && start < 0) start = a;
            if (!v && start >= 0) {
                if (a - start >= min_len) runs.push_back({p, start, a - 1});
                start = -1;
            }
        }
    }

    DisjointSet ds(runs.size());
    std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
        return std::tie(a.pos, a.start) < std::tie(b.pos, b.start);
    });
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (std::size_t j = i + 1; j < runs.size(); ++j) {
            const int dist = runs[j].pos - runs[i].pos;
            if (dist > merge_distance) break;
            if (dist < 1) continue;
            const int ov = run_overlap(runs[i], runs[j]);
            if (ov >= (std::min(runs[i].length(), runs[j].length()) + 1) / 2) {
                ds.unite(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }

    std::vector<std::vector<int>> clusters(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) clusters[ds.find(static_cast<int>(i))].push_back(static_cast<int>(i));

    for (const auto& members : clusters) {
        if (members.size() < 2) continue;  // lone runs pass through unchanged
        int lo = runs[members[0]].start, hi = runs[members[0]].end;
        int max_len = 0;
        for (int m : members) {
            lo = std::min(lo, runs[m].start);
            hi = std::max(hi, runs[m].end);
            max_len = std::max(max_len, runs[m].length());
        }
        // pos span from substantial runs only: corner scraps chained into the
        // cluster must not steer the centerline off the wall's faces
        int pos_lo = -1, pos_hi = -1;
        for (int m : members) {
            if (runs[m].length() * 4 < max_len) continue;
            pos_lo = pos_lo < 0 ? runs[m].pos : std::min(pos_lo, runs[m].pos);
            pos_hi = std::max(pos_hi, runs[m].pos);
        }
        // midpoint of the two faces: both fragments of a door-split wall land
        // on the same column/row, so gap closing can bridge the opening
        const int center = (pos_lo + pos_hi) / 2;
        // reach the centerline of any perpendicular wall meeting at a corner:
        // edge contours round off there, shortening the face runs
        const int reach = (pos_hi - pos_lo) / 2 + 2;
        lo = std::max(0, lo - reach);
        hi = std::min(along_extent - 1, hi + reach);
        for (int m : members) {
            for (int a = runs[m].start; a <= runs[m].end; ++a) {
                const int x = vertical ? runs[m].pos : a;
                const int y = vertical ? a : runs[m].pos;
                consumed_mask[static_cast<std::size_t>(y) * width + x] = 1;
            }
        }
        for (int a = lo; a <= hi; ++a) set(center, a);
    }
}

}  // namespace

BinaryImage extract_wall_mask(const BinaryImage& edges, const SegmentationConfig& cfg) {
    const int w = edges.width, h = edges.height;
    // short enough that the stub between a room corner and a door jamb still
    // merges; anything unmerged passes through unchanged regardless
    const int min_len = std::max(4, cfg.merge_distance / 3);

    // vertical walls first
    BinaryImage mid = edges;
    {
        std::vector<std::uint8_t> consumed(static_cast<std::size_t>(w) * h, 0);
        BinaryImage lines = BinaryImage::create(w, h);
        merge_axis(
            w, h, min_len, cfg.merge_distance, [&](int p, int a) { return edges.get(p, a); },
            [&](int p, int a) { lines.set(p, a, true); }, consumed, w, true);
        for (std::size_t i = 0; i < mid.bits.size(); ++i) {
            mid.bits[i] = (mid.bits[i] && !consumed[i]) || lines.bits[i] ? 1 : 0;
        }
    }

    // then horizontal walls, over the partially merged mask
    BinaryImage out = mid;
    {
        std::vector<std::uint8_t> consumed(static_cast<std::size_t>(w) * h, 0);
        BinaryImage lines = BinaryImage::create(w, h);
        merge_axis(
            h, w, min_len, cfg.merge_distance, [&](int p, int a) { return mid.get(a, p); },
            [&](int p, int a) { lines.set(a, p, true); }, consumed, w, false);
        for (std::size_t i = 0; i < out.bits.size(); ++i) {
            out.bits[i] = (out.bits[i] && !consumed[i]) || lines.bits[i] ? 1 : 0;
        }
    }
    return out;
}

namespace {

// Bridges gaps between consecutive runs in one scan line. At least one side
// of a bridge must be a run of length >= 2; lone pixels (perpendicular wall
// crossings, jamb remnants) may anchor the other side.
void bridge_line(std::vector<std::uint8_t>& line, int gap_close) {
    const int n = static_cast<int>(line.size());
    int prev_end = -1, prev_len = 0;
    int i = 0;
    while (i < n) {
        if (!line[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j < n && line[j]) ++j;  // run [i, j)
        const int len = j - i;
        if (prev_end >= 0 && i - prev_end - 1 <= gap_close && (len >= 2 || prev_len >= 2)) {
            for (int k = prev_end + 1; k < i; ++k) line[k] = 1;
        }
        prev_end = j - 1;
        prev_len = len;
        i = j;
    }
}

}  // namespace

BinaryImage close_openings(const BinaryImage& walls, const SegmentationConfig& cfg) {
    if (cfg.gap_close <= 0) return walls;
    BinaryImage out = walls;
    std::vector<std::uint8_t> line;
    for (int y = 0; y < walls.height; ++y) {
        line.assign(walls.bits.begin() + static_cast<std::size_t>(y) * walls.width,
                    walls.bits.begin() + static_cast<std::size_t>(y + 1) * walls.width);
        bridge_line(line, cfg.gap_close);
        for (int x = 0; x < walls.width; ++x) {
            if (line[x]) out.set(x, y, true);
        }
    }
    for (int x = 0; x < walls.width; ++x) {
        line.resize(walls.height);
        for (int y = 0; y < walls.height; ++y) line[y] = walls.get(x, y) ? 1 : 0;
        bridge_line(line, cfg.gap_close);
        for (int y = 0; y < walls.height; ++y) {
            if (line[y]) out.set(x, y, true);
        }
    }
    return out;
}

namespace {

std::vector<std::array<std::uint8_t, 3>> room_palette(int count, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dist(0, 255);
    std::vector<std::array<std::uint8_t, 3>> palette;
    while (static_cast<int>(palette.size()) < count) {
        std::array<std::uint8_t, 3> c = {static_cast<std::uint8_t>(dist(rng)),
                                         static_cast<std::uint8_t>(dist(rng)),
                                         static_cast<std::uint8_t>(dist(rng))};
        if (c[0] > 240 && c[1] > 240 && c[2] > 240) continue;  // keep background white distinct
        if (std::find(palette.begin(), palette.end(), c) != palette.end()) continue;
        palette.push_back(c);
    }
    return palette;
}

}  // namespace

RoomLabeling label_rooms(const BinaryImage& walls, const SegmentationConfig& cfg) {
    const int w = walls.width, h = walls.height;
    LabelMap map = LabelMap::create(w, h);
    std::vector<std::int32_t> comp(static_cast<std::size_t>(w) * h, -1);

    static const int dx4[4] = {1, -1, 0, 0};
    static const int dy4[4] = {0, 0, 1, -1};
    static const int dx8[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int dy8[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int ndirs = cfg.connectivity == 8 ? 8 : 4;
    const int* dx = cfg.connectivity == 8 ? dx8 : dx4;
    const int* dy = cfg.connectivity == 8 ? dy8 : dy4;

    struct Comp {
        long long count = 0;
        bool border = false;
        BoundingBox box{1 << 30, 1 << 30, 0, 0};
        std::size_t first = 0;
    };
    std::vector<Comp> comps;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < comp.size(); ++s) {
        if (walls.bits[s] || comp[s] >= 0) continue;
        const std::int32_t id = static_cast<std::int32_t>(comps.size());
        Comp c;
        c.first = s;
        comp[s] = id;
        stack.assign(1, s);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
            ++c.count;
            c.border = c.border || x == 0 || y == 0 || x == w - 1 || y == h - 1;
            c.box.x0 = std::min(c.box.x0, x);
            c.box.y0 = std::min(c.box.y0, y);
            c.box.x1 = std::max(c.box.x1, x + 1);
            c.box.y1 = std::max(c.box.y1, y + 1);
            for (int d = 0; d < ndirs; ++d) {
                const int nx = x + dx[d], ny = y + dy[d];
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                if (!walls.bits[ni] && comp[ni] < 0) {
                    comp[ni] = id;
                    stack.push_back(ni);
                }
            }
        }
        comps.push_back(c);
    }

    // keep interior components of sufficient size, numbered in raster order
    std::vector<std::int32_t> relabel(comps.size(), 0);
    std::vector<std::size_t> order(comps.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return comps[a].first < comps[b].first; });

    RoomLabeling result;
    for (std::size_t ci : order) {
        const Comp& c = comps[ci];
        if (c.border || c.count < cfg.min_room_area) continue;
        const std::int32_t label = static_cast<std::int32_t>(result.regions.size()) + 1;
        relabel[ci] = label;
        RoomRegion r;
        r.label = label;
        r.pixel_count = c.count;
        r.bbox = c.box;
        result.regions.push_back(r);
    }
    if (result.regions.empty()) {
        throw Error(ErrorKind::NoEnclosedRegions, "no enclosed rooms found");
    }
    const auto palette = room_palette(static_cast<int>(result.regions.size()), cfg.color_seed);
    for (RoomRegion& r : result.regions) r.color = palette[r.label - 1];

    for (std::size_t i = 0; i < comp.size(); ++i) {
        map.labels[i] = comp[i] >= 0 ? relabel[comp[i]] : 0;
    }
    result.labels = std::move(map);
    return result;
}

RasterImage colorize_rooms(const LabelMap& labels, std::uint32_t seed) {
    const std::int32_t k = labels.max_label();
    const auto palette = room_palette(k, seed);
    RasterImage out = RasterImage::create(labels.width, labels.height, 3, 255);
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            const std::int32_t v = labels.at(x, y);
            if (v > 0) {
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = palette[v - 1][c];
            }
        }
    }
    return out;
}

int count_rooms(const std::vector<RoomRegion>& regions) { return static_cast<int>(regions.size()); }

}  // namespace bp
