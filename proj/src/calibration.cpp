#include "blueprint/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>

namespace bp {

namespace {

struct BrightComponent {
    BoundingBox box;
    long long count = 0;
};

std::vector<BrightComponent> bright_components(const BinaryImage& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<std::uint8_t> seen(mask.bits.size(), 0);
    std::vector<BrightComponent> comps;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < mask.bits.size(); ++s) {
        if (!mask.bits[s] || seen[s]) continue;
        BrightComponent c;
        c.box = {static_cast<int>(s % w), static_cast<int>(s / w), static_cast<int>(s % w) + 1,
                 static_cast<int>(s / w) + 1};
        seen[s] = 1;
        stack.assign(1, s);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
            ++c.count;
            c.box.x0 = std::min(c.box.x0, x);
            c.box.y0 = std::min(c.box.y0, y);
            c.box.x1 = std::max(c.box.x1, x + 1);
            c.box.y1 = std::max(c.box.y1, y + 1);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                    if (mask.bits[ni] && !seen[ni]) {
                        seen[ni] = 1;
                        stack.push_back(ni);
                    }
                }
            }
        }
        comps.push_back(c);
    }
    return comps;
}

}  // namespace

BoundingBox detect_ruler_region(const RasterImage& img, const PreprocessConfig& cfg) {
    const RasterImage gray = to_grayscale(img);
    const RasterImage enhanced = clahe(gray, cfg.clahe_clip, cfg.clahe_tiles);

    std::uint8_t peak = 0;
    for (std::uint8_t v : enhanced.pixels) peak = std::max(peak, v);

    BinaryImage bright = BinaryImage::create(enhanced.width, enhanced.height);
    for (std::size_t i = 0; i < enhanced.pixels.size(); ++i) {
        bright.bits[i] = enhanced.pixels[i] + 8 >= peak ? 1 : 0;
    }

    const int margin = std::max(4, static_cast<int>(0.18 * std::min(img.width, img.height)));
    const BrightComponent* best = nullptr;
    const auto comps = bright_components(bright);
    for (const BrightComponent& c : comps) {
        const int bw = c.box.width(), bh = c.box.height();
        const bool elongated = bw >= 5 * bh || bh >= 5 * bw;
        if (!elongated || c.count < 64) continue;
        const int edge_dist = std::min({c.box.x0, c.box.y0, img.width - c.box.x1, img.height - c.box.y1});
        if (edge_dist > margin) continue;
        if (!best || c.count > best->count) best = &c;
    }
    if (!best) throw Error(ErrorKind::RulerNotFound, "no elongated bright band near a margin");
    return best->box;
}

namespace {

const std::regex kIntRe(R"(^[0-9]+$)");

// OCR confusions seen on rescaled digits.
std::string normalize_digits(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case 'I': case 'l': case '|': out += '1'; break;
            case 'O': out += '0'; break;
            case 'S': out += '5'; break;
            case 'B': out += '8'; break;
            case 'Z': out += '2'; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

ScaleCalibration read_scale_factor(const RasterImage& ruler, const TextRecognizer& ocr) {
    const RasterImage gray = to_grayscale(ruler);
    const int w = gray.width, h = gray.height;
    const bool horizontal = w >= h;
    const int span = horizontal ? w : h;
    const int depth = horizontal ? h : w;

    // tick = dark run attached to the far edge covering a good part of the band
    std::vector<int> tail(span, 0);
    for (int p = 0; p < span; ++p) {
        int run = 0;
        for (int d = depth - 1; d >= 0; --d) {
            const std::uint8_t v = horizontal ? gray.at(p, d) : gray.at(d, p);
            if (v < 128) {
                ++run;
            } else {
                break;
            }
        }
        tail[p] = run;
    }
    const int min_tick = std::max(2, depth * 3 / 10);
    std::vector<double> ticks;
    for (int p = 0; p < span;) {
        if (tail[p] >= min_tick) {
            int q = p;
            while (q < span && tail[q] >= min_tick) ++q;
            ticks.push_back((p + q - 1) / 2.0);
            p = q;
        } else {
            ++p;
        }
    }
    if (ticks.size() < 2) throw Error(ErrorKind::NoLegibleSectors, "fewer than two tick marks");

    // printed sector lengths
    const auto chars = recognize_characters(gray, ocr);
    const auto words = group_words(chars, 0);

    std::vector<double> factors;
    for (std::size_t i = 0; i + 1 < ticks.size(); ++i) {
        const double px = ticks[i + 1] - ticks[i];
        if (px <= 0) continue;
        for (const TextToken& word : words) {
            const double cx = horizontal ? (word.bbox.x0 + word.bbox.x1) / 2.0
                                         : (word.bbox.y0 + word.bbox.y1) / 2.0;
            if (cx <= ticks[i] || cx >= ticks[i + 1]) continue;
            const std::string digits = normalize_digits(word.text);
            if (!std::regex_match(digits, kIntRe)) continue;
            factors.push_back(std::stod(digits) / px);
            break;
        }
    }
    if (factors.empty()) throw Error(ErrorKind::NoLegibleSectors, "no readable sector labels");

    std::vector<double> sorted = factors;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::vector<double> kept;
    for (double f : factors) {
        if (std::abs(f - median) <= 0.2 * median) kept.push_back(f);
    }
    if (kept.empty()) throw Error(ErrorKind::InconsistentSectors, "all sector factors rejected");

    ScaleCalibration cal;
    cal.mm_per_pixel = std::accumulate(kept.begin(), kept.end(), 0.0) / kept.size();
    cal.source = ScaleCalibration::Source::RulerDetected;
    cal.sectors_used = static_cast<int>(kept.size());
    if (!(cal.mm_per_pixel > 0) || !std::isfinite(cal.mm_per_pixel)) {
        throw Error(ErrorKind::InconsistentSectors, "non-positive scale factor");
    }
    return cal;
}

std::vector<RoomRegion> compute_room_areas(const std::vector<RoomRegion>& regions,
                                           const ScaleCalibration& cal) {
    std::vector<RoomRegion> out = regions;
    const double f = cal.mm_per_pixel * cal.mm_per_pixel / 1e6;
    for (RoomRegion& r : out) {
        r.area_m2 = std::round(r.pixel_count * f * 10.0) / 10.0;
    }
    return out;
}

}  // namespace bp
