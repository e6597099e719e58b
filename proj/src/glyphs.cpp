#include "blueprint/glyphs.hpp"

#include <filesystem>
#include <map>

#include "blueprint/image_io.hpp"
#include "blueprint/preprocess.hpp"

namespace bp {

namespace {

struct GlyphDef {
    char32_t cp;
    const char* rows[kGlyphCellHeight];
};

// 5x7 fixed font. Every glyph is 8-connected so component-based recognition
// sees one piece per character ('?' is drawn with an attached stem).
const GlyphDef kFont[] = {
    {U'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
    {U'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
    {U'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
    {U'3', {".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."}},
    {U'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
    {U'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
    {U'6', {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
    {U'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
    {U'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
    {U'9', {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
    {U'A', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
    {U'B', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
    {U'C', {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
    {U'D', {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."}},
    {U'E', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
    {U'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
    {U'G', {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###."}},
    {U'H', {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
    {U'I', {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."}},
    {U'J', {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
    {U'K', {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
    {U'L', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
    {U'M', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
    {U'N', {"#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"}},
    {U'O', {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
    {U'P', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
    {U'Q', {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"}},
    {U'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
    {U'S', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
    {U'T', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
    {U'U', {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
    {U'V', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
    {U'W', {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#"}},
    {U'X', {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"}},
    {U'Y', {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
    {U'Z', {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
    {U'm', {".....", ".....", "##.#.", "#.#.#", "#.#.#", "#.#.#", "#.#.#"}},
    {U'.', {".....", ".....", ".....", ".....", ".....", ".##..", ".##.."}},
    {U',', {".....", ".....", ".....", ".....", ".##..", ".##..", ".#..."}},
    {U'?', {".###.", "#...#", "....#", "...#.", "..#..", "..#..", "..#.."}},
    {U'-', {".....", ".....", ".....", ".###.", ".....", ".....", "....."}},
    {U':', {".....", ".##..", ".##..", ".....", ".##..", ".##..", "....."}},
};

Glyph make_glyph(const GlyphDef& d) {
    int x0 = kGlyphCellWidth, y0 = kGlyphCellHeight, x1 = 0, y1 = 0;
    for (int y = 0; y < kGlyphCellHeight; ++y) {
        for (int x = 0; x < kGlyphCellWidth; ++x) {
            if (d.rows[y][x] == '#') {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x + 1);
                y1 = std::max(y1, y + 1);
            }
        }
    }
    Glyph g;
    g.codepoint = d.cp;
    g.x_off = x0;
    g.y_off = y0;
    g.width = x1 - x0;
    g.height = y1 - y0;
    g.bits.resize(static_cast<std::size_t>(g.width) * g.height);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            g.bits[static_cast<std::size_t>(y - y0) * g.width + (x - x0)] = d.rows[y][x] == '#' ? 1 : 0;
        }
    }
    return g;
}

}  // namespace

const std::vector<Glyph>& builtin_glyphs() {
    static const std::vector<Glyph> glyphs = [] {
        std::vector<Glyph> out;
        for (const GlyphDef& d : kFont) out.push_back(make_glyph(d));
        return out;
    }();
    return glyphs;
}

namespace {

const Glyph* find_glyph(char32_t cp) {
    for (const Glyph& g : builtin_glyphs()) {
        if (g.codepoint == cp) return &g;
    }
    return nullptr;
}

// Minimal UTF-8 decode; the font is ASCII but labels may carry U+00B2.
std::vector<char32_t> decode_utf8(const std::string& s) {
    std::vector<char32_t> out;
    for (std::size_t i = 0; i < s.size();) {
        const unsigned char c = s[i];
        if (c < 0x80) {
            out.push_back(c);
            i += 1;
        } else if ((c >> 5) == 0x6 && i + 1 < s.size()) {
            out.push_back(((c & 0x1F) << 6) | (s[i + 1] & 0x3F));
            i += 2;
        } else {
            out.push_back(U'?');
            i += 1;
        }
    }
    return out;
}

constexpr int kAdvance = kGlyphCellWidth + 1;
constexpr int kSpaceAdvance = 4;

}  // namespace

std::vector<GlyphPlacement> draw_text(RasterImage& img, int x, int y, const std::string& text,
                                      int scale, std::uint8_t ink) {
    std::vector<GlyphPlacement> placed;
    int pen = x;
    for (char32_t cp : decode_utf8(text)) {
        if (cp == U' ') {
            pen += kSpaceAdvance * scale;
            continue;
        }
        const Glyph* g = find_glyph(cp);
        if (!g) g = find_glyph(U'?');
        for (int gy = 0; gy < g->height; ++gy) {
            for (int gx = 0; gx < g->width; ++gx) {
                if (!g->bits[static_cast<std::size_t>(gy) * g->width + gx]) continue;
                for (int sy = 0; sy < scale; ++sy) {
                    for (int sx = 0; sx < scale; ++sx) {
                        const int px = pen + (g->x_off + gx) * scale + sx;
                        const int py = y + (g->y_off + gy) * scale + sy;
                        if (img.in_bounds(px, py)) {
                            for (int c = 0; c < img.channels; ++c) img.at(px, py, c) = ink;
                        }
                    }
                }
            }
        }
        placed.push_back({g->codepoint,
                          {pen + g->x_off * scale, y + g->y_off * scale,
                           pen + (g->x_off + g->width) * scale, y + (g->y_off + g->height) * scale}});
        pen += kAdvance * scale;
    }
    return placed;
}

int text_advance(const std::string& text, int scale) {
    int pen = 0;
    for (char32_t cp : decode_utf8(text)) pen += (cp == U' ' ? kSpaceAdvance : kAdvance) * scale;
    return pen;
}

void write_glyph_set(const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const Glyph& g : builtin_glyphs()) {
        RasterImage img = RasterImage::create(g.width, g.height, 1, 255);
        for (int y = 0; y < g.height; ++y) {
            for (int x = 0; x < g.width; ++x) {
                if (g.bits[static_cast<std::size_t>(y) * g.width + x]) img.at(x, y) = 0;
            }
        }
        save_image(img, dir + "/" + std::to_string(static_cast<std::uint32_t>(g.codepoint)) + ".png");
    }
}

std::vector<Glyph> load_glyph_set(const std::string& dir) {
    std::vector<Glyph> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".png") continue;
        const std::string stem = entry.path().stem().string();
        char32_t cp = 0;
        try {
            cp = static_cast<char32_t>(std::stoul(stem));
        } catch (...) {
            continue;  // not a code-point file
        }
        const RasterImage img = to_grayscale(load_image(entry.path().string()));
        Glyph g;
        g.codepoint = cp;
        g.width = img.width;
        g.height = img.height;
        g.bits.resize(static_cast<std::size_t>(g.width) * g.height);
        for (int y = 0; y < g.height; ++y) {
            for (int x = 0; x < g.width; ++x) {
                g.bits[static_cast<std::size_t>(y) * g.width + x] = img.at(x, y) < 128 ? 1 : 0;
            }
        }
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace bp
