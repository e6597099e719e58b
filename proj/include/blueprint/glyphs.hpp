#pragma once

#include <string>
#include <vector>

#include "blueprint/raster.hpp"

namespace bp {

/// One character of the built-in fixed font, trimmed to its tight ink bbox.
struct Glyph {
    char32_t codepoint = 0;
    int width = 0;   // tight
    int height = 0;  // tight
    int x_off = 0;   // tight bbox offset inside the 5x7 cell
    int y_off = 0;
    std::vector<std::uint8_t> bits;  // row-major, 1 = ink
};

constexpr int kGlyphCellWidth = 5;
constexpr int kGlyphCellHeight = 7;

const std::vector<Glyph>& builtin_glyphs();

/// Placement of one rendered glyph (tight box in image coordinates).
struct GlyphPlacement {
    char32_t codepoint;
    BoundingBox box;
};

/// Draws text with the built-in font at integer scale; ' ' only advances the
/// pen. (x, y) is the top-left of the line cell. Returns tight per-glyph boxes.
std::vector<GlyphPlacement> draw_text(RasterImage& img, int x, int y, const std::string& text,
                                      int scale, std::uint8_t ink);

/// Pen advance in pixels for a string at the given scale.
int text_advance(const std::string& text, int scale);

/// Exports the font as per-character PNGs named by decimal code point.
void write_glyph_set(const std::string& dir);

/// Loads a glyph set in the write_glyph_set layout.
std::vector<Glyph> load_glyph_set(const std::string& dir);

}  // namespace bp
