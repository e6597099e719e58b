#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "blueprint/glyphs.hpp"
#include "blueprint/raster.hpp"

namespace bp {

struct TextToken {
    std::string text;
    BoundingBox bbox;
    double confidence = 0.0;  // 0..100

    bool operator==(const TextToken&) const = default;
};

enum class TokenClass { Position, Function, AreaSize, Unclassified };

const char* token_class_name(TokenClass c);
TokenClass token_class_from_name(const std::string& name);

struct RecognizerCaps {
    bool character_level = false;
    bool word_level = false;
};

class TextRecognizer {
public:
    virtual ~TextRecognizer() = default;
    virtual RecognizerCaps caps() const = 0;
    virtual std::vector<TextToken> recognize(const RasterImage& gray) const = 0;
};

/// Matches connected ink components against the bundled fixed-font glyph set.
/// Confidence is 100 x the normalized correlation of the binary patterns.
class GlyphRecognizer : public TextRecognizer {
public:
    explicit GlyphRecognizer(double min_score = 0.72);
    GlyphRecognizer(std::vector<Glyph> glyphs, double min_score);

    RecognizerCaps caps() const override { return {true, false}; }
    std::vector<TextToken> recognize(const RasterImage& gray) const override;

private:
    std::vector<Glyph> glyphs_;
    double min_score_;
};

/// Runs an external recognizer: PNG on the child's stdin, one token per output
/// line as tab-separated "text x0 y0 x1 y1 confidence".
class SubprocessRecognizer : public TextRecognizer {
public:
    explicit SubprocessRecognizer(std::vector<std::string> argv, bool character_level = true);

    RecognizerCaps caps() const override { return {character_level_, !character_level_}; }
    std::vector<TextToken> recognize(const RasterImage& gray) const override;

private:
    std::vector<std::string> argv_;
    bool character_level_;
};

/// Single-character tokens in reading order (top-to-bottom, left-to-right by
/// box origin).
std::vector<TextToken> recognize_characters(const RasterImage& img, const TextRecognizer& r);

/// Joins same-line characters whose horizontal gap is <= gap. gap <= 0 picks
/// the median glyph width of each line.
std::vector<TextToken> group_words(const std::vector<TextToken>& chars, int gap);

/// Joins a numeric word with a following unit word ("m2", "m?", "m²") so area
/// labels survive wide spacing.
std::vector<TextToken> merge_area_tokens(const std::vector<TextToken>& words, int max_gap);

std::vector<std::string> default_function_dictionary();

std::vector<std::pair<TextToken, TokenClass>> classify_tokens(
    const std::vector<TextToken>& words, const std::vector<std::string>& dictionary);

/// Parses "<number> m2" / "m²" / "m?" (decimal point or comma) to square
/// metres. Throws NotAnArea when the text does not match.
double parse_area_label(const std::string& text);

}  // namespace bp
