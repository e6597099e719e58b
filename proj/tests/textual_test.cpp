#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "blueprint/glyphs.hpp"
#include "blueprint/textual.hpp"

using namespace bp;

namespace {

// Renders one line and returns its per-glyph tight boxes.
std::vector<GlyphPlacement> render_line(RasterImage& img, int x, int y, const std::string& text,
                                        int scale) {
    return draw_text(img, x, y, text, scale, 0);
}

BoundingBox hull_of(const std::vector<GlyphPlacement>& placed) {
    BoundingBox h = placed.front().box;
    for (const auto& g : placed) h = BoundingBox::hull(h, g.box);
    return h;
}

}  // namespace

TEST_CASE("closed loop: every dictionary word is read back exactly") {
    GlyphRecognizer ocr;
    for (int scale : {1, 2, 3}) {
        for (const std::string& word : default_function_dictionary()) {
            RasterImage img = RasterImage::create(40 + text_advance(word, scale), 40, 1, 235);
            auto placed = render_line(img, 12, 12, word, scale);
            auto words = group_words(recognize_characters(img, ocr), 0);
            REQUIRE(words.size() == 1);
            CHECK(words[0].text == word);
            CHECK(words[0].bbox == hull_of(placed));
            CHECK(words[0].confidence > 70.0);
        }
    }
}

TEST_CASE("closed loop: area labels 4.0 m2 through 54.1 m2") {
    GlyphRecognizer ocr;
    for (const std::string& label : {std::string("4.0 m2"), std::string("6.4 m2"),
                                     std::string("10.1 m2"), std::string("18.0 m2"),
                                     std::string("54.1 m2")}) {
        for (int scale : {1, 2}) {
            RasterImage img = RasterImage::create(60 + text_advance(label, scale), 40, 1, 235);
            auto placed = render_line(img, 15, 14, label, scale);
            auto words = merge_area_tokens(group_words(recognize_characters(img, ocr), 0), 0);
            REQUIRE(words.size() == 1);
            CHECK(words[0].text == label);
            CHECK(words[0].bbox == hull_of(placed));
            CHECK(parse_area_label(words[0].text) ==
                  doctest::Approx(std::stod(label.substr(0, label.size() - 3))));
        }
    }
}

TEST_CASE("characters come back in reading order with exact boxes") {
    GlyphRecognizer ocr;
    RasterImage img = RasterImage::create(200, 80, 1, 235);
    auto top = render_line(img, 10, 10, "AB", 2);
    auto bottom = render_line(img, 10, 40, "12", 2);
    auto chars = recognize_characters(img, ocr);
    REQUIRE(chars.size() == 4);
    CHECK(chars[0].text == "A");
    CHECK(chars[1].text == "B");
    CHECK(chars[2].text == "1");
    CHECK(chars[3].text == "2");
    CHECK(chars[0].bbox == top[0].box);
    CHECK(chars[1].bbox == top[1].box);
    CHECK(chars[2].bbox == bottom[0].box);
    CHECK(chars[3].bbox == bottom[1].box);
}

TEST_CASE("word grouping keeps spaced phrases together and lines apart") {
    GlyphRecognizer ocr;
    RasterImage img = RasterImage::create(300, 100, 1, 235);
    render_line(img, 10, 10, "DINING AREA", 2);
    render_line(img, 10, 50, "18", 2);
    render_line(img, 200, 50, "WC", 2);  // same line as "18", far away
    auto words = group_words(recognize_characters(img, ocr), 0);
    REQUIRE(words.size() == 3);
    CHECK(words[0].text == "DINING AREA");
    CHECK(words[1].text == "18");
    CHECK(words[2].text == "WC");
}

TEST_CASE("area token merging joins the number and the unit across a wide gap") {
    GlyphRecognizer ocr;
    RasterImage img = RasterImage::create(300, 60, 1, 235);
    render_line(img, 10, 10, "12.5", 2);
    render_line(img, 90, 10, "m2", 2);
    auto words = merge_area_tokens(group_words(recognize_characters(img, ocr), 0), 40);
    REQUIRE(words.size() == 1);
    CHECK(words[0].text == "12.5 m2");
    // with a tight budget the pair stays split
    CHECK(merge_area_tokens(group_words(recognize_characters(img, ocr), 0), 5).size() == 2);
}

TEST_CASE("parse_area_label accepts the unit variants") {
    CHECK(parse_area_label("25 m?") == doctest::Approx(25.0));
    CHECK(parse_area_label("25 m2") == doctest::Approx(25.0));
    CHECK(parse_area_label("25 m²") == doctest::Approx(25.0));
    CHECK(parse_area_label("3,5 m2") == doctest::Approx(3.5));
    CHECK(parse_area_label("18.0 m2") == doctest::Approx(18.0));
}

TEST_CASE("parse_area_label rejects non-areas") {
    for (const std::string& bad : {std::string("KITCHEN"), std::string("m2"),
                                   std::string("12"), std::string("12 meters")}) {
        CHECK_THROWS_AS(parse_area_label(bad), Error);
        try {
            parse_area_label(bad);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NotAnArea);
        }
    }
}

TEST_CASE("token classification covers all four classes") {
    auto dict = default_function_dictionary();
    std::vector<TextToken> words(5);
    words[0].text = "KITCHEN";
    words[1].text = "12.5 m2";
    words[2].text = "7";
    words[3].text = "1A";
    words[4].text = "ZZZZZZ";
    auto classified = classify_tokens(words, dict);
    CHECK(classified[0].second == TokenClass::Function);
    CHECK(classified[1].second == TokenClass::AreaSize);
    CHECK(classified[2].second == TokenClass::Position);
    CHECK(classified[3].second == TokenClass::Position);
    CHECK(classified[4].second == TokenClass::Unclassified);
    CHECK(token_class_from_name(token_class_name(TokenClass::AreaSize)) == TokenClass::AreaSize);
}

TEST_CASE("classification is case-insensitive for functions") {
    std::vector<TextToken> words(1);
    words[0].text = "Kitchen";
    CHECK(classify_tokens(words, default_function_dictionary())[0].second ==
          TokenClass::Function);
}

TEST_CASE("subprocess recognizer speaks the line protocol") {
    namespace fs = std::filesystem;
    const fs::path script = fs::temp_directory_path() / "bp_fake_ocr.sh";
    {
        std::ofstream out(script);
        out << "#!/bin/sh\n"
            << "cat > /dev/null\n"
            << "printf 'HELLO\\t5\\t6\\t40\\t20\\t87.5\\n'\n"
            << "printf '12\\t50\\t6\\t60\\t20\\t92\\n'\n";
    }
    fs::permissions(script, fs::perms::owner_all);
    SubprocessRecognizer rec({script.string()}, false);
    CHECK(rec.caps().word_level);
    auto tokens = rec.recognize(RasterImage::create(8, 8, 1, 0));
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0].text == "HELLO");
    CHECK(tokens[0].bbox == BoundingBox{5, 6, 40, 20});
    CHECK(tokens[0].confidence == doctest::Approx(87.5));
    CHECK(tokens[1].text == "12");
    fs::remove(script);
}

TEST_CASE("missing subprocess recognizer reports RecognizerUnavailable") {
    SubprocessRecognizer rec({"/nonexistent/recognizer-binary"});
    try {
        rec.recognize(RasterImage::create(8, 8, 1, 0));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RecognizerUnavailable);
    }
}

TEST_CASE("glyph set round-trips through the export directory") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "bp_glyph_set";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_glyph_set(dir.string());
    auto loaded = load_glyph_set(dir.string());
    const auto& builtin = builtin_glyphs();
    REQUIRE(loaded.size() == builtin.size());
    GlyphRecognizer from_disk(loaded, 0.72);
    RasterImage img = RasterImage::create(120, 40, 1, 235);
    draw_text(img, 10, 10, "BATH", 2, 0);
    auto words = group_words(recognize_characters(img, from_disk), 0);
    REQUIRE(words.size() == 1);
    CHECK(words[0].text == "BATH");
    fs::remove_all(dir);
}
