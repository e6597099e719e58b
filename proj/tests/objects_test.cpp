#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "blueprint/fixture.hpp"
#include "blueprint/image_io.hpp"
#include "blueprint/objects.hpp"
#include "oracles.hpp"

using namespace bp;

namespace {

std::string source_dir() {
    const char* d = std::getenv("BP_SOURCE_DIR");
    REQUIRE(d != nullptr);
    return d;
}

RasterImage random_gray(std::mt19937& rng, int w, int h) {
    RasterImage img = RasterImage::create(w, h, 1);
    std::uniform_int_distribution<int> d(0, 255);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(d(rng));
    return img;
}

const std::vector<MatchMetric> kAllMetrics = {
    MatchMetric::SquaredDifference,     MatchMetric::NormalizedSquaredDifference,
    MatchMetric::CrossCorrelation,      MatchMetric::NormalizedCrossCorrelation,
    MatchMetric::CorrelationCoefficient, MatchMetric::NormalizedCorrelationCoefficient,
};

}  // namespace

TEST_CASE("score maps match the naive sliding-window oracle") {
    std::mt19937 rng(57);
    for (int trial = 0; trial < 6; ++trial) {
        RasterImage src = random_gray(rng, 40 + trial * 4, 33 + trial * 3);
        RasterImage tpl = random_gray(rng, 7 + trial, 5 + trial);
        for (MatchMetric m : kAllMetrics) {
            auto fast = match_score_map(src, tpl, m);
            auto slow = oracle::naive_score_map(src, tpl, m);
            REQUIRE(fast.size() == slow.size());
            for (std::size_t i = 0; i < fast.size(); ++i) {
                const double scale = std::max({1.0, std::abs(fast[i]), std::abs(slow[i])});
                CHECK(std::abs(fast[i] - slow[i]) / scale <= 1e-6);
            }
        }
    }
}

TEST_CASE("perfect match identities") {
    std::mt19937 rng(58);
    RasterImage src = random_gray(rng, 50, 40);
    RasterImage tpl = crop(src, BoundingBox{12, 9, 12 + 16, 9 + 13});
    auto nsd = match_score_map(src, tpl, MatchMetric::NormalizedSquaredDifference);
    auto ncc = match_score_map(src, tpl, MatchMetric::NormalizedCrossCorrelation);
    auto nco = match_score_map(src, tpl, MatchMetric::NormalizedCorrelationCoefficient);
    const int mw = 50 - 16 + 1;
    const std::size_t at = static_cast<std::size_t>(9) * mw + 12;
    CHECK(nsd[at] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(ncc[at] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(nco[at] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("constant windows give zero on normalized coefficient metrics") {
    RasterImage src = RasterImage::create(20, 20, 1, 100);  // zero variance everywhere
    std::mt19937 rng(59);
    RasterImage tpl = random_gray(rng, 5, 5);
    auto map = match_score_map(src, tpl, MatchMetric::NormalizedCorrelationCoefficient);
    for (double v : map) CHECK(v == doctest::Approx(0.0));
    RasterImage zsrc = RasterImage::create(20, 20, 1, 0);
    auto zmap = match_score_map(zsrc, tpl, MatchMetric::NormalizedCrossCorrelation);
    for (double v : zmap) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("match_template finds the embedded patch and ties break raster-first") {
    RasterImage src = RasterImage::create(60, 30, 1, 200);
    // two identical dark squares; the earlier one (row-major) must win
    for (int y = 10; y < 18; ++y) {
        for (int x = 40; x < 48; ++x) src.at(x, y) = 20;
    }
    for (int y = 20; y < 28; ++y) {
        for (int x = 5; x < 13; ++x) src.at(x, y) = 20;
    }
    Template t;
    t.id = "sq";
    t.image = RasterImage::create(8, 8, 1, 20);
    Detection d = match_template(src, t, MatchMetric::SquaredDifference);
    CHECK(d.bbox == BoundingBox{40, 10, 48, 18});
    CHECK(d.score == doctest::Approx(0.0));
}

TEST_CASE("oversized template throws TemplateTooLarge") {
    RasterImage src = RasterImage::create(10, 10, 1, 0);
    Template t;
    t.image = RasterImage::create(11, 4, 1, 0);
    CHECK_THROWS_AS(match_template(src, t, MatchMetric::SquaredDifference), Error);
    try {
        match_template(src, t, MatchMetric::SquaredDifference);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TemplateTooLarge);
    }
}

TEST_CASE("rotate_quarter cycles and composes") {
    std::mt19937 rng(61);
    RasterImage img = random_gray(rng, 7, 4);
    RasterImage r1 = rotate_quarter(img, 1);
    CHECK(r1.width == 4);
    CHECK(r1.height == 7);
    CHECK(rotate_quarter(img, 4) == img);
    CHECK(rotate_quarter(rotate_quarter(img, 1), 3) == img);
    CHECK(rotate_quarter(rotate_quarter(img, 2), 2) == img);
}

TEST_CASE("multi-match returns exactly k stamped instances") {
    const std::string dir = source_dir() + "/share/templates";
    auto library = load_template_library(dir);
    const Template* door = nullptr;
    for (const auto& t : library) {
        if (t.id == "door") door = &t;
    }
    REQUIRE(door != nullptr);

    const std::vector<std::vector<std::pair<int, int>>> layouts = {
        {{30, 25}},
        {{30, 25}, {90, 25}, {30, 85}},
        {{30, 25}, {90, 25}, {150, 25}, {30, 85}, {90, 85}},
    };
    for (const auto& layout : layouts) {
        RasterImage src = RasterImage::create(220, 150, 1, 235);
        for (auto [x, y] : layout) {
            for (int dy = 0; dy < door->image.height; ++dy) {
                for (int dx = 0; dx < door->image.width; ++dx) {
                    src.at(x + dx, y + dy) = door->image.at(dx, dy);
                }
            }
        }
        auto dets = match_template_multi(src, *door,
                                         MatchMetric::NormalizedCorrelationCoefficient, 0.9, 0.3);
        REQUIRE(dets.size() == layout.size());
        for (auto [x, y] : layout) {
            bool found = false;
            for (const auto& d : dets) {
                if (std::abs(d.bbox.x0 - x) <= 1 && std::abs(d.bbox.y0 - y) <= 1) found = true;
            }
            CHECK(found);
        }
        for (std::size_t i = 0; i < dets.size(); ++i) {
            for (std::size_t j = i + 1; j < dets.size(); ++j) {
                CHECK(BoundingBox::iou(dets[i].bbox, dets[j].bbox) <= 0.3);
            }
        }
        // best-first ordering
        for (std::size_t i = 1; i < dets.size(); ++i) CHECK(dets[i - 1].score >= dets[i].score);
    }
}

TEST_CASE("bundled template library loads with expected classes") {
    auto library = load_template_library(source_dir() + "/share/templates");
    REQUIRE(library.size() == 4);
    bool sprinkler = false;
    for (const auto& t : library) {
        CHECK(t.image.channels == 1);
        CHECK(t.image.width > 0);
        if (t.cls == ObjectClass::Sprinkler) sprinkler = true;
    }
    CHECK(sprinkler);
}

TEST_CASE("manifest errors are reported distinctly") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "bp_tpl_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    CHECK_THROWS_AS(load_template_library(dir.string()), Error);
    try {
        load_template_library(dir.string());
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ManifestMissing);
    }

    {
        std::ofstream m(dir / "manifest.json");
        m << R"({"templates":[{"id":"a","file":"missing.png","class":"door"}]})";
    }
    try {
        load_template_library(dir.string());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MissingImage);
    }

    save_image(RasterImage::create(4, 4, 1, 0), (dir / "a.png").string());
    {
        std::ofstream m(dir / "manifest.json");
        m << R"({"templates":[{"id":"a","file":"a.png","class":"door"},)"
          << R"({"id":"a","file":"a.png","class":"window"}]})";
    }
    try {
        load_template_library(dir.string());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DuplicateId);
    }
    fs::remove_all(dir);
}

TEST_CASE("metric names round-trip") {
    for (MatchMetric m : kAllMetrics) {
        CHECK(match_metric_from_name(match_metric_name(m)) == m);
    }
    CHECK(metric_is_min(MatchMetric::SquaredDifference));
    CHECK(metric_is_min(MatchMetric::NormalizedSquaredDifference));
    CHECK_FALSE(metric_is_min(MatchMetric::NormalizedCorrelationCoefficient));
    CHECK_THROWS_AS(match_metric_from_name("bogus"), Error);
}
