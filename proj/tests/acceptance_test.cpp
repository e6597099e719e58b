#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "blueprint/calibration.hpp"
#include "blueprint/fixture.hpp"
#include "blueprint/image_io.hpp"
#include "blueprint/pipeline.hpp"
#include "blueprint/preprocess.hpp"
#include "blueprint/report.hpp"
#include "oracles.hpp"

using namespace bp;
namespace fs = std::filesystem;

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

std::string render_to_png(const FixtureSpec& spec, const char* name) {
    FixtureResult fx = generate_fixture(spec);
    const std::string path = (fs::temp_directory_path() / name).string();
    save_image(fx.image, path);
    return path;
}

void verdict(int index, const char* title, bool ok) {
    std::printf("criterion %d (%s): %s\n", index, title, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    CHECK_MESSAGE(ok, "criterion ", index, " (", title, ")");
}

bool within(double value, double want, double tol) { return std::abs(value - want) <= tol; }

}  // namespace

TEST_CASE("acceptance") {
    // 1: six-room replica blueprint, exact recovery, under two seconds
    {
        FixtureSpec spec = load_replica_spec();
        FixtureResult fx = generate_fixture(spec);
        const std::string png = render_to_png(spec, "bp_acc_replica.png");
        PipelineConfig cfg;
        cfg.output_dir = fs::temp_directory_path().string();
        const auto start = std::chrono::steady_clock::now();
        BlueprintReport rep = run_pipeline(cfg, png);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        bool ok = rep.rooms.size() == 6;
        std::vector<double> want;
        for (const auto& r : fx.ground_truth.at("rooms")) {
            want.push_back(r.at("area_m2").get<double>());
        }
        std::vector<double> got;
        for (const auto& r : rep.rooms) {
            if (!r.area_computed_m2) ok = false;
            else got.push_back(*r.area_computed_m2);
        }
        std::sort(want.begin(), want.end());
        std::sort(got.begin(), got.end());
        if (got.size() != want.size()) ok = false;
        for (std::size_t i = 0; ok && i < want.size(); ++i) {
            ok &= within(got[i], want[i], 0.2);
        }
        ok &= rep.total_area_m2 && within(*rep.total_area_m2, 54.1, 0.1);
        ok &= rep.calibration && within(rep.calibration->mm_per_pixel, 25.8, 25.8 * 0.02);
        ok &= seconds < 2.0;
        verdict(1, "six-room replica recovered within tolerance in under 2 s", ok);
    }

    // 2: randomized segmentation suite, 20 seeded plans
    {
        int exact = 0;
        bool areas_ok = true;
        for (int trial = 0; trial < 20; ++trial) {
            std::mt19937 rng(1000 + trial);
            FixtureSpec spec;
            spec.canvas_width = 1000;
            spec.canvas_height = 820;
            spec.wall_thickness = std::uniform_int_distribution<int>(2, 8)(rng);
            spec.ruler = RulerSpec{};
            const int nrooms = std::uniform_int_distribution<int>(2, 10)(rng);
            const char* sides = "NSEW";
            for (int i = 0; i < nrooms; ++i) {
                FixtureRoomSpec room;
                double a = std::uniform_real_distribution<double>(3.0, 13.0)(rng);
                room.target_area_m2 = std::round(a * 10.0) / 10.0;
                room.area_label = false;
                DoorSpec door;
                door.side = sides[std::uniform_int_distribution<int>(0, 3)(rng)];
                door.width = std::uniform_int_distribution<int>(6, 14)(rng);
                door.offset = std::uniform_int_distribution<int>(6, 30)(rng);
                room.doors.push_back(door);
                spec.rooms.push_back(room);
            }
            FixtureResult fx = generate_fixture(spec);
            const std::string png = render_to_png(spec, "bp_acc_rand.png");
            PipelineConfig cfg;
            cfg.output_dir = fs::temp_directory_path().string();
            BlueprintReport rep = run_pipeline(cfg, png);
            if (static_cast<int>(rep.rooms.size()) == nrooms) ++exact;
            for (const auto& gr : fx.ground_truth.at("rooms")) {
                const auto& b = gr.at("interior_box");
                const int cx = (b[0].get<int>() + b[2].get<int>()) / 2;
                const int cy = (b[1].get<int>() + b[3].get<int>()) / 2;
                for (const auto& rr : rep.rooms) {
                    if (!rr.bbox.contains(cx, cy) || !rr.area_computed_m2) continue;
                    const double gt = gr.at("area_m2").get<double>();
                    areas_ok &= std::abs(*rr.area_computed_m2 - gt) / gt <= 0.05;
                }
            }
        }
        verdict(2, "randomized 20-plan suite: counts and areas", exact >= 19 && areas_ok);
    }

    // 3: oracle equivalence for labeling, threshold, blur and template scores
    {
        bool ok = true;
        std::mt19937 rng(2024);
        SegmentationConfig scfg;
        scfg.min_room_area = 8;
        std::bernoulli_distribution wall(0.35);
        for (int trial = 0; trial < 1000; ++trial) {
            BinaryImage img = BinaryImage::create(64, 64);
            for (auto& b : img.bits) b = wall(rng) ? 1 : 0;
            scfg.connectivity = (trial % 2) ? 8 : 4;
            LabelMap got;
            try {
                got = label_rooms(img, scfg).labels;
            } catch (const Error&) {
                got = LabelMap::create(64, 64);  // empty result is thrown
            }
            ok &= oracle::same_partition(
                got, oracle::flood_fill_rooms(img, scfg.min_room_area, scfg.connectivity));
        }
        std::uniform_int_distribution<int> level(0, 255);
        for (int trial = 0; trial < 300; ++trial) {
            RasterImage img = RasterImage::create(16, 16, 1);
            for (auto& p : img.pixels) p = static_cast<std::uint8_t>(level(rng));
            ok &= otsu_threshold(img) == oracle::exhaustive_otsu(img);
        }
        for (double sigma : {0.8, 1.4, 2.0}) {
            RasterImage img = RasterImage::create(32, 24, 1);
            for (auto& p : img.pixels) p = static_cast<std::uint8_t>(level(rng));
            RasterImage fast = gaussian_blur(img, sigma);
            RasterImage slow = oracle::direct_gaussian_2d(img, sigma);
            for (std::size_t i = 0; i < fast.pixels.size(); ++i) {
                ok &= std::abs(int(fast.pixels[i]) - int(slow.pixels[i])) <= 1;
            }
        }
        const MatchMetric metrics[] = {
            MatchMetric::SquaredDifference,      MatchMetric::NormalizedSquaredDifference,
            MatchMetric::CrossCorrelation,       MatchMetric::NormalizedCrossCorrelation,
            MatchMetric::CorrelationCoefficient, MatchMetric::NormalizedCorrelationCoefficient,
        };
        for (int trial = 0; trial < 4; ++trial) {
            RasterImage src = RasterImage::create(64, 48, 1);
            RasterImage tpl = RasterImage::create(9 + trial, 8, 1);
            for (auto& p : src.pixels) p = static_cast<std::uint8_t>(level(rng));
            for (auto& p : tpl.pixels) p = static_cast<std::uint8_t>(level(rng));
            for (MatchMetric m : metrics) {
                auto fast = match_score_map(src, tpl, m);
                auto slow = oracle::naive_score_map(src, tpl, m);
                for (std::size_t i = 0; i < fast.size(); ++i) {
                    const double s = std::max({1.0, std::abs(fast[i]), std::abs(slow[i])});
                    ok &= std::abs(fast[i] - slow[i]) / s <= 1e-6;
                }
            }
        }
        verdict(3, "oracle equivalence: labeling, threshold, blur, score maps", ok);
    }

    // 4: template matching identities and exact multi-instance recovery
    {
        bool ok = true;
        std::mt19937 rng(7);
        RasterImage scene = RasterImage::create(80, 60, 1);
        std::uniform_int_distribution<int> level(0, 255);
        for (auto& p : scene.pixels) p = static_cast<std::uint8_t>(level(rng));
        RasterImage patch = crop(scene, BoundingBox{20, 15, 40, 33});
        const int mw = 80 - 20 + 1;
        auto nsd = match_score_map(scene, patch, MatchMetric::NormalizedSquaredDifference);
        auto nco = match_score_map(scene, patch, MatchMetric::NormalizedCorrelationCoefficient);
        ok &= std::abs(nsd[static_cast<std::size_t>(15) * mw + 20]) < 1e-9;
        ok &= std::abs(nco[static_cast<std::size_t>(15) * mw + 20] - 1.0) < 1e-9;

        auto library = load_template_library(source_dir() + "/share/templates");
        const Template* door = nullptr;
        for (const auto& t : library) {
            if (t.id == "door") door = &t;
        }
        ok &= door != nullptr;
        if (door) {
            const std::vector<std::vector<std::pair<int, int>>> layouts = {
                {{30, 25}},
                {{30, 25}, {100, 25}, {30, 90}},
                {{30, 25}, {100, 25}, {170, 25}, {30, 90}, {100, 90}},
            };
            for (const auto& layout : layouts) {
                RasterImage src = RasterImage::create(240, 160, 1, 235);
                for (auto [x, y] : layout) {
                    for (int dy = 0; dy < door->image.height; ++dy) {
                        for (int dx = 0; dx < door->image.width; ++dx) {
                            src.at(x + dx, y + dy) = door->image.at(dx, dy);
                        }
                    }
                }
                auto dets = match_template_multi(
                    src, *door, MatchMetric::NormalizedCorrelationCoefficient, 0.9, 0.3);
                ok &= dets.size() == layout.size();
                for (auto [x, y] : layout) {
                    bool found = false;
                    for (const auto& d : dets) {
                        found |= std::abs(d.bbox.x0 - x) <= 1 && std::abs(d.bbox.y0 - y) <= 1;
                    }
                    ok &= found;
                }
                for (std::size_t i = 0; i < dets.size(); ++i) {
                    for (std::size_t j = i + 1; j < dets.size(); ++j) {
                        ok &= BoundingBox::iou(dets[i].bbox, dets[j].bbox) <= 0.3;
                    }
                }
            }
        }
        verdict(4, "template identities and k-instance multi-match", ok);
    }

    // 5: OCR closed loop on the built-in font
    {
        bool ok = true;
        GlyphRecognizer ocr;
        for (const std::string& word : default_function_dictionary()) {
            RasterImage img = RasterImage::create(30 + text_advance(word, 2), 40, 1, 235);
            auto placed = draw_text(img, 10, 12, word, 2, 0);
            auto words = group_words(recognize_characters(img, ocr), 0);
            ok &= words.size() == 1 && words[0].text == word;
            if (ok) {
                BoundingBox hull = placed.front().box;
                for (const auto& g : placed) hull = BoundingBox::hull(hull, g.box);
                ok &= words[0].bbox == hull;
            }
        }
        const char* labels[] = {"4.0 m2", "6.4 m2", "10.1 m2", "12.8 m2", "18.0 m2", "54.1 m2"};
        for (const char* label : labels) {
            RasterImage img = RasterImage::create(40 + text_advance(label, 2), 40, 1, 235);
            auto placed = draw_text(img, 10, 12, label, 2, 0);
            auto words = merge_area_tokens(group_words(recognize_characters(img, ocr), 0), 0);
            ok &= words.size() == 1 && words[0].text == label;
            if (ok) {
                BoundingBox hull = placed.front().box;
                for (const auto& g : placed) hull = BoundingBox::hull(hull, g.box);
                ok &= words[0].bbox == hull;
            }
        }
        try {
            ok &= parse_area_label("25 m?") == 25.0;
        } catch (const Error&) {
            ok = false;
        }
        verdict(5, "OCR closed loop: dictionary, area labels, 25 m?", ok);
    }

    // 6: cross-verification flips exactly the lying room
    {
        FixtureSpec spec = load_replica_spec();
        std::size_t victim = 0;
        for (std::size_t i = 0; i < spec.rooms.size(); ++i) {
            if (spec.rooms[i].function == "BATH") victim = i;
        }
        const double truth = *spec.rooms[victim].target_area_m2;
        spec.rooms[victim].area_label_value = std::round(truth * 1.2 * 10.0) / 10.0;
        const std::string png = render_to_png(spec, "bp_acc_lie.png");
        PipelineConfig cfg;
        cfg.output_dir = fs::temp_directory_path().string();
        BlueprintReport rep = run_pipeline(cfg, png);
        bool ok = rep.rooms.size() == 6;
        int mismatches = 0;
        for (const auto& r : rep.rooms) {
            if (r.verification == Verification::Mismatch) {
                ++mismatches;
                ok &= r.function && *r.function == "BATH";
            } else {
                ok &= r.verification == Verification::Verified;
            }
        }
        ok &= mismatches == 1;
        verdict(6, "20% label error flips exactly one room to mismatch", ok);
    }

    // 7: risk arithmetic with the sprinkler-effectiveness bounds
    {
        bool ok = true;
        for (double p : {0.0, 0.01, 1.0}) {
            for (double e : {0.0, 1000.0, 1e6}) {
                for (double v : {0.0, 0.4, 1.0}) {
                    RiskResult r = compute_risk_score({p, e, v, 0.701}, 0);
                    ok &= r.q == p * e * v && r.v_effective == v;
                }
            }
        }
        RiskResult lo = compute_risk_score({0.5, 100.0, 0.8, 0.701}, 2);
        RiskResult hi = compute_risk_score({0.5, 100.0, 0.8, 0.988}, 1);
        ok &= within(lo.v_effective, 0.299 * 0.8, 1e-12);
        ok &= within(hi.v_effective, 0.012 * 0.8, 1e-12);
        ok &= within(lo.q, 0.5 * 100.0 * 0.299 * 0.8, 1e-9);
        verdict(7, "Q = P x E x V with sprinkler bounds 0.701 and 0.988", ok);
    }

    // 8: determinism and 2x scale invariance
    {
        FixtureSpec spec = load_replica_spec();
        FixtureResult fx = generate_fixture(spec);
        const std::string png1 = (fs::temp_directory_path() / "bp_acc_s1.png").string();
        const std::string png2 = (fs::temp_directory_path() / "bp_acc_s2.png").string();
        save_image(fx.image, png1);
        save_image(resize(fx.image, fx.image.width * 2, true), png2);
        PipelineConfig cfg;
        cfg.output_dir = fs::temp_directory_path().string();
        BlueprintReport a = run_pipeline(cfg, png1);
        BlueprintReport b = run_pipeline(cfg, png1);
        bool ok = report_to_stable_string(a) == report_to_stable_string(b);

        BlueprintReport big = run_pipeline(cfg, png2);
        ok &= a.calibration && big.calibration;
        if (ok) {
            ok &= within(big.calibration->mm_per_pixel, a.calibration->mm_per_pixel / 2.0,
                         a.calibration->mm_per_pixel * 0.01);
            ok &= a.rooms.size() == big.rooms.size();
        }
        if (ok) {
            // compare measured areas; the 0.1-rounded field can step across a
            // boundary even when the measurement barely moves
            const double k1 = a.calibration->mm_per_pixel;
            const double k2 = big.calibration->mm_per_pixel;
            auto sorted_areas = [](const BlueprintReport& r, double k) {
                std::vector<double> out;
                for (const auto& room : r.rooms) {
                    out.push_back(static_cast<double>(room.pixel_count) * k * k / 1e6);
                }
                std::sort(out.begin(), out.end());
                return out;
            };
            auto a1 = sorted_areas(a, k1), a2 = sorted_areas(big, k2);
            for (std::size_t i = 0; i < a1.size(); ++i) {
                ok &= std::abs(a2[i] - a1[i]) / a1[i] < 0.02;
            }
        }
        verdict(8, "byte-identical reruns; 2x resize halves the scale", ok);
    }

    // 9: edge-detector properties
    {
        bool ok = true;
        SegmentationConfig cfg;
        for (int v : {0, 100, 255}) {
            RasterImage flat = RasterImage::create(50, 50, 1, static_cast<std::uint8_t>(v));
            ok &= canny_edges(flat, cfg).foreground_count() == 0;
        }
        RasterImage step = RasterImage::create(50, 50, 1);
        for (int y = 0; y < 50; ++y) {
            for (int x = 0; x < 50; ++x) step.at(x, y) = x < 25 ? 30 : 220;
        }
        BinaryImage edges = canny_edges(step, cfg);
        ok &= edges.foreground_count() > 0;
        for (int y = 5; y < 45; ++y) {
            for (int x = 0; x < 50; ++x) {
                if (edges.get(x, y)) ok &= std::abs(x - 25) <= 1;
            }
        }
        RasterImage square = RasterImage::create(70, 70, 1, 235);
        for (int y = 25; y < 45; ++y) {
            for (int x = 25; x < 45; ++x) square.at(x, y) = 10;
        }
        LabelMap part = oracle::flood_fill_rooms(canny_edges(square, cfg), 1, 4);
        ok &= part.at(35, 35) > 0;
        verdict(9, "edge detector: silence, localization, sealed contours", ok);
    }
}
