#include "blueprint/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "blueprint/calibration.hpp"
#include "blueprint/image_io.hpp"
#include "blueprint/preprocess.hpp"

namespace bp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::unique_ptr<TextRecognizer> make_recognizer(const PipelineConfig& cfg) {
    if (!cfg.recognizer_command.empty()) {
        return std::make_unique<SubprocessRecognizer>(cfg.recognizer_command);
    }
    return std::make_unique<GlyphRecognizer>(cfg.recognizer_min_score);
}

std::uint8_t background_estimate(const RasterImage& gray) {
    std::array<long long, 256> hist{};
    for (std::uint8_t v : gray.pixels) ++hist[v];
    int mode = 0;
    for (int v = 1; v < 256; ++v) {
        if (hist[v] > hist[mode]) mode = v;
    }
    return static_cast<std::uint8_t>(mode);
}

void erase_box(RasterImage& gray, BoundingBox b, int pad, std::uint8_t fill) {
    b = {b.x0 - pad, b.y0 - pad, b.x1 + pad, b.y1 + pad};
    for (int y = std::max(0, b.y0); y < std::min(gray.height, b.y1); ++y) {
        for (int x = std::max(0, b.x0); x < std::min(gray.width, b.x1); ++x) {
            gray.at(x, y) = fill;
        }
    }
}

// Stage products kept around for overlay rendering.
struct PipelineScratch {
    RasterImage cleaned;
    LabelMap labels;
    std::vector<RoomRegion> regions;
};

BlueprintReport run_pipeline_impl(const PipelineConfig& cfg, const std::string& input_path,
                                  PipelineScratch* scratch);

}  // namespace

BlueprintReport run_pipeline(const PipelineConfig& cfg, const std::string& input_path) {
    return run_pipeline_impl(cfg, input_path, nullptr);
}

namespace {

BlueprintReport run_pipeline_impl(const PipelineConfig& cfg, const std::string& input_path,
                                  PipelineScratch* scratch) {
    BlueprintReport report;
    report.source = input_path;

    auto t0 = Clock::now();
    RasterImage gray = to_grayscale(load_image(input_path));
    if (cfg.preprocess.target_width && *cfg.preprocess.target_width != gray.width) {
        gray = resize(gray, *cfg.preprocess.target_width, true);
    }
    if (cfg.use_nlm) gray = denoise_nlm(gray, cfg.preprocess);
    report.timings_ms["load"] = ms_since(t0);

    // calibration
    t0 = Clock::now();
    const auto recognizer = make_recognizer(cfg);
    std::optional<BoundingBox> ruler_box;
    if (cfg.scale_override) {
        ScaleCalibration cal;
        cal.mm_per_pixel = *cfg.scale_override;
        cal.source = ScaleCalibration::Source::Override;
        report.calibration = cal;
        try {
            ruler_box = detect_ruler_region(gray, cfg.preprocess);
        } catch (const Error&) {
            // override works without a visible ruler
        }
    } else {
        try {
            ruler_box = detect_ruler_region(gray, cfg.preprocess);
            report.calibration = read_scale_factor(crop(gray, *ruler_box), *recognizer);
        } catch (const Error& e) {
            report.skipped["calibration"] = e.what();
        }
    }
    report.timings_ms["calibration"] = ms_since(t0);

    // character recognition on the full drawing (minus the ruler)
    t0 = Clock::now();
    std::vector<TextToken> chars;
    try {
        chars = recognize_characters(gray, *recognizer);
    } catch (const Error& e) {
        report.skipped["text"] = e.what();
    }
    if (ruler_box) {
        std::erase_if(chars, [&](const TextToken& c) {
            return ruler_box->contains((c.bbox.x0 + c.bbox.x1) / 2, (c.bbox.y0 + c.bbox.y1) / 2);
        });
    }
    report.timings_ms["text"] = ms_since(t0);

    // objects, matched before any erasure so symbols stay intact
    t0 = Clock::now();
    if (!cfg.template_dir.empty()) {
        try {
            const auto library = load_template_library(cfg.template_dir);
            for (const Template& t : library) {
                const MatchMetric metric = cfg.metric_override.value_or(t.metric);
                const double threshold = cfg.threshold_override.value_or(t.threshold);
                const auto found = match_template_multi(gray, t, metric, threshold, 0.3);
                report.detections.insert(report.detections.end(), found.begin(), found.end());
            }
            for (const Detection& d : report.detections) ++report.class_counts[d.cls_name];
        } catch (const Error& e) {
            report.skipped["objects"] = e.what();
        }
    }
    // a symbol stroke that happens to look like a glyph is not text
    std::erase_if(chars, [&](const TextToken& c) {
        const int cx = (c.bbox.x0 + c.bbox.x1) / 2, cy = (c.bbox.y0 + c.bbox.y1) / 2;
        for (const Detection& d : report.detections) {
            if (d.bbox.contains(cx, cy)) return true;
        }
        return false;
    });
    report.timings_ms["objects"] = ms_since(t0);

    // blank the ruler, recognized text and detected symbols so none of them
    // can close or split rooms
    RasterImage cleaned = gray;
    const std::uint8_t bg = background_estimate(gray);
    if (ruler_box) erase_box(cleaned, *ruler_box, 2, bg);
    for (const TextToken& c : chars) erase_box(cleaned, c.bbox, 1, bg);
    for (const Detection& d : report.detections) erase_box(cleaned, d.bbox, 1, bg);

    // segmentation
    t0 = Clock::now();
    BinaryImage edges = canny_edges(cleaned, cfg.segmentation);
    BinaryImage walls = extract_wall_mask(edges, cfg.segmentation);
    BinaryImage closed = close_openings(walls, cfg.segmentation);
    RoomLabeling labeling;
    labeling.labels = LabelMap::create(cleaned.width, cleaned.height);
    try {
        labeling = label_rooms(closed, cfg.segmentation);
    } catch (const Error& e) {
        report.skipped["segmentation"] = e.what();
    }
    report.timings_ms["segmentation"] = ms_since(t0);

    // areas
    std::vector<RoomRegion> regions = labeling.regions;
    if (report.calibration && !regions.empty()) {
        regions = compute_room_areas(regions, *report.calibration);
    }
    for (const RoomRegion& r : regions) {
        RoomRecord rec;
        rec.label = r.label;
        rec.pixel_count = r.pixel_count;
        rec.bbox = r.bbox;
        if (r.area_m2 >= 0) rec.area_computed_m2 = r.area_m2;
        report.rooms.push_back(rec);
    }

    // tokens
    t0 = Clock::now();
    std::vector<TextToken> words = group_words(chars, 0);
    int median_w = 6;
    if (!chars.empty()) {
        std::vector<int> widths;
        widths.reserve(chars.size());
        for (const TextToken& c : chars) widths.push_back(c.bbox.width());
        std::nth_element(widths.begin(), widths.begin() + widths.size() / 2, widths.end());
        median_w = std::max(2, widths[widths.size() / 2]);
    }
    words = merge_area_tokens(words, 4 * median_w);
    const auto& dict =
        cfg.function_dictionary.empty() ? default_function_dictionary() : cfg.function_dictionary;
    for (const auto& [token, cls] : classify_tokens(words, dict)) {
        report.tokens.push_back({token, cls});
    }
    report.timings_ms["tokens"] = ms_since(t0);

    // cross-verification and label attachment
    if (!report.rooms.empty()) {
        report.rooms =
            cross_verify_areas(report.rooms, report.tokens, labeling.labels, cfg.verify_tolerance);
        for (const ClassifiedToken& ct : report.tokens) {
            if (ct.cls != TokenClass::Function && ct.cls != TokenClass::Position) continue;
            const int label = room_label_at(labeling.labels, (ct.token.bbox.x0 + ct.token.bbox.x1) / 2,
                                            (ct.token.bbox.y0 + ct.token.bbox.y1) / 2);
            if (label == 0) continue;
            for (RoomRecord& r : report.rooms) {
                if (r.label != label) continue;
                if (ct.cls == TokenClass::Function && !r.function) r.function = ct.token.text;
                if (ct.cls == TokenClass::Position && !r.position_code) r.position_code = ct.token.text;
            }
        }
    }

    if (report.calibration && !report.rooms.empty()) {
        double total = 0.0;
        for (const RoomRecord& r : report.rooms) total += r.area_computed_m2.value_or(0.0);
        report.total_area_m2 = std::round(total * 10.0) / 10.0;
    }

    if (cfg.risk) {
        int sprinklers = 0;
        const auto it = report.class_counts.find(object_class_name(ObjectClass::Sprinkler));
        if (it != report.class_counts.end()) sprinklers = it->second;
        report.risk = compute_risk_score(*cfg.risk, sprinklers);
    }

    if (cfg.save_intermediates) {
        const std::filesystem::path dir(cfg.output_dir);
        std::filesystem::create_directories(dir);
        const std::string stem = std::filesystem::path(input_path).stem().string();
        save_image(gray, (dir / (stem + ".gray.png")).string());
        save_image(cleaned, (dir / (stem + ".cleaned.png")).string());
        save_image(edges, (dir / (stem + ".edges.png")).string());
        save_image(walls, (dir / (stem + ".walls.png")).string());
        save_image(closed, (dir / (stem + ".walls_closed.png")).string());
        save_image(labeling.labels.to_debug_raster(), (dir / (stem + ".labels.png")).string());
    }

    if (scratch) {
        scratch->cleaned = std::move(cleaned);
        scratch->labels = std::move(labeling.labels);
        scratch->regions = std::move(regions);
    }
    return report;
}

}  // namespace

RasterImage render_room_overlay(const RasterImage& gray, const LabelMap& labels,
                                const std::vector<RoomRegion>& regions) {
    RasterImage out = RasterImage::create(gray.width, gray.height, 3);
    std::vector<std::array<std::uint8_t, 3>> color_of(1, {255, 255, 255});
    for (const RoomRegion& r : regions) {
        if (static_cast<int>(color_of.size()) <= r.label) color_of.resize(r.label + 1, {255, 255, 255});
        color_of[r.label] = r.color;
    }
    for (int y = 0; y < gray.height; ++y) {
        for (int x = 0; x < gray.width; ++x) {
            const std::uint8_t g = gray.at(x, y);
            const int lbl = labels.at(x, y);
            for (int c = 0; c < 3; ++c) {
                const std::uint8_t tint = lbl > 0 && lbl < static_cast<int>(color_of.size())
                                              ? color_of[lbl][c]
                                              : g;
                out.at(x, y, c) = static_cast<std::uint8_t>((g + tint) / 2);
            }
        }
    }
    return out;
}

RasterImage render_detection_overlay(const RasterImage& gray, const std::vector<Detection>& dets) {
    RasterImage out = RasterImage::create(gray.width, gray.height, 3);
    for (int y = 0; y < gray.height; ++y) {
        for (int x = 0; x < gray.width; ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = gray.at(x, y);
        }
    }
    auto mark = [&](int x, int y) {
        if (x < 0 || x >= out.width || y < 0 || y >= out.height) return;
        out.at(x, y, 0) = 220;
        out.at(x, y, 1) = 30;
        out.at(x, y, 2) = 30;
    };
    for (const Detection& d : dets) {
        for (int t = 0; t < 2; ++t) {
            for (int x = d.bbox.x0 - t; x < d.bbox.x1 + t; ++x) {
                mark(x, d.bbox.y0 - 1 - t);
                mark(x, d.bbox.y1 + t);
            }
            for (int y = d.bbox.y0 - t; y < d.bbox.y1 + t; ++y) {
                mark(d.bbox.x0 - 1 - t, y);
                mark(d.bbox.x1 + t, y);
            }
        }
    }
    return out;
}

BlueprintReport run_and_write(const PipelineConfig& cfg, const std::string& input_path) {
    PipelineScratch scratch;
    const BlueprintReport report = run_pipeline_impl(cfg, input_path, &scratch);

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    const std::string stem = std::filesystem::path(input_path).stem().string();

    std::ofstream out(dir / (stem + ".report.json"));
    if (!out) throw Error(ErrorKind::IoError, "cannot write report for " + input_path);
    out << report_to_json(report).dump(2) << "\n";

    save_image(render_room_overlay(scratch.cleaned, scratch.labels, scratch.regions),
               (dir / (stem + ".rooms.png")).string());
    save_image(render_detection_overlay(scratch.cleaned, report.detections),
               (dir / (stem + ".detections.png")).string());

    return report;
}

int report_exit_code(const BlueprintReport& report) { return report.skipped.empty() ? 0 : 2; }

}  // namespace bp
