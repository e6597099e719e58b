#include "blueprint/report.hpp"

#include <algorithm>
#include <cmath>

namespace bp {

const char* verification_name(Verification v) {
    switch (v) {
        case Verification::Verified: return "verified";
        case Verification::Mismatch: return "mismatch";
        case Verification::Unverified: return "unverified";
    }
    return "unverified";
}

Verification verification_from_name(const std::string& name) {
    if (name == "verified") return Verification::Verified;
    if (name == "mismatch") return Verification::Mismatch;
    return Verification::Unverified;
}

// Points on wall pixels fall back to the nearest labeled pixel within 10 px
// (smallest label breaks distance ties).
int room_label_at(const LabelMap& labels, int cx, int cy) {
    if (cx < 0 || cx >= labels.width || cy < 0 || cy >= labels.height) return 0;
    if (labels.at(cx, cy) > 0) return labels.at(cx, cy);
    for (int r = 1; r <= 10; ++r) {
        int best = 0;
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                const int x = cx + dx, y = cy + dy;
                if (x < 0 || x >= labels.width || y < 0 || y >= labels.height) continue;
                const int v = labels.at(x, y);
                if (v > 0 && (best == 0 || v < best)) best = v;
            }
        }
        if (best > 0) return best;
    }
    return 0;
}

std::vector<RoomRecord> cross_verify_areas(const std::vector<RoomRecord>& rooms,
                                           const std::vector<ClassifiedToken>& tokens,
                                           const LabelMap& labels, double tolerance) {
    std::vector<RoomRecord> out = rooms;
    for (const ClassifiedToken& ct : tokens) {
        if (ct.cls != TokenClass::AreaSize) continue;
        double value = 0.0;
        try {
            value = parse_area_label(ct.token.text);
        } catch (const Error&) {
            continue;
        }
        const int cx = (ct.token.bbox.x0 + ct.token.bbox.x1) / 2;
        const int cy = (ct.token.bbox.y0 + ct.token.bbox.y1) / 2;
        const int label = room_label_at(labels, cx, cy);
        if (label == 0) continue;
        for (RoomRecord& r : out) {
            if (r.label == label && !r.area_ocr_m2) r.area_ocr_m2 = value;
        }
    }
    for (RoomRecord& r : out) {
        if (!r.area_ocr_m2 || !r.area_computed_m2) {
            r.verification = Verification::Unverified;
            r.relative_error = 0.0;
            continue;
        }
        const double ocr = *r.area_ocr_m2;
        const double err = ocr != 0.0 ? std::abs(*r.area_computed_m2 - ocr) / ocr
                                      : (*r.area_computed_m2 == 0.0 ? 0.0 : 1.0);
        r.relative_error = err;
        r.verification = err <= tolerance ? Verification::Verified : Verification::Mismatch;
        if (r.verification == Verification::Verified) r.relative_error = err;
    }
    return out;
}

RiskResult compute_risk_score(const RiskInputs& in, int sprinklers_detected) {
    RiskResult r;
    r.v_effective = sprinklers_detected > 0
                        ? in.vulnerability * (1.0 - in.sprinkler_effectiveness)
                        : in.vulnerability;
    r.q = in.probability * in.exposure * r.v_effective;
    return r;
}

namespace {

nlohmann::json box_to_json(const BoundingBox& b) { return nlohmann::json::array({b.x0, b.y0, b.x1, b.y1}); }

BoundingBox box_from_json(const nlohmann::json& j) {
    return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

}  // namespace

nlohmann::json report_to_json(const BlueprintReport& report) {
    nlohmann::json j;
    j["source"] = report.source;

    if (report.calibration) {
        j["calibration"] = {
            {"mm_per_pixel", report.calibration->mm_per_pixel},
            {"source", report.calibration->source == ScaleCalibration::Source::Override ? "override"
                                                                                       : "ruler"},
            {"sectors_used", report.calibration->sectors_used},
        };
    } else {
        j["calibration"] = nullptr;
    }

    j["rooms"] = nlohmann::json::array();
    for (const RoomRecord& r : report.rooms) {
        nlohmann::json room = {
            {"label", r.label},
            {"pixel_count", r.pixel_count},
            {"bbox", box_to_json(r.bbox)},
            {"area_m2", r.area_computed_m2 ? nlohmann::json(*r.area_computed_m2) : nlohmann::json()},
            {"area_ocr_m2", r.area_ocr_m2 ? nlohmann::json(*r.area_ocr_m2) : nlohmann::json()},
            {"function", r.function ? nlohmann::json(*r.function) : nlohmann::json()},
            {"position_code", r.position_code ? nlohmann::json(*r.position_code) : nlohmann::json()},
            {"verification", verification_name(r.verification)},
            {"relative_error", r.relative_error},
        };
        j["rooms"].push_back(std::move(room));
    }
    j["room_count"] = report.rooms.size();
    j["total_area_m2"] = report.total_area_m2 ? nlohmann::json(*report.total_area_m2) : nlohmann::json();

    j["detections"] = nlohmann::json::array();
    for (const Detection& d : report.detections) {
        j["detections"].push_back({
            {"template_id", d.template_id},
            {"class", d.cls == ObjectClass::Other && !d.cls_name.empty() ? d.cls_name
                                                                         : object_class_name(d.cls)},
            {"bbox", box_to_json(d.bbox)},
            {"score", d.score},
            {"metric", match_metric_name(d.metric)},
        });
    }
    j["class_counts"] = report.class_counts;

    j["tokens"] = nlohmann::json::array();
    for (const ClassifiedToken& t : report.tokens) {
        j["tokens"].push_back({
            {"text", t.token.text},
            {"bbox", box_to_json(t.token.bbox)},
            {"confidence", t.token.confidence},
            {"class", token_class_name(t.cls)},
        });
    }

    j["risk"] = report.risk
                    ? nlohmann::json{{"q", report.risk->q}, {"v_effective", report.risk->v_effective}}
                    : nlohmann::json();
    j["skipped"] = report.skipped;
    j["timings_ms"] = report.timings_ms;
    return j;
}

BlueprintReport report_from_json(const nlohmann::json& j) {
    BlueprintReport r;
    r.source = j.value("source", "");

    if (!j.at("calibration").is_null()) {
        const auto& c = j.at("calibration");
        ScaleCalibration cal;
        cal.mm_per_pixel = c.at("mm_per_pixel").get<double>();
        cal.source = c.at("source").get<std::string>() == "override"
                         ? ScaleCalibration::Source::Override
                         : ScaleCalibration::Source::RulerDetected;
        cal.sectors_used = c.at("sectors_used").get<int>();
        r.calibration = cal;
    }

    for (const auto& room : j.at("rooms")) {
        RoomRecord rec;
        rec.label = room.at("label").get<int>();
        rec.pixel_count = room.at("pixel_count").get<long long>();
        rec.bbox = box_from_json(room.at("bbox"));
        if (!room.at("area_m2").is_null()) rec.area_computed_m2 = room.at("area_m2").get<double>();
        if (!room.at("area_ocr_m2").is_null()) rec.area_ocr_m2 = room.at("area_ocr_m2").get<double>();
        if (!room.at("function").is_null()) rec.function = room.at("function").get<std::string>();
        if (!room.at("position_code").is_null()) {
            rec.position_code = room.at("position_code").get<std::string>();
        }
        rec.verification = verification_from_name(room.at("verification").get<std::string>());
        rec.relative_error = room.at("relative_error").get<double>();
        r.rooms.push_back(std::move(rec));
    }
    if (!j.at("total_area_m2").is_null()) r.total_area_m2 = j.at("total_area_m2").get<double>();

    for (const auto& det : j.at("detections")) {
        Detection d;
        d.template_id = det.at("template_id").get<std::string>();
        const std::string cls = det.at("class").get<std::string>();
        d.cls = object_class_from_name(cls);
        if (d.cls == ObjectClass::Other) d.cls_name = cls;
        d.bbox = box_from_json(det.at("bbox"));
        d.score = det.at("score").get<double>();
        d.metric = match_metric_from_name(det.at("metric").get<std::string>());
        r.detections.push_back(std::move(d));
    }
    r.class_counts = j.value("class_counts", std::map<std::string, int>{});

    for (const auto& tok : j.at("tokens")) {
        ClassifiedToken t;
        t.token.text = tok.at("text").get<std::string>();
        t.token.bbox = box_from_json(tok.at("bbox"));
        t.token.confidence = tok.at("confidence").get<double>();
        t.cls = token_class_from_name(tok.at("class").get<std::string>());
        r.tokens.push_back(std::move(t));
    }

    if (!j.at("risk").is_null()) {
        r.risk = RiskResult{j.at("risk").at("q").get<double>(),
                            j.at("risk").at("v_effective").get<double>()};
    }
    r.skipped = j.value("skipped", std::map<std::string, std::string>{});
    r.timings_ms = j.value("timings_ms", std::map<std::string, double>{});
    return r;
}

std::string report_to_stable_string(const BlueprintReport& report) {
    nlohmann::json j = report_to_json(report);
    j.erase("timings_ms");
    return j.dump(2);
}

}  // namespace bp
