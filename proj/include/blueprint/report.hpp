#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "blueprint/calibration.hpp"
#include "blueprint/objects.hpp"
#include "blueprint/segmentation.hpp"
#include "blueprint/textual.hpp"

namespace bp {

enum class Verification { Verified, Mismatch, Unverified };

const char* verification_name(Verification v);
Verification verification_from_name(const std::string& name);

struct RoomRecord {
    int label = 0;
    long long pixel_count = 0;
    BoundingBox bbox;
    std::optional<double> area_computed_m2;
    std::optional<double> area_ocr_m2;
    std::optional<std::string> function;
    std::optional<std::string> position_code;
    Verification verification = Verification::Unverified;
    double relative_error = 0.0;  // meaningful for Mismatch

    bool operator==(const RoomRecord&) const = default;
};

struct RiskInputs {
    double probability = 0.0;            // P, per year, in [0,1]
    double exposure = 0.0;               // E, currency units
    double vulnerability = 0.0;          // V, in [0,1]
    double sprinkler_effectiveness = 0.701;  // in [0.701, 0.988]
};

struct RiskResult {
    double q = 0.0;
    double v_effective = 0.0;

    bool operator==(const RiskResult&) const = default;
};

struct ClassifiedToken {
    TextToken token;
    TokenClass cls = TokenClass::Unclassified;

    bool operator==(const ClassifiedToken&) const = default;
};

struct BlueprintReport {
    std::string source;
    std::optional<ScaleCalibration> calibration;
    std::vector<RoomRecord> rooms;
    std::optional<double> total_area_m2;
    std::vector<Detection> detections;
    std::map<std::string, int> class_counts;
    std::vector<ClassifiedToken> tokens;
    std::optional<RiskResult> risk;
    std::map<std::string, std::string> skipped;    // stage -> reason
    std::map<std::string, double> timings_ms;

    bool operator==(const BlueprintReport&) const = default;
};

/// Assigns each area token to the room under its box center (wall centers go
/// to the nearest room within 10 px) and marks Verified when
/// |computed - ocr| / ocr <= tolerance. Function and position tokens attach by
/// the same containment rule.
std::vector<RoomRecord> cross_verify_areas(const std::vector<RoomRecord>& rooms,
                                           const std::vector<ClassifiedToken>& tokens,
                                           const LabelMap& labels, double tolerance);

/// Room label under a point; points on wall pixels fall back to the nearest
/// labeled pixel within 10 px. 0 when no room is nearby.
int room_label_at(const LabelMap& labels, int x, int y);

/// Q = P x E x V_effective; a detected sprinkler discounts V by the configured
/// effectiveness.
RiskResult compute_risk_score(const RiskInputs& in, int sprinklers_detected);

nlohmann::json report_to_json(const BlueprintReport& report);
BlueprintReport report_from_json(const nlohmann::json& j);

/// Serialization with the volatile timing block stripped, for byte-exact
/// run-to-run comparison.
std::string report_to_stable_string(const BlueprintReport& report);

}  // namespace bp
