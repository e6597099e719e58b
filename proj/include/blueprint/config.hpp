#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blueprint/preprocess.hpp"
#include "blueprint/report.hpp"
#include "blueprint/segmentation.hpp"

namespace bp {

/// Full pipeline configuration. Defaults are documented in the sample config
/// shipped with the repo; file values override defaults and command-line flags
/// override the file.
struct PipelineConfig {
    PreprocessConfig preprocess;
    SegmentationConfig segmentation;

    std::optional<double> scale_override;  // mm/pixel, bypasses ruler detection
    std::string template_dir;              // empty = no object detection
    std::optional<MatchMetric> metric_override;
    std::optional<double> threshold_override;

    std::vector<std::string> function_dictionary;  // empty = built-in list
    std::vector<std::string> recognizer_command;   // empty = built-in glyph OCR
    double recognizer_min_score = 0.72;
    double verify_tolerance = 0.05;

    std::optional<RiskInputs> risk;

    std::string output_dir = ".";
    std::uint32_t seed = 1;
    int parallel_jobs = 1;
    bool save_intermediates = false;
    bool use_nlm = false;  // non-local means is costly; off by default
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::string& path);

}  // namespace bp
