#pragma once

#include <string>

#include "blueprint/config.hpp"
#include "blueprint/report.hpp"

namespace bp {

/// Full interpretation of one blueprint image. Stages that cannot run (no
/// ruler, no enclosed rooms, missing template library, ...) are recorded in
/// report.skipped rather than aborting; only unreadable input or invalid
/// configuration throws.
BlueprintReport run_pipeline(const PipelineConfig& cfg, const std::string& input_path);

/// Room labels blended over the drawing (for --save-intermediates and the
/// standard overlay outputs).
RasterImage render_room_overlay(const RasterImage& gray, const LabelMap& labels,
                                const std::vector<RoomRegion>& regions);

/// Red boxes around detections over the drawing.
RasterImage render_detection_overlay(const RasterImage& gray, const std::vector<Detection>& dets);

/// Runs the pipeline and writes <stem>.report.json plus overlay PNGs into
/// cfg.output_dir. Returns the report.
BlueprintReport run_and_write(const PipelineConfig& cfg, const std::string& input_path);

/// 0 = complete report, 2 = degraded (some stage skipped).
int report_exit_code(const BlueprintReport& report);

}  // namespace bp
