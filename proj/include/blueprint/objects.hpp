#pragma once

#include <string>
#include <vector>

#include "blueprint/raster.hpp"

namespace bp {

enum class ObjectClass { Door, Window, Sprinkler, FireDoor, Other };

const char* object_class_name(ObjectClass c);
ObjectClass object_class_from_name(const std::string& name);

enum class MatchMetric {
    SquaredDifference,
    NormalizedSquaredDifference,
    CrossCorrelation,
    NormalizedCrossCorrelation,
    CorrelationCoefficient,
    NormalizedCorrelationCoefficient,
};

const char* match_metric_name(MatchMetric m);
MatchMetric match_metric_from_name(const std::string& name);

/// True when the best match is the minimum score (the squared-difference pair).
bool metric_is_min(MatchMetric m);

struct Template {
    std::string id;
    ObjectClass cls = ObjectClass::Other;
    std::string cls_name;  // free-form name for Other
    RasterImage image;     // grayscale
    std::vector<int> rotations;  // extra quarter-turns to try (1..3)
    MatchMetric metric = MatchMetric::NormalizedCorrelationCoefficient;
    double threshold = 0.9;
};

struct Detection {
    std::string template_id;
    ObjectClass cls = ObjectClass::Other;
    std::string cls_name;
    BoundingBox bbox;
    double score = 0.0;
    MatchMetric metric = MatchMetric::NormalizedCorrelationCoefficient;

    bool operator==(const Detection&) const = default;
};

/// Reads manifest.json in the directory ({"templates": [{id, file, class,
/// rotations, metric, threshold}]}) and loads every referenced image as
/// grayscale.
std::vector<Template> load_template_library(const std::string& dir);

RasterImage rotate_quarter(const RasterImage& img, int turns);

/// Dense score map over all valid placements; map size is
/// (src.w - t.w + 1) x (src.h - t.h + 1).
std::vector<double> match_score_map(const RasterImage& src, const RasterImage& tmpl,
                                    MatchMetric metric);

/// Best placement over all configured rotations; ties break in raster-scan
/// order (rotation order, then row, then column).
Detection match_template(const RasterImage& src, const Template& t, MatchMetric metric);

/// All placements beating the threshold, greedily suppressed so surviving
/// boxes pairwise overlap at most nms_iou; sorted best-first.
std::vector<Detection> match_template_multi(const RasterImage& src, const Template& t,
                                            MatchMetric metric, double threshold, double nms_iou);

}  // namespace bp
