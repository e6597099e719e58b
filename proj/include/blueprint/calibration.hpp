#pragma once

#include "blueprint/preprocess.hpp"
#include "blueprint/raster.hpp"
#include "blueprint/segmentation.hpp"
#include "blueprint/textual.hpp"

namespace bp {

struct ScaleCalibration {
    enum class Source { RulerDetected, Override };

    double mm_per_pixel = 0.0;
    Source source = Source::RulerDetected;
    int sectors_used = 0;

    bool operator==(const ScaleCalibration&) const = default;
};

/// Locates the printed scale ruler: CLAHE brightening, then the brightest
/// elongated region (aspect ratio >= 5, either orientation) near an image
/// margin. Throws RulerNotFound.
BoundingBox detect_ruler_region(const RasterImage& img, const PreprocessConfig& cfg);

/// Reads tick positions and the printed sector lengths (assumed millimetres)
/// from a cropped ruler, then averages mm/pixel over the sectors. Sectors
/// deviating more than 20% from the median factor are rejected.
ScaleCalibration read_scale_factor(const RasterImage& ruler, const TextRecognizer& ocr);

/// area_m2 = pixel_count * mm_per_pixel^2 / 1e6, rounded to 0.1 m².
std::vector<RoomRegion> compute_room_areas(const std::vector<RoomRegion>& regions,
                                           const ScaleCalibration& cal);

}  // namespace bp
