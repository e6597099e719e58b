#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "blueprint/raster.hpp"

namespace bp {

struct SegmentationConfig {
    double canny_low = 40.0;
    double canny_high = 100.0;
    double smooth_sigma = 1.0;  // pipeline copies the preprocessing sigma here
    int merge_distance = 12;    // max gap between parallel wall faces
    int gap_close = 16;         // max door/window opening to bridge
    int min_room_area = 50;     // smaller enclosed components are noise
    int connectivity = 4;       // room labeling; hysteresis is always 8
    std::uint32_t color_seed = 1;
};

struct RoomRegion {
    int label = 0;
    long long pixel_count = 0;
    BoundingBox bbox;
    std::array<std::uint8_t, 3> color{0, 0, 0};
    double area_m2 = -1.0;  // filled by calibration; < 0 = unknown

    bool operator==(const RoomRegion&) const = default;
};

/// Gaussian smooth, Sobel gradients, direction-quantized non-maximum
/// suppression, double threshold, 8-connected hysteresis linking.
BinaryImage canny_edges(const RasterImage& img, const SegmentationConfig& cfg);

/// Merges parallel wall-face edge runs into 1-px centerlines; vertical walls
/// first, then horizontal. Runs without a counterpart pass through unchanged.
BinaryImage extract_wall_mask(const BinaryImage& edges, const SegmentationConfig& cfg);

/// Bridges collinear gaps up to gap_close along each wall direction.
BinaryImage close_openings(const BinaryImage& walls, const SegmentationConfig& cfg);

struct RoomLabeling {
    LabelMap labels;
    std::vector<RoomRegion> regions;
};

/// Connected components of non-wall pixels; border-touching space is
/// background, undersized components are discarded, labels run 1..K in
/// raster-scan order of each component's first pixel.
RoomLabeling label_rooms(const BinaryImage& walls, const SegmentationConfig& cfg);

/// Distinct seeded pseudo-random colors per label; background stays white.
RasterImage colorize_rooms(const LabelMap& labels, std::uint32_t seed);

int count_rooms(const std::vector<RoomRegion>& regions);

}  // namespace bp
