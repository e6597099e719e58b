#pragma once

#include <optional>

#include "blueprint/raster.hpp"

namespace bp {

struct BinarizeSpec {
    enum class Mode { Otsu, Fixed };
    Mode mode = Mode::Otsu;
    int threshold = 128;  // used by Fixed
};

enum class MorphOp { Erode, Dilate, Open, Close };

struct StructElement {
    enum class Shape { Square, Cross };
    Shape shape = Shape::Square;
    int size = 3;  // odd
};

struct PreprocessConfig {
    std::optional<int> target_width;  // no resize when absent
    double nlm_strength = 10.0;
    int nlm_patch = 7;
    int nlm_window = 21;
    double gaussian_sigma = 1.0;
    BinarizeSpec binarize;
    StructElement morph_element;
    double clahe_clip = 2.0;
    int clahe_tiles = 8;
};

/// Bilinear resize to target_width; height follows the aspect ratio when
/// preserve_aspect is set, otherwise stays unchanged.
RasterImage resize(const RasterImage& img, int target_width, bool preserve_aspect);

/// ITU luminance weights 0.299/0.587/0.114; 1-channel input passes through.
RasterImage to_grayscale(const RasterImage& img);

/// Non-local means: each pixel becomes a patch-similarity-weighted mean over
/// its search window, weights exp(-d^2 / h^2) on the mean squared patch
/// difference d^2.
RasterImage denoise_nlm(const RasterImage& img, const PreprocessConfig& cfg);

/// Separable Gaussian, kernel radius ceil(3*sigma), reflect border padding.
RasterImage gaussian_blur(const RasterImage& img, double sigma);

/// Between-class-variance maximizing threshold; ties break to the smallest.
int otsu_threshold(const RasterImage& img);

/// Foreground = pixel value strictly above the threshold.
BinaryImage binarize(const RasterImage& img, const BinarizeSpec& spec);

RasterImage invert(const RasterImage& img);
BinaryImage invert(const BinaryImage& img);

/// Outside-image samples count as background for dilation and foreground for
/// erosion, so the pair stays dual on symmetric elements.
BinaryImage morphology(const BinaryImage& img, MorphOp op, const StructElement& element);

/// Contrast-limited adaptive histogram equalization with clip-limit
/// redistribution and bilinear blending between tile mappings.
RasterImage clahe(const RasterImage& img, double clip, int tiles);

}  // namespace bp
