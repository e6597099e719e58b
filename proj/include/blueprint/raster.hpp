#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bp {

enum class ErrorKind {
    FileNotFound,
    UnsupportedFormat,
    CorruptImage,
    IoError,
    OutOfBounds,
    ZeroDimension,
    NoEnclosedRegions,
    RulerNotFound,
    NoLegibleSectors,
    InconsistentSectors,
    ManifestMissing,
    DuplicateId,
    MissingImage,
    TemplateTooLarge,
    RecognizerUnavailable,
    NotAnArea,
    InvalidSpec,
    InvalidConfig,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

/// Pixel rectangle, inclusive on the left/top, exclusive on the right/bottom.
struct BoundingBox {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    long long area() const { return static_cast<long long>(width()) * height(); }
    bool valid() const { return x0 < x1 && y0 < y1; }
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }

    bool operator==(const BoundingBox&) const = default;

    static BoundingBox hull(const BoundingBox& a, const BoundingBox& b);
    static double iou(const BoundingBox& a, const BoundingBox& b);
};

/// 8-bit raster, 1 (gray) or 3 (RGB) channels, row-major.
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    static RasterImage create(int w, int h, int c, std::uint8_t fill = 0);

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool operator==(const RasterImage&) const = default;
};

/// Two-tone image; every sample is foreground (true) or background (false).
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // 0 or 1 per pixel

    static BinaryImage create(int w, int h, bool fill = false);

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

    long long foreground_count() const;

    /// Renders to an 8-bit gray image with samples in {0, 255}.
    RasterImage to_raster() const;

    bool operator==(const BinaryImage&) const = default;
};

/// Connected-component labels; 0 is background, rooms are 1..K.
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::int32_t> labels;

    static LabelMap create(int w, int h);

    std::int32_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::int32_t& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }

    std::int32_t max_label() const;

    /// Labels scaled into 0-255 for debug export.
    RasterImage to_debug_raster() const;

    bool operator==(const LabelMap&) const = default;
};

RasterImage crop(const RasterImage& img, const BoundingBox& box);
BinaryImage crop(const BinaryImage& img, const BoundingBox& box);

}  // namespace bp
