#include "blueprint/raster.hpp"

#include <algorithm>

namespace bp {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::FileNotFound: return "FileNotFound";
        case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorKind::CorruptImage: return "CorruptImage";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::OutOfBounds: return "OutOfBounds";
        case ErrorKind::ZeroDimension: return "ZeroDimension";
        case ErrorKind::NoEnclosedRegions: return "NoEnclosedRegions";
        case ErrorKind::RulerNotFound: return "RulerNotFound";
        case ErrorKind::NoLegibleSectors: return "NoLegibleSectors";
        case ErrorKind::InconsistentSectors: return "InconsistentSectors";
        case ErrorKind::ManifestMissing: return "ManifestMissing";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::MissingImage: return "MissingImage";
        case ErrorKind::TemplateTooLarge: return "TemplateTooLarge";
        case ErrorKind::RecognizerUnavailable: return "RecognizerUnavailable";
        case ErrorKind::NotAnArea: return "NotAnArea";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

BoundingBox BoundingBox::hull(const BoundingBox& a, const BoundingBox& b) {
    if (!a.valid()) return b;
    if (!b.valid()) return a;
    return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

double BoundingBox::iou(const BoundingBox& a, const BoundingBox& b) {
    const int ix0 = std::max(a.x0, b.x0);
    const int iy0 = std::max(a.y0, b.y0);
    const int ix1 = std::min(a.x1, b.x1);
    const int iy1 = std::min(a.y1, b.y1);
    if (ix0 >= ix1 || iy0 >= iy1) return 0.0;
    const double inter = static_cast<double>(ix1 - ix0) * (iy1 - iy0);
    const double uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
    return uni > 0 ? inter / uni : 0.0;
}

RasterImage RasterImage::create(int w, int h, int c, std::uint8_t fill) {
    if (w < 1 || h < 1) throw Error(ErrorKind::ZeroDimension, "image dimensions must be >= 1");
    if (c != 1 && c != 3) throw Error(ErrorKind::UnsupportedFormat, "channels must be 1 or 3");
    RasterImage img;
    img.width = w;
    img.height = h;
    img.channels = c;
    img.pixels.assign(static_cast<std::size_t>(w) * h * c, fill);
    return img;
}

BinaryImage BinaryImage::create(int w, int h, bool fill) {
    if (w < 1 || h < 1) throw Error(ErrorKind::ZeroDimension, "image dimensions must be >= 1");
    BinaryImage img;
    img.width = w;
    img.height = h;
    img.bits.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
    return img;
}

long long BinaryImage::foreground_count() const {
    long long n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

RasterImage BinaryImage::to_raster() const {
    RasterImage out = RasterImage::create(width, height, 1);
    for (std::size_t i = 0; i < bits.size(); ++i) out.pixels[i] = bits[i] ? 255 : 0;
    return out;
}

LabelMap LabelMap::create(int w, int h) {
    if (w < 1 || h < 1) throw Error(ErrorKind::ZeroDimension, "label map dimensions must be >= 1");
    LabelMap m;
    m.width = w;
    m.height = h;
    m.labels.assign(static_cast<std::size_t>(w) * h, 0);
    return m;
}

std::int32_t LabelMap::max_label() const {
    std::int32_t k = 0;
    for (std::int32_t v : labels) k = std::max(k, v);
    return k;
}

RasterImage LabelMap::to_debug_raster() const {
    RasterImage out = RasterImage::create(width, height, 1);
    const std::int32_t k = max_label();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.pixels[i] = k > 0 ? static_cast<std::uint8_t>(labels[i] * 255 / k) : 0;
    }
    return out;
}

static void check_box(const BoundingBox& box, int w, int h) {
    if (!box.valid() || box.x0 < 0 || box.y0 < 0 || box.x1 > w || box.y1 > h) {
        throw Error(ErrorKind::OutOfBounds, "crop box outside image bounds");
    }
}

RasterImage crop(const RasterImage& img, const BoundingBox& box) {
    check_box(box, img.width, img.height);
    RasterImage out = RasterImage::create(box.width(), box.height(), img.channels);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = img.at(box.x0 + x, box.y0 + y, c);
            }
        }
    }
    return out;
}

BinaryImage crop(const BinaryImage& img, const BoundingBox& box) {
    check_box(box, img.width, img.height);
    BinaryImage out = BinaryImage::create(box.width(), box.height());
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.set(x, y, img.get(box.x0 + x, box.y0 + y));
        }
    }
    return out;
}

}  // namespace bp
