#include "blueprint/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bp {

namespace {

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

int reflect(int i, int n) {
    // cba|abc|cba
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

int clamp_idx(int i, int n) { return std::clamp(i, 0, n - 1); }

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

}  // namespace

RasterImage resize(const RasterImage& img, int target_width, bool preserve_aspect) {
    if (target_width < 1) throw Error(ErrorKind::ZeroDimension, "target width must be >= 1");
    const int target_height =
        preserve_aspect
            ? std::max(1, static_cast<int>(std::lround(
                              static_cast<double>(img.height) * target_width / img.width)))
            : img.height;

    RasterImage out = RasterImage::create(target_width, target_height, img.channels);
    const double sx = static_cast<double>(img.width) / target_width;
    const double sy = static_cast<double>(img.height) / target_height;
    for (int y = 0; y < target_height; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = clamp_idx(static_cast<int>(std::floor(fy)), img.height);
        const int y1 = clamp_idx(y0 + 1, img.height);
        const double wy = std::clamp(fy - y0, 0.0, 1.0);
        for (int x = 0; x < target_width; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = clamp_idx(static_cast<int>(std::floor(fx)), img.width);
            const int x1 = clamp_idx(x0 + 1, img.width);
            const double wx = std::clamp(fx - x0, 0.0, 1.0);
            for (int c = 0; c < img.channels; ++c) {
                const double top = img.at(x0, y0, c) * (1 - wx) + img.at(x1, y0, c) * wx;
                const double bot = img.at(x0, y1, c) * (1 - wx) + img.at(x1, y1, c) * wx;
                out.at(x, y, c) = clamp_u8(top * (1 - wy) + bot * wy);
            }
        }
    }
    return out;
}

RasterImage to_grayscale(const RasterImage& img) {
    if (img.channels == 1) return img;
    RasterImage out = RasterImage::create(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            out.at(x, y) = clamp_u8(0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                                    0.114 * img.at(x, y, 2));
        }
    }
    return out;
}

RasterImage denoise_nlm(const RasterImage& img, const PreprocessConfig& cfg) {
    if (img.channels != 1) throw Error(ErrorKind::UnsupportedFormat, "denoise_nlm expects grayscale");
    const int pr = cfg.nlm_patch / 2;
    const int wr = cfg.nlm_window / 2;
    const double h2 = cfg.nlm_strength * cfg.nlm_strength;
    const double patch_n = static_cast<double>(cfg.nlm_patch) * cfg.nlm_patch;

    RasterImage out = RasterImage::create(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double wsum = 0.0, acc = 0.0;
            for (int qy = y - wr; qy <= y + wr; ++qy) {
                for (int qx = x - wr; qx <= x + wr; ++qx) {
                    double d2 = 0.0;
                    for (int oy = -pr; oy <= pr; ++oy) {
                        for (int ox = -pr; ox <= pr; ++ox) {
                            const int a = img.at(clamp_idx(x + ox, img.width), clamp_idx(y + oy, img.height));
                            const int b = img.at(clamp_idx(qx + ox, img.width), clamp_idx(qy + oy, img.height));
                            d2 += static_cast<double>(a - b) * (a - b);
                        }
                    }
                    d2 /= patch_n;
                    const double w = std::exp(-d2 / h2);
                    wsum += w;
                    acc += w * img.at(clamp_idx(qx, img.width), clamp_idx(qy, img.height));
                }
            }
            out.at(x, y) = clamp_u8(acc / wsum);
        }
    }
    return out;
}

RasterImage gaussian_blur(const RasterImage& img, double sigma) {
    if (img.channels != 1) throw Error(ErrorKind::UnsupportedFormat, "gaussian_blur expects grayscale");
    if (sigma <= 0) throw Error(ErrorKind::InvalidConfig, "sigma must be > 0");
    const std::vector<double> k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);

    std::vector<double> tmp(static_cast<std::size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += k[i + radius] * img.at(reflect(x + i, img.width), y);
            }
            tmp[static_cast<std::size_t>(y) * img.width + x] = acc;
        }
    }
    RasterImage out = RasterImage::create(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += k[i + radius] * tmp[static_cast<std::size_t>(reflect(y + i, img.height)) * img.width + x];
            }
            out.at(x, y) = clamp_u8(acc);
        }
    }
    return out;
}

int otsu_threshold(const RasterImage& img) {
    if (img.channels != 1) throw Error(ErrorKind::UnsupportedFormat, "otsu expects grayscale");
    std::array<long long, 256> hist{};
    for (std::uint8_t v : img.pixels) ++hist[v];

    int levels = 0, single = -1;
    for (int v = 0; v < 256; ++v) {
        if (hist[v] > 0) {
            ++levels;
            single = v;
        }
    }
    // single gray level: threshold at that level, everything goes background
    if (levels <= 1) return single < 0 ? 0 : single;

    const double total = static_cast<double>(img.pixels.size());
    double sum_all = 0.0;
    for (int v = 0; v < 256; ++v) sum_all += static_cast<double>(v) * hist[v];

    int best_t = 0;
    double best_var = -1.0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t < 256; ++t) {
        w0 += hist[t];
        sum0 += static_cast<double>(t) * hist[t];
        const double w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

BinaryImage binarize(const RasterImage& img, const BinarizeSpec& spec) {
    if (img.channels != 1) throw Error(ErrorKind::UnsupportedFormat, "binarize expects grayscale");
    const int t = spec.mode == BinarizeSpec::Mode::Fixed ? spec.threshold : otsu_threshold(img);
    BinaryImage out = BinaryImage::create(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) out.bits[i] = img.pixels[i] > t ? 1 : 0;
    return out;
}

RasterImage invert(const RasterImage& img) {
    RasterImage out = img;
    for (auto& v : out.pixels) v = static_cast<std::uint8_t>(255 - v);
    return out;
}

BinaryImage invert(const BinaryImage& img) {
    BinaryImage out = img;
    for (auto& b : out.bits) b = b ? 0 : 1;
    return out;
}

namespace {

std::vector<std::pair<int, int>> element_offsets(const StructElement& e) {
    if (e.size < 1 || e.size % 2 == 0) {
        throw Error(ErrorKind::InvalidConfig, "structuring element size must be odd");
    }
    const int r = e.size / 2;
    std::vector<std::pair<int, int>> offs;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            if (e.shape == StructElement::Shape::Cross && dx != 0 && dy != 0) continue;
            offs.emplace_back(dx, dy);
        }
    }
    return offs;
}

BinaryImage morph_once(const BinaryImage& img, bool erode,
                       const std::vector<std::pair<int, int>>& offs) {
    BinaryImage out = BinaryImage::create(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            bool v = erode;
            for (const auto& [dx, dy] : offs) {
                const int px = x + dx, py = y + dy;
                const bool in = img.in_bounds(px, py) ? img.get(px, py) : erode;
                if (erode) {
                    if (!in) {
                        v = false;
                        break;
                    }
                } else {
                    if (in) {
                        v = true;
                        break;
                    }
                }
            }
            out.set(x, y, v);
        }
    }
    return out;
}

}  // namespace

BinaryImage morphology(const BinaryImage& img, MorphOp op, const StructElement& element) {
    const auto offs = element_offsets(element);
    switch (op) {
        case MorphOp::Erode: return morph_once(img, true, offs);
        case MorphOp::Dilate: return morph_once(img, false, offs);
        case MorphOp::Open: return morph_once(morph_once(img, true, offs), false, offs);
        case MorphOp::Close: return morph_once(morph_once(img, false, offs), true, offs);
    }
    throw Error(ErrorKind::InvalidConfig, "unknown morphological operation");
}

namespace {

// Equalization mapping over one (possibly clipped) histogram.
std::array<std::uint8_t, 256> equalize_mapping(const std::array<double, 256>& hist, double total) {
    std::array<std::uint8_t, 256> map{};
    int nonzero = 0, single = 0;
    for (int v = 0; v < 256; ++v) {
        if (hist[v] > 0) {
            ++nonzero;
            single = v;
        }
    }
    if (nonzero <= 1) {
        for (int v = 0; v < 256; ++v) map[v] = static_cast<std::uint8_t>(v);
        (void)single;
        return map;
    }
    double cdf = 0.0, cdf_min = 0.0;
    bool seen = false;
    for (int v = 0; v < 256; ++v) {
        cdf += hist[v];
        if (!seen && hist[v] > 0) {
            cdf_min = cdf;
            seen = true;
        }
        const double denom = total - cdf_min;
        map[v] = denom > 0 ? clamp_u8((cdf - cdf_min) * 255.0 / denom) : static_cast<std::uint8_t>(v);
    }
    return map;
}

}  // namespace

RasterImage clahe(const RasterImage& img, double clip, int tiles) {
    if (img.channels != 1) throw Error(ErrorKind::UnsupportedFormat, "clahe expects grayscale");
    if (clip < 1.0 || tiles < 1) throw Error(ErrorKind::InvalidConfig, "clahe needs clip >= 1 and tiles >= 1");
    const int n = std::min({tiles, img.width, img.height});
    const int tw = (img.width + n - 1) / n;
    const int th = (img.height + n - 1) / n;

    std::vector<std::array<std::uint8_t, 256>> maps(static_cast<std::size_t>(n) * n);
    for (int ty = 0; ty < n; ++ty) {
        for (int tx = 0; tx < n; ++tx) {
            const int x0 = tx * tw, y0 = ty * th;
            const int x1 = std::min(img.width, x0 + tw), y1 = std::min(img.height, y0 + th);
            std::array<double, 256> hist{};
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) hist[img.at(x, y)] += 1.0;
            }
            const double total = static_cast<double>(x1 - x0) * (y1 - y0);
            const double limit = std::max(1.0, clip * total / 256.0);
            double excess = 0.0;
            for (double& h : hist) {
                if (h > limit) {
                    excess += h - limit;
                    h = limit;
                }
            }
            const double add = excess / 256.0;
            for (double& h : hist) h += add;
            maps[static_cast<std::size_t>(ty) * n + tx] = equalize_mapping(hist, total);
        }
    }

    RasterImage out = RasterImage::create(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y) {
        const double fy = (static_cast<double>(y) - th / 2.0 + 0.5) / th;
        const int ty0 = clamp_idx(static_cast<int>(std::floor(fy)), n);
        const int ty1 = clamp_idx(ty0 + 1, n);
        const double wy = std::clamp(fy - std::floor(fy), 0.0, 1.0);
        const double by = fy < 0 ? 0.0 : (fy > n - 1 ? 1.0 : wy);
        for (int x = 0; x < img.width; ++x) {
            const double fx = (static_cast<double>(x) - tw / 2.0 + 0.5) / tw;
            const int tx0 = clamp_idx(static_cast<int>(std::floor(fx)), n);
            const int tx1 = clamp_idx(tx0 + 1, n);
            const double wx = std::clamp(fx - std::floor(fx), 0.0, 1.0);
            const double bx = fx < 0 ? 0.0 : (fx > n - 1 ? 1.0 : wx);
            const std::uint8_t v = img.at(x, y);
            const double m00 = maps[static_cast<std::size_t>(ty0) * n + tx0][v];
            const double m01 = maps[static_cast<std::size_t>(ty0) * n + tx1][v];
            const double m10 = maps[static_cast<std::size_t>(ty1) * n + tx0][v];
            const double m11 = maps[static_cast<std::size_t>(ty1) * n + tx1][v];
            out.at(x, y) = clamp_u8((m00 * (1 - bx) + m01 * bx) * (1 - by) + (m10 * (1 - bx) + m11 * bx) * by);
        }
    }
    return out;
}

}  // namespace bp
