#include "blueprint/objects.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "blueprint/image_io.hpp"
#include "blueprint/preprocess.hpp"

namespace bp {

const char* object_class_name(ObjectClass c) {
    switch (c) {
        case ObjectClass::Door: return "door";
        case ObjectClass::Window: return "window";
        case ObjectClass::Sprinkler: return "sprinkler";
        case ObjectClass::FireDoor: return "fire_door";
        case ObjectClass::Other: return "other";
    }
    return "other";
}

ObjectClass object_class_from_name(const std::string& name) {
    if (name == "door") return ObjectClass::Door;
    if (name == "window") return ObjectClass::Window;
    if (name == "sprinkler") return ObjectClass::Sprinkler;
    if (name == "fire_door") return ObjectClass::FireDoor;
    return ObjectClass::Other;
}

const char* match_metric_name(MatchMetric m) {
    switch (m) {
        case MatchMetric::SquaredDifference: return "sqdiff";
        case MatchMetric::NormalizedSquaredDifference: return "sqdiff_normed";
        case MatchMetric::CrossCorrelation: return "ccorr";
        case MatchMetric::NormalizedCrossCorrelation: return "ccorr_normed";
        case MatchMetric::CorrelationCoefficient: return "ccoeff";
        case MatchMetric::NormalizedCorrelationCoefficient: return "ccoeff_normed";
    }
    return "ccoeff_normed";
}

MatchMetric match_metric_from_name(const std::string& name) {
    if (name == "sqdiff") return MatchMetric::SquaredDifference;
    if (name == "sqdiff_normed") return MatchMetric::NormalizedSquaredDifference;
    if (name == "ccorr") return MatchMetric::CrossCorrelation;
    if (name == "ccorr_normed") return MatchMetric::NormalizedCrossCorrelation;
    if (name == "ccoeff") return MatchMetric::CorrelationCoefficient;
    if (name == "ccoeff_normed") return MatchMetric::NormalizedCorrelationCoefficient;
    throw Error(ErrorKind::InvalidConfig, "unknown match metric '" + name + "'");
}

bool metric_is_min(MatchMetric m) {
    return m == MatchMetric::SquaredDifference || m == MatchMetric::NormalizedSquaredDifference;
}

RasterImage rotate_quarter(const RasterImage& img, int turns) {
    turns = ((turns % 4) + 4) % 4;
    if (turns == 0) return img;
    RasterImage out = turns == 2 ? RasterImage::create(img.width, img.height, img.channels)
                                 : RasterImage::create(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            int nx = 0, ny = 0;
            switch (turns) {
                case 1: nx = img.height - 1 - y; ny = x; break;          // 90° cw
                case 2: nx = img.width - 1 - x; ny = img.height - 1 - y; break;
                case 3: nx = y; ny = img.width - 1 - x; break;
            }
            for (int c = 0; c < img.channels; ++c) out.at(nx, ny, c) = img.at(x, y, c);
        }
    }
    return out;
}

std::vector<double> match_score_map(const RasterImage& src, const RasterImage& tmpl,
                                    MatchMetric metric) {
    if (src.channels != 1 || tmpl.channels != 1) {
        throw Error(ErrorKind::UnsupportedFormat, "template matching expects grayscale");
    }
    if (tmpl.width > src.width || tmpl.height > src.height) {
        throw Error(ErrorKind::TemplateTooLarge, "template exceeds source dimensions");
    }
    const int mw = src.width - tmpl.width + 1;
    const int mh = src.height - tmpl.height + 1;
    const double tn = static_cast<double>(tmpl.width) * tmpl.height;

    double t_sum = 0.0, t_sq = 0.0;
    for (std::uint8_t v : tmpl.pixels) {
        t_sum += v;
        t_sq += static_cast<double>(v) * v;
    }
    const double t_mean = t_sum / tn;
    const double t_var = t_sq - t_sum * t_sum / tn;  // sum of squared deviations

    std::vector<double> map(static_cast<std::size_t>(mw) * mh, 0.0);
    for (int y = 0; y < mh; ++y) {
        for (int x = 0; x < mw; ++x) {
            double i_sum = 0.0, i_sq = 0.0, cross = 0.0, sqdiff = 0.0;
            for (int ty = 0; ty < tmpl.height; ++ty) {
                for (int tx = 0; tx < tmpl.width; ++tx) {
                    const double tv = tmpl.at(tx, ty);
                    const double iv = src.at(x + tx, y + ty);
                    i_sum += iv;
                    i_sq += iv * iv;
                    cross += tv * iv;
                    sqdiff += (tv - iv) * (tv - iv);
                }
            }
            double score = 0.0;
            switch (metric) {
                case MatchMetric::SquaredDifference:
                    score = sqdiff;
                    break;
                case MatchMetric::NormalizedSquaredDifference: {
                    const double denom = std::sqrt(t_sq * i_sq);
                    score = denom > 0 ? sqdiff / denom : 0.0;
                    break;
                }
                case MatchMetric::CrossCorrelation:
                    score = cross;
                    break;
                case MatchMetric::NormalizedCrossCorrelation: {
                    const double denom = std::sqrt(t_sq * i_sq);
                    score = denom > 0 ? cross / denom : 0.0;
                    break;
                }
                case MatchMetric::CorrelationCoefficient:
                case MatchMetric::NormalizedCorrelationCoefficient: {
                    const double i_var = i_sq - i_sum * i_sum / tn;
                    const double cov = cross - t_mean * i_sum;  // sum T'·I == sum T'·I'
                    if (metric == MatchMetric::CorrelationCoefficient) {
                        score = cov;
                    } else {
                        const double denom = std::sqrt(t_var * i_var);
                        score = denom > 0 ? cov / denom : 0.0;
                    }
                    break;
                }
            }
            map[static_cast<std::size_t>(y) * mw + x] = score;
        }
    }
    return map;
}

namespace {

struct Candidate {
    Detection det;
    int rotation_index;
};

std::vector<RasterImage> template_orientations(const Template& t) {
    std::vector<RasterImage> out{t.image};
    for (int turns : t.rotations) out.push_back(rotate_quarter(t.image, turns));
    return out;
}

}  // namespace

Detection match_template(const RasterImage& src, const Template& t, MatchMetric metric) {
    const bool minimize = metric_is_min(metric);
    Detection best;
    bool have = false;
    for (const RasterImage& tmpl : template_orientations(t)) {
        const int mw = src.width - tmpl.width + 1;
        const auto map = match_score_map(src, tmpl, metric);
        for (std::size_t i = 0; i < map.size(); ++i) {
            const bool better = !have || (minimize ? map[i] < best.score : map[i] > best.score);
            if (better) {
                const int x = static_cast<int>(i % mw);
                const int y = static_cast<int>(i / mw);
                best = {t.id, t.cls, t.cls_name,
                        {x, y, x + tmpl.width, y + tmpl.height}, map[i], metric};
                have = true;
            }
        }
    }
    return best;
}

std::vector<Detection> match_template_multi(const RasterImage& src, const Template& t,
                                            MatchMetric metric, double threshold, double nms_iou) {
    const bool minimize = metric_is_min(metric);
    std::vector<Detection> candidates;
    for (const RasterImage& tmpl : template_orientations(t)) {
        const int mw = src.width - tmpl.width + 1;
        const auto map = match_score_map(src, tmpl, metric);
        for (std::size_t i = 0; i < map.size(); ++i) {
            if (minimize ? map[i] <= threshold : map[i] >= threshold) {
                const int x = static_cast<int>(i % mw);
                const int y = static_cast<int>(i / mw);
                candidates.push_back({t.id, t.cls, t.cls_name,
                                      {x, y, x + tmpl.width, y + tmpl.height}, map[i], metric});
            }
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](const Detection& a, const Detection& b) {
        if (a.score != b.score) return minimize ? a.score < b.score : a.score > b.score;
        return std::tie(a.bbox.y0, a.bbox.x0) < std::tie(b.bbox.y0, b.bbox.x0);
    });

    std::vector<Detection> kept;
    for (const Detection& c : candidates) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (BoundingBox::iou(c.bbox, k.bbox) > nms_iou) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(c);
    }
    return kept;
}

std::vector<Template> load_template_library(const std::string& dir) {
    const std::filesystem::path manifest_path = std::filesystem::path(dir) / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw Error(ErrorKind::ManifestMissing, manifest_path.string());

    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ManifestMissing, std::string("unparsable manifest: ") + e.what());
    }

    std::vector<Template> out;
    std::set<std::string> ids;
    for (const auto& entry : manifest.value("templates", nlohmann::json::array())) {
        Template t;
        t.id = entry.at("id").get<std::string>();
        if (!ids.insert(t.id).second) throw Error(ErrorKind::DuplicateId, t.id);
        t.cls_name = entry.value("class", "other");
        t.cls = object_class_from_name(t.cls_name);
        const std::filesystem::path file = std::filesystem::path(dir) / entry.at("file").get<std::string>();
        if (!std::filesystem::exists(file)) throw Error(ErrorKind::MissingImage, file.string());
        t.image = to_grayscale(load_image(file.string()));
        t.rotations = entry.value("rotations", std::vector<int>{});
        t.metric = match_metric_from_name(entry.value("metric", "ccoeff_normed"));
        t.threshold = entry.value("threshold", 0.9);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace bp
