#include "blueprint/config.hpp"

#include <filesystem>
#include <fstream>

namespace bp {

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;

    if (j.contains("preprocess")) {
        const auto& p = j.at("preprocess");
        if (p.contains("target_width")) cfg.preprocess.target_width = p.at("target_width").get<int>();
        read_if(p, "nlm_strength", cfg.preprocess.nlm_strength);
        read_if(p, "nlm_patch", cfg.preprocess.nlm_patch);
        read_if(p, "nlm_window", cfg.preprocess.nlm_window);
        read_if(p, "gaussian_sigma", cfg.preprocess.gaussian_sigma);
        if (p.contains("binarize_mode")) {
            const std::string mode = p.at("binarize_mode").get<std::string>();
            if (mode == "otsu") {
                cfg.preprocess.binarize.mode = BinarizeSpec::Mode::Otsu;
            } else if (mode == "fixed") {
                cfg.preprocess.binarize.mode = BinarizeSpec::Mode::Fixed;
            } else {
                throw Error(ErrorKind::InvalidConfig, "binarize_mode must be otsu or fixed");
            }
        }
        read_if(p, "binarize_threshold", cfg.preprocess.binarize.threshold);
        if (p.contains("morph_element")) {
            const std::string shape = p.at("morph_element").get<std::string>();
            if (shape == "square") {
                cfg.preprocess.morph_element.shape = StructElement::Shape::Square;
            } else if (shape == "cross") {
                cfg.preprocess.morph_element.shape = StructElement::Shape::Cross;
            } else {
                throw Error(ErrorKind::InvalidConfig, "morph_element must be square or cross");
            }
        }
        read_if(p, "morph_size", cfg.preprocess.morph_element.size);
        read_if(p, "clahe_clip", cfg.preprocess.clahe_clip);
        read_if(p, "clahe_tiles", cfg.preprocess.clahe_tiles);
    }

    if (j.contains("segmentation")) {
        const auto& s = j.at("segmentation");
        read_if(s, "canny_low", cfg.segmentation.canny_low);
        read_if(s, "canny_high", cfg.segmentation.canny_high);
        read_if(s, "merge_distance", cfg.segmentation.merge_distance);
        read_if(s, "gap_close", cfg.segmentation.gap_close);
        read_if(s, "min_room_area", cfg.segmentation.min_room_area);
        read_if(s, "connectivity", cfg.segmentation.connectivity);
        if (cfg.segmentation.connectivity != 4 && cfg.segmentation.connectivity != 8) {
            throw Error(ErrorKind::InvalidConfig, "connectivity must be 4 or 8");
        }
    }

    if (j.contains("scale_override")) cfg.scale_override = j.at("scale_override").get<double>();
    read_if(j, "template_dir", cfg.template_dir);
    if (j.contains("metric")) cfg.metric_override = match_metric_from_name(j.at("metric").get<std::string>());
    if (j.contains("threshold")) cfg.threshold_override = j.at("threshold").get<double>();
    read_if(j, "function_dictionary", cfg.function_dictionary);
    read_if(j, "recognizer_command", cfg.recognizer_command);
    read_if(j, "recognizer_min_score", cfg.recognizer_min_score);
    read_if(j, "verify_tolerance", cfg.verify_tolerance);

    if (j.contains("risk")) {
        const auto& r = j.at("risk");
        RiskInputs in;
        in.probability = r.at("probability").get<double>();
        in.exposure = r.at("exposure").get<double>();
        in.vulnerability = r.at("vulnerability").get<double>();
        read_if(r, "sprinkler_effectiveness", in.sprinkler_effectiveness);
        if (in.probability < 0 || in.probability > 1 || in.exposure < 0 || in.vulnerability < 0 ||
            in.vulnerability > 1 || in.sprinkler_effectiveness < 0.701 ||
            in.sprinkler_effectiveness > 0.988) {
            throw Error(ErrorKind::InvalidConfig, "risk inputs out of range");
        }
        cfg.risk = in;
    }

    read_if(j, "output_dir", cfg.output_dir);
    read_if(j, "seed", cfg.seed);
    cfg.segmentation.color_seed = cfg.seed;
    read_if(j, "parallel_jobs", cfg.parallel_jobs);
    read_if(j, "save_intermediates", cfg.save_intermediates);
    read_if(j, "use_nlm", cfg.use_nlm);
    cfg.segmentation.smooth_sigma = cfg.preprocess.gaussian_sigma;
    return cfg;
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
    nlohmann::json p = {
        {"nlm_strength", cfg.preprocess.nlm_strength},
        {"nlm_patch", cfg.preprocess.nlm_patch},
        {"nlm_window", cfg.preprocess.nlm_window},
        {"gaussian_sigma", cfg.preprocess.gaussian_sigma},
        {"binarize_mode", cfg.preprocess.binarize.mode == BinarizeSpec::Mode::Otsu ? "otsu" : "fixed"},
        {"binarize_threshold", cfg.preprocess.binarize.threshold},
        {"morph_element",
         cfg.preprocess.morph_element.shape == StructElement::Shape::Square ? "square" : "cross"},
        {"morph_size", cfg.preprocess.morph_element.size},
        {"clahe_clip", cfg.preprocess.clahe_clip},
        {"clahe_tiles", cfg.preprocess.clahe_tiles},
    };
    if (cfg.preprocess.target_width) p["target_width"] = *cfg.preprocess.target_width;

    nlohmann::json j = {
        {"preprocess", p},
        {"segmentation",
         {
             {"canny_low", cfg.segmentation.canny_low},
             {"canny_high", cfg.segmentation.canny_high},
             {"merge_distance", cfg.segmentation.merge_distance},
             {"gap_close", cfg.segmentation.gap_close},
             {"min_room_area", cfg.segmentation.min_room_area},
             {"connectivity", cfg.segmentation.connectivity},
         }},
        {"template_dir", cfg.template_dir},
        {"function_dictionary", cfg.function_dictionary},
        {"recognizer_command", cfg.recognizer_command},
        {"recognizer_min_score", cfg.recognizer_min_score},
        {"verify_tolerance", cfg.verify_tolerance},
        {"output_dir", cfg.output_dir},
        {"seed", cfg.seed},
        {"parallel_jobs", cfg.parallel_jobs},
        {"save_intermediates", cfg.save_intermediates},
        {"use_nlm", cfg.use_nlm},
    };
    if (cfg.scale_override) j["scale_override"] = *cfg.scale_override;
    if (cfg.metric_override) j["metric"] = match_metric_name(*cfg.metric_override);
    if (cfg.threshold_override) j["threshold"] = *cfg.threshold_override;
    if (cfg.risk) {
        j["risk"] = {
            {"probability", cfg.risk->probability},
            {"exposure", cfg.risk->exposure},
            {"vulnerability", cfg.risk->vulnerability},
            {"sprinkler_effectiveness", cfg.risk->sprinkler_effectiveness},
        };
    }
    return j;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileNotFound, path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("unparsable config: ") + e.what());
    }
    PipelineConfig cfg = config_from_json(j);
    // relative paths in a config file are relative to the file itself
    const auto base = std::filesystem::path(path).parent_path();
    if (!cfg.template_dir.empty() && std::filesystem::path(cfg.template_dir).is_relative()) {
        cfg.template_dir = (base / cfg.template_dir).string();
    }
    return cfg;
}

}  // namespace bp
