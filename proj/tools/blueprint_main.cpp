#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "blueprint/fixture.hpp"
#include "blueprint/image_io.hpp"
#include "blueprint/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
    std::string config_path;
    std::string out_dir;
    double scale_override = 0.0;
    bool has_scale_override = false;
    std::uint32_t seed = 0;
    bool has_seed = false;
    int jobs = 0;
    std::string metric;
    double threshold = 0.0;
    bool has_threshold = false;
    bool save_intermediates = false;
};

bp::PipelineConfig build_config(const GlobalFlags& f) {
    bp::PipelineConfig cfg;
    std::string path = f.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("BLUEPRINT_CONFIG")) path = env;
    }
    if (!path.empty()) cfg = bp::load_config(path);

    if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
    if (f.has_scale_override) cfg.scale_override = f.scale_override;
    if (f.has_seed) {
        cfg.seed = f.seed;
        cfg.segmentation.color_seed = f.seed;
    }
    if (f.jobs > 0) cfg.parallel_jobs = f.jobs;
    if (!f.metric.empty()) cfg.metric_override = bp::match_metric_from_name(f.metric);
    if (f.has_threshold) cfg.threshold_override = f.threshold;
    if (f.save_intermediates) cfg.save_intermediates = true;
    return cfg;
}

// 0 < 2 < 1 in severity order
int worse(int a, int b) {
    auto rank = [](int c) { return c == 1 ? 2 : c == 2 ? 1 : 0; };
    return rank(a) >= rank(b) ? a : b;
}

int run_one(const bp::PipelineConfig& cfg, const std::string& path, std::mutex& io_mutex) {
    try {
        const bp::BlueprintReport report = bp::run_and_write(cfg, path);
        const int code = bp::report_exit_code(report);
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << path << ": " << report.rooms.size() << " rooms, " << report.detections.size()
                  << " detections";
        if (report.total_area_m2) std::cout << ", " << *report.total_area_m2 << " m2 total";
        if (code == 2) {
            std::cout << " (degraded:";
            for (const auto& [stage, reason] : report.skipped) std::cout << " " << stage;
            std::cout << ")";
        }
        std::cout << "\n";
        return code;
    } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cerr << path << ": error: " << e.what() << "\n";
        return 1;
    }
}

int run_many(const bp::PipelineConfig& cfg, const std::vector<std::string>& inputs) {
    std::mutex io_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<int> worst{0};
    const int jobs = std::max(1, std::min<int>(cfg.parallel_jobs, static_cast<int>(inputs.size())));
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < inputs.size(); i = next.fetch_add(1)) {
            const int code = run_one(cfg, inputs[i], io_mutex);
            int seen = worst.load();
            while (worse(seen, code) != seen && !worst.compare_exchange_weak(seen, code)) {
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < jobs; ++i) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    return worst.load();
}

int cmd_synth(const GlobalFlags& flags, const std::string& spec_path) {
    std::ifstream in(spec_path);
    if (!in) {
        std::cerr << "cannot read " << spec_path << "\n";
        return 1;
    }
    bp::FixtureSpec spec = bp::fixture_spec_from_json(nlohmann::json::parse(in));
    if (flags.has_seed) spec.seed = flags.seed;
    const bp::FixtureResult fixture = bp::generate_fixture(spec);

    const fs::path dir = flags.out_dir.empty() ? fs::path(".") : fs::path(flags.out_dir);
    fs::create_directories(dir);
    const std::string stem = fs::path(spec_path).stem().string();
    bp::save_image(fixture.image, (dir / (stem + ".png")).string());
    std::ofstream truth(dir / (stem + ".truth.json"));
    truth << fixture.ground_truth.dump(2) << "\n";
    std::cout << "wrote " << (dir / (stem + ".png")).string() << " and ground truth\n";
    return 0;
}

int cmd_templates_validate(const std::string& dir) {
    const auto library = bp::load_template_library(dir);
    for (const bp::Template& t : library) {
        std::cout << t.id << ": class=" << t.cls_name << " " << t.image.width << "x" << t.image.height
                  << " metric=" << bp::match_metric_name(t.metric) << " threshold=" << t.threshold;
        if (!t.rotations.empty()) {
            std::cout << " rotations=";
            for (std::size_t i = 0; i < t.rotations.size(); ++i) {
                std::cout << (i ? "," : "") << t.rotations[i] * 90 << "deg";
            }
        }
        std::cout << "\n";
    }
    std::cout << library.size() << " templates ok\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blueprint interpretation toolkit: rooms, scale, objects, text and risk from "
                 "raster floor plans"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags flags;
    app.add_option("--config", flags.config_path,
                   "Config JSON (default: $BLUEPRINT_CONFIG when set)");
    app.add_option("--out", flags.out_dir, "Output directory");
    app.add_option("--scale-override", flags.scale_override, "Scale in mm/pixel, skips the ruler")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { flags.has_scale_override = true; });
    app.add_option("--seed", flags.seed, "Seed for room colors and fixtures")
        ->each([&](const std::string&) { flags.has_seed = true; });
    app.add_option("--jobs", flags.jobs, "Parallel workers for batch mode")->check(CLI::PositiveNumber);
    app.add_option("--metric", flags.metric,
                   "Template metric override (sqdiff, sqdiff_normed, ccorr, ccorr_normed, ccoeff, "
                   "ccoeff_normed)");
    app.add_option("--threshold", flags.threshold, "Template score threshold override")
        ->each([&](const std::string&) { flags.has_threshold = true; });
    app.add_flag("--save-intermediates", flags.save_intermediates,
                 "Also write per-stage debug images");

    std::vector<std::string> inputs;
    CLI::App* interpret = app.add_subcommand("interpret", "Interpret one or more blueprint images");
    interpret->add_option("files", inputs, "Blueprint images (PNG, JPEG or PGM)")->required();

    std::string batch_dir;
    CLI::App* batch = app.add_subcommand("batch", "Interpret every image in a directory");
    batch->add_option("dir", batch_dir, "Directory of blueprint images")->required();

    std::string spec_path;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic blueprint fixture");
    synth->add_option("spec", spec_path, "Fixture spec JSON")->required();

    std::string template_dir;
    CLI::App* templates = app.add_subcommand("templates", "Template library utilities");
    CLI::App* validate = templates->add_subcommand("validate", "Check a template library");
    validate->add_option("dir", template_dir, "Library directory with manifest.json")->required();
    templates->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (interpret->parsed()) {
            return run_many(build_config(flags), inputs);
        }
        if (batch->parsed()) {
            std::vector<std::string> files;
            for (const fs::directory_entry& e : fs::directory_iterator(batch_dir)) {
                if (!e.is_regular_file()) continue;
                std::string ext = e.path().extension().string();
                for (char& c : ext) c = static_cast<char>(std::tolower(c));
                if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".pgm") {
                    files.push_back(e.path().string());
                }
            }
            std::sort(files.begin(), files.end());
            if (files.empty()) {
                std::cerr << "no images in " << batch_dir << "\n";
                return 1;
            }
            return run_many(build_config(flags), files);
        }
        if (synth->parsed()) {
            return cmd_synth(flags, spec_path);
        }
        if (validate->parsed()) {
            return cmd_templates_validate(template_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
