#include "stylo/error.hpp"
#include "stylo/pipeline.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv)
{
    CLI::App app{"stylo: stylometric authorship attribution toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, workdir, manifest, predictions, tag, format = "text";
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "run configuration (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "override the configured seed");
    app.add_option("--workdir", workdir, "override the configured working directory");
    app.add_option("--manifest", manifest, "override the configured corpus manifest");
    app.add_option("--predictions", predictions, "external predictions CSV (attribute, evaluate, timeline)");
    app.add_option("--tag", tag, "predictions tag to read or write");
    app.add_option("--format", format, "stdout format")->check(CLI::IsMember({"text", "json", "csv"}));

    const char* help[] = {"segment and filter the corpus",         "draw train/val/test/disputed/timeline samples",
                          "write fine-tuning pair files",          "fit the configured models",
                          "write predictions CSVs",                "accuracy, confusion, scapegoat and length reports",
                          "author uniqueness over common words",   "randomized play-reassignment trials",
                          "per-century attribution shares"};
    std::size_t i = 0;
    for (const auto stage : stylo::kStages) app.add_subcommand(std::string(stage), help[i++]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    const std::string stage = app.get_subcommands().front()->get_name();

    try {
        stylo::RunConfig cfg = config_path.empty() ? stylo::RunConfig{} : stylo::load_run_config(config_path);
        if (seed) cfg.seed = *seed;
        if (!workdir.empty()) cfg.workdir = workdir;
        if (!manifest.empty()) cfg.manifest = manifest;

        stylo::StageOptions opts;
        opts.format = stylo::parse_output_format(format);
        if (!predictions.empty()) opts.predictions = predictions;
        if (!tag.empty()) opts.tag = tag;
        stylo::run_stage(stage, cfg, opts, std::cout);
    } catch (const std::exception& e) {
        std::cerr << fmt::format("stylo {}: error: {}\n", stage, e.what());
        return 1;
    }
    return 0;
}
