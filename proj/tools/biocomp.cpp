#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biocomp/pipeline.hpp"

namespace {

using namespace biocomp;

struct Overrides {
    std::optional<std::string> config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> protocol;
    std::optional<std::string> configs;
    std::optional<std::string> families;
    std::optional<std::string> out;
    std::optional<std::string> corpus;
    std::optional<std::string> report;
    std::optional<int> jobs;
    std::optional<int> n;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

PipelineConfig resolve(const Overrides& o) {
    auto cfg = load_config(o.config_file ? std::optional<fs::path>(*o.config_file) : std::nullopt);
    if (o.seed) cfg.seed = cfg.synth.seed = *o.seed;
    if (o.protocol) cfg.protocols = parse_protocols(*o.protocol);
    if (o.configs) cfg.configs = parse_configs(split_list(*o.configs));
    if (o.families) cfg.families = parse_families(split_list(*o.families));
    if (o.out) cfg.output_dir = *o.out;
    if (o.corpus) cfg.corpus_root = *o.corpus;
    if (o.report) cfg.report = fs::path(*o.report);
    if (o.jobs) {
        if (*o.jobs < 1) throw ConfigError("--jobs must be at least 1");
        cfg.jobs = *o.jobs;
    }
    if (o.n) {
        cfg.synth.n_participants = *o.n;
        cfg.synth.validate();
    }
    return cfg;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config_file, "JSON pipeline config");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--jobs", o.jobs, "worker threads");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biometric code-vs-prose comprehension pipeline"};
    app.require_subcommand(1);
    Overrides o;

    std::string validate_root;
    auto* validate = app.add_subcommand("validate", "check a corpus and write validation.json");
    validate->add_option("root", validate_root, "corpus directory")->required();
    validate->add_option("--out", o.out, "output directory");

    auto* features = app.add_subcommand("features", "write one feature CSV per signal configuration");
    auto* evaluate = app.add_subcommand("evaluate", "train and evaluate every configuration x family");
    auto* correlate = app.add_subcommand("correlate", "correlate best LORO BAC with GPA");
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    for (auto* cmd : {features, evaluate, correlate}) {
        add_common(cmd, o);
        cmd->add_option("--corpus", o.corpus, "corpus directory");
        cmd->add_option("--configs", o.configs, "comma-separated signal configurations, e.g. HEART,EEG+EDA");
        cmd->add_option("--families", o.families, "comma-separated classifier families");
    }
    evaluate->add_option("--protocol", o.protocol, "loro, holdout or both");
    correlate->add_option("--report", o.report, "existing report.json to reuse");
    add_common(synth, o);
    synth->add_option("--n", o.n, "number of participants");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) {
            const fs::path out = o.out ? fs::path(*o.out) : fs::path(validate_root);
            return cmd_validate(validate_root, out / "validation.json", std::cout);
        }
        const auto cfg = resolve(o);
        if (features->parsed()) cmd_features(cfg, std::cout);
        if (evaluate->parsed()) cmd_evaluate(cfg, std::cout);
        if (correlate->parsed()) cmd_correlate(cfg, std::cout);
        if (synth->parsed()) cmd_synth(cfg, cfg.output_dir, std::cout);
        return 0;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
