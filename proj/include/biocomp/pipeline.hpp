#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biocomp/error.hpp"
#include "biocomp/features.hpp"
#include "biocomp/ingest.hpp"
#include "biocomp/learn/classifier.hpp"
#include "biocomp/learn/correlation.hpp"
#include "biocomp/learn/dataset.hpp"
#include "biocomp/learn/evaluate.hpp"
#include "biocomp/learn/report.hpp"
#include "biocomp/parallel.hpp"
#include "biocomp/synth.hpp"

namespace biocomp {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kDefaultSeed = 42;

struct PipelineConfig {
    fs::path corpus_root = "corpus";
    std::vector<SignalConfig> configs{kAllConfigs.begin(), kAllConfigs.end()};
    std::vector<learn::Family> families{learn::kAllFamilies.begin(), learn::kAllFamilies.end()};
    std::vector<learn::Protocol> protocols{learn::Protocol::LORO, learn::Protocol::HOLDOUT};
    std::uint64_t seed = kDefaultSeed;
    int jobs = 1;
    FeatureParams features;
    fs::path output_dir = "out";
    synth::SynthConfig synth;
    std::optional<fs::path> report;  // correlate reuses this LORO report when set

    unsigned groups() const {
        unsigned g = 0;
        for (auto c : configs) g |= groups_of(c);
        return g;
    }
};

inline std::vector<learn::Protocol> parse_protocols(const std::string& s) {
    if (s == "loro") return {learn::Protocol::LORO};
    if (s == "holdout") return {learn::Protocol::HOLDOUT};
    if (s == "both") return {learn::Protocol::LORO, learn::Protocol::HOLDOUT};
    throw ConfigError("protocol must be loro, holdout or both, got '" + s + "'");
}

inline std::vector<SignalConfig> parse_configs(const std::vector<std::string>& names) {
    std::vector<SignalConfig> out;
    for (const auto& n : names) {
        const auto c = parse_config(n);
        if (!c) throw ConfigError("unknown signal configuration '" + n + "'");
        if (std::find(out.begin(), out.end(), *c) == out.end()) out.push_back(*c);
    }
    if (out.empty()) throw ConfigError("no signal configurations selected");
    return out;
}

inline std::vector<learn::Family> parse_families(const std::vector<std::string>& names) {
    std::vector<learn::Family> out;
    for (const auto& n : names) {
        const auto f = learn::parse_family(n);
        if (!f) throw ConfigError("unknown classifier family '" + n + "'");
        if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
    }
    if (out.empty()) throw ConfigError("no classifier families selected");
    return out;
}

/// Seed default before the config file is read: BIOCOMP_SEED if set, else kDefaultSeed.
inline std::uint64_t env_seed() {
    const char* v = std::getenv("BIOCOMP_SEED");
    if (!v || !*v) return kDefaultSeed;
    char* end = nullptr;
    const unsigned long long s = std::strtoull(v, &end, 10);
    if (*end != '\0') throw ConfigError(std::string("BIOCOMP_SEED is not an unsigned integer: ") + v);
    return s;
}

/// Applies a parsed config object on top of `cfg`. Relative paths resolve against `base_dir`.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig cfg = {}, const fs::path& base_dir = {}) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto path_of = [&](const char* key) {
        fs::path p = j.at(key).get<std::string>();
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    try {
        if (j.contains("corpus_root")) cfg.corpus_root = path_of("corpus_root");
        if (j.contains("output_dir")) cfg.output_dir = path_of("output_dir");
        if (j.contains("report")) cfg.report = path_of("report");
        if (j.contains("configs")) cfg.configs = parse_configs(j.at("configs").get<std::vector<std::string>>());
        if (j.contains("families")) cfg.families = parse_families(j.at("families").get<std::vector<std::string>>());
        if (j.contains("protocol")) cfg.protocols = parse_protocols(j.at("protocol").get<std::string>());
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
        if (j.contains("cvxeda")) {
            const auto& c = j.at("cvxeda");
            auto& p = cfg.features.cvxeda;
            p.tau0 = c.value("tau0", p.tau0);
            p.tau1 = c.value("tau1", p.tau1);
            p.knot_s = c.value("knot_s", p.knot_s);
            p.alpha = c.value("alpha", p.alpha);
            p.gamma = c.value("gamma", p.gamma);
            p.max_iter = c.value("max_iter", p.max_iter);
            p.kkt_tol = c.value("kkt_tol", p.kkt_tol);
        }
        if (j.contains("peaks")) {
            const auto& c = j.at("peaks");
            auto& f = cfg.features;
            f.bvp_min_distance_s = c.value("bvp_min_distance_s", f.bvp_min_distance_s);
            f.bvp_prominence_factor = c.value("bvp_prominence_factor", f.bvp_prominence_factor);
            f.scr.min_distance_s = c.value("scr_min_distance_s", f.scr.min_distance_s);
            f.scr.min_prominence = c.value("scr_min_prominence", f.scr.min_prominence);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (j.contains("synth")) cfg.synth = synth::synth_config_from_json(j.at("synth"), cfg.synth);
    if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");
    cfg.features.cvxeda.validate();
    return cfg;
}

inline nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline PipelineConfig load_config(const std::optional<fs::path>& path) {
    PipelineConfig cfg;
    cfg.seed = env_seed();
    cfg.synth.seed = cfg.seed;
    if (!path) return cfg;
    return config_from_json(read_json_file(*path), cfg, path->parent_path());
}

inline void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

/// File-name form of a configuration name: "EEG+EDA" -> "eeg_eda".
inline std::string config_slug(SignalConfig c) {
    std::string s = config_name(c);
    for (auto& ch : s) ch = ch == '+' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

inline std::vector<Session> load_corpus(const fs::path& root) {
    if (!fs::is_directory(root)) throw InputError("corpus root " + root.string() + " is not a directory");
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw InputError("no sessions under " + root.string());
    std::vector<Session> out;
    out.reserve(dirs.size());
    for (const auto& d : dirs) out.push_back(load_session(d));
    return out;
}

/// Extracts every requested group once per session, in parallel over sessions.
inline std::vector<SessionFeatures> extract_corpus(const std::vector<Session>& corpus, unsigned groups,
                                                   const FeatureParams& params, int jobs) {
    std::vector<SessionFeatures> out(corpus.size());
    parallel_for(corpus.size(), jobs, [&](std::size_t i) { out[i] = extract_session_features(corpus[i], groups, params); });
    return out;
}

inline int cmd_validate(const fs::path& root, const fs::path& report_path, std::ostream& log) {
    const auto report = validate_corpus(root, {});
    write_text(report_path, report.to_json().dump(2) + "\n");
    for (const auto& n : report.notes) log << n << "\n";
    for (const auto& s : report.sessions)
        for (const auto& e : s.errors) log << s.name << ": " << e << "\n";
    log << report.sessions.size() << " session(s), " << report.error_count() << " error(s)\n";
    return report.analyzable() && report.error_count() == 0 ? 0 : 2;
}

inline std::vector<fs::path> cmd_features(const PipelineConfig& cfg, std::ostream& log) {
    const auto corpus = load_corpus(cfg.corpus_root);
    const auto sf = extract_corpus(corpus, cfg.groups(), cfg.features, cfg.jobs);
    std::vector<fs::path> written;
    for (auto c : cfg.configs) {
        const auto m = assemble_matrix(sf, c);
        const auto path = cfg.output_dir / ("features_" + config_slug(c) + ".csv");
        write_text(path, to_csv(m));
        log << config_name(c) << ": " << m.rows.size() << " rows x " << m.cols() << " features -> " << path.string()
            << "\n";
        written.push_back(path);
    }
    return written;
}

/// Runs every configuration x family under the requested protocols.
inline learn::EvalReport evaluate_corpus(const std::vector<Session>& corpus, const PipelineConfig& cfg,
                                         const std::vector<learn::Protocol>& protocols, std::ostream* log = nullptr) {
    const auto sf = extract_corpus(corpus, cfg.groups(), cfg.features, cfg.jobs);
    learn::EvalReport report;
    report.seed = cfg.seed;
    for (const auto& s : corpus) report.participants.push_back(s.participant.id);
    std::sort(report.participants.begin(), report.participants.end());

    learn::EvalOptions opt;
    opt.seed = cfg.seed;
    opt.jobs = cfg.jobs;
    for (auto c : cfg.configs) {
        const auto data = learn::to_dataset(assemble_matrix(sf, c));
        for (auto p : protocols)
            for (auto f : cfg.families) {
                learn::ClassifierSpec spec{f, learn::default_grid(f, static_cast<std::size_t>(data.X.cols())), cfg.seed};
                auto r = p == learn::Protocol::LORO ? learn::loro_cv(data, spec, opt, report.participants)
                                                    : learn::holdout_eval(data, spec, opt);
                r.config = config_name(c);
                if (log)
                    *log << learn::protocol_name(p) << " " << r.config << " " << learn::family_name(f) << ": median BAC "
                         << (r.median_bac ? learn::detail::fixed4(*r.median_bac) : std::string("NA")) << "\n";
                report.results.push_back(std::move(r));
            }
    }
    return report;
}

inline void write_report_files(const learn::EvalReport& report, const PipelineConfig& cfg) {
    write_text(cfg.output_dir / "report.json", learn::to_json(report).dump(2) + "\n");
    for (auto p : cfg.protocols) {
        const std::string name = p == learn::Protocol::LORO ? "table_loro.csv" : "table_holdout.csv";
        write_text(cfg.output_dir / name, learn::best_table_csv(report, p));
    }
    write_text(cfg.output_dir / "medians.csv", learn::medians_csv(report));
}

inline learn::EvalReport cmd_evaluate(const PipelineConfig& cfg, std::ostream& log) {
    const auto corpus = load_corpus(cfg.corpus_root);
    auto report = evaluate_corpus(corpus, cfg, cfg.protocols, &log);
    write_report_files(report, cfg);
    return report;
}

struct CorrelationOutput {
    learn::CorrelationResult result;
    std::vector<learn::ScatterPoint> points;
};

/// Joins per-participant best LORO BAC with GPA and tests for association.
inline CorrelationOutput correlate(const learn::EvalReport& report, const std::vector<Session>& corpus) {
    const auto best = learn::best_bac_per_participant(report);
    CorrelationOutput out;
    for (const auto& s : corpus) {
        const auto it = best.find(s.participant.id);
        if (!s.participant.gpa || it == best.end()) continue;
        out.points.push_back({s.participant.id, *s.participant.gpa, it->second});
    }
    std::sort(out.points.begin(), out.points.end(), [](const auto& a, const auto& b) { return a.participant < b.participant; });
    if (out.points.size() < 2)
        throw InputError("correlation needs at least 2 participants with both GPA and a LORO BAC, found " +
                         std::to_string(out.points.size()));
    std::vector<double> gpa, bac;
    for (const auto& p : out.points) gpa.push_back(p.gpa), bac.push_back(p.best_bac);
    try {
        out.result = learn::kendall_tau(gpa, bac);
    } catch (const CorrelationUndefinedError& e) {
        throw InputError(e.what());
    }
    return out;
}

inline CorrelationOutput cmd_correlate(const PipelineConfig& cfg, std::ostream& log) {
    const auto corpus = load_corpus(cfg.corpus_root);
    learn::EvalReport report;
    if (cfg.report) {
        report = learn::report_from_json(read_json_file(*cfg.report));
    } else {
        report = evaluate_corpus(corpus, cfg, {learn::Protocol::LORO});
    }
    if (report.by_protocol(learn::Protocol::LORO).empty()) throw InputError("report has no LORO results");
    auto out = correlate(report, corpus);
    write_text(cfg.output_dir / "correlation.json", learn::to_json(out.result).dump(2) + "\n");
    write_text(cfg.output_dir / "scatter.csv", learn::scatter_csv(out.points));
    log << "kendall tau " << out.result.tau << ", p " << out.result.p_value << ", n " << out.result.n << "\n";
    return out;
}

inline synth::CorpusSummary cmd_synth(const PipelineConfig& cfg, const fs::path& out_root, std::ostream& log) {
    const auto sum = synth::generate_corpus(cfg.synth, out_root);
    log << sum.to_json().dump() << "\n";
    return sum;
}

}  // namespace biocomp
