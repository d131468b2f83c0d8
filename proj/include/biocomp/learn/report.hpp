#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biocomp/error.hpp"
#include "biocomp/learn/classifier.hpp"
#include "biocomp/learn/correlation.hpp"
#include "biocomp/learn/evaluate.hpp"

namespace biocomp::learn {

struct EvalReport {
    std::uint64_t seed = 0;
    std::vector<std::string> participants;
    std::vector<ComboResult> results;

    std::vector<const ComboResult*> by_protocol(Protocol p) const {
        std::vector<const ComboResult*> out;
        for (const auto& r : results)
            if (r.protocol == p) out.push_back(&r);
        return out;
    }
};

/// For each participant, the best BAC of that participant's own LORO fold
/// over every configuration and family in the report.
inline std::map<std::string, double> best_bac_per_participant(const EvalReport& report) {
    std::map<std::string, double> best;
    for (const auto* r : report.by_protocol(Protocol::LORO))
        for (const auto& f : r->folds) {
            if (!f.bac || f.test_participants.size() != 1) continue;
            const auto& p = f.test_participants.front();
            auto it = best.find(p);
            if (it == best.end() || *f.bac > it->second) best[p] = *f.bac;
        }
    return best;
}

inline nlohmann::json to_json(const EvalReport& r) {
    using nlohmann::json;
    json j;
    j["seed"] = r.seed;
    j["participants"] = r.participants;
    json results = json::array();
    for (const auto& c : r.results) {
        json jc;
        jc["protocol"] = protocol_name(c.protocol);
        jc["config"] = c.config;
        jc["family"] = family_name(c.family);
        jc["median_bac"] = c.median_bac ? json(*c.median_bac) : json(nullptr);
        if (c.macro)
            jc["macro"] = {{"precision", c.macro->precision}, {"recall", c.macro->recall}, {"f1", c.macro->f1}};
        else
            jc["macro"] = nullptr;
        json folds = json::array();
        for (const auto& f : c.folds) {
            folds.push_back({{"fold", f.fold},
                             {"test_participants", f.test_participants},
                             {"confusion", {{"tp", f.confusion.tp}, {"fn", f.confusion.fn}, {"fp", f.confusion.fp}, {"tn", f.confusion.tn}}},
                             {"bac", f.bac ? json(*f.bac) : json(nullptr)},
                             {"param", f.param},
                             {"n_train", f.n_train}});
        }
        jc["folds"] = std::move(folds);
        jc["warnings"] = c.warnings;
        results.push_back(std::move(jc));
    }
    j["results"] = std::move(results);
    return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    try {
        EvalReport r;
        r.seed = j.at("seed").get<std::uint64_t>();
        r.participants = j.at("participants").get<std::vector<std::string>>();
        for (const auto& jc : j.at("results")) {
            ComboResult c;
            const auto proto = jc.at("protocol").get<std::string>();
            if (proto != "LORO" && proto != "HOLDOUT") throw ConfigError("report: unknown protocol " + proto);
            c.protocol = proto == "LORO" ? Protocol::LORO : Protocol::HOLDOUT;
            c.config = jc.at("config").get<std::string>();
            const auto fam = parse_family(jc.at("family").get<std::string>());
            if (!fam) throw ConfigError("report: unknown family");
            c.family = *fam;
            for (const auto& jf : jc.at("folds")) {
                FoldResult f;
                f.fold = jf.at("fold").get<int>();
                f.test_participants = jf.at("test_participants").get<std::vector<std::string>>();
                const auto& cf = jf.at("confusion");
                f.confusion = {cf.at("tp").get<long>(), cf.at("fn").get<long>(), cf.at("fp").get<long>(),
                               cf.at("tn").get<long>()};
                if (!jf.at("bac").is_null()) f.bac = jf.at("bac").get<double>();
                f.param = jf.at("param").get<double>();
                f.n_train = jf.at("n_train").get<std::size_t>();
                c.folds.push_back(std::move(f));
            }
            c.warnings = jc.value("warnings", std::vector<std::string>{});
            summarize(c);
            r.results.push_back(std::move(c));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed report: ") + e.what());
    }
}

namespace detail {

inline std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline std::vector<std::string> configs_in_order(const std::vector<const ComboResult*>& rs) {
    std::vector<std::string> out;
    for (const auto* r : rs)
        if (std::find(out.begin(), out.end(), r->config) == out.end()) out.push_back(r->config);
    return out;
}

}  // namespace detail

/// One row per configuration: the family with the highest median BAC
/// (earliest family wins ties) and its macro metrics.
inline std::string best_table_csv(const EvalReport& report, Protocol p) {
    std::string out = "Signal,Best Classifier,Precision,Recall,F1,BAC\n";
    const auto rs = report.by_protocol(p);
    for (const auto& cfg : detail::configs_in_order(rs)) {
        const ComboResult* best = nullptr;
        for (auto f : kAllFamilies)
            for (const auto* r : rs)
                if (r->config == cfg && r->family == f && r->median_bac &&
                    (!best || *r->median_bac > *best->median_bac))
                    best = r;
        if (!best) {
            out += cfg + ",NA,NA,NA,NA,NA\n";
            continue;
        }
        out += cfg + "," + std::string(family_name(best->family)) + "," + detail::fixed4(best->macro->precision) + "," +
               detail::fixed4(best->macro->recall) + "," + detail::fixed4(best->macro->f1) + "," +
               detail::fixed4(*best->median_bac) + "\n";
    }
    return out;
}

/// Median BAC grid: one row per (protocol, configuration), one column per family.
inline std::string medians_csv(const EvalReport& report) {
    std::string out = "Protocol,Signal";
    for (auto f : kAllFamilies) out += "," + std::string(family_name(f));
    out += '\n';
    for (auto p : {Protocol::LORO, Protocol::HOLDOUT}) {
        const auto rs = report.by_protocol(p);
        for (const auto& cfg : detail::configs_in_order(rs)) {
            out += std::string(protocol_name(p)) + "," + cfg;
            for (auto f : kAllFamilies) {
                std::string cell = "NA";
                for (const auto* r : rs)
                    if (r->config == cfg && r->family == f && r->median_bac) cell = detail::fixed4(*r->median_bac);
                out += "," + cell;
            }
            out += '\n';
        }
    }
    return out;
}

struct ScatterPoint {
    std::string participant;
    double gpa = 0.0;
    double best_bac = 0.0;
};

inline std::string scatter_csv(const std::vector<ScatterPoint>& pts) {
    std::string out = "participant,gpa,best_bac\n";
    for (const auto& p : pts) out += p.participant + "," + detail::fixed4(p.gpa) + "," + detail::fixed4(p.best_bac) + "\n";
    return out;
}

inline nlohmann::json to_json(const CorrelationResult& c) {
    return {{"tau", c.tau}, {"p_value", c.p_value}, {"n", c.n}, {"alpha", 0.05}, {"significant", c.p_value < 0.05}};
}

}  // namespace biocomp::learn
