#pragma once

// On-disk session format.
//
//   <session>/manifest.json   participant, schedule anchors, ordered task events
//   <session>/<KIND>.csv      line 1 start epoch, line 2 rate (Hz), then one sample per line

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "biocomp/error.hpp"
#include "biocomp/signal.hpp"

namespace biocomp {

namespace fs = std::filesystem;

enum class TaskKind { CODE, PROSE };
enum class Answer { ACCEPT, REJECT, NONE };

constexpr std::string_view task_kind_name(TaskKind k) noexcept { return k == TaskKind::CODE ? "CODE" : "PROSE"; }

constexpr std::string_view answer_name(Answer a) noexcept {
    switch (a) {
        case Answer::ACCEPT: return "ACCEPT";
        case Answer::REJECT: return "REJECT";
        case Answer::NONE: return "NONE";
    }
    return "?";
}

struct Participant {
    std::string id;
    std::optional<double> gpa;
    std::optional<std::string> sex;
    std::map<std::string, std::string> meta;

    friend bool operator==(const Participant&, const Participant&) = default;
};

struct TaskEvent {
    std::string task_id;
    TaskKind kind = TaskKind::PROSE;
    std::optional<double> t_answer;
    Answer answer = Answer::NONE;
    int session_index = 1;
    int position_in_session = 1;

    bool answered() const noexcept { return answer != Answer::NONE; }

    friend bool operator==(const TaskEvent&, const TaskEvent&) = default;
};

struct Session {
    Participant participant;
    double t_start_experiment = 0.0;
    double baseline_start = 0.0;
    double baseline_end = 0.0;
    std::map<ChannelKind, SampledSignal> channels;
    std::vector<TaskEvent> events;
    int sessions = 0;

    bool has(ChannelKind k) const { return channels.contains(k); }

    const SampledSignal& channel(ChannelKind k) const {
        auto it = channels.find(k);
        if (it == channels.end())
            throw MissingChannelError("session " + participant.id + " has no " + std::string(channel_name(k)) +
                                      " channel");
        return it->second;
    }

    friend bool operator==(const Session&, const Session&) = default;
};

inline std::string channel_filename(ChannelKind kind) { return std::string(channel_name(kind)) + ".csv"; }

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Shortest decimal form that parses back to the same double.
inline void append_real(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

}  // namespace detail

/// Parses a channel file. Values keep file order; NaN/Inf samples are rejected.
inline SampledSignal load_channel(const fs::path& path, ChannelKind kind) {
    const std::string text = detail::read_file(path);
    const std::string where = path.string();
    SampledSignal sig;
    sig.kind = kind;

    std::string_view rest(text);
    long line_no = 0;
    bool have_start = false, have_rate = false;
    bool saw_blank = false;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        std::string_view line = nl == std::string_view::npos ? rest : rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++line_no;
        line = detail::trim(line);
        if (line.empty()) {
            if (!have_rate) throw FormatError(where + ": malformed header", line_no);
            saw_blank = true;
            continue;
        }
        if (saw_blank) throw FormatError(where + ": blank line inside sample body", line_no - 1);
        const auto v = detail::parse_real(line);
        if (!have_start) {
            if (!v || !std::isfinite(*v)) throw FormatError(where + ": malformed start epoch", line_no);
            sig.start_time = *v;
            have_start = true;
        } else if (!have_rate) {
            if (!v || !std::isfinite(*v) || *v <= 0.0) throw FormatError(where + ": malformed sample rate", line_no);
            sig.sample_rate = *v;
            have_rate = true;
        } else {
            if (!v) throw FormatError(where + ": non-numeric sample '" + std::string(line) + "'", line_no);
            if (!std::isfinite(*v)) throw FormatError(where + ": non-finite sample", line_no);
            sig.values.push_back(*v);
        }
    }
    if (!have_start || !have_rate) throw FormatError(where + ": malformed header", line_no);
    if (sig.values.empty()) throw EmptyChannelError(where + ": channel has no samples");
    return sig;
}

inline void write_channel(const fs::path& path, const SampledSignal& sig) {
    std::string out;
    out.reserve(sig.values.size() * 12 + 64);
    detail::append_real(out, sig.start_time);
    out += '\n';
    detail::append_real(out, sig.sample_rate);
    out += '\n';
    for (double v : sig.values) {
        detail::append_real(out, v);
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

namespace detail {

inline double get_real(const nlohmann::json& j, const char* key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_number())
        throw ManifestError(ctx + ": missing or non-numeric '" + key + "'");
    return j.at(key).get<double>();
}

inline int get_int(const nlohmann::json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw ManifestError(ctx + ": missing or non-integer '" + key + "'");
    return j.at(key).get<int>();
}

inline std::string get_string(const nlohmann::json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key) || !j.at(key).is_string()) throw ManifestError(ctx + ": missing or non-string '" + key + "'");
    return j.at(key).get<std::string>();
}

inline std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace detail

inline nlohmann::json manifest_json(const Session& s) {
    nlohmann::json m;
    nlohmann::json p{{"id", s.participant.id}};
    p["gpa"] = s.participant.gpa ? nlohmann::json(*s.participant.gpa) : nlohmann::json(nullptr);
    if (s.participant.sex) p["sex"] = *s.participant.sex;
    if (!s.participant.meta.empty()) p["meta"] = s.participant.meta;
    m["participant"] = p;
    m["t_start_experiment"] = s.t_start_experiment;
    m["baseline"] = {{"start", s.baseline_start}, {"end", s.baseline_end}};
    nlohmann::json channels = nlohmann::json::array();
    for (const auto& [kind, sig] : s.channels) channels.push_back(std::string(channel_name(kind)));
    m["channels"] = channels;
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : s.events) {
        nlohmann::json ej{{"task_id", e.task_id},
                          {"kind", std::string(task_kind_name(e.kind))},
                          {"session_index", e.session_index},
                          {"position_in_session", e.position_in_session},
                          {"answer", std::string(answer_name(e.answer))}};
        ej["t_answer"] = e.t_answer ? nlohmann::json(*e.t_answer) : nlohmann::json(nullptr);
        events.push_back(std::move(ej));
    }
    m["events"] = events;
    return m;
}

/// Parses manifest content (no channel data). Events come back sorted by
/// (session_index, position_in_session).
inline Session parse_manifest(const nlohmann::json& m, const std::string& ctx,
                              std::vector<ChannelKind>* declared_channels = nullptr) {
    if (!m.is_object()) throw ManifestError(ctx + ": manifest is not a JSON object");
    Session s;
    if (!m.contains("participant") || !m.at("participant").is_object())
        throw ManifestError(ctx + ": missing 'participant'");
    const auto& pj = m.at("participant");
    s.participant.id = detail::get_string(pj, "id", ctx);
    if (pj.contains("gpa") && !pj.at("gpa").is_null()) {
        if (!pj.at("gpa").is_number()) throw ManifestError(ctx + ": non-numeric gpa");
        const double gpa = pj.at("gpa").get<double>();
        if (!(gpa >= 0.0 && gpa <= 4.0)) throw ManifestError(ctx + ": gpa outside [0, 4]");
        s.participant.gpa = gpa;
    }
    if (pj.contains("sex") && pj.at("sex").is_string()) s.participant.sex = pj.at("sex").get<std::string>();
    if (pj.contains("meta") && pj.at("meta").is_object())
        for (const auto& [k, v] : pj.at("meta").items())
            if (v.is_string()) s.participant.meta[k] = v.get<std::string>();

    s.t_start_experiment = detail::get_real(m, "t_start_experiment", ctx);
    if (!m.contains("baseline")) throw ManifestError(ctx + ": missing 'baseline'");
    s.baseline_start = detail::get_real(m.at("baseline"), "start", ctx + ".baseline");
    s.baseline_end = detail::get_real(m.at("baseline"), "end", ctx + ".baseline");
    if (s.baseline_end < s.baseline_start) throw ManifestError(ctx + ": baseline end precedes start");
    if (s.t_start_experiment < s.baseline_end)
        throw ManifestError(ctx + ": t_start_experiment precedes the end of the baseline window");

    if (declared_channels && m.contains("channels")) {
        if (!m.at("channels").is_array()) throw ManifestError(ctx + ": 'channels' must be an array");
        for (const auto& c : m.at("channels")) {
            if (!c.is_string()) throw ManifestError(ctx + ": channel names must be strings");
            auto kind = parse_channel_kind(c.get<std::string>());
            if (!kind) throw ManifestError(ctx + ": unknown channel '" + c.get<std::string>() + "'");
            declared_channels->push_back(*kind);
        }
    }

    if (!m.contains("events") || !m.at("events").is_array()) throw ManifestError(ctx + ": missing 'events' array");
    std::set<std::string> ids;
    for (const auto& ej : m.at("events")) {
        const std::string ectx = ctx + ": event";
        TaskEvent e;
        e.task_id = detail::get_string(ej, "task_id", ectx);
        if (!ids.insert(e.task_id).second) throw ManifestError(ctx + ": duplicate task_id '" + e.task_id + "'");
        const std::string kind = detail::upper(detail::get_string(ej, "kind", ectx));
        if (kind == "CODE")
            e.kind = TaskKind::CODE;
        else if (kind == "PROSE")
            e.kind = TaskKind::PROSE;
        else
            throw ManifestError(ectx + " " + e.task_id + ": unknown kind '" + kind + "'");
        e.session_index = detail::get_int(ej, "session_index", ectx);
        e.position_in_session = detail::get_int(ej, "position_in_session", ectx);
        if (e.session_index < 1 || e.position_in_session < 1)
            throw ManifestError(ectx + " " + e.task_id + ": session_index and position_in_session must be >= 1");
        const std::string ans = detail::upper(detail::get_string(ej, "answer", ectx));
        if (ans == "ACCEPT")
            e.answer = Answer::ACCEPT;
        else if (ans == "REJECT")
            e.answer = Answer::REJECT;
        else if (ans == "NONE")
            e.answer = Answer::NONE;
        else
            throw ManifestError(ectx + " " + e.task_id + ": unknown answer '" + ans + "'");
        if (!ej.contains("t_answer")) throw ManifestError(ectx + " " + e.task_id + ": missing 't_answer'");
        const auto& ta = ej.at("t_answer");
        if (ta.is_number())
            e.t_answer = ta.get<double>();
        else if (!ta.is_null())
            throw ManifestError(ectx + " " + e.task_id + ": t_answer must be a number or null");
        if (e.answered() != e.t_answer.has_value())
            throw ManifestError(ectx + " " + e.task_id + ": answer NONE must coincide with a null t_answer");
        s.events.push_back(std::move(e));
    }
    std::stable_sort(s.events.begin(), s.events.end(), [](const TaskEvent& a, const TaskEvent& b) {
        return std::pair(a.session_index, a.position_in_session) < std::pair(b.session_index, b.position_in_session);
    });
    for (std::size_t i = 1; i < s.events.size(); ++i)
        if (s.events[i].session_index == s.events[i - 1].session_index &&
            s.events[i].position_in_session == s.events[i - 1].position_in_session)
            throw ManifestError(ctx + ": events " + s.events[i - 1].task_id + " and " + s.events[i].task_id +
                                " share a schedule slot");
    for (const auto& e : s.events) s.sessions = std::max(s.sessions, e.session_index);
    return s;
}

/// Loads manifest.json and every declared channel. When the manifest has no
/// "channels" key, every standard channel file present in the directory is loaded.
inline Session load_session(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw ManifestError(dir.string() + ": missing manifest.json");
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(detail::read_file(manifest_path));
    } catch (const nlohmann::json::exception& ex) {
        throw ManifestError(manifest_path.string() + ": " + ex.what());
    }
    std::vector<ChannelKind> declared;
    Session s = parse_manifest(m, manifest_path.string(), &declared);
    if (!m.contains("channels"))
        for (auto k : kAllChannels)
            if (fs::exists(dir / channel_filename(k))) declared.push_back(k);
    for (auto k : declared) {
        const fs::path p = dir / channel_filename(k);
        if (!fs::exists(p)) throw MissingChannelError(p.string() + ": declared channel file is absent");
        s.channels[k] = load_channel(p, k);
    }
    double earliest = s.baseline_end;
    for (const auto& [k, sig] : s.channels) earliest = std::min(earliest, sig.start_time);
    if (!s.channels.empty() && earliest > s.baseline_end)
        throw ManifestError(manifest_path.string() + ": baseline ends before any channel starts recording");
    return s;
}

inline void write_session(const fs::path& dir, const Session& s) {
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "manifest.json", std::ios::binary);
        if (!f) throw Error("cannot write manifest in " + dir.string());
        f << manifest_json(s).dump(2) << '\n';
    }
    for (const auto& [k, sig] : s.channels) write_channel(dir / channel_filename(k), sig);
}

struct SessionValidation {
    std::string name;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    std::size_t events = 0;
    std::size_t answered = 0;
};

struct ValidationReport {
    std::vector<SessionValidation> sessions;
    std::vector<std::string> notes;

    bool analyzable() const {
        return std::any_of(sessions.begin(), sessions.end(), [](const auto& s) { return s.errors.empty(); });
    }
    std::size_t error_count() const {
        std::size_t n = 0;
        for (const auto& s : sessions) n += s.errors.size();
        return n;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["analyzable"] = analyzable();
        j["notes"] = notes;
        j["sessions"] = nlohmann::json::array();
        for (const auto& s : sessions)
            j["sessions"].push_back({{"name", s.name},
                                     {"errors", s.errors},
                                     {"warnings", s.warnings},
                                     {"events", s.events},
                                     {"answered", s.answered}});
        return j;
    }
};

/// Structural checks over every session directory below `root`. Only channels
/// in `required` turn a missing channel into an error.
inline ValidationReport validate_corpus(const fs::path& root, const std::set<ChannelKind>& required = {}) {
    ValidationReport report;
    std::vector<fs::path> dirs;
    if (fs::is_directory(root))
        for (const auto& entry : fs::directory_iterator(root))
            if (entry.is_directory()) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) {
        report.notes.push_back("no sessions");
        return report;
    }

    std::set<std::string> seen_ids;
    for (const auto& dir : dirs) {
        SessionValidation v;
        v.name = dir.filename().string();
        try {
            const Session s = load_session(dir);
            v.events = s.events.size();
            if (!seen_ids.insert(s.participant.id).second)
                v.errors.push_back("duplicate participant id '" + s.participant.id + "'");
            double last_needed = s.t_start_experiment;
            for (const auto& e : s.events) {
                if (e.answered()) {
                    ++v.answered;
                    last_needed = std::max(last_needed, *e.t_answer);
                }
            }
            if (v.answered < v.events)
                v.warnings.push_back(std::to_string(v.events - v.answered) + " unanswered task(s)");
            if (v.answered == 0) v.warnings.push_back("no usable windows");
            for (auto k : kAllChannels) {
                auto it = s.channels.find(k);
                if (it == s.channels.end()) {
                    const std::string msg = "missing channel " + std::string(channel_name(k));
                    (required.contains(k) ? v.errors : v.warnings).push_back(msg);
                    continue;
                }
                const auto& sig = it->second;
                if (std::abs(sig.sample_rate - nominal_rate(k)) > 1e-9)
                    v.warnings.push_back(std::string(channel_name(k)) + " rate " + std::to_string(sig.sample_rate) +
                                         " Hz differs from nominal " + std::to_string(nominal_rate(k)) + " Hz");
                const double need_from = s.baseline_end - 30.0;
                if (sig.start_time > need_from + 1.0 / sig.sample_rate || sig.end_time() < last_needed)
                    v.warnings.push_back(std::string(channel_name(k)) +
                                         " does not cover the baseline window through the last answer");
            }
        } catch (const Error& ex) {
            v.errors.push_back(ex.what());
        } catch (const std::exception& ex) {
            v.errors.push_back(dir.string() + ": " + ex.what());
        }
        report.sessions.push_back(std::move(v));
    }
    return report;
}

}  // namespace biocomp
