#pragma once

#include <string>
#include <vector>

#include "biocomp/error.hpp"
#include "biocomp/ingest.hpp"
#include "biocomp/signal.hpp"

namespace biocomp {

inline constexpr double kCodeDisplaySeconds = 60.0;
inline constexpr double kProseDisplaySeconds = 30.0;
inline constexpr double kFixationSeconds = 10.0;
inline constexpr double kAnswerSlackSeconds = 0.5;

constexpr double nominal_duration(TaskKind kind) noexcept {
    return kind == TaskKind::CODE ? kCodeDisplaySeconds : kProseDisplaySeconds;
}

struct TaskWindow {
    std::string task_id;
    TaskKind kind = TaskKind::PROSE;
    double t_start = 0.0;
    double t_end = 0.0;

    double duration() const noexcept { return t_end - t_start; }

    friend bool operator==(const TaskWindow&, const TaskWindow&) = default;
};

struct WindowSchedule {
    std::vector<TaskWindow> windows;
    std::vector<double> starts;  // scheduled start of every event, answered or not
    std::vector<std::string> warnings;
};

inline WindowSchedule compute_schedule(const Session& session) {
    WindowSchedule out;
    double t = session.t_start_experiment;
    const TaskEvent* prev = nullptr;
    for (const auto& ev : session.events) {
        if (prev) {
            const bool ordered = ev.session_index > prev->session_index ||
                                 (ev.session_index == prev->session_index &&
                                  ev.position_in_session > prev->position_in_session);
            if (!ordered) throw ScheduleError("event " + ev.task_id + " is out of order");
            t += nominal_duration(prev->kind);
            if (ev.session_index != prev->session_index) t += kFixationSeconds;
        }
        out.starts.push_back(t);
        prev = &ev;
        if (!ev.answered()) continue;
        const double t_answer = *ev.t_answer;
        if (!(t_answer > t)) {
            out.warnings.push_back("task " + ev.task_id + ": answer precedes scheduled start, window dropped");
            continue;
        }
        double t_end = t_answer;
        const double cap = t + nominal_duration(ev.kind) + kAnswerSlackSeconds;
        if (t_end > cap) {
            out.warnings.push_back("task " + ev.task_id + ": answer after display timeout, window capped");
            t_end = cap;
        }
        out.windows.push_back({ev.task_id, ev.kind, t, t_end});
    }
    return out;
}

inline std::vector<TaskWindow> compute_task_windows(const Session& session) {
    return compute_schedule(session).windows;
}

inline SampledSignal slice(const SampledSignal& s, const TaskWindow& w) {
    auto out = slice_time(s, w.t_start, w.t_end);
    if (out.empty())
        throw EmptyWindowError("task " + w.task_id + ": no " + std::string(channel_name(s.kind)) + " samples in window");
    return out;
}

}  // namespace biocomp
