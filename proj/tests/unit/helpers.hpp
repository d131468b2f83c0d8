#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "biocomp/ingest.hpp"
#include "biocomp/signal.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("biocomp_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

inline biocomp::SampledSignal sine(biocomp::ChannelKind kind, double rate, double freq, double seconds,
                                   double start = 0.0, double amp = 1.0) {
    biocomp::SampledSignal s{kind, rate, start, {}};
    const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
    for (std::size_t i = 0; i < n; ++i)
        s.values.push_back(amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / rate));
    return s;
}

inline biocomp::SampledSignal constant(biocomp::ChannelKind kind, double rate, double value, double seconds,
                                       double start = 0.0) {
    const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
    return {kind, rate, start, std::vector<double>(n, value)};
}

/// A three-session manifest (3 CODE + 6 PROSE per session), every task answered
/// `latency` seconds after its scheduled start.
inline biocomp::Session nominal_session(double t0 = 1000.0, double latency = 20.0) {
    using namespace biocomp;
    Session s;
    s.participant.id = "P01";
    s.participant.gpa = 3.1;
    s.t_start_experiment = t0;
    s.baseline_start = t0 - 65.0;
    s.baseline_end = t0 - 5.0;
    s.sessions = 3;
    double t = t0;
    for (int si = 1; si <= 3; ++si) {
        for (int pos = 1; pos <= 9; ++pos) {
            const bool code = pos % 3 == 0;
            TaskEvent e;
            e.task_id = "s" + std::to_string(si) + "t" + std::to_string(pos);
            e.kind = code ? TaskKind::CODE : TaskKind::PROSE;
            e.session_index = si;
            e.position_in_session = pos;
            e.t_answer = t + latency;
            e.answer = Answer::ACCEPT;
            s.events.push_back(e);
            t += code ? 60.0 : 30.0;
        }
        t += 10.0;
    }
    return s;
}

}  // namespace testing_support
