#include <fstream>

#include <gtest/gtest.h>

#include "biocomp/ingest.hpp"
#include "biocomp/synth.hpp"
#include "helpers.hpp"

using namespace biocomp;
using testing_support::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

Session small_session() {
    Session s;
    s.participant.id = "P07";
    s.participant.gpa = 3.4;
    s.t_start_experiment = 200.0;
    s.baseline_start = 100.0;
    s.baseline_end = 190.0;
    s.sessions = 1;
    TaskEvent e;
    e.task_id = "p1";
    e.kind = TaskKind::PROSE;
    e.t_answer = 215.0;
    e.answer = Answer::REJECT;
    s.events.push_back(e);
    s.channels[ChannelKind::EDA] = testing_support::constant(ChannelKind::EDA, 4.0, 1.25, 200.0, 50.0);
    s.channels[ChannelKind::BVP] = testing_support::sine(ChannelKind::BVP, 64.0, 1.2, 200.0, 50.0);
    return s;
}

}  // namespace

TEST(LoadChannel, ParsesHeaderAndBody) {
    TempDir dir("chan");
    write(dir / "EDA.csv", "1500000000\n4\n0.1\n0.2\n");
    const auto s = load_channel(dir / "EDA.csv", ChannelKind::EDA);
    EXPECT_EQ(s.start_time, 1500000000.0);
    EXPECT_EQ(s.sample_rate, 4.0);
    EXPECT_EQ(s.values, (std::vector<double>{0.1, 0.2}));
}

TEST(LoadChannel, LastTimestampFollowsRate) {
    TempDir dir("chan");
    std::string text = "1000\n4\n";
    for (int i = 0; i < 120; ++i) text += "0.5\n";
    write(dir / "EDA.csv", text);
    const auto s = load_channel(dir / "EDA.csv", ChannelKind::EDA);
    EXPECT_DOUBLE_EQ(s.end_time(), 1000.0 + 119.0 / 4.0);
}

TEST(LoadChannel, RejectsMalformedFiles) {
    TempDir dir("chan");
    const auto p = dir / "EDA.csv";
    for (const char* bad : {"1500000000\n0\n0.1\n", "abc\n4\n0.1\n", "1\n4\n0.1\nfoo\n", "1\n4\nnan\n",
                            "1\n4\n0.1\n\n0.2\n", "1\n"}) {
        write(p, bad);
        EXPECT_THROW(load_channel(p, ChannelKind::EDA), FormatError) << bad;
    }
    write(p, "1\n4\n");
    EXPECT_THROW(load_channel(p, ChannelKind::EDA), EmptyChannelError);
    EXPECT_THROW(load_channel(dir / "missing.csv", ChannelKind::EDA), InputError);
}

TEST(LoadChannel, FormatErrorNamesFile) {
    TempDir dir("chan");
    write(dir / "BVP.csv", "1\n64\nxyz\n");
    try {
        load_channel(dir / "BVP.csv", ChannelKind::BVP);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("BVP.csv"), std::string::npos);
    }
}

TEST(LoadSession, MinimalManifestRoundTrips) {
    TempDir dir("sess");
    const auto s = small_session();
    write_session(dir.path(), s);
    const auto back = load_session(dir.path());
    EXPECT_EQ(back.events.size(), 1u);
    EXPECT_EQ(back.channels.size(), 2u);
    EXPECT_EQ(back, s);
}

TEST(LoadSession, RejectsStartBeforeBaselineEnd) {
    TempDir dir("sess");
    auto s = small_session();
    write_session(dir.path(), s);
    auto m = manifest_json(s);
    m["t_start_experiment"] = 150.0;
    write(dir / "manifest.json", m.dump());
    EXPECT_THROW(load_session(dir.path()), ManifestError);
}

TEST(LoadSession, RejectsInconsistentEvents) {
    const auto base = manifest_json(small_session());
    auto m = base;
    m["events"][0]["answer"] = "NONE";
    EXPECT_THROW(parse_manifest(m, "m"), ManifestError);
    m = base;
    m["events"].push_back(base["events"][0]);
    EXPECT_THROW(parse_manifest(m, "m"), ManifestError);
    m = base;
    m["events"][0]["kind"] = "POETRY";
    EXPECT_THROW(parse_manifest(m, "m"), ManifestError);
    m = base;
    m["participant"]["gpa"] = 5.0;
    EXPECT_THROW(parse_manifest(m, "m"), ManifestError);
    m = base;
    m.erase("baseline");
    EXPECT_THROW(parse_manifest(m, "m"), ManifestError);
}

TEST(LoadSession, EventsSortedAndUnknownKeysIgnored) {
    auto s = testing_support::nominal_session();
    auto m = manifest_json(s);
    std::reverse(m["events"].begin(), m["events"].end());
    m["extra"] = {{"x", 1}};
    const auto back = parse_manifest(m, "m");
    EXPECT_EQ(back.events, s.events);
    EXPECT_EQ(back.sessions, 3);
}

TEST(LoadSession, DeclaredChannelMustExist) {
    TempDir dir("sess");
    auto s = small_session();
    write_session(dir.path(), s);
    std::filesystem::remove(dir / "BVP.csv");
    EXPECT_THROW(load_session(dir.path()), MissingChannelError);
}

TEST(LoadSession, SynthSessionRoundTrips) {
    TempDir dir("sess");
    synth::SynthConfig cfg;
    cfg.n_participants = 2;
    const auto g = synth::generate_session(cfg, 0);
    EXPECT_EQ(g.session.events.size(), 27u);
    EXPECT_EQ(g.session.channels.size(), 5u);
    write_session(dir.path(), g.session);
    EXPECT_EQ(load_session(dir.path()), g.session);
}

TEST(ValidateCorpus, EmptyRootHasNoSessions) {
    TempDir dir("val");
    const auto r = validate_corpus(dir.path());
    EXPECT_FALSE(r.analyzable());
    ASSERT_EQ(r.notes.size(), 1u);
    EXPECT_EQ(r.notes[0], "no sessions");
}

TEST(ValidateCorpus, MissingChannelIsErrorOnlyWhenRequired) {
    TempDir dir("val");
    write_session(dir / "P07", small_session());
    const auto lenient = validate_corpus(dir.path(), {ChannelKind::BVP});
    EXPECT_TRUE(lenient.analyzable());
    EXPECT_EQ(lenient.error_count(), 0u);
    const auto strict = validate_corpus(dir.path(), {ChannelKind::EEG_RAW});
    EXPECT_FALSE(strict.analyzable());
}

TEST(ValidateCorpus, UnansweredSessionWarns) {
    TempDir dir("val");
    auto s = small_session();
    s.events[0].answer = Answer::NONE;
    s.events[0].t_answer.reset();
    write_session(dir / "P07", s);
    const auto r = validate_corpus(dir.path());
    const auto& w = r.sessions.at(0).warnings;
    EXPECT_NE(std::find(w.begin(), w.end(), "no usable windows"), w.end());
}

TEST(ValidateCorpus, CorruptFileIsReportedByName) {
    TempDir dir("val");
    write_session(dir / "P07", small_session());
    write(dir / "P07" / "EDA.csv", "1\n4\noops\n");
    const auto r = validate_corpus(dir.path());
    ASSERT_EQ(r.error_count(), 1u);
    EXPECT_NE(r.sessions[0].errors[0].find("EDA.csv"), std::string::npos);
}

TEST(ValidateCorpus, DuplicateParticipantIds) {
    TempDir dir("val");
    write_session(dir / "a", small_session());
    write_session(dir / "b", small_session());
    const auto r = validate_corpus(dir.path());
    EXPECT_EQ(r.error_count(), 1u);
    EXPECT_TRUE(r.analyzable());
}
