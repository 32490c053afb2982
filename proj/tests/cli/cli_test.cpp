#include <chanscope/io.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int status = 0;
    std::string out; // stdout
    std::string err; // stderr
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << s;
}

CliRun cli(const std::string& args) {
    static int counter = 0;
    auto err_file = fs::path(CHANSCOPE_WORK) / ("stderr_" + std::to_string(counter++) + ".txt");
    fs::create_directories(err_file.parent_path());
    std::string cmd = std::string(CHANSCOPE_CLI) + " " + args + " 2>" + err_file.string();
    CliRun r;
    FILE* p = ::popen(cmd.c_str(), "r");
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = ::pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : 128;
    r.err = slurp(err_file);
    return r;
}

const std::vector<std::string> kStages = {"crawl", "ingest", "chunk", "score-merge", "ensemble", "eval", "derive-threshold",
                                          "label-channels", "build-graph", "topic-features", "embed", "train-head",
                                          "communities", "trend", "report"};

class Cli : public ::testing::Test {
protected:
    fs::path dir;
    std::string config = (fs::path(CHANSCOPE_FIXTURE) / "config.cfg").string();

    void SetUp() override {
        dir = fs::path(CHANSCOPE_WORK) / ::testing::UnitTest::GetInstance()->current_test_info()->name();
        fs::remove_all(dir);
        fs::create_directories(dir);
    }

    CliRun stage(const std::string& name, const std::string& extra = "") {
        return cli(name + " --config " + config + " --out-dir " + dir.string() + " " + extra);
    }

    void stages_until(const std::string& last) {
        for (const auto& s : kStages) {
            auto r = stage(s);
            ASSERT_EQ(r.status, 0) << s << ": " << r.err;
            if (s == last) return;
        }
    }
};

} // namespace

TEST_F(Cli, VersionAndHelpExitZero) {
    EXPECT_EQ(cli("--version").status, 0);
    auto h = cli("--help");
    EXPECT_EQ(h.status, 0);
    for (const auto& s : kStages) EXPECT_NE(h.out.find(s), std::string::npos) << s;
}

TEST_F(Cli, UnknownSubcommandExitsTwo) {
    EXPECT_EQ(cli("frobnicate").status, 2);
    EXPECT_EQ(cli("").status, 2);
    EXPECT_EQ(cli("ensemble --no-such-flag").status, 2);
}

TEST_F(Cli, DeriveThresholdFromProbability) {
    auto r = stage("derive-threshold", "--p-false 0.768 --epsilon 0.01");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "k = 18\n");
    auto j = chanscope::io::json::parse(slurp(dir / "threshold_derivation.json"));
    EXPECT_EQ(j["k"], 18);
    auto js = stage("derive-threshold", "--p-false 0.768 --epsilon 0.01 --json");
    EXPECT_EQ(chanscope::io::json::parse(js.out)["k"], 18);
}

TEST_F(Cli, ReportWithoutPriorOutputsNamesPrerequisite) {
    auto r = stage("report");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("ingest_report.json"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("chanscope ingest"), std::string::npos) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << "error must be one line";
}

TEST_F(Cli, MissingStageInputNamesProducer) {
    auto r = stage("ensemble");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("messages.jsonl"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("chanscope crawl"), std::string::npos) << r.err;
}

TEST_F(Cli, EnsembleMatchesGoldenLabels) {
    stages_until("ensemble");
    EXPECT_EQ(slurp(dir / "labels.jsonl"), slurp(fs::path(CHANSCOPE_FIXTURE) / "golden" / "labels.jsonl"));
}

TEST_F(Cli, SchemaViolationNamesFileAndLine) {
    stages_until("chunk");
    // copy the fixture scores with one corrupted record on line 3 of clf2.jsonl
    auto scores = dir / "bad_scores";
    fs::create_directories(scores);
    for (const auto& e : fs::directory_iterator(fs::path(CHANSCOPE_FIXTURE) / "scores")) fs::copy(e.path(), scores / e.path().filename());
    std::istringstream in(slurp(scores / "clf2.jsonl"));
    std::ostringstream out;
    std::string line;
    for (int i = 1; std::getline(in, line); ++i) out << (i == 3 ? std::regex_replace(line, std::regex("\"p_abusive\":[^,}]+"), "\"p_abusive\":\"high\"") : line) << "\n";
    spit(scores / "clf2.jsonl", out.str());
    auto cfg = dir / "bad.cfg";
    spit(cfg, slurp(config) + "scores = " + scores.string() + "\n");
    // relative paths in the copied config must still resolve against the fixture
    std::string text = slurp(cfg);
    text = std::regex_replace(text, std::regex("(seeds|universe|annotations|topics|doc_embeddings) = "), "$1 = " + std::string(CHANSCOPE_FIXTURE) + "/");
    spit(cfg, text);
    auto r = cli("score-merge --config " + cfg.string() + " --out-dir " + dir.string());
    EXPECT_EQ(r.status, 1);
    std::regex want("^chanscope: error: .*clf2\\.jsonl:3: .*p_abusive.*\n$");
    EXPECT_TRUE(std::regex_match(r.err, want)) << r.err;
    EXPECT_FALSE(fs::exists(dir / "scores.jsonl"));
}

TEST_F(Cli, ConfigErrorsNameLine) {
    auto cfg = dir / "c.cfg";
    spit(cfg, "# comment\nseed = 1\nno_such_key = 3\n");
    auto r = cli("ingest --config " + cfg.string() + " --out-dir " + dir.string());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("c.cfg:3:"), std::string::npos) << r.err;
    spit(cfg, "ensemble.t = many\n");
    auto t = cli("derive-threshold --p-false 0.5 --config " + cfg.string() + " --out-dir " + dir.string());
    EXPECT_EQ(t.status, 0) << "unused keys are only parsed when read";
}

TEST_F(Cli, LockBlocksConcurrentInvocation) {
    spit(dir / ".chanscope.lock", "");
    auto r = stage("derive-threshold", "--p-false 0.5");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("locked"), std::string::npos) << r.err;
    fs::remove(dir / ".chanscope.lock");
    EXPECT_EQ(stage("derive-threshold", "--p-false 0.5").status, 0);
    EXPECT_FALSE(fs::exists(dir / ".chanscope.lock"));
}

TEST_F(Cli, ManifestsCoverEveryOutputOnceAndRerunsAreIdempotent) {
    stages_until("report");
    std::map<std::string, int> listed;
    for (const auto& e : fs::directory_iterator(dir / "manifests")) {
        auto m = chanscope::io::json::parse(slurp(e.path()));
        EXPECT_EQ(m["seed"], 42);
        EXPECT_TRUE(m.contains("version"));
        EXPECT_TRUE(m["config"].is_object());
        for (const auto& o : m["outputs"]) {
            ++listed[o["path"].get<std::string>()];
            EXPECT_EQ(o["sha256"].get<std::string>().size(), 64u);
        }
        for (const auto& i : m["inputs"]) EXPECT_EQ(i["sha256"].get<std::string>().size(), 64u);
    }
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto name = e.path().filename().string();
        EXPECT_EQ(listed[name], 1) << name;
    }
    auto before = slurp(dir / "channel_embeddings.jsonl");
    auto labels = slurp(dir / "channel_labels.csv");
    ASSERT_EQ(stage("embed").status, 0);
    ASSERT_EQ(stage("label-channels").status, 0);
    EXPECT_EQ(slurp(dir / "channel_embeddings.jsonl"), before);
    EXPECT_EQ(slurp(dir / "channel_labels.csv"), labels);
}

TEST_F(Cli, SeedFlagChangesLearnedOutputs) {
    stages_until("embed");
    auto a = slurp(dir / "channel_embeddings.jsonl");
    ASSERT_EQ(stage("embed", "--seed 7").status, 0);
    EXPECT_NE(slurp(dir / "channel_embeddings.jsonl"), a);
    auto m = chanscope::io::json::parse(slurp(dir / "manifests" / "embed.manifest.json"));
    EXPECT_EQ(m["seed"], 7);
}

TEST_F(Cli, JsonSummaries) {
    stages_until("eval");
    auto r = stage("eval", "--json");
    ASSERT_EQ(r.status, 0);
    auto j = chanscope::io::json::parse(r.out);
    EXPECT_TRUE(j["classifiers"].contains("ensemble"));
    EXPECT_GE(j["annotation"]["krippendorff_alpha"].get<double>(), -1.0);
}

TEST(Fixture, RegenerationReproducesCommittedFiles) {
    auto out = fs::path(CHANSCOPE_WORK) / "fixture_regen";
    fs::remove_all(out);
    ASSERT_EQ(std::system((std::string(CHANSCOPE_MAKE_FIXTURE) + " " + out.string() + " >/dev/null").c_str()), 0);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(out)) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), out);
        EXPECT_EQ(slurp(e.path()), slurp(fs::path(CHANSCOPE_FIXTURE) / rel)) << rel;
        ++files;
    }
    EXPECT_EQ(files, 13u);
}
