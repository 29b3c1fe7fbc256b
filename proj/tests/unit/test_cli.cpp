#include <gtest/gtest.h>

#include <sstream>

#include "simforge/cli/cli.hpp"
#include "testing.hpp"

namespace simforge::cli {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct Invocation {
    int code = -1;
    std::string out;
    std::string err;
};

class CliTest : public ::testing::Test {
protected:
    CliTest() {
        fs::copy_file(testing::fixture_dir() / "scenarios" / "catcher.txt", dir / "catcher.txt");
        scenario = (testing::fixture_dir() / "scenarios" / "catcher.yaml").string();
    }

    Invocation invoke(std::vector<std::string> args, Environment env = {}) {
        std::vector<std::string> full{"simforge", "--db", (dir / "s.db").string(), "--harness",
                                      testing::stub_harness().string()};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        Invocation inv;
        inv.code = run(static_cast<int>(argv.size()), argv.data(), out, err, env);
        inv.out = out.str();
        inv.err = err.str();
        return inv;
    }

    Invocation generate(std::vector<std::string> extra = {}) {
        std::vector<std::string> args{"generate",   (dir / "catcher.txt").string(), "--backend", "scripted",
                                      "--scenario", scenario,                       "--out",     (dir / "out").string()};
        args.insert(args.end(), extra.begin(), extra.end());
        return invoke(args);
    }

    TempDir dir;
    std::string scenario;
};

TEST_F(CliTest, GenerateWritesGameAndReports) {
    Invocation inv = generate();
    ASSERT_EQ(inv.code, kExitOk) << inv.err;
    EXPECT_EQ(testing::read_file(dir / "out" / "game.py"),
              testing::read_file(testing::fixture_dir() / "golden" / "catcher_game.py"));
    EXPECT_EQ(testing::read_file(dir / "out" / "report.json"),
              testing::read_file(testing::fixture_dir() / "golden" / "catcher_report.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "report.txt"));
    EXPECT_NE(inv.out.find("Outputs written to"), std::string::npos);
}

TEST_F(CliTest, HttpBackendWithoutKeyNamesTheVariable) {
    Invocation inv = invoke({"generate", (dir / "catcher.txt").string(), "--out", (dir / "out").string()});
    EXPECT_EQ(inv.code, kExitConfig);
    EXPECT_NE(inv.err.find("OPENAI_API_KEY"), std::string::npos);
}

TEST_F(CliTest, ExhaustedScenarioFailsWithPartialReport) {
    std::string text = testing::read_file(scenario);
    testing::write_file(dir / "short.yaml", text.substr(0, text.find("  # Step 2")));
    scenario = (dir / "short.yaml").string();
    Invocation inv = generate({"--retries", "1"});
    EXPECT_EQ(inv.code, kExitStepFailure);
    auto report = nlohmann::json::parse(testing::read_file(dir / "out" / "report.json"));
    EXPECT_EQ(report["status"], "failed");
    ASSERT_EQ(report["steps"].size(), 2u);
    EXPECT_EQ(report["steps"][0]["status"], "completed");
    EXPECT_EQ(report["steps"][1]["status"], "failed");
}

TEST_F(CliTest, StopAfterThenResume) {
    Invocation first = generate({"--stop-after", "1"});
    EXPECT_EQ(first.code, kExitStopped);
    EXPECT_NE(first.err.find("simforge resume catcher"), std::string::npos);

    Invocation resumed = invoke({"resume", "catcher", "--backend", "scripted", "--scenario", scenario, "--out",
                                 (dir / "out").string()});
    ASSERT_EQ(resumed.code, kExitOk) << resumed.err;
    EXPECT_EQ(testing::read_file(dir / "out" / "game.py"),
              testing::read_file(testing::fixture_dir() / "golden" / "catcher_game.py"));

    Invocation again = invoke({"resume", "catcher", "--backend", "scripted", "--scenario", scenario, "--out",
                               (dir / "out").string()});
    EXPECT_EQ(again.code, kExitOk);
}

TEST_F(CliTest, UnknownSessionIsConfigError) {
    ASSERT_EQ(generate({"--stop-after", "1"}).code, kExitStopped);
    EXPECT_EQ(invoke({"resume", "nope", "--backend", "scripted", "--scenario", scenario}).code, kExitConfig);
    EXPECT_EQ(invoke({"inspect", "nope"}).code, kExitConfig);
    EXPECT_EQ(invoke({"report", "nope"}).code, kExitConfig);
}

TEST_F(CliTest, ReadOnlyCommandsLeaveTheStoreUntouched) {
    ASSERT_EQ(generate().code, kExitOk);
    std::string before = testing::read_file(dir / "s.db");

    Invocation inspect = invoke({"inspect", "catcher"});
    EXPECT_EQ(inspect.code, kExitOk);
    EXPECT_NE(inspect.out.find("State variables (11)"), std::string::npos);
    EXPECT_NE(inspect.out.find("handle_paddle_input [input_logic]"), std::string::npos);

    Invocation report = invoke({"report", "catcher", "--json"});
    EXPECT_EQ(report.code, kExitOk);
    auto doc = nlohmann::json::parse(report.out);
    EXPECT_TRUE(doc["steps"][0].contains("rho"));

    EXPECT_EQ(invoke({"inspect", "catcher", "--json"}).code, kExitOk);
    EXPECT_EQ(testing::read_file(dir / "s.db"), before);
}

TEST_F(CliTest, InitialSessionInspectListsFourVariables) {
    testing::write_file(dir / "one.yaml",
                        "responses:\n  - role: spec.decomposer\n    step: 0\n    round: 0\n"
                        "    content: {steps: [Do one thing.]}\n");
    scenario = (dir / "one.yaml").string();
    EXPECT_EQ(generate({"--stop-after", "0"}).code, kExitStopped);
    Invocation inspect = invoke({"inspect", "catcher"});
    EXPECT_NE(inspect.out.find("State variables (4)"), std::string::npos);
}

TEST_F(CliTest, SchemasAndBadFlags) {
    Invocation inv = invoke({"schemas", "--out", (dir / "schemas").string()});
    EXPECT_EQ(inv.code, kExitOk);
    EXPECT_TRUE(fs::exists(dir / "schemas" / "critique_state_change.json"));

    EXPECT_EQ(invoke({}).code, kExitConfig);
    EXPECT_EQ(generate({"--tau", "12"}).code, kExitConfig);
    EXPECT_EQ(invoke({"generate", (dir / "missing.txt").string()}).code, kExitConfig);
    EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST_F(CliTest, ConfigFileFillsOptionsFlagsOverride) {
    testing::write_file(dir / "run.ini", "backend=scripted\nscenario=" + scenario + "\nstop-after=1\n");
    Invocation from_config = invoke({"generate", (dir / "catcher.txt").string(), "--config",
                                     (dir / "run.ini").string(), "--out", (dir / "out").string()});
    EXPECT_EQ(from_config.code, kExitStopped) << from_config.err;

    Invocation overridden = invoke({"resume", "catcher", "--config", (dir / "run.ini").string(), "--stop-after", "2",
                                    "--out", (dir / "out").string()});
    EXPECT_EQ(overridden.code, kExitOk) << overridden.err;
}

}  // namespace
}  // namespace simforge::cli
