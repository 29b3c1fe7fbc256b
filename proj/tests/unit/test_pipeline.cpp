#include <gtest/gtest.h>

#include "simforge/errors.hpp"
#include "simforge/pipeline/pipeline.hpp"
#include "testing.hpp"

namespace simforge::pipeline {
namespace {

using scoring::ComponentKind;
using testing::FakeChecker;
using testing::ScenarioBuilder;
using testing::TempDir;
using namespace std::chrono_literals;

RunConfig quick_config() {
    RunConfig c;
    c.retry.sleep = [](std::chrono::milliseconds) {};
    return c;
}

// State change adding `lives`, one logic function decrementing it.
void script_lives_step(ScenarioBuilder& b, int step, int copies = 1) {
    core::StateVariable lives{"lives", "3", core::ValueType::Int, "Lives left", false};
    for (int i = 0; i < copies; ++i) {
        b.accept_trio(ComponentKind::StateChange, step, testing::state_change_json({}, {lives}), {9, 9, 9});
        b.accept_trio(ComponentKind::Decompose, step, testing::decompose_json(std::nullopt, "lose_life", std::nullopt),
                      {9, 9, 9});
        b.accept_trio(ComponentKind::StateTransition, step,
                      testing::function_json("lose_life", "def lose_life(state):\n    state.lives -= 0\n", {"lives"}),
                      {9, 9, 9});
    }
}

struct Harness {
    explicit Harness(llm::ScriptedScenario scenario, RunConfig config = quick_config(),
                     std::vector<validator::SanityReport> reports = {})
        : backend(std::move(scenario)), store(dir / "s.db"), checker(std::move(reports)),
          pipeline(std::move(config), backend, testing::shipped_registry(), store, checker) {}

    TempDir dir;
    llm::ScriptedBackend backend;
    store::SessionStore store;
    FakeChecker checker;
    Pipeline pipeline;
};

TEST(DecomposeSpecTest, ReturnsThePlan) {
    ScenarioBuilder b;
    b.decomposer({"a", "b", "c", "d", "e", "f"});
    Harness h(b.build());
    EXPECT_EQ(h.pipeline.decompose_spec({"t", "A game."}).steps.size(), 6u);

    ScenarioBuilder one;
    one.decomposer({"  Only step.  "});
    Harness h1(one.build());
    EXPECT_EQ(h1.pipeline.decompose_spec({"t", "A game."}).steps, (std::vector<std::string>{"Only step."}));
}

TEST(DecomposeSpecTest, ReasksThenFails) {
    ScenarioBuilder empty;
    empty.raw("spec.decomposer", 0, 0, R"({"steps": []})");
    empty.raw("spec.decomposer", 0, 1, R"({"steps": []})");
    empty.raw("spec.decomposer", 0, 2, R"({"steps": []})");
    Harness h(empty.build(false));
    EXPECT_THROW(h.pipeline.decompose_spec({"t", "A game."}), DecompositionFailure);
    for (const auto& r : h.backend.requests()) EXPECT_EQ(r.key.agent_role, "spec.decomposer");

    RunConfig two_steps = quick_config();
    two_steps.max_steps = 2;
    ScenarioBuilder long_plan;
    long_plan.decomposer({"a", "b", "c"}, 0).decomposer({"a", "b"}, 1);
    Harness h2(long_plan.build(), two_steps);
    EXPECT_EQ(h2.pipeline.decompose_spec({"t", "A game."}).steps.size(), 2u);
    EXPECT_NE(h2.backend.requests().back().messages.back().content.find("between 1 and 2"), std::string::npos);

    EXPECT_THROW(h2.pipeline.decompose_spec({"t", "  \n"}), ConfigError);
}

TEST(RunStepTest, CommitsTheStep) {
    ScenarioBuilder b;
    script_lives_step(b, 1);
    Harness h(b.build());
    StepOutcome out = h.pipeline.run_step("g", core::new_initial_session(), "Track lives.", 1, true);

    EXPECT_TRUE(out.report.completed);
    ASSERT_EQ(out.report.attempts.size(), 1u);
    EXPECT_EQ(out.report.attempts[0].trios.size(), 3u);
    EXPECT_EQ(out.report.scope_variables, (std::vector<std::string>{"lives"}));
    EXPECT_EQ(out.report.scope_functions, (std::vector<std::string>{"lose_life"}));
    EXPECT_EQ(out.report.usage, (llm::Usage{210, 75}));

    core::SessionModel stored = h.store.load("g");
    EXPECT_EQ(stored, out.session);
    EXPECT_EQ(stored.queries, (std::vector<std::string>{"Track lives."}));
    EXPECT_NE(stored.find_function("lose_life"), nullptr);
    EXPECT_EQ(stored.metadata.at(meta::kStepIndex), "1");
    EXPECT_EQ(stored.metadata.at(meta::kStatus), "completed");
    EXPECT_EQ(stored.metadata.at(meta::kTokensIn), "210");
    EXPECT_TRUE(h.store.snapshots("g").empty());
    EXPECT_EQ(h.store.transcripts("g").size(), 9u);  // three agents for each of three trios
    ASSERT_EQ(h.checker.checked_code.size(), 1u);
    EXPECT_NE(h.checker.checked_code[0].find("        lose_life(state)\n"), std::string::npos);
}

// A retried step must equal a clean run: nothing from the failed attempt survives.
TEST(RunStepTest, RetryStartsFromTheSnapshot) {
    ScenarioBuilder twice;
    script_lives_step(twice, 1, 2);
    Harness retried(twice.build(), quick_config(), {FakeChecker::crashing(10), FakeChecker::passing()});
    StepOutcome r = retried.pipeline.run_step("g", core::new_initial_session(), "Track lives.", 1);

    ScenarioBuilder once;
    script_lives_step(once, 1);
    Harness clean(once.build());
    StepOutcome c = clean.pipeline.run_step("g", core::new_initial_session(), "Track lives.", 1);

    ASSERT_EQ(r.report.attempts.size(), 2u);
    EXPECT_NE(r.report.attempts[0].diagnostic.find("ran_frames=10/300"), std::string::npos);
    EXPECT_TRUE(r.report.attempts[1].diagnostic.empty());
    core::SessionModel a = retried.store.load("g");
    core::SessionModel b = clean.store.load("g");
    EXPECT_EQ(a.state_variables, b.state_variables);
    EXPECT_EQ(a.functions, b.functions);
    EXPECT_EQ(a.queries, b.queries);
    EXPECT_EQ(retried.backend.unconsumed(), 0u);
    EXPECT_TRUE(retried.store.snapshots("g").empty());
}

TEST(RunStepTest, ExhaustedRetriesRestoreThePreStepSession) {
    RunConfig one_try = quick_config();
    one_try.max_retries = 1;
    ScenarioBuilder b;
    script_lives_step(b, 1);
    Harness h(b.build(), one_try, {FakeChecker::crashing(10)});
    core::SessionModel before = core::new_initial_session();
    before.metadata["marker"] = "kept";
    try {
        h.pipeline.run_step("g", before, "Track lives.", 1);
        FAIL() << "expected StepFailure";
    } catch (const StepFailure& e) {
        ASSERT_EQ(e.diagnostics().size(), 1u);
        EXPECT_NE(e.diagnostics()[0].find("ZeroDivisionError"), std::string::npos);
    }
    EXPECT_EQ(h.store.load("g"), before);
    ASSERT_TRUE(h.pipeline.failed_step().has_value());
    EXPECT_FALSE(h.pipeline.failed_step()->completed);
    EXPECT_EQ(h.pipeline.failed_step()->usage, (llm::Usage{210, 75}));
    EXPECT_TRUE(h.store.snapshots("g").empty());
}

TEST(RunStepTest, AgentFailuresAreRetried) {
    ScenarioBuilder b;
    b.raw("state_change.designer", 1, 0, "{}").raw("state_change.designer", 1, 0, "{}");
    script_lives_step(b, 1);
    Harness h(b.build());
    StepOutcome out = h.pipeline.run_step("g", core::new_initial_session(), "Track lives.", 1);
    ASSERT_EQ(out.report.attempts.size(), 2u);
    EXPECT_NE(out.report.attempts[0].diagnostic.find("designer output rejected"), std::string::npos);
}

TEST(RunStepTest, UnavailableHarnessIsNotRetried) {
    ScenarioBuilder b;
    script_lives_step(b, 1, 3);
    Harness h(b.build());
    h.checker.unavailable = true;
    core::SessionModel before = core::new_initial_session();
    EXPECT_THROW(h.pipeline.run_step("g", before, "Track lives.", 1), HarnessUnavailable);
    EXPECT_EQ(h.store.load("g"), before);
    EXPECT_EQ(h.backend.requests().size(), 6u);
}

class CatcherRunTest : public ::testing::Test {
protected:
    RunResult run_catcher(const std::filesystem::path& db, const std::string& id, std::optional<int> stop_after = {},
                          llm::ScriptedBackend** backend_out = nullptr) {
        backends_.push_back(std::make_unique<llm::ScriptedBackend>(testing::catcher_scenario()));
        if (backend_out) *backend_out = backends_.back().get();
        store::SessionStore store(db);
        Pipeline p(quick_config(), *backends_.back(), testing::shipped_registry(), store, harness_);
        return p.run({"catcher", testing::catcher_spec()}, id, stop_after);
    }

    RunResult resume_catcher(const std::filesystem::path& db, const std::string& id) {
        backends_.push_back(std::make_unique<llm::ScriptedBackend>(testing::catcher_scenario()));
        store::SessionStore store(db);
        Pipeline p(quick_config(), *backends_.back(), testing::shipped_registry(), store, harness_);
        return p.resume(id);
    }

    TempDir dir;
    validator::HarnessValidator harness_{{{testing::stub_harness().string()}, {}, 2000ms}};
    std::vector<std::unique_ptr<llm::ScriptedBackend>> backends_;
};

TEST_F(CatcherRunTest, ProducesTheGoldenGame) {
    llm::ScriptedBackend* backend = nullptr;
    RunResult r = run_catcher(dir / "s.db", "catcher", {}, &backend);
    EXPECT_EQ(r.code, testing::read_file(testing::fixture_dir() / "golden" / "catcher_game.py"));
    EXPECT_EQ(r.report.status, RunStatus::Completed);
    EXPECT_EQ(r.report.plan.size(), 2u);
    EXPECT_EQ(backend->unconsumed(), 0u);
    EXPECT_EQ(r.report.usage, testing::scenario_usage(testing::catcher_scenario()));
    EXPECT_EQ(r.report.decomposition_usage, (llm::Usage{120, 40}));
    EXPECT_EQ(r.session.find_variable("paddle_color"), nullptr);

    const StepReport& step1 = r.report.steps.at(0);
    ASSERT_EQ(step1.attempts.size(), 1u);
    const TrioSummary& input = step1.attempts[0].trios.at(2);
    EXPECT_EQ(input.kind, ComponentKind::InputLogic);
    EXPECT_EQ(input.decisions, (std::vector<std::string>{"refine", "rollback", "accept"}));
    EXPECT_EQ(input.checkpoint_totals, (std::vector<int>{20, 20, 25}));
    EXPECT_EQ(r.report.steps.at(1).attempts[0].trios.back().round_totals, (std::vector<int>{31, 35}));
}

TEST_F(CatcherRunTest, RepeatedRunsAreByteIdentical) {
    std::vector<std::string> codes, reports;
    for (int i = 0; i < 3; ++i) {
        TempDir d;
        RunResult r = run_catcher(d / "s.db", "catcher");
        codes.push_back(r.code);
        reports.push_back(to_json(r.report).dump(2));
    }
    EXPECT_EQ(codes[0], codes[1]);
    EXPECT_EQ(codes[1], codes[2]);
    EXPECT_EQ(reports[0], reports[1]);
    EXPECT_EQ(reports[1], reports[2]);
    EXPECT_EQ(reports[0] + "\n", testing::read_file(testing::fixture_dir() / "golden" / "catcher_report.json"));
}

TEST_F(CatcherRunTest, ResumeMatchesStraightThrough) {
    RunResult straight = run_catcher(dir / "a.db", "catcher");

    RunResult first = run_catcher(dir / "b.db", "catcher", 1);
    EXPECT_EQ(first.report.status, RunStatus::Stopped);
    EXPECT_EQ(first.report.steps.size(), 1u);
    RunResult resumed = resume_catcher(dir / "b.db", "catcher");

    EXPECT_EQ(resumed.code, straight.code);
    EXPECT_EQ(to_json(resumed.report).dump(), to_json(straight.report).dump());
    EXPECT_EQ(store::SessionStore(dir / "b.db").load("catcher"), store::SessionStore(dir / "a.db").load("catcher"));

    // A finished run resumes to itself without calling the backend.
    RunResult again = resume_catcher(dir / "b.db", "catcher");
    EXPECT_EQ(again.code, straight.code);
    EXPECT_TRUE(backends_.back()->requests().empty());
}

TEST_F(CatcherRunTest, ScopedTrioRequestsStayInScope) {
    llm::ScriptedBackend* backend = nullptr;
    RunResult r = run_catcher(dir / "s.db", "catcher", {}, &backend);
    EXPECT_EQ(testing::context_leaks(backend->requests(), r.report, r.session), std::vector<std::string>{});

    // The scan does catch a leak when one is planted.
    auto requests = backend->requests();
    for (auto& q : requests) {
        if (q.key.agent_role == "ui_rendering.designer" && q.key.step_index == 2) q.messages.back().content += "\nstate.paddle_x";
    }
    EXPECT_FALSE(testing::context_leaks(requests, r.report, r.session).empty());
}

TEST_F(CatcherRunTest, ContextShrinksWithScope) {
    RunResult r = run_catcher(dir / "s.db", "catcher");
    const auto& s1 = r.report.steps.at(0);
    const auto& s2 = r.report.steps.at(1);
    EXPECT_GT(s1.rho, 0.0);
    EXPECT_LT(s1.rho, 1.0);
    EXPECT_LT(s2.rho, s1.rho);
    EXPECT_EQ(s2.scope_variables, (std::vector<std::string>{"hud_font_size", "score"}));
    EXPECT_TRUE(s2.scope_functions == (std::vector<std::string>{"draw_score"}));
    // Reports carry rho rounded to six digits.
    EXPECT_NEAR(s2.rho, static_cast<double>(s2.scoped_tokens) / static_cast<double>(s2.full_tokens), 1e-6);
}

TEST_F(CatcherRunTest, ExistingSessionIsRefused) {
    run_catcher(dir / "s.db", "catcher", 1);
    EXPECT_THROW(run_catcher(dir / "s.db", "catcher"), ConfigError);
}

TEST(PipelineRunTest, FailedStepIsReported) {
    RunConfig one_try = quick_config();
    one_try.max_retries = 1;
    ScenarioBuilder b;
    b.decomposer({"Track lives.", "Never reached."});
    script_lives_step(b, 1);
    Harness h(b.build(), one_try, {FakeChecker::crashing(3)});
    RunResult r = h.pipeline.run({"t", "A game."}, "g");
    EXPECT_EQ(r.report.status, RunStatus::Failed);
    ASSERT_TRUE(r.report.failure.has_value());
    EXPECT_NE(r.report.failure->find("step 1 failed"), std::string::npos);
    ASSERT_EQ(r.report.steps.size(), 1u);
    EXPECT_FALSE(r.report.steps[0].completed);
    EXPECT_EQ(r.report.usage, (llm::Usage{60 + 210, 20 + 75}));
    EXPECT_EQ(h.store.load("g").metadata.at(meta::kStepIndex), "0");
}

TEST(RunConfigTest, RejectsOutOfRangeValues) {
    auto bad = [](auto mutate) {
        RunConfig c;
        mutate(c);
        return c;
    };
    EXPECT_THROW(bad([](RunConfig& c) { c.tau = 11; }).validate(), ConfigError);
    EXPECT_THROW(bad([](RunConfig& c) { c.n_max = -1; }).validate(), ConfigError);
    EXPECT_THROW(bad([](RunConfig& c) { c.max_retries = 0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](RunConfig& c) { c.frames = 0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](RunConfig& c) { c.timeout = 0ms; }).validate(), ConfigError);
    EXPECT_NO_THROW(RunConfig{}.validate());
}

}  // namespace
}  // namespace simforge::pipeline
