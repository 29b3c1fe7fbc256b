#include "simforge/pipeline/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "simforge/agents/state_change.hpp"
#include "simforge/assembler/assembler.hpp"
#include "simforge/errors.hpp"

namespace simforge::pipeline {

using nlohmann::json;
using scoring::ComponentKind;

namespace {

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string signature_hint(ComponentKind kind, const std::string& name) {
    switch (kind) {
        case ComponentKind::InputLogic: return "def " + name + "(state, event)  # called once per pygame event";
        case ComponentKind::StateTransition: return "def " + name + "(state)  # called once per frame";
        case ComponentKind::UiRendering: return "def " + name + "(state, surface)  # called once per frame";
        default: return {};
    }
}

std::string sanity_diagnostic(const validator::SanityReport& r) {
    std::string out = "sanity check failed: compiled=" + std::string(r.compiled ? "true" : "false") +
                      ", ran_frames=" + std::to_string(r.ran_frames) + "/" + std::to_string(r.requested_frames) +
                      ", crashed=" + (r.crashed ? "true" : "false");
    if (r.crash_message) out += ", message: " + *r.crash_message;
    return out;
}

std::int64_t meta_int(const core::SessionModel& s, const char* key) {
    auto it = s.metadata.find(key);
    if (it == s.metadata.end()) return 0;
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        throw InvalidModel(std::string("metadata '") + key + "' is not an integer");
    }
}

std::vector<std::string> stored_plan(const core::SessionModel& s) {
    auto it = s.metadata.find(meta::kPlan);
    if (it == s.metadata.end()) throw ConfigError("session has no step plan; it was not created by a pipeline run");
    auto doc = json::parse(it->second, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) throw InvalidModel("stored step plan is not a JSON array");
    return doc.get<std::vector<std::string>>();
}

}  // namespace

std::string meta::step_report_key(int step_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "report.step.%04d", step_index);
    return buf;
}

// Counts every raw backend call, including re-asks, retries and failed attempts.
struct Pipeline::Meter : llm::Backend {
    explicit Meter(llm::Backend& inner) : inner(inner) {}

    llm::ChatResponse complete(const llm::ChatRequest& request) override {
        llm::ChatResponse response = inner.complete(request);
        total += response.usage;
        return response;
    }

    llm::Backend& inner;
    llm::Usage total;
};

GameSpec GameSpec::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read specification '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    GameSpec spec{path.stem().string(), buf.str()};
    spec.validate();
    return spec;
}

void GameSpec::validate() const {
    if (blank(text)) throw ConfigError("game specification is empty");
}

void StepPlan::validate() const {
    if (steps.empty()) throw DecompositionFailure("step plan has no steps");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (blank(steps[i])) throw DecompositionFailure("step " + std::to_string(i + 1) + " is empty");
    }
}

void RunConfig::validate() const {
    if (tau < scoring::kMinScore || tau > scoring::kMaxScore) throw ConfigError("tau must be within 0..10");
    if (n_max < 0) throw ConfigError("n_max must be >= 0");
    if (max_retries < 1) throw ConfigError("max_retries must be >= 1");
    if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (decompose_reasks < 0) throw ConfigError("decompose_reasks must be >= 0");
    if (frames < 1) throw ConfigError("frames must be >= 1");
    if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
    if (dims.screen_width < 1 || dims.screen_height < 1 || dims.fps < 1) {
        throw ConfigError("window dimensions and fps must be positive");
    }
    if (!token_counter) throw ConfigError("token counter is not set");
}

agents::TrioSettings RunConfig::trio_settings() const {
    agents::TrioSettings s;
    s.tau = tau;
    s.n_max = n_max;
    s.designer_temperature = designer_temperature;
    s.planner_temperature = planner_temperature;
    s.critic_temperature = critic_temperature;
    s.retry = retry;
    return s;
}

Pipeline::Pipeline(RunConfig config, llm::Backend& backend, const prompts::PromptRegistry& registry,
                   store::SessionStore& store, validator::SanityChecker& checker)
    : config_(std::move(config)),
      backend_(backend),
      registry_(registry),
      store_(store),
      checker_(checker),
      meter_(std::make_shared<Meter>(backend)) {
    config_.validate();
}

const llm::Usage& Pipeline::usage() const { return meter_->total; }

StepPlan Pipeline::decompose_spec(const GameSpec& spec) {
    spec.validate();
    llm::ChatRequest request;
    request.role_prompt =
        registry_.render(prompts::kSpecDecomposerId, {{"max_steps", std::to_string(config_.max_steps)}});
    request.messages = {{llm::Speaker::User, "Game description:\n" + trim(spec.text) + "\n"}};
    request.required_schema = llm::SchemaId{llm::SchemaFamily::StepPlan, ComponentKind::StateChange};
    request.temperature = config_.planner_temperature;

    std::string last_problem;
    for (int attempt = 0; attempt <= config_.decompose_reasks; ++attempt) {
        request.key = {"spec.decomposer", 0, attempt};
        try {
            llm::ChatResponse response = llm::with_retry(*meter_, request, config_.retry);
            StepPlan plan;
            for (const auto& s : response.structured->at("steps")) plan.steps.push_back(trim(s.get<std::string>()));
            plan.validate();
            if (static_cast<int>(plan.steps.size()) > config_.max_steps) {
                throw DecompositionFailure("plan has " + std::to_string(plan.steps.size()) + " steps, limit is " +
                                           std::to_string(config_.max_steps));
            }
            return plan;
        } catch (const SchemaViolation& e) {
            last_problem = e.what();
        } catch (const DecompositionFailure& e) {
            last_problem = e.what();
        }
        request.messages.push_back(
            {llm::Speaker::User, "That plan was unusable (" + last_problem + "). Return between 1 and " +
                                     std::to_string(config_.max_steps) + " non-empty steps."});
    }
    throw DecompositionFailure("no usable step plan after " + std::to_string(config_.decompose_reasks + 1) +
                               " request(s): " + last_problem);
}

StepOutcome Pipeline::run_step(const std::string& session_id, const core::SessionModel& session,
                               const std::string& instruction, int step_index, bool last) {
    failed_step_.reset();
    core::validate(session);
    store_.save(session_id, session);
    store::SnapshotHandle snap = store_.snapshot(session_id);
    const agents::TrioSettings settings = config_.trio_settings();
    const llm::Usage before = meter_->total;

    StepReport report;
    report.index = step_index;
    report.instruction = instruction;
    std::vector<std::string> diagnostics;

    for (int attempt = 1; attempt <= config_.max_retries; ++attempt) {
        AttemptRecord record;
        record.attempt = attempt;
        std::vector<agents::RefinementTrace> traces;
        try {
            core::SessionModel s = attempt == 1 ? session : store_.restore(snap);

            auto sc = agents::run_state_change(s, instruction, step_index, settings, *meter_, registry_);
            record.trios.push_back(TrioSummary::of(sc.trace));
            traces.push_back(std::move(sc.trace));
            s = std::move(sc.session);
            core::ScopeSet scope = sc.scope;

            report.scoped_tokens = config_.token_counter(core::project_context(s, scope));
            report.full_tokens = config_.token_counter(core::project_context(s, core::full_scope(s)));
            report.rho = core::context_reduction_ratio(s, scope, config_.token_counter);

            agents::TrioInput dec{ComponentKind::Decompose, step_index, instruction, core::project_context(s, scope), ""};
            traces.push_back(agents::run_trio(dec, settings, *meter_, registry_));
            record.trios.push_back(TrioSummary::of(traces.back()));
            auto plan = std::get<agents::StepDecomposition>(traces.back().checkpoint.artifact.payload);

            const std::pair<ComponentKind, const std::optional<agents::SlotSpec>*> slots[] = {
                {ComponentKind::InputLogic, &plan.input_logic},
                {ComponentKind::StateTransition, &plan.state_transition},
                {ComponentKind::UiRendering, &plan.ui_rendering},
            };
            for (const auto& [kind, slot] : slots) {
                if (!slot->has_value()) continue;
                const agents::SlotSpec& spec = **slot;
                std::string task = "Function: " + spec.name + "\nSignature: " + signature_hint(kind, spec.name) +
                                   "\nPurpose: " + spec.description + "\n";
                agents::TrioInput in{kind, step_index, instruction, core::project_context(s, scope), task};
                traces.push_back(agents::run_trio(in, settings, *meter_, registry_));
                record.trios.push_back(TrioSummary::of(traces.back()));
                core::FunctionArtifact fn = agents::to_function(traces.back().checkpoint.artifact);
                s = core::with_function(s, fn);
                scope.function_names.insert(fn.name);
                scope.variable_names.insert(fn.relevant_state.begin(), fn.relevant_state.end());
            }

            s = core::clean_states(s);
            std::string code = assembler::export_code(s);
            record.sanity = checker_.check(code, config_.frames, config_.timeout);
            if (!record.sanity->ok()) {
                record.diagnostic = sanity_diagnostic(*record.sanity);
                throw StepFailure(record.diagnostic, {});
            }

            report.completed = true;
            report.scope_variables.assign(scope.variable_names.begin(), scope.variable_names.end());
            report.scope_functions.assign(scope.function_names.begin(), scope.function_names.end());
            report.usage = meter_->total;
            report.usage.input_tokens -= before.input_tokens;
            report.usage.output_tokens -= before.output_tokens;
            report.attempts.push_back(std::move(record));

            s.queries.push_back(instruction);
            s.metadata[meta::kStepIndex] = std::to_string(step_index);
            llm::Usage total{meta_int(session, meta::kTokensIn), meta_int(session, meta::kTokensOut)};
            total += report.usage;
            s.metadata[meta::kTokensIn] = std::to_string(total.input_tokens);
            s.metadata[meta::kTokensOut] = std::to_string(total.output_tokens);
            s.metadata[meta::step_report_key(step_index)] = to_json(report).dump();
            if (last) s.metadata[meta::kStatus] = "completed";

            for (const auto& trace : traces) {
                for (const auto& [agent, log] : trace.transcripts.items()) {
                    store_.put_transcript(session_id, std::string(scoring::to_string(trace.kind)) + "." + agent,
                                          step_index, log.dump(2));
                }
            }
            store_.save(session_id, s);
            store_.discard(snap);
            return {std::move(s), std::move(report)};
        } catch (const HarnessUnavailable&) {
            // Not a fault of the generated code; retrying cannot help.
            store_.restore(snap);
            store_.discard(snap);
            throw;
        } catch (const Error& e) {
            if (record.diagnostic.empty()) record.diagnostic = e.what();
        }
        diagnostics.push_back("attempt " + std::to_string(attempt) + ": " + record.diagnostic);
        report.attempts.push_back(std::move(record));
    }

    store_.restore(snap);
    store_.discard(snap);
    report.usage = meter_->total;
    report.usage.input_tokens -= before.input_tokens;
    report.usage.output_tokens -= before.output_tokens;
    failed_step_ = report;
    throw StepFailure("step " + std::to_string(step_index) + " failed after " + std::to_string(config_.max_retries) +
                          " attempt(s)",
                      std::move(diagnostics));
}

RunResult Pipeline::run(const GameSpec& spec, const std::string& session_id, std::optional<int> stop_after) {
    spec.validate();
    if (store_.exists(session_id)) {
        throw ConfigError("session '" + session_id + "' already exists; resume it or choose another id");
    }
    const llm::Usage before = meter_->total;
    StepPlan plan = decompose_spec(spec);
    llm::Usage spent = meter_->total;
    spent.input_tokens -= before.input_tokens;
    spent.output_tokens -= before.output_tokens;

    core::SessionModel session = core::new_initial_session(config_.dims);
    session.metadata[meta::kTitle] = spec.title;
    session.metadata[meta::kSpec] = spec.text;
    session.metadata[meta::kPlan] = json(plan.steps).dump();
    session.metadata[meta::kStepIndex] = "0";
    session.metadata[meta::kTokensIn] = std::to_string(spent.input_tokens);
    session.metadata[meta::kTokensOut] = std::to_string(spent.output_tokens);
    session.metadata[meta::kDecomposition] = to_json(spent).dump();
    store_.save(session_id, session);
    return continue_run(session_id, std::move(session), stop_after);
}

RunResult Pipeline::resume(const std::string& session_id, std::optional<int> stop_after) {
    core::SessionModel session = store_.load(session_id);
    stored_plan(session);
    return continue_run(session_id, std::move(session), stop_after);
}

RunResult Pipeline::continue_run(const std::string& session_id, core::SessionModel session,
                                 std::optional<int> stop_after) {
    auto plan = stored_plan(session);
    const llm::Usage committed{meta_int(session, meta::kTokensIn), meta_int(session, meta::kTokensOut)};
    const llm::Usage before = meter_->total;
    int done = static_cast<int>(meta_int(session, meta::kStepIndex));

    RunResult result;
    std::optional<StepReport> failed;
    std::optional<std::string> failure;
    while (done < static_cast<int>(plan.size())) {
        if (stop_after && done >= *stop_after) break;
        int k = done + 1;
        try {
            StepOutcome outcome = run_step(session_id, session, plan[k - 1], k, k == static_cast<int>(plan.size()));
            session = std::move(outcome.session);
            done = k;
        } catch (const StepFailure& e) {
            failed = failed_step_;
            failure = e.what();
            for (const auto& d : e.diagnostics()) *failure += "\n  " + d;
            break;
        }
    }

    result.report = stored_report(session_id, session);
    if (failed) {
        result.report.steps.push_back(*failed);
        result.report.status = RunStatus::Failed;
        result.report.failure = failure;
        // Tokens of the failed step are not in the restored session; count them here.
        llm::Usage spent = meter_->total;
        spent.input_tokens -= before.input_tokens;
        spent.output_tokens -= before.output_tokens;
        result.report.usage = committed;
        result.report.usage += spent;
    }
    result.session = std::move(session);
    result.code = assembler::export_code(result.session);
    return result;
}

RunReport Pipeline::stored_report(const std::string& session_id, const core::SessionModel& session) {
    RunReport report;
    report.session_id = session_id;
    if (auto it = session.metadata.find(meta::kTitle); it != session.metadata.end()) report.title = it->second;
    report.plan = stored_plan(session);
    if (auto it = session.metadata.find(meta::kDecomposition); it != session.metadata.end()) {
        report.decomposition_usage = usage_from_json(json::parse(it->second));
    }
    int done = static_cast<int>(meta_int(session, meta::kStepIndex));
    for (int k = 1; k <= done; ++k) {
        auto it = session.metadata.find(meta::step_report_key(k));
        if (it == session.metadata.end()) throw InvalidModel("missing report for step " + std::to_string(k));
        report.steps.push_back(step_report_from_json(json::parse(it->second)));
    }
    report.usage = {meta_int(session, meta::kTokensIn), meta_int(session, meta::kTokensOut)};
    report.status = done >= static_cast<int>(report.plan.size()) ? RunStatus::Completed : RunStatus::Stopped;
    return report;
}

}  // namespace simforge::pipeline
