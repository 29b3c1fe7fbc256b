#include "simforge/agents/trio.hpp"

#include "simforge/errors.hpp"
#include "simforge/llm/schemas.hpp"

namespace simforge::agents {

using nlohmann::json;
using scoring::ComponentKind;
using scoring::PlannerDecision;

namespace {

std::string context_heading(ComponentKind kind) {
    return kind == ComponentKind::StateChange ? "Current state manager" : "Scoped state manager and related functions";
}

json log_to_json(const std::vector<llm::Message>& log) {
    json out = json::array();
    for (const auto& m : log) out.push_back({{"speaker", std::string(llm::to_string(m.speaker))}, {"content", m.content}});
    return out;
}

std::string numbered(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += std::to_string(i + 1) + ". " + items[i] + "\n";
    }
    return out;
}

std::string describe_tool_calls(const std::vector<llm::ToolCall>& calls) {
    std::string out;
    for (const auto& c : calls) {
        if (!out.empty()) out += "\n";
        out += "[tool] " + c.name + "(" + c.arguments.dump() + ")";
    }
    return out;
}

}  // namespace

TrioTools::TrioTools(TrioInput input, TrioSettings settings, llm::Backend& backend,
                     const prompts::PromptRegistry& registry)
    : input_(std::move(input)), settings_(std::move(settings)), backend_(backend), registry_(registry) {
    trace_.kind = input_.kind;
}

std::vector<llm::ToolDeclaration> TrioTools::tool_declarations() {
    json no_args = {{"type", "object"}, {"properties", json::object()}, {"additionalProperties", false}};
    json instruction_arg = {
        {"type", "object"},
        {"properties", {{"instruction", {{"type", "string"}, {"description", "What the designer should change"}}}}},
        {"required", {"instruction"}},
        {"additionalProperties", false},
    };
    return {
        {"request_initial_design", "Ask the designer for the first version of the artifact.", no_args},
        {"request_critique", "Ask the critic to score the latest artifact.", no_args},
        {"request_design_change", "Ask the designer to revise the artifact.", instruction_arg},
        {"reset_to_previous_checkpoint", "Discard the latest artifact and revise from the best-scoring one.", no_args},
    };
}

std::string TrioTools::role_prompt(prompts::AgentRole role) const {
    prompts::Bindings bindings{
        {"early_finish_min_score", std::to_string(settings_.tau)},
        {"max_critique_rounds", std::to_string(settings_.n_max)},
    };
    return registry_.render(prompts::template_id(input_.kind, role), bindings);
}

llm::RequestKey TrioTools::key(std::string_view agent, int round) const {
    return {std::string(scoring::to_string(input_.kind)) + "." + std::string(agent), input_.step_index, round};
}

llm::ChatResponse TrioTools::call(llm::ChatRequest request, std::string_view agent) {
    request.key = key(agent, request.key.round);
    llm::ChatResponse response = llm::with_retry(backend_, request, settings_.retry);
    trace_.usage += response.usage;
    return response;
}

std::string TrioTools::designer_brief() const {
    std::string out = "Step instruction:\n" + input_.instruction + "\n\n";
    out += context_heading(input_.kind) + ":\n" + input_.context + "\n";
    if (!input_.task.empty()) out += "Sub-function to implement:\n" + input_.task + "\n";
    return out;
}

std::string TrioTools::critic_brief(const DesignerArtifact& artifact, int round) const {
    return designer_brief() + "\nDesigner output (round " + std::to_string(round) + "):\n" + to_json(artifact).dump(2) +
           "\n";
}

const DesignerArtifact& TrioTools::request_initial_design() {
    if (!trace_.rounds.empty() || pending_) {
        throw ToolOrderViolation("request_initial_design may only be called once");
    }
    designer_log_.push_back({llm::Speaker::User, designer_brief()});
    llm::ChatRequest request;
    request.role_prompt = role_prompt(prompts::AgentRole::Designer);
    request.messages = designer_log_;
    request.required_schema = llm::SchemaId{llm::SchemaFamily::DesignerArtifact, input_.kind};
    request.temperature = settings_.designer_temperature;
    request.key.round = 0;
    llm::ChatResponse response;
    try {
        response = call(std::move(request), "designer");
        designer_log_.push_back({llm::Speaker::Assistant, response.content});
        pending_ = artifact_from_json(input_.kind, *response.structured);
    } catch (const SchemaViolation& e) {
        throw DesignFailure(std::string("designer output rejected: ") + e.what());
    } catch (const InvalidArtifact& e) {
        throw DesignFailure(std::string("designer output rejected: ") + e.what());
    }
    return *pending_;
}

const scoring::Critique& TrioTools::request_critique() {
    if (!pending_) throw ToolOrderViolation("request_critique needs an uncritiqued design");
    int round = rounds_used();
    critic_log_.push_back({llm::Speaker::User, critic_brief(*pending_, round)});
    llm::ChatRequest request;
    request.role_prompt = role_prompt(prompts::AgentRole::Critic);
    request.messages = critic_log_;
    request.required_schema = llm::SchemaId{llm::SchemaFamily::Critique, input_.kind};
    request.temperature = settings_.critic_temperature;
    request.key.round = round;
    scoring::Critique critique;
    try {
        llm::ChatResponse response = call(std::move(request), "critic");
        critic_log_.push_back({llm::Speaker::Assistant, response.content});
        critique = llm::critique_from_json(input_.kind, *response.structured);
    } catch (const SchemaViolation& e) {
        throw CritiqueFailure(std::string("critic output rejected: ") + e.what());
    }

    TrioRound entry;
    entry.artifact = std::move(*pending_);
    entry.critique = std::move(critique);
    pending_.reset();

    std::vector<scoring::Critique> history;
    history.reserve(trace_.rounds.size() + 1);
    for (const auto& r : trace_.rounds) history.push_back(r.critique);
    history.push_back(entry.critique);
    entry.decision = scoring::planner_policy(history, settings_.tau);

    // Checkpoint moves unless the new total regressed below it (ties move).
    if (trace_.rounds.empty() || scoring::total(entry.critique) >= scoring::total(trace_.checkpoint.critique)) {
        trace_.checkpoint = {entry.artifact, entry.critique, round};
        entry.became_checkpoint = true;
    }
    trace_.checkpoint_totals.push_back(scoring::total(trace_.checkpoint.critique));
    if (entry.decision == PlannerDecision::Accept) trace_.accepted = true;

    base_ = entry.artifact;
    trace_.rounds.push_back(std::move(entry));
    return trace_.rounds.back().critique;
}

const DesignerArtifact& TrioTools::reset_to_previous_checkpoint() {
    if (trace_.rounds.empty() || pending_) {
        throw ToolOrderViolation("reset_to_previous_checkpoint needs a critiqued design");
    }
    base_ = trace_.checkpoint.artifact;
    trace_.rounds.back().reverted_to_checkpoint = !trace_.rounds.back().became_checkpoint;
    return *base_;
}

std::string TrioTools::consult_planner() {
    if (trace_.rounds.empty() || pending_) throw ToolOrderViolation("the planner reviews critiqued designs only");
    const TrioRound& latest = trace_.rounds.back();
    int round = rounds_used() - 1;
    auto categories = scoring::rubric(input_.kind);

    std::string msg = "Round " + std::to_string(round) + " critique, total " +
                      std::to_string(scoring::total(latest.critique)) + "/" +
                      std::to_string(scoring::kMaxScore * static_cast<int>(categories.size())) + ".\n";
    if (trace_.rounds.size() >= 2) {
        auto d = scoring::deltas(trace_.rounds[trace_.rounds.size() - 2].critique, latest.critique);
        msg += "Score changes:\n" + scoring::format_deltas(d) + "\n";
    } else {
        for (std::size_t i = 0; i < categories.size(); ++i) {
            msg += scoring::title_case(categories[i]) + ": " + std::to_string(latest.critique.scores[i]) + "\n";
        }
    }
    msg += "Critic feedback: " + latest.critique.feedback + "\n";
    if (!latest.critique.suggestions.empty()) msg += "Suggestions:\n" + numbered(latest.critique.suggestions);
    msg += "Decision: " + std::string(scoring::to_string(latest.decision)) + ". Checkpoint is round " +
           std::to_string(trace_.checkpoint.round) + " with total " +
           std::to_string(scoring::total(trace_.checkpoint.critique)) + ".\n";
    msg += "Call request_design_change with one concrete revision instruction for the designer.";
    planner_log_.push_back({llm::Speaker::User, msg});

    llm::ChatRequest request;
    request.role_prompt = role_prompt(prompts::AgentRole::Planner);
    request.messages = planner_log_;
    request.tool_declarations = tool_declarations();
    request.temperature = settings_.planner_temperature;
    request.key.round = round;
    llm::ChatResponse response = call(std::move(request), "planner");

    std::string reply = response.content;
    std::string calls = describe_tool_calls(response.tool_calls);
    if (!calls.empty()) reply += (reply.empty() ? "" : "\n") + calls;
    planner_log_.push_back({llm::Speaker::Assistant, reply});

    std::string instruction;
    for (const auto& c : response.tool_calls) {
        if (c.name == "request_design_change" && c.arguments.is_object() && c.arguments.contains("instruction") &&
            c.arguments["instruction"].is_string()) {
            instruction = c.arguments["instruction"].get<std::string>();
            break;
        }
    }
    if (instruction.empty()) instruction = response.content;
    if (instruction.empty()) {
        instruction = "Address the critic's suggestions:\n" + numbered(latest.critique.suggestions);
    }
    trace_.rounds.back().planner_instruction = instruction;
    return instruction;
}

const DesignerArtifact& TrioTools::request_design_change(const std::string& instruction) {
    if (trace_.rounds.empty() || pending_) {
        throw ToolOrderViolation("request_design_change needs a critique of the latest design");
    }
    if (!can_revise()) throw ToolOrderViolation("no refinement rounds left");
    int round = rounds_used();
    const TrioRound& latest = trace_.rounds.back();

    std::string msg = "Revision request (round " + std::to_string(round) + ").\nPlanner instruction: " +
                      instruction + "\n";
    if (trace_.rounds.size() >= 2) {
        auto d = scoring::deltas(trace_.rounds[trace_.rounds.size() - 2].critique, latest.critique);
        msg += "\nScore changes since the previous round:\n" + scoring::format_deltas(d) + "\n";
    }
    msg += "\nCritic feedback on round " + std::to_string(round - 1) + ":\n" + latest.critique.feedback + "\n";
    if (!latest.critique.suggestions.empty()) msg += "Suggestions:\n" + numbered(latest.critique.suggestions);
    if (latest.reverted_to_checkpoint) {
        msg += "\nRound " + std::to_string(round - 1) + " scored below the checkpoint, so revise the checkpoint from round " +
               std::to_string(trace_.checkpoint.round) + " instead:\n";
    } else {
        msg += "\nRevise this artifact:\n";
    }
    msg += to_json(*base_).dump(2) + "\n\nReturn the complete revised artifact as JSON.";
    designer_log_.push_back({llm::Speaker::User, msg});

    llm::ChatRequest request;
    request.role_prompt = role_prompt(prompts::AgentRole::Designer);
    request.messages = designer_log_;
    request.required_schema = llm::SchemaId{llm::SchemaFamily::DesignerArtifact, input_.kind};
    request.temperature = settings_.designer_temperature;
    request.key.round = round;
    try {
        llm::ChatResponse response = call(std::move(request), "designer");
        designer_log_.push_back({llm::Speaker::Assistant, response.content});
        pending_ = artifact_from_json(input_.kind, *response.structured);
    } catch (const SchemaViolation& e) {
        throw DesignFailure(std::string("designer revision rejected: ") + e.what());
    } catch (const InvalidArtifact& e) {
        throw DesignFailure(std::string("designer revision rejected: ") + e.what());
    }
    return *pending_;
}

bool TrioTools::can_revise() const {
    return !trace_.rounds.empty() && rounds_used() <= settings_.n_max;
}

std::optional<PlannerDecision> TrioTools::last_decision() const {
    if (trace_.rounds.empty()) return std::nullopt;
    return trace_.rounds.back().decision;
}

bool TrioTools::latest_is_checkpoint() const {
    return !trace_.rounds.empty() && trace_.rounds.back().became_checkpoint;
}

RefinementTrace TrioTools::finish() && {
    trace_.rounds_used = rounds_used();
    trace_.transcripts = {
        {"designer", log_to_json(designer_log_)},
        {"critic", log_to_json(critic_log_)},
        {"planner", log_to_json(planner_log_)},
    };
    return std::move(trace_);
}

RefinementTrace run_trio(const TrioInput& input, const TrioSettings& settings, llm::Backend& backend,
                         const prompts::PromptRegistry& registry) {
    if (settings.n_max < 0) throw ConfigError("n_max must be >= 0");
    TrioTools tools(input, settings, backend, registry);
    try {
        tools.request_initial_design();
        tools.request_critique();
        while (tools.last_decision() != PlannerDecision::Accept && tools.can_revise()) {
            if (!tools.latest_is_checkpoint()) tools.reset_to_previous_checkpoint();
            std::string instruction = tools.consult_planner();
            tools.request_design_change(instruction);
            tools.request_critique();
        }
    } catch (const ToolOrderViolation& e) {
        throw DesignFailure(std::string("planner tool order violated: ") + e.what());
    }
    return std::move(tools).finish();
}

}  // namespace simforge::agents
