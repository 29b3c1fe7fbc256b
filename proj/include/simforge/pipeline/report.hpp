#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "simforge/agents/trio.hpp"
#include "simforge/llm/backend.hpp"
#include "simforge/validator/validator.hpp"

namespace simforge::pipeline {

struct TrioSummary {
    scoring::ComponentKind kind = scoring::ComponentKind::StateChange;
    int rounds_used = 0;
    bool accepted = false;
    /// Critique total of each round, in round order.
    std::vector<int> round_totals;
    std::vector<std::string> decisions;
    std::vector<int> checkpoint_totals;
    int checkpoint_round = 0;
    int checkpoint_total = 0;
    llm::Usage usage;

    static TrioSummary of(const agents::RefinementTrace& trace);
    bool operator==(const TrioSummary&) const = default;
};

struct AttemptRecord {
    int attempt = 1;
    std::vector<TrioSummary> trios;
    std::optional<validator::SanityReport> sanity;
    /// Empty when the attempt succeeded.
    std::string diagnostic;

    bool operator==(const AttemptRecord&) const = default;
};

struct StepReport {
    int index = 0;
    std::string instruction;
    bool completed = false;
    std::vector<AttemptRecord> attempts;
    /// Context reduction for the step, measured once its variables are integrated.
    double rho = 1.0;
    std::size_t scoped_tokens = 0;
    std::size_t full_tokens = 0;
    std::vector<std::string> scope_variables;
    std::vector<std::string> scope_functions;
    llm::Usage usage;

    bool operator==(const StepReport&) const = default;
};

enum class RunStatus { Completed, Stopped, Failed };

std::string_view to_string(RunStatus status);

struct RunReport {
    std::string session_id;
    std::string title;
    std::vector<std::string> plan;
    llm::Usage decomposition_usage;
    std::vector<StepReport> steps;
    RunStatus status = RunStatus::Completed;
    std::optional<std::string> failure;
    /// All tokens spent on the run, including failed attempts.
    llm::Usage usage;

    bool operator==(const RunReport&) const = default;
};

nlohmann::json to_json(const llm::Usage& usage);
llm::Usage usage_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const TrioSummary& trio);
nlohmann::json to_json(const StepReport& step);
StepReport step_report_from_json(const nlohmann::json& doc);

/// Machine-readable report. Contains no timestamps or wall-clock times.
nlohmann::json to_json(const RunReport& report);

/// Human-readable summary of the same report.
std::string summary(const RunReport& report);

}  // namespace simforge::pipeline
