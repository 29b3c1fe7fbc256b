#include "simforge/scoring/scoring.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>

#include "simforge/errors.hpp"

namespace simforge::scoring {

namespace {

constexpr std::array<std::string_view, 3> kStateChange{"correctness", "completeness", "relevance"};
constexpr std::array<std::string_view, 3> kDecompose{"decomposition_quality", "completeness", "clarity"};
constexpr std::array<std::string_view, 3> kFunctionCode{"correctness", "state_usage", "code_quality"};
constexpr std::array<std::string_view, 4> kUiRendering{"correctness", "visual_quality", "state_usage",
                                                      "code_quality"};

constexpr std::array<std::pair<ComponentKind, std::string_view>, 5> kKindNames{{
    {ComponentKind::StateChange, "state_change"},
    {ComponentKind::Decompose, "decompose"},
    {ComponentKind::InputLogic, "input_logic"},
    {ComponentKind::StateTransition, "state_transition"},
    {ComponentKind::UiRendering, "ui_rendering"},
}};

}  // namespace

std::string_view to_string(ComponentKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "state_change";
}

std::optional<ComponentKind> parse_component_kind(std::string_view text) {
    for (const auto& [k, name] : kKindNames) {
        if (name == text) return k;
    }
    return std::nullopt;
}

std::span<const std::string_view> rubric(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::StateChange: return kStateChange;
        case ComponentKind::Decompose: return kDecompose;
        case ComponentKind::InputLogic:
        case ComponentKind::StateTransition: return kFunctionCode;
        case ComponentKind::UiRendering: return kUiRendering;
    }
    return kStateChange;
}

void validate(const Critique& critique) {
    auto categories = rubric(critique.kind);
    if (critique.scores.size() != categories.size()) {
        throw InvalidCritique(std::string(to_string(critique.kind)) + " critique needs " +
                              std::to_string(categories.size()) + " scores, got " +
                              std::to_string(critique.scores.size()));
    }
    for (std::size_t i = 0; i < categories.size(); ++i) {
        int s = critique.scores[i];
        if (s < kMinScore || s > kMaxScore) {
            throw InvalidCritique(std::string(categories[i]) + " score " + std::to_string(s) +
                                  " outside [0, 10]");
        }
    }
}

int total(const Critique& critique) {
    return std::accumulate(critique.scores.begin(), critique.scores.end(), 0);
}

std::vector<ScoreDelta> deltas(const Critique& previous, const Critique& current) {
    if (previous.kind != current.kind) {
        throw KindMismatch("cannot diff a " + std::string(to_string(previous.kind)) + " critique against a " +
                           std::string(to_string(current.kind)) + " critique");
    }
    auto categories = rubric(current.kind);
    std::size_t n = std::min({categories.size(), previous.scores.size(), current.scores.size()});
    std::vector<ScoreDelta> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        int prev = previous.scores[i];
        int curr = current.scores[i];
        out.push_back({std::string(categories[i]), prev, curr, curr - prev});
    }
    return out;
}

std::string title_case(std::string_view category) {
    std::string out;
    out.reserve(category.size());
    bool start = true;
    for (char c : category) {
        if (c == '_') {
            out += ' ';
            start = true;
            continue;
        }
        out += start ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
        start = false;
    }
    return out;
}

std::string format_deltas(std::span<const ScoreDelta> entries) {
    std::string out;
    for (const auto& d : entries) {
        if (!out.empty()) out += '\n';
        out += title_case(d.category);
        out += ": ";
        out += std::to_string(d.previous);
        out += " → ";
        out += std::to_string(d.current);
        out += d.delta < 0 ? " (-" : " (+";
        out += std::to_string(d.delta < 0 ? -d.delta : d.delta);
        out += ')';
    }
    return out;
}

std::string_view to_string(PlannerDecision decision) {
    switch (decision) {
        case PlannerDecision::Accept: return "accept";
        case PlannerDecision::Rollback: return "rollback";
        case PlannerDecision::Refine: return "refine";
    }
    return "refine";
}

PlannerDecision planner_policy(std::span<const Critique> history, int tau) {
    if (history.empty()) {
        throw EmptyHistory("planner policy needs at least one critique");
    }
    for (const auto& c : history) {
        if (c.kind != history.front().kind) {
            throw KindMismatch("critique history mixes component kinds");
        }
    }
    const Critique& latest = history.back();
    if (!latest.scores.empty() && *std::min_element(latest.scores.begin(), latest.scores.end()) >= tau) {
        return PlannerDecision::Accept;
    }
    if (history.size() >= 2 && total(latest) < total(history[history.size() - 2])) {
        return PlannerDecision::Rollback;
    }
    return PlannerDecision::Refine;
}

}  // namespace simforge::scoring
