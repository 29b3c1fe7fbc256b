#include "simforge/pipeline/report.hpp"

#include <cstdio>

#include "simforge/errors.hpp"

namespace simforge::pipeline {

using nlohmann::json;

namespace {

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::string join_ints(const std::vector<int>& values, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += sep;
        out += std::to_string(values[i]);
    }
    return out;
}

TrioSummary trio_from_json(const json& doc) {
    TrioSummary t;
    auto kind = scoring::parse_component_kind(doc.at("kind").get<std::string>());
    if (!kind) throw InvalidModel("unknown component kind in stored report");
    t.kind = *kind;
    t.rounds_used = doc.at("rounds_used").get<int>();
    t.accepted = doc.at("accepted").get<bool>();
    t.round_totals = doc.at("round_totals").get<std::vector<int>>();
    t.decisions = doc.at("decisions").get<std::vector<std::string>>();
    t.checkpoint_totals = doc.at("checkpoint_totals").get<std::vector<int>>();
    t.checkpoint_round = doc.at("checkpoint_round").get<int>();
    t.checkpoint_total = doc.at("checkpoint_total").get<int>();
    t.usage = usage_from_json(doc.at("tokens"));
    return t;
}

validator::SanityReport sanity_from_json(const json& doc) {
    validator::SanityReport r;
    r.compiled = doc.at("compiled").get<bool>();
    r.ran_frames = doc.at("ran_frames").get<int>();
    r.crashed = doc.at("crashed").get<bool>();
    r.requested_frames = doc.at("requested_frames").get<int>();
    if (!doc.at("crash_message").is_null()) r.crash_message = doc.at("crash_message").get<std::string>();
    return r;
}

}  // namespace

TrioSummary TrioSummary::of(const agents::RefinementTrace& trace) {
    TrioSummary t;
    t.kind = trace.kind;
    t.rounds_used = trace.rounds_used;
    t.accepted = trace.accepted;
    for (const auto& r : trace.rounds) {
        t.round_totals.push_back(scoring::total(r.critique));
        t.decisions.emplace_back(scoring::to_string(r.decision));
    }
    t.checkpoint_totals = trace.checkpoint_totals;
    t.checkpoint_round = trace.checkpoint.round;
    t.checkpoint_total = trace.rounds.empty() ? 0 : scoring::total(trace.checkpoint.critique);
    t.usage = trace.usage;
    return t;
}

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Completed: return "completed";
        case RunStatus::Stopped: return "stopped";
        case RunStatus::Failed: return "failed";
    }
    return "failed";
}

json to_json(const llm::Usage& usage) {
    return {{"input", usage.input_tokens}, {"output", usage.output_tokens}};
}

llm::Usage usage_from_json(const json& doc) {
    return {doc.at("input").get<std::int64_t>(), doc.at("output").get<std::int64_t>()};
}

json to_json(const TrioSummary& t) {
    return {{"kind", std::string(scoring::to_string(t.kind))},
            {"rounds_used", t.rounds_used},
            {"accepted", t.accepted},
            {"round_totals", t.round_totals},
            {"decisions", t.decisions},
            {"checkpoint_totals", t.checkpoint_totals},
            {"checkpoint_round", t.checkpoint_round},
            {"checkpoint_total", t.checkpoint_total},
            {"tokens", to_json(t.usage)}};
}

json to_json(const StepReport& step) {
    json attempts = json::array();
    for (const auto& a : step.attempts) {
        json trios = json::array();
        for (const auto& t : a.trios) trios.push_back(to_json(t));
        attempts.push_back({{"attempt", a.attempt},
                            {"trios", trios},
                            {"sanity", a.sanity ? validator::to_json(*a.sanity) : json(nullptr)},
                            {"diagnostic", a.diagnostic}});
    }
    return {{"index", step.index},
            {"instruction", step.instruction},
            {"status", step.completed ? "completed" : "failed"},
            {"attempts", attempts},
            // Rounded so the serialized report is stable across platforms.
            {"rho", std::stod(fixed(step.rho, 6))},
            {"scoped_tokens", step.scoped_tokens},
            {"full_tokens", step.full_tokens},
            {"scope_variables", step.scope_variables},
            {"scope_functions", step.scope_functions},
            {"tokens", to_json(step.usage)}};
}

StepReport step_report_from_json(const json& doc) {
    try {
        StepReport s;
        s.index = doc.at("index").get<int>();
        s.instruction = doc.at("instruction").get<std::string>();
        s.completed = doc.at("status").get<std::string>() == "completed";
        for (const auto& a : doc.at("attempts")) {
            AttemptRecord r;
            r.attempt = a.at("attempt").get<int>();
            for (const auto& t : a.at("trios")) r.trios.push_back(trio_from_json(t));
            if (!a.at("sanity").is_null()) r.sanity = sanity_from_json(a.at("sanity"));
            r.diagnostic = a.at("diagnostic").get<std::string>();
            s.attempts.push_back(std::move(r));
        }
        s.rho = doc.at("rho").get<double>();
        s.scoped_tokens = doc.at("scoped_tokens").get<std::size_t>();
        s.full_tokens = doc.at("full_tokens").get<std::size_t>();
        s.scope_variables = doc.at("scope_variables").get<std::vector<std::string>>();
        s.scope_functions = doc.at("scope_functions").get<std::vector<std::string>>();
        s.usage = usage_from_json(doc.at("tokens"));
        return s;
    } catch (const json::exception& e) {
        throw InvalidModel(std::string("stored step report: ") + e.what());
    }
}

json to_json(const RunReport& report) {
    json steps = json::array();
    for (const auto& s : report.steps) steps.push_back(to_json(s));
    return {{"session_id", report.session_id},
            {"title", report.title},
            {"status", std::string(to_string(report.status))},
            {"failure", report.failure ? json(*report.failure) : json(nullptr)},
            {"plan", report.plan},
            {"decomposition_tokens", to_json(report.decomposition_usage)},
            {"steps", steps},
            {"tokens", to_json(report.usage)}};
}

std::string summary(const RunReport& report) {
    std::string out = "Run " + report.session_id;
    if (!report.title.empty()) out += " (" + report.title + ")";
    out += ": " + std::string(to_string(report.status)) + ", " + std::to_string(report.steps.size()) + "/" +
           std::to_string(report.plan.size()) + " steps reported\n";
    for (const auto& step : report.steps) {
        out += "\nStep " + std::to_string(step.index) + " [" + (step.completed ? "completed" : "failed") + "] " +
               step.instruction + "\n";
        out += "  context: " + std::to_string(step.scoped_tokens) + " of " + std::to_string(step.full_tokens) +
               " tokens (rho " + fixed(step.rho, 3) + ")\n";
        out += "  attempts: " + std::to_string(step.attempts.size()) + ", tokens in/out: " +
               std::to_string(step.usage.input_tokens) + "/" + std::to_string(step.usage.output_tokens) + "\n";
        if (step.attempts.empty()) continue;
        const AttemptRecord& last = step.attempts.back();
        for (const auto& t : last.trios) {
            out += "  " + std::string(scoring::to_string(t.kind)) + ": totals " + join_ints(t.round_totals, " -> ") +
                   ", " + std::to_string(t.rounds_used) + " round(s), " + (t.accepted ? "accepted" : "not accepted") +
                   ", checkpoint round " + std::to_string(t.checkpoint_round) + " (" +
                   std::to_string(t.checkpoint_total) + ")\n";
        }
        for (const auto& a : step.attempts) {
            if (!a.diagnostic.empty()) out += "  attempt " + std::to_string(a.attempt) + ": " + a.diagnostic + "\n";
        }
    }
    if (report.failure) out += "\nFailure: " + *report.failure + "\n";
    out += "\nTokens: " + std::to_string(report.usage.input_tokens) + " input, " +
           std::to_string(report.usage.output_tokens) + " output (decomposition " +
           std::to_string(report.decomposition_usage.input_tokens) + "/" +
           std::to_string(report.decomposition_usage.output_tokens) + ")\n";
    return out;
}

}  // namespace simforge::pipeline
