#include "simforge/cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <memory>

#include "simforge/core/json.hpp"
#include "simforge/errors.hpp"
#include "simforge/llm/http_backend.hpp"
#include "simforge/llm/schemas.hpp"
#include "simforge/llm/scripted_backend.hpp"
#include "simforge/pipeline/pipeline.hpp"

extern char** environ;

#ifndef SIMFORGE_DEFAULT_PROMPTS_DIR
#define SIMFORGE_DEFAULT_PROMPTS_DIR "prompts"
#endif

namespace simforge::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string backend = "http";
    std::string scenario;
    int tau = 8;
    int n_max = 3;
    int retries = 3;
    int max_steps = 12;
    std::string out;
    std::string db = "simforge.db";
    std::string prompts = SIMFORGE_DEFAULT_PROMPTS_DIR;
    int frames = 300;
    double timeout_seconds = 30.0;
    std::string session;
    std::optional<int> stop_after;
    std::string harness = "simforge-harness";
    std::string model = "gpt-4o";
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    bool as_json = false;
    std::string spec_path;
    std::string session_arg;
    std::string schemas_out;
};

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
}

pipeline::RunConfig run_config(const Options& o) {
    pipeline::RunConfig c;
    c.tau = o.tau;
    c.n_max = o.n_max;
    c.max_retries = o.retries;
    c.max_steps = o.max_steps;
    c.frames = o.frames;
    c.timeout = std::chrono::milliseconds(static_cast<long long>(o.timeout_seconds * 1000.0));
    c.validate();
    return c;
}

std::unique_ptr<llm::Backend> make_backend(const Options& o) {
    if (o.backend == "scripted") {
        if (o.scenario.empty()) throw ConfigError("--backend scripted needs --scenario <file>");
        return std::make_unique<llm::ScriptedBackend>(llm::ScriptedScenario::load(o.scenario));
    }
    if (o.api_key.empty()) {
        throw ConfigError(std::string("the http backend needs an API key: set ") + kApiKeyEnv);
    }
    llm::HttpBackendConfig http;
    http.base_url = o.base_url;
    http.api_key = o.api_key;
    http.model = o.model;
    return std::make_unique<llm::HttpBackend>(http);
}

fs::path out_dir(const Options& o, const std::string& session_id) {
    return o.out.empty() ? fs::path("out") / session_id : fs::path(o.out);
}

void write_outputs(const fs::path& dir, const pipeline::RunResult& result) {
    write_file(dir / "game.py", result.code);
    write_file(dir / "report.json", pipeline::to_json(result.report).dump(2) + "\n");
    write_file(dir / "report.txt", pipeline::summary(result.report));
}

int finish(const pipeline::RunResult& result, const fs::path& dir, std::ostream& out, std::ostream& err) {
    write_outputs(dir, result);
    out << pipeline::summary(result.report);
    out << "Outputs written to " << dir.string() << "\n";
    switch (result.report.status) {
        case pipeline::RunStatus::Completed: return kExitOk;
        case pipeline::RunStatus::Stopped:
            err << "stopped after " << result.report.steps.size() << " step(s); continue with: simforge resume "
                << result.report.session_id << "\n";
            return kExitStopped;
        case pipeline::RunStatus::Failed: return kExitStepFailure;
    }
    return kExitStepFailure;
}

struct Engine {
    pipeline::RunConfig config;
    prompts::PromptRegistry registry;
    std::unique_ptr<llm::Backend> backend;
    std::unique_ptr<store::SessionStore> store;
    std::unique_ptr<validator::HarnessValidator> checker;
    std::unique_ptr<pipeline::Pipeline> pipeline;

    explicit Engine(const Options& o)
        : config(run_config(o)), registry(prompts::PromptRegistry::load(o.prompts)), backend(make_backend(o)) {
        store = std::make_unique<store::SessionStore>(o.db);
        auto command = validator::split_command(o.harness);
        if (command.empty()) throw ConfigError("--harness is empty");
        checker = std::make_unique<validator::HarnessValidator>(validator::HarnessConfig{command, {}, {}});
        pipeline = std::make_unique<pipeline::Pipeline>(config, *backend, registry, *store, *checker);
    }
};

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
    auto spec = pipeline::GameSpec::from_file(o.spec_path);
    std::string session_id = o.session.empty() ? spec.title : o.session;
    Engine engine(o);
    fs::path dir = out_dir(o, session_id);
    try {
        return finish(engine.pipeline->run(spec, session_id, o.stop_after), dir, out, err);
    } catch (const DecompositionFailure& e) {
        pipeline::RunReport report;
        report.session_id = session_id;
        report.title = spec.title;
        report.status = pipeline::RunStatus::Failed;
        report.failure = e.what();
        report.usage = engine.pipeline->usage();
        report.decomposition_usage = report.usage;
        write_file(dir / "report.json", pipeline::to_json(report).dump(2) + "\n");
        write_file(dir / "report.txt", pipeline::summary(report));
        err << "error: " << e.what() << "\n";
        return kExitStepFailure;
    }
}

int cmd_resume(const Options& o, std::ostream& out, std::ostream& err) {
    Engine engine(o);
    if (!engine.store->exists(o.session_arg)) throw UnknownSession("unknown session '" + o.session_arg + "'");
    return finish(engine.pipeline->resume(o.session_arg, o.stop_after), out_dir(o, o.session_arg), out, err);
}

std::unique_ptr<store::SessionStore> open_read_only(const Options& o) {
    if (!fs::exists(o.db)) throw StorageFailure("store '" + o.db + "' does not exist");
    return std::make_unique<store::SessionStore>(o.db, store::OpenMode::ReadOnly);
}

int cmd_inspect(const Options& o, std::ostream& out) {
    auto store = open_read_only(o);
    core::SessionModel s = store->load(o.session_arg);
    if (o.as_json) {
        out << core::to_json(s).dump(2) << "\n";
        return kExitOk;
    }
    out << "Session " << o.session_arg << "\n\nState variables (" << s.state_variables.size() << "):\n";
    for (const auto& v : s.state_variables) {
        out << "  " << v.name << ": " << core::to_string(v.type) << " = " << v.value;
        if (!v.description.empty()) out << "  # " << v.description;
        if (v.dont_clean) out << " [kept]";
        out << "\n";
    }
    out << "\nFunctions (" << s.functions.size() << "):\n";
    for (const auto& f : s.functions) {
        out << "  " << f.name << " [" << core::to_string(f.kind) << "] uses:";
        for (const auto& r : f.relevant_state) out << " " << r;
        out << "\n";
    }
    out << "\nQueries (" << s.queries.size() << "):\n";
    for (std::size_t i = 0; i < s.queries.size(); ++i) out << "  " << i + 1 << ". " << s.queries[i] << "\n";
    out << "\nMetadata:\n";
    for (const auto& [key, value] : s.metadata) {
        bool bulky = key.starts_with("report.") || key == pipeline::meta::kSpec || key == pipeline::meta::kPlan;
        out << "  " << key << (bulky ? " (" + std::to_string(value.size()) + " bytes)" : " = " + value) << "\n";
    }
    return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
    auto store = open_read_only(o);
    core::SessionModel s = store->load(o.session_arg);
    auto report = pipeline::Pipeline::stored_report(o.session_arg, s);
    if (o.as_json) {
        out << pipeline::to_json(report).dump(2) << "\n";
    } else {
        out << pipeline::summary(report);
    }
    return kExitOk;
}

int cmd_schemas(const Options& o, std::ostream& out) {
    for (const auto& id : llm::all_schemas()) {
        fs::path path = fs::path(o.schemas_out) / (id.name() + ".json");
        write_file(path, llm::json_schema(id).dump(2) + "\n");
        out << path.string() << "\n";
    }
    return kExitOk;
}

}  // namespace

Environment Environment::from_process() {
    Environment env;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        std::string entry(*e);
        auto eq = entry.find('=');
        if (eq != std::string::npos) env.vars.emplace(entry.substr(0, eq), entry.substr(eq + 1));
    }
    return env;
}

std::optional<std::string> Environment::get(const std::string& name) const {
    auto it = vars.find(name);
    if (it == vars.end() || it->second.empty()) return std::nullopt;
    return it->second;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const Environment& env) {
    Options o;
    CLI::App app{"Generates 2D pygame games from natural-language specifications", "simforge"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file (keys are long option names)");

    // Run options live on the top-level app so they may appear before or after the subcommand.
    auto take_last = [](CLI::Option* opt) { return opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast); };
    take_last(app.add_option("--backend", o.backend, "LLM backend")->check(CLI::IsMember({"http", "scripted"})));
    take_last(app.add_option("--scenario", o.scenario, "Scenario file for the scripted backend"));
    take_last(app.add_option("--tau", o.tau, "Acceptance threshold per rubric category (0-10)"));
    take_last(app.add_option("--n-max", o.n_max, "Maximum refinement rounds per trio"));
    take_last(app.add_option("--retries", o.retries, "Attempts per step before giving up"));
    take_last(app.add_option("--max-steps", o.max_steps, "Upper bound on planned steps"));
    take_last(app.add_option("--out", o.out, "Output directory (default out/<session>)"));
    take_last(app.add_option("--db", o.db, "Session store file"));
    take_last(app.add_option("--prompts", o.prompts, "Prompt template directory"));
    take_last(app.add_option("--frames", o.frames, "Frames the sanity check runs"));
    take_last(app.add_option("--timeout", o.timeout_seconds, "Sanity-check timeout in seconds"));
    take_last(app.add_option("--harness", o.harness, "Harness command line"));
    take_last(app.add_option("--model", o.model, "Model name for the http backend"));
    take_last(app.add_option("--base-url", o.base_url, "OpenAI-compatible endpoint (env OPENAI_BASE_URL)"));
    take_last(app.add_option("--api-key", o.api_key, "API key (env OPENAI_API_KEY)"))->group("");
    take_last(app.add_option("--stop-after", o.stop_after, "Stop once this many steps are committed"));

    auto* generate = app.add_subcommand("generate", "Generate a game from a specification file")->fallthrough();
    generate->add_option("spec", o.spec_path, "Specification text file")->required()->check(CLI::ExistingFile);
    generate->add_option("--session", o.session, "Session id (default: spec file stem)");

    auto* resume = app.add_subcommand("resume", "Continue an interrupted run")->fallthrough();
    resume->add_option("session", o.session_arg, "Session id")->required();

    auto* inspect = app.add_subcommand("inspect", "Show a stored session")->fallthrough();
    inspect->add_option("session", o.session_arg, "Session id")->required();
    inspect->add_flag("--json", o.as_json, "Print JSON");

    auto* report = app.add_subcommand("report", "Show the run report of a stored session")->fallthrough();
    report->add_option("session", o.session_arg, "Session id")->required();
    report->add_flag("--json", o.as_json, "Print JSON");

    auto* schemas = app.add_subcommand("schemas", "Write the structured-output JSON schemas")->fallthrough();
    schemas->add_option("--out", o.schemas_out, "Directory")->required();

    // Environment outranks the config file but not explicit flags: inject it
    // first so any later flag wins under take-last.
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    if (auto key = env.get(kApiKeyEnv)) args.push_back("--api-key=" + *key);
    if (auto url = env.get(kBaseUrlEnv)) args.push_back("--base-url=" + *url);

    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*generate) return cmd_generate(o, out, err);
        if (*resume) return cmd_resume(o, out, err);
        if (*inspect) return cmd_inspect(o, out);
        if (*report) return cmd_report(o, out);
        if (*schemas) return cmd_schemas(o, out);
    } catch (const BackendError& e) {
        err << "error: " << e.what() << "\n";
        return kExitStepFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace simforge::cli
