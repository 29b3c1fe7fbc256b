#include "simforge/validator/validator.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <stdlib.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "simforge/errors.hpp"

namespace simforge::validator {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kMaxCapture = 1 << 20;

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }

    int get() const { return fd_; }
    void reset(int fd = -1) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = fd;
    }

private:
    int fd_ = -1;
};

void make_pipe(Fd& read_end, Fd& write_end) {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw HarnessUnavailable(std::string("pipe: ") + std::strerror(errno));
    read_end.reset(fds[0]);
    write_end.reset(fds[1]);
}

class ScratchDir {
public:
    explicit ScratchDir(const std::filesystem::path& root) {
        auto base = root.empty() ? std::filesystem::temp_directory_path() : root;
        std::string pattern = (base / "simforge-check-XXXXXX").string();
        if (::mkdtemp(pattern.data()) == nullptr) {
            throw HarnessUnavailable("cannot create scratch directory under " + base.string() + ": " +
                                     std::strerror(errno));
        }
        path_ = pattern;
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

struct ChildResult {
    std::string out;
    std::string err;
    int status = 0;
    bool timed_out = false;
};

// Forks the harness with its own process group so a timeout kills any
// grandchildren too. Exec failures come back through a CLOEXEC pipe.
ChildResult run_child(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                      std::chrono::milliseconds timeout, std::chrono::milliseconds grace) {
    Fd out_r, out_w, err_r, err_w, exec_r, exec_w;
    make_pipe(out_r, out_w);
    make_pipe(err_r, err_w);
    make_pipe(exec_r, exec_w);

    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    std::string dir = cwd.string();

    pid_t pid = ::fork();
    if (pid < 0) throw HarnessUnavailable(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        ::dup2(out_w.get(), STDOUT_FILENO);
        ::dup2(err_w.get(), STDERR_FILENO);
        int code = 0;
        if (::chdir(dir.c_str()) != 0) {
            code = errno;
        } else {
            ::execvp(cargv[0], cargv.data());
            code = errno;
        }
        [[maybe_unused]] auto n = ::write(exec_w.get(), &code, sizeof code);
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    out_w.reset();
    err_w.reset();
    exec_w.reset();

    int exec_errno = 0;
    if (::read(exec_r.get(), &exec_errno, sizeof exec_errno) == static_cast<ssize_t>(sizeof exec_errno)) {
        ::waitpid(pid, nullptr, 0);
        throw HarnessUnavailable("cannot start harness '" + argv[0] + "': " + std::strerror(exec_errno));
    }

    ChildResult result;
    auto deadline = Clock::now() + timeout;
    auto kill_child = [&] {
        ::kill(-pid, SIGKILL);
        ::kill(pid, SIGKILL);
        result.timed_out = true;
    };

    bool out_open = true, err_open = true;
    char buf[4096];
    while ((out_open || err_open) && !result.timed_out) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (left <= 0) {
            kill_child();
            break;
        }
        pollfd fds[2] = {{out_open ? out_r.get() : -1, POLLIN, 0}, {err_open ? err_r.get() : -1, POLLIN, 0}};
        int rc = ::poll(fds, 2, static_cast<int>(std::min<long long>(left, 100)));
        if (rc < 0 && errno != EINTR) break;
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0 || (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
            auto n = ::read(fds[i].fd, buf, sizeof buf);
            std::string& sink = i == 0 ? result.out : result.err;
            if (n > 0) {
                if (sink.size() < kMaxCapture) sink.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || errno != EINTR) {
                (i == 0 ? out_open : err_open) = false;
            }
        }
    }

    // Output closed; the child may still linger, so reaping honours the deadline too.
    auto reap_deadline = deadline + grace;
    while (true) {
        pid_t w = ::waitpid(pid, &result.status, WNOHANG);
        if (w == pid) break;
        if (w < 0 && errno != EINTR) break;
        if (!result.timed_out && Clock::now() >= deadline) kill_child();
        if (Clock::now() >= reap_deadline) {
            ::waitpid(pid, &result.status, 0);
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return result;
}

std::string tail(const std::string& s, std::size_t n = 400) { return s.size() <= n ? s : s.substr(s.size() - n); }

// The document is the last non-blank stdout line that parses as an object,
// or the whole output if it is a multi-line document.
std::optional<json> find_document(const std::string& out) {
    auto whole = json::parse(out, nullptr, false);
    if (!whole.is_discarded() && whole.is_object()) return whole;
    std::istringstream lines(out);
    std::optional<json> found;
    for (std::string line; std::getline(lines, line);) {
        auto doc = json::parse(line, nullptr, false);
        if (!doc.is_discarded() && doc.is_object()) found = std::move(doc);
    }
    return found;
}

}  // namespace

json to_json(const SanityReport& report) {
    json j = {{"compiled", report.compiled},
              {"ran_frames", report.ran_frames},
              {"crashed", report.crashed},
              {"requested_frames", report.requested_frames}};
    j["crash_message"] = report.crash_message ? json(*report.crash_message) : json(nullptr);
    return j;
}

SanityReport parse_harness_document(std::string_view text, int frames) {
    auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw HarnessProtocolError("harness output is not a JSON object");
    SanityReport r;
    r.requested_frames = frames;
    try {
        r.compiled = doc.at("compiled").get<bool>();
        r.ran_frames = doc.at("ran_frames").get<int>();
        r.crashed = doc.at("crashed").get<bool>();
        if (auto it = doc.find("crash_message"); it != doc.end() && !it->is_null()) {
            r.crash_message = it->get<std::string>();
        }
    } catch (const json::exception& e) {
        throw HarnessProtocolError(std::string("harness document: ") + e.what());
    }
    if (r.ran_frames < 0 || r.ran_frames > frames) {
        throw HarnessProtocolError("harness reported " + std::to_string(r.ran_frames) + " frames of " +
                                   std::to_string(frames));
    }
    if (!r.compiled && r.ran_frames != 0) throw HarnessProtocolError("uncompiled code cannot run frames");
    if (r.crashed && r.ran_frames >= frames) throw HarnessProtocolError("crash reported after the last frame");
    return r;
}

std::vector<std::string> split_command(std::string_view command_line) {
    std::vector<std::string> parts;
    std::istringstream in{std::string(command_line)};
    for (std::string word; in >> word;) parts.push_back(word);
    return parts;
}

HarnessValidator::HarnessValidator(HarnessConfig config) : config_(std::move(config)) {
    if (config_.command.empty()) throw ConfigError("harness command is empty");
}

SanityReport HarnessValidator::check(const std::string& code, int frames, std::chrono::milliseconds timeout) {
    if (frames < 1) throw ConfigError("frames must be >= 1");
    ScratchDir scratch(config_.scratch_root);
    auto file = scratch.path() / "game.py";
    {
        std::ofstream out(file, std::ios::binary);
        out << code;
        if (!out) throw HarnessUnavailable("cannot write " + file.string());
    }
    auto argv = config_.command;
    argv.insert(argv.end(), {"--file", file.string(), "--frames", std::to_string(frames)});

    auto started = Clock::now();
    ChildResult child = run_child(argv, scratch.path(), timeout, config_.grace);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);

    if (child.timed_out) {
        SanityReport r;
        r.compiled = true;
        r.crashed = true;
        r.crash_message = "timeout";
        r.requested_frames = frames;
        r.wall_time = elapsed;
        return r;
    }
    auto doc = find_document(child.out);
    if (!doc) {
        bool exited = WIFEXITED(child.status);
        if (exited && WEXITSTATUS(child.status) == 127) {
            throw HarnessUnavailable("harness could not start its runtime: " + tail(child.err));
        }
        std::string how = exited ? "exit status " + std::to_string(WEXITSTATUS(child.status))
                                 : "signal " + std::to_string(WTERMSIG(child.status));
        throw HarnessProtocolError("harness emitted no result document (" + how + "): " + tail(child.err));
    }
    SanityReport r = parse_harness_document(doc->dump(), frames);
    r.wall_time = elapsed;
    return r;
}

RunMetrics metrics_rollup(std::span<const RunOutcome> runs) {
    if (runs.empty()) throw ConfigError("metrics need at least one run");
    RunMetrics m;
    double compiled = 0, survived = 0, total = 0, trios = 0;
    for (const auto& run : runs) {
        if (run.report.compiled) ++compiled;
        if (run.report.ok()) ++survived;
        for (int t : run.checkpoint_totals) {
            total += t;
            ++trios;
        }
    }
    auto n = static_cast<double>(runs.size());
    m.compilation_rate = compiled / n;
    m.runtime_success_rate = survived / n;
    if (trios > 0) m.mean_trio_score = total / trios;
    return m;
}

}  // namespace simforge::validator
