// Stand-in for the game harness: honours the `--file <path> --frames N`
// protocol and decides the outcome from `#!stub:` markers in the game file.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <thread>

#include <unistd.h>

namespace {

void emit(bool compiled, int frames, bool crashed, const char* message) {
    nlohmann::json doc = {{"compiled", compiled}, {"ran_frames", frames}, {"crashed", crashed}};
    doc["crash_message"] = message ? nlohmann::json(message) : nlohmann::json(nullptr);
    std::cout << doc.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    std::string file;
    int frames = -1;
    for (int i = 1; i + 1 < argc; i += 2) {
        std::string flag = argv[i];
        if (flag == "--file") file = argv[i + 1];
        if (flag == "--frames") frames = std::atoi(argv[i + 1]);
    }
    if (file.empty() || frames < 1) {
        std::cerr << "usage: stub_harness --file <path> --frames N\n";
        return 64;
    }
    std::ifstream in(file);
    if (!in) {
        std::cerr << "cannot open " << file << "\n";
        return 66;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string code = buf.str();

    if (const char* log = std::getenv("STUB_HARNESS_LOG")) {
        std::ofstream out(log, std::ios::app);
        out << std::filesystem::current_path().string() << "\t" << file << "\t" << frames << "\n";
    }
    if (code.find("#!stub:touch") != std::string::npos) std::ofstream("touched.txt") << "x";
    if (code.find("#!stub:hang") != std::string::npos) {
        std::this_thread::sleep_for(std::chrono::hours(1));
    }
    if (code.find("#!stub:exit127") != std::string::npos) return 127;
    if (code.find("#!stub:no_document") != std::string::npos) {
        std::cout << "Traceback (most recent call last): harness exploded" << std::endl;
        return 1;
    }
    if (code.find("#!stub:syntax_error") != std::string::npos) {
        emit(false, 0, false, "SyntaxError: invalid syntax (game.py, line 3)");
        return 0;
    }
    if (auto pos = code.find("#!stub:crash_at="); pos != std::string::npos) {
        int at = std::atoi(code.c_str() + pos + 16);
        emit(true, at, true, "ZeroDivisionError: division by zero");
        return 1;
    }
    emit(true, frames, false, nullptr);
    return 0;
}
