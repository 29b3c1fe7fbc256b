#include "simforge/assembler/assembler.hpp"

#include <array>
#include <cctype>

#include "simforge/errors.hpp"

namespace simforge::assembler {

namespace {

constexpr std::array<std::string_view, 5> kMarkers{"@STATE@", "@FUNCTIONS@", "@INPUT_CALLS@", "@LOGIC_CALLS@",
                                                   "@RENDER_CALLS@"};

constexpr std::string_view kStandard = R"py(import sys

import pygame


@STATE@

state = StateManager()
@FUNCTIONS@

def main():
    pygame.init()
    surface = pygame.display.set_mode((state.screen_width, state.screen_height))
    clock = pygame.time.Clock()
    running = True
    while running:
        for event in pygame.event.get():
            if event.type == pygame.QUIT:
                running = False
@INPUT_CALLS@
@LOGIC_CALLS@
        surface.fill((0, 0, 0))
@RENDER_CALLS@
        pygame.display.flip()
        clock.tick(state.fps)
    pygame.quit()
    sys.exit(0)


if __name__ == "__main__":
    main()
)py";

std::size_t count(std::string_view text, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
    return n;
}

void replace_once(std::string& text, std::string_view marker, std::string_view with) {
    auto pos = text.find(marker);
    text.replace(pos, marker.size(), with);
}

std::string_view trim_code(std::string_view code) {
    while (!code.empty() && (code.front() == '\n' || code.front() == '\r')) code.remove_prefix(1);
    while (!code.empty() && std::isspace(static_cast<unsigned char>(code.back()))) code.remove_suffix(1);
    return code;
}

// An empty slot becomes `pass` so the enclosing block stays valid.
std::string calls(const core::SessionModel& session, core::FunctionKind kind, std::string_view indent,
                  std::string_view args) {
    std::string out;
    for (const auto& fn : session.functions) {
        if (fn.kind != kind) continue;
        if (!out.empty()) out += '\n';
        out += std::string(indent) + fn.name + "(" + std::string(args) + ")";
    }
    if (out.empty()) out = std::string(indent) + "pass";
    return out;
}

}  // namespace

const CodeTemplate& CodeTemplate::standard() {
    static const CodeTemplate tmpl{std::string(kStandard)};
    return tmpl;
}

void CodeTemplate::validate() const {
    for (auto marker : kMarkers) {
        auto n = count(text, marker);
        if (n != 1) {
            throw AssemblyError("code template must contain " + std::string(marker) + " exactly once, found " +
                                std::to_string(n));
        }
    }
}

bool defines_function(std::string_view code, std::string_view name) {
    std::size_t start = 0;
    while (start <= code.size()) {
        auto end = code.find('\n', start);
        if (end == std::string_view::npos) end = code.size();
        std::string_view line = code.substr(start, end - start);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        if (line.starts_with("def ")) {
            line.remove_prefix(4);
            while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
            if (line.starts_with(name)) {
                line.remove_prefix(name.size());
                while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
                if (line.starts_with("(")) return true;
            }
        }
        start = end + 1;
    }
    return false;
}

std::string export_code(const core::SessionModel& session, const CodeTemplate& code_template) {
    code_template.validate();
    for (auto required : {"screen_width", "screen_height", "fps"}) {
        if (session.find_variable(required) == nullptr) {
            throw AssemblyError(std::string("session lacks window variable '") + required + "'");
        }
    }
    std::string functions;
    for (const auto& fn : session.functions) {
        if (!defines_function(fn.code, fn.name)) {
            throw AssemblyError("function '" + fn.name + "' source does not define '" + fn.name + "'");
        }
        functions += "\n\n";
        functions += trim_code(fn.code);
        functions += '\n';
    }

    std::string state_block = core::render_state_manager(session.state_variables);
    state_block.pop_back();  // the template supplies the line break

    std::string out = code_template.text;
    replace_once(out, "@STATE@", state_block);
    replace_once(out, "@FUNCTIONS@", functions);
    replace_once(out, "@INPUT_CALLS@", calls(session, core::FunctionKind::InputLogic, "            ", "state, event"));
    replace_once(out, "@LOGIC_CALLS@", calls(session, core::FunctionKind::Logic, "        ", "state"));
    replace_once(out, "@RENDER_CALLS@", calls(session, core::FunctionKind::Render, "        ", "state, surface"));
    return out;
}

}  // namespace simforge::assembler
