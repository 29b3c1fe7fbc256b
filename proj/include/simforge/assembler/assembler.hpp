#pragma once

#include <string>
#include <string_view>

#include "simforge/core/model.hpp"

namespace simforge::assembler {

/// Source skeleton with one marker per slot: `@STATE@`, `@FUNCTIONS@`,
/// `@INPUT_CALLS@`, `@LOGIC_CALLS@`, `@RENDER_CALLS@`.
struct CodeTemplate {
    std::string text;

    /// Pygame skeleton: per frame, every input_logic function sees each
    /// event, then every logic function runs, then every render function draws.
    static const CodeTemplate& standard();

    /// Throws AssemblyError unless every marker appears exactly once.
    void validate() const;
};

/// True when `code` contains a line `def <name>(` (any indentation).
bool defines_function(std::string_view code, std::string_view name);

/// Renders `session` as one executable game file. Byte-deterministic.
/// Throws AssemblyError when a function's source does not define its own
/// name or a window variable (screen_width, screen_height, fps) is missing.
std::string export_code(const core::SessionModel& session,
                        const CodeTemplate& code_template = CodeTemplate::standard());

}  // namespace simforge::assembler
