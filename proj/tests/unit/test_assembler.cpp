#include <gtest/gtest.h>

#include "simforge/assembler/assembler.hpp"
#include "simforge/errors.hpp"
#include "testing.hpp"

namespace simforge::assembler {
namespace {

using testing::assembler_fixture_session;

std::string golden(const std::string& name) { return testing::read_file(testing::fixture_dir() / "golden" / name); }

TEST(AssemblerTest, InitialSessionMatchesGolden) {
    EXPECT_EQ(export_code(core::new_initial_session()), golden("initial_session.py"));
}

TEST(AssemblerTest, FixtureSessionMatchesGolden) {
    EXPECT_EQ(export_code(assembler_fixture_session()), golden("fixture_session.py"));
}

TEST(AssemblerTest, OutputIsDeterministic) {
    core::SessionModel s = assembler_fixture_session();
    EXPECT_EQ(export_code(s), export_code(s));
}

TEST(AssemblerTest, RejectsBrokenSessions) {
    core::SessionModel s = assembler_fixture_session();
    s.functions[0].code = "def something_else(state, surface):\n    pass\n";
    EXPECT_THROW(export_code(s), AssemblyError);

    core::SessionModel no_fps = core::new_initial_session();
    no_fps.state_variables.pop_back();
    EXPECT_THROW(export_code(no_fps), AssemblyError);
}

TEST(AssemblerTest, FindsDefinitionsByLine) {
    EXPECT_TRUE(defines_function("def f(state):\n    pass\n", "f"));
    EXPECT_TRUE(defines_function("import math\n\n  def f(x):\n", "f"));
    EXPECT_FALSE(defines_function("def fx(state):\n", "f"));
    EXPECT_FALSE(defines_function("# def f(\n", "f"));
    EXPECT_FALSE(defines_function("x = 1  # def f(state)\n", "f"));
}

TEST(CodeTemplateTest, EveryMarkerExactlyOnce) {
    EXPECT_NO_THROW(CodeTemplate::standard().validate());
    CodeTemplate missing{"@STATE@\n@FUNCTIONS@\n@INPUT_CALLS@\n@LOGIC_CALLS@\n"};
    EXPECT_THROW(missing.validate(), AssemblyError);
    CodeTemplate twice{"@STATE@@STATE@\n@FUNCTIONS@\n@INPUT_CALLS@\n@LOGIC_CALLS@\n@RENDER_CALLS@"};
    EXPECT_THROW(twice.validate(), AssemblyError);
    CodeTemplate minimal{"@STATE@|@FUNCTIONS@|@INPUT_CALLS@|@LOGIC_CALLS@|@RENDER_CALLS@"};
    std::string out = export_code(core::new_initial_session(), minimal);
    EXPECT_NE(out.find("|            pass|        pass|        pass"), std::string::npos);
}

}  // namespace
}  // namespace simforge::assembler
