#include <gtest/gtest.h>

#include "simforge/errors.hpp"
#include "simforge/prompts/registry.hpp"
#include "testing.hpp"

namespace simforge::prompts {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

void copy_shipped(const fs::path& to) {
    fs::create_directories(to);
    for (const auto& e : fs::directory_iterator(testing::prompts_dir())) fs::copy_file(e.path(), to / e.path().filename());
}

TEST(PlaceholderTest, ParsesNamesAndEscapes) {
    EXPECT_EQ(placeholders("a {x} b {y_2} {x}"), (std::set<std::string>{"x", "y_2"}));
    EXPECT_TRUE(placeholders("{{x}} {not one} {1abc} {").empty());
}

TEST(RegistryTest, ShipsEveryKindAndRoleTemplate) {
    const PromptRegistry& r = testing::shipped_registry();
    auto required = required_template_ids();
    EXPECT_EQ(required.size(), 15u);
    for (const auto& id : required) EXPECT_TRUE(r.contains(id)) << id;
    EXPECT_TRUE(r.contains(kSpecDecomposerId));
    Bindings planner{{"early_finish_min_score", "8"}, {"max_critique_rounds", "3"}};
    for (const auto& id : required) {
        const auto& t = r.get(id);
        if (id.ends_with("/planner")) {
            EXPECT_EQ(t.declared_variables, (std::set<std::string>{"early_finish_min_score", "max_critique_rounds"}))
                << id;
            EXPECT_NO_THROW(r.render(id, planner)) << id;
        } else {
            EXPECT_TRUE(t.declared_variables.empty()) << id;
            EXPECT_EQ(r.render(id, {}), t.body) << id;
        }
    }
}

// [PAPER] Published state-change planner prompt with tau=8 and N_max=3 substituted.
TEST(RegistryTest, StateChangePlannerRendersGolden) {
    std::string rendered = testing::shipped_registry().render(
        "state_change/planner", {{"early_finish_min_score", "8"}, {"max_critique_rounds", "3"}});
    EXPECT_EQ(rendered, testing::read_file(testing::fixture_dir() / "golden" / "state_change_planner_tau8_nmax3.txt"));
}

TEST(RegistryTest, MissingBindingNamesEveryAbsentVariable) {
    try {
        testing::shipped_registry().render("state_change/planner", {{"unrelated", "x"}});
        FAIL() << "expected MissingBinding";
    } catch (const MissingBinding& e) {
        EXPECT_EQ(e.names(), (std::vector<std::string>{"early_finish_min_score", "max_critique_rounds"}));
    }
    EXPECT_THROW(testing::shipped_registry().render("nope/planner", {}), UnknownTemplate);
}

TEST(RegistryTest, UndeclaredPlaceholderFixtureFailsToLoad) {
    TempDir dir;
    copy_shipped(dir.path());
    fs::copy_file(testing::fixture_dir() / "prompts" / "undeclared_placeholder.yaml", dir / "state_change_planner.yaml",
                  fs::copy_options::overwrite_existing);
    EXPECT_THROW(PromptRegistry::load(dir.path()), UndeclaredPlaceholder);
}

TEST(RegistryTest, UnusedDeclarationFixtureFailsToLoad) {
    TempDir dir;
    copy_shipped(dir.path());
    fs::copy_file(testing::fixture_dir() / "prompts" / "unused_declaration.yaml", dir / "state_change_planner.yaml",
                  fs::copy_options::overwrite_existing);
    EXPECT_THROW(PromptRegistry::load(dir.path()), UnusedDeclaration);
}

TEST(RegistryTest, EscapedBracesRenderLiterally) {
    PromptTemplate t{"decompose/designer", "Reply with {{\"{slot}\": ...}} and keep {not a placeholder} as written.\n",
                     {"slot"}};
    auto r = PromptRegistry::from_templates({t}, false);
    EXPECT_EQ(r.render("decompose/designer", {{"slot", "input_logic"}}),
              "Reply with {\"input_logic\": ...} and keep {not a placeholder} as written.\n");
}

TEST(RegistryTest, IncompleteOrDuplicateSetsAreRejected) {
    TempDir dir;
    copy_shipped(dir.path());
    fs::remove(dir / "ui_rendering_critic.yaml");
    try {
        PromptRegistry::load(dir.path());
        FAIL() << "expected MissingTemplates";
    } catch (const MissingTemplates& e) {
        EXPECT_NE(std::string(e.what()).find("ui_rendering/critic"), std::string::npos);
    }
    fs::copy_file(dir / "decompose_critic.yaml", dir / "decompose_critic_copy.yaml");
    EXPECT_THROW(PromptRegistry::load(dir.path()), DuplicateTemplate);
    EXPECT_THROW(PromptRegistry::load(dir / "missing"), ParseError);

    testing::write_file(dir / "zz_broken.yaml", "id: [unterminated");
    EXPECT_THROW(PromptRegistry::load(dir.path()), ParseError);
}

}  // namespace
}  // namespace simforge::prompts
