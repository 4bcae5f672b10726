#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace resp;
using resp::test::q;

namespace {

std::vector<dsl::SourceDiagnostic> diagnostics_of(std::string_view text) {
    try {
        dsl::parse_document(text);
    } catch (const dsl::ParseError& e) {
        return e.diagnostics();
    }
    return {};
}

bool has_code(const std::vector<dsl::SourceDiagnostic>& ds, std::string_view code) {
    return std::any_of(ds.begin(), ds.end(), [&](const auto& d) { return d.code == code; });
}

constexpr std::string_view kLatePreemption = R"(model {
  exo U in {0,1}
  var A1 in {0,1} := U
  var A2 in {0,1} := U
  var BH1 in {0,1} := A1
  var BH2 in {0,1} := A2 & !BH1
  var V in {0,1} := BH1 | BH2
}
context { U = 1 }
)";

}  // namespace

TEST(ParseModel, LatePreemptionListing) {
    auto pm = dsl::parse_model(kLatePreemption);
    auto sol = solve(pm.model, pm.context);
    EXPECT_EQ(sol.value("A1"), "1");
    EXPECT_EQ(sol.value("A2"), "1");
    EXPECT_EQ(sol.value("BH2"), "0");
    EXPECT_EQ(sol.value("V"), "1");
    EXPECT_FALSE(pm.outcome.has_value());
}

TEST(ParseModel, UnicodeAndWordConnectives) {
    auto a = dsl::parse_model("model { exo U in {0,1} var X in {0,1} := ¬U ∨ (U ∧ U) }\ncontext { U = 1 }");
    auto b = dsl::parse_model("model { exo U in {0,1} var X in {0,1} := not U or (U and U) }\ncontext { U = 1 }");
    EXPECT_EQ(*a.model.equation(1), *b.model.equation(1));
    EXPECT_EQ(solve(a.model, a.context).value("X"), "1");
}

TEST(ParseModel, CaseEquationsOverNamedValues) {
    auto pm = dsl::parse_model(R"(model {
  exo U in {lo, hi}
  var L in {red, amber, green} := case { U == hi -> green, else -> red }
  var Go in {0, 1} := L == green
}
context { U = hi })");
    auto sol = solve(pm.model, pm.context);
    EXPECT_EQ(sol.value("L"), "green");
    EXPECT_EQ(sol.value("Go"), "1");
}

TEST(Diagnostics, EmptyModel) {
    auto ds = diagnostics_of("model {}\n");
    ASSERT_FALSE(ds.empty());
    EXPECT_TRUE(has_code(ds, "empty-model"));
    EXPECT_NE(ds.front().message.find("no endogenous variables"), std::string::npos);
}

TEST(Diagnostics, UnknownVariableWithPosition) {
    auto ds = diagnostics_of("model {\n  exo U in {0,1}\n  var X in {0,1} := U & Q\n}\ncontext { U = 1 }\n");
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].code, "unknown-variable");
    EXPECT_NE(ds[0].message.find("'Q'"), std::string::npos);
    EXPECT_EQ(ds[0].line, 3u);
    EXPECT_EQ(ds[0].column, 25u);
    EXPECT_EQ(ds[0].excerpt, "  var X in {0,1} := U & Q");
    EXPECT_NE(dsl::format(ds[0], "m.scm").find("m.scm:3:25: error:"), std::string::npos);
}

TEST(Diagnostics, Cycle) {
    auto ds = diagnostics_of("model { var X in {0,1} := Y  var Y in {0,1} := X }\n");
    EXPECT_TRUE(has_code(ds, "cycle"));
}

TEST(Diagnostics, RangeAndDuplicateAndContext) {
    EXPECT_TRUE(has_code(diagnostics_of("model { exo U in {lo,hi} var X in {0,1} := U == hi }\ncontext { U = mid }"), "range"));
    EXPECT_TRUE(has_code(diagnostics_of("model { exo U in {0,1} var U in {0,1} := 1 }\ncontext { U = 1 }"),
                         "duplicate"));
    EXPECT_TRUE(has_code(diagnostics_of("model { exo U in {0,1} var X in {0,1} := U }"), "context"));
}

TEST(Diagnostics, SyntaxRecoveryReportsSeveralErrors) {
    auto ds = diagnostics_of("model {\n  var X in {0,1} := (\n  var Y in {0,1} := Z\n}\n");
    ASSERT_FALSE(ds.empty());
    EXPECT_EQ(ds.front().code, "syntax");
    EXPECT_EQ(ds.front().line, 3u);
}

TEST(ParseScenario, BombingWeightsAreExact) {
    auto settings = dsl::parse_scenario(resp::test::fixture_text("ex5_bombing"));
    ASSERT_EQ(settings.size(), 1u);
    const auto& worlds = settings[0].epistemic().worlds();
    ASSERT_EQ(worlds.size(), 2u);
    EXPECT_EQ(worlds[0].weight, q("3/5"));
    EXPECT_EQ(worlds[1].weight, q("2/5"));
}

TEST(ParseScenario, WeightSumReportsExactSum) {
    std::string text = R"(model { exo U in {0,1} var A in {0,1} := U var O in {0,1} := A }
context { U = 1 }
outcome O == 1
agent Ann { action A epistemic { world 0.6 { U = 1 } world 0.3 { U = 0 } } }
)";
    auto ds = diagnostics_of(text);
    ASSERT_TRUE(has_code(ds, "weight-sum"));
    auto it = std::find_if(ds.begin(), ds.end(), [](const auto& d) { return d.code == "weight-sum"; });
    EXPECT_NE(it->message.find("9/10"), std::string::npos);
}

TEST(ParseScenario, TwoAgentsShareTheModel) {
    auto settings = dsl::parse_scenario(resp::test::fixture_text("ex1_assassins"));
    ASSERT_EQ(settings.size(), 2u);
    EXPECT_EQ(settings[0].agent(), "Assassin1");
    EXPECT_EQ(settings[1].agent(), "Assassin2");
    EXPECT_TRUE(settings[0].signature() == settings[1].signature());
    EXPECT_NE(settings[0].action_variable(), settings[1].action_variable());
}

TEST(ParseScenario, WorldEquationOverrides) {
    auto s = resp::test::agent_setting("ex3_counterfactual", "Assassin1");
    const auto& world = s.epistemic().worlds().at(0);
    const auto& sig = world.model.signature();
    auto bh1 = world.model.equation(sig.id("BH1"));
    ASSERT_NE(bh1, nullptr);
    EXPECT_EQ(dsl::to_source(*bh1), "0");
    EXPECT_EQ(dsl::to_source(*world.model.equation(sig.id("BH2"))), "A2 & !A1");
}

TEST(Serialize, RationalForms) {
    auto doc = resp::test::fixture_doc("ex5_bombing");
    auto text = dsl::serialize(doc);
    EXPECT_NE(text.find("world 0.6 {"), std::string::npos);
    doc.agents[0].worlds[0].weight = q("1/3");
    doc.agents[0].worlds[1].weight = q("2/3");
    text = dsl::serialize(doc);
    EXPECT_NE(text.find("world 1/3 {"), std::string::npos);
    EXPECT_EQ(dsl::parse_document(text).agents[0].worlds[0].weight, q("1/3"));
}

TEST(Serialize, RoundTripsEveryFixture) {
    for (const auto& f : corpus::kFixtures) {
        auto doc = dsl::parse_document(f.text);
        auto once = dsl::serialize(doc);
        auto back = dsl::parse_document(once);
        EXPECT_EQ(back, doc) << f.file;
        EXPECT_EQ(dsl::serialize(back), once) << f.file;
        EXPECT_EQ(dsl::serialize(doc), once) << f.file;
    }
}

TEST(Serialize, Precedence) {
    auto e = Expr::all({Expr::any({Expr::ref("A"), Expr::ref("B")}), Expr::negate(Expr::all({Expr::ref("C"), Expr::ref("D")}))});
    EXPECT_EQ(dsl::to_source(e), "(A | B) & !(C & D)");
}

TEST(Formula, ParseAndPrint) {
    auto f = dsl::parse_formula("[A1<-0, BH2 <- 0] V == 0");
    ASSERT_EQ(f.interventions.size(), 2u);
    EXPECT_EQ(dsl::to_source(f), "[A1 <- 0, BH2 <- 0] V == 0");
    EXPECT_EQ(dsl::parse_formula(dsl::to_source(f)), f);
    EXPECT_THROW(dsl::parse_formula("[A1<-] V"), dsl::ParseError);
}

TEST(Event, Tokens) {
    auto pm = resp::test::fixture("ex2_latepreemption");
    const auto& sig = pm.model.signature();
    EXPECT_EQ(dsl::parse_event(sig, "A1=1"), (Event{sig.id("A1"), 1}));
    EXPECT_EQ(dsl::parse_event(sig, "A1==0"), (Event{sig.id("A1"), 0}));
    EXPECT_THROW(dsl::parse_event(sig, "Q=1"), Error);
    EXPECT_THROW(dsl::parse_event(sig, "A1=3"), Error);
    EXPECT_THROW(dsl::parse_event(sig, "A1"), Error);
}

// Arbitrary bytes and mutated fixtures: every failure is a ParseError whose
// positions stay inside the input.
TEST(Fuzz, NoCrashAndValidPositions) {
    std::mt19937_64 rng(20261019);
    std::vector<std::string> seeds;
    for (const auto& f : corpus::kFixtures) seeds.emplace_back(f.text);
    const std::string alphabet = "{}()[]<-:=!&|#\n \t01UVXabcdexoinvarmodelcontextagentworld.,/\xc2\xac\xe2\x88";
    for (int round = 0; round < 4000; ++round) {
        std::string text;
        if (round % 4 == 0) {
            std::size_t n = rng() % 200;
            for (std::size_t i = 0; i < n; ++i) text.push_back(static_cast<char>(rng() & 0xff));
        } else {
            text = seeds[rng() % seeds.size()];
            for (int k = 0, edits = 1 + static_cast<int>(rng() % 4); k < edits && !text.empty(); ++k) {
                std::size_t at = rng() % text.size();
                switch (rng() % 3) {
                case 0: text.erase(at, 1 + rng() % 8); break;
                case 1: text.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
                default: text[at] = alphabet[rng() % alphabet.size()]; break;
                }
            }
        }
        std::size_t lines = 1 + static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
        try {
            auto doc = dsl::parse_document(text);
            auto back = dsl::parse_document(dsl::serialize(doc));
            EXPECT_EQ(back, doc) << text;
        } catch (const dsl::ParseError& e) {
            ASSERT_FALSE(e.diagnostics().empty());
            for (const auto& d : e.diagnostics()) {
                EXPECT_GE(d.line, 1u);
                EXPECT_LE(d.line, lines);
                EXPECT_GE(d.column, 1u);
                EXPECT_FALSE(d.message.empty());
            }
        }
    }
}
