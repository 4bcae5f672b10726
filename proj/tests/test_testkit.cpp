#include "resp/testkit.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace resp;
using namespace resp::testkit;

namespace {

const DifferentialRow& row_for(const std::vector<DifferentialRow>& rows, const Signature& sig, std::string_view cause,
                               std::string_view effect) {
    for (const auto& r : rows)
        if (to_string(sig, r.cause) == cause && to_string(sig, r.effect) == effect) return r;
    throw std::runtime_error("no row for " + std::string(cause));
}

std::size_t equation_size(const Expr& e) {
    std::size_t n = 1;
    for (const auto& c : e.children()) n += equation_size(c);
    return n;
}

std::size_t specimen_size(const ModelSpecimen& s) {
    std::size_t n = s.document.variables.size();
    for (const auto& v : s.document.variables)
        if (v.equation) n += equation_size(*v.equation);
    return n;
}

}  // namespace

TEST(RandomSpecimen, SameSeedSameSpecimen) {
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 99999ull}) {
        auto a = random_specimen(seed);
        auto b = random_specimen(seed);
        EXPECT_EQ(a.document, b.document);
        EXPECT_EQ(dsl::serialize(a.document), dsl::serialize(b.document));
    }
    EXPECT_NE(random_specimen(0).document, random_specimen(1).document);
}

TEST(RandomSpecimen, SingleVariableBoundary) {
    SpecimenParams p;
    p.max_vars = 1;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto s = random_specimen(seed, p);
        EXPECT_EQ(s.model.signature().endogenous().size(), 1u);
        EXPECT_TRUE(differential_causes(s).empty());
    }
}

TEST(RandomSpecimen, ThousandSeedsAreValid) {
    Limits limits;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        auto s = random_specimen(seed);
        const auto& sig = s.model.signature();
        EXPECT_LE(sig.endogenous().size(), 6u);
        for (VarId v : sig.endogenous()) EXPECT_TRUE(sig.is_boolean(v));
        EXPECT_NO_THROW(s.model.require_within(limits));
        // Rebuilding from the serialized text gives the same model.
        auto again = dsl::parse_model(dsl::serialize(s.document));
        EXPECT_EQ(again.document, s.document) << seed;
    }
}

TEST(RandomSpecimen, LargerRangesUseNamedValues) {
    SpecimenParams p;
    p.max_range = 4;
    bool saw_wide = false;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto s = random_specimen(seed, p);
        for (VarId v : s.model.signature().endogenous()) saw_wide |= s.model.signature().range(v).size() > 2;
    }
    EXPECT_TRUE(saw_wide);
}

TEST(Differential, LatePreemptionRow) {
    auto s = specimen_from(resp::test::fixture_doc("ex2_latepreemption"));
    auto rows = differential_causes(s);
    const auto& r = row_for(rows, s.model.signature(), "A1=1", "V=1");
    EXPECT_EQ(r.verdicts, (std::array<bool, 4>{false, true, true, true}));
    EXPECT_TRUE(r.disagreement());
    EXPECT_FALSE(r.lattice_violation());
}

TEST(Differential, CounterfactualRow) {
    auto s = specimen_from(resp::test::fixture_doc("ex3_counterfactual"));
    auto rows = differential_causes(s);
    const auto& r = row_for(rows, s.model.signature(), "A1=0", "V=1");
    EXPECT_TRUE(r.verdicts[1]);
    EXPECT_FALSE(r.verdicts[2]);
    EXPECT_FALSE(r.verdicts[3]);
}

TEST(Differential, NoLatticeViolationsOnFixtures) {
    for (const auto& f : corpus::kFixtures) {
        auto s = specimen_from(dsl::parse_document(f.text));
        for (const auto& r : differential_causes(s)) EXPECT_FALSE(r.lattice_violation()) << f.file;
    }
}

TEST(Shrink, ResultStaysValidAndSmaller) {
    auto has_disjunction = [](const ModelSpecimen& s) {
        for (const auto& v : s.document.variables)
            if (v.equation && dsl::to_source(*v.equation).find('|') != std::string::npos) return true;
        return false;
    };
    int shrunk = 0;
    for (std::uint64_t seed = 0; seed < 200 && shrunk < 20; ++seed) {
        auto s = random_specimen(seed);
        if (!has_disjunction(s)) continue;
        auto small = shrink(s, has_disjunction);
        ++shrunk;
        EXPECT_TRUE(has_disjunction(small));
        EXPECT_LE(specimen_size(small), specimen_size(s));
        EXPECT_NO_THROW(dsl::parse_model(dsl::serialize(small.document))) << dsl::serialize(small.document);
        EXPECT_EQ(small.seed, s.seed);
    }
    EXPECT_GT(shrunk, 0);
}

TEST(Shrink, ReducesToMinimalWitness) {
    auto s = specimen_from(resp::test::fixture_doc("ex2_latepreemption"));
    auto has_three_endogenous = [](const ModelSpecimen& c) { return c.model.signature().endogenous().size() >= 3; };
    auto small = shrink(s, has_three_endogenous);
    EXPECT_EQ(small.model.signature().endogenous().size(), 3u);
}

TEST(MetamorphicSuite, FixturesPass) {
    for (const auto& f : corpus::kFixtures) {
        auto s = specimen_from(dsl::parse_document(f.text));
        for (const auto& r : metamorphic_suite(s)) EXPECT_TRUE(r.passed) << f.file << ' ' << r.name << ": " << r.counterexample;
    }
}

TEST(MetamorphicSuite, DeterministicGivenSeeds) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto a = metamorphic_suite(random_specimen(seed));
        auto b = metamorphic_suite(random_specimen(seed));
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].name, b[i].name);
            EXPECT_EQ(a[i].passed, b[i].passed);
        }
    }
}

TEST(MetamorphicSuite, FailingPropertyIsShrunk) {
    auto s = specimen_from(resp::test::fixture_doc("ex2_latepreemption"));
    Property bogus = [](const ModelSpecimen& c) -> std::optional<std::string> {
        if (c.model.signature().endogenous().size() >= 2) return "two or more endogenous variables";
        return std::nullopt;
    };
    auto small = shrink(s, [&](const ModelSpecimen& c) { return bogus(c).has_value(); });
    EXPECT_EQ(small.model.signature().endogenous().size(), 2u);
}

TEST(RandomScenario, ValidSettings) {
    int built = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        auto s = random_specimen(seed);
        auto doc = random_scenario(s, seed);
        if (s.model.signature().endogenous().size() < 2) {
            EXPECT_FALSE(doc.has_value());
            continue;
        }
        ASSERT_TRUE(doc.has_value());
        auto settings = dsl::settings_of(*doc);
        ASSERT_EQ(settings.size(), 1u);
        Rational total = 0;
        for (const auto& w : settings[0].epistemic().worlds()) total += w.weight;
        EXPECT_EQ(total, 1);
        EXPECT_EQ(dsl::parse_document(dsl::serialize(*doc)), *doc);
        ++built;
    }
    EXPECT_GT(built, 100);
}
