// Acceptance checks over the bundled fixtures. One line per criterion; the
// exit status is nonzero when any criterion fails.
//
// Causation verdicts are asserted twice, once through the engine and once
// through the brute-force oracle, so a shared mistake in the expected value
// cannot hide behind a matching engine bug.

#include "resp/oracle.hpp"
#include "resp/testkit.hpp"
#include "support.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

using namespace resp;
using resp::test::q;

namespace {

struct Checker {
    std::vector<std::string> misses;

    void expect(bool ok, const std::string& what) {
        if (!ok) misses.push_back(what);
    }
};

struct Scene {
    dsl::ParsedModel pm;

    explicit Scene(std::string_view fixture) : pm(resp::test::fixture(fixture)) {}
    explicit Scene(dsl::ScenarioDocument doc) : pm(dsl::load_model(std::move(doc))) {}

    const Signature& sig() const { return pm.model.signature(); }
    Event ev(std::string_view token) const { return dsl::parse_event(sig(), token); }
    std::vector<Event> evs(std::initializer_list<std::string_view> tokens) const {
        std::vector<Event> out;
        for (auto t : tokens) out.push_back(ev(t));
        return out;
    }
    std::vector<VarId> ids(std::initializer_list<std::string_view> names) const {
        std::vector<VarId> out;
        for (auto n : names) out.push_back(sig().id(n));
        return out;
    }

    // Engine and oracle must agree with each other and with `expected`.
    void cause(Checker& c, Causation def, std::string_view x, std::string_view y, bool expected) const {
        const auto& m = pm.model;
        const auto& u = pm.context;
        Event cx = ev(x), ey = ev(y);
        bool engine = is_cause(m, u, def, cx, ey).holds;
        bool brute = false;
        switch (def) {
        case Causation::direct_ness: brute = oracle::direct_ness(m, u, cx, ey).has_value(); break;
        case Causation::ness: brute = !oracle::ness_paths(m, u, cx, ey).empty(); break;
        case Causation::cness: brute = oracle::cness(m, u, cx, ey); break;
        case Causation::hp: brute = oracle::Hp(m, u, ey).atomic(cx); break;
        }
        std::string tag = std::string(x) + " " + std::string(to_string(def)) + "-causes " + std::string(y);
        c.expect(engine == expected, tag + ": engine says " + (engine ? "yes" : "no"));
        c.expect(brute == expected, tag + ": oracle says " + (brute ? "yes" : "no"));
    }

    void hp_set(Checker& c, std::initializer_list<std::string_view> xs, std::string_view y, bool expected) const {
        auto conj = evs(xs);
        bool engine = hp_cause_set(pm.model, pm.context, conj, ev(y)).holds;
        std::vector<VarId> vars;
        for (const auto& e : conj) vars.push_back(e.var);
        std::sort(vars.begin(), vars.end());
        bool actual = true;
        auto sol = solve(pm.model, pm.context);
        for (const auto& e : conj) actual = actual && sol.holds(e);
        bool brute = actual && oracle::Hp(pm.model, pm.context, ev(y)).cause_set(vars);
        std::string tag = "{";
        for (auto x : xs) tag += std::string(x) + " ";
        tag.back() = '}';
        tag += " HP-causes " + std::string(y);
        c.expect(engine == expected, tag + ": engine says " + (engine ? "yes" : "no"));
        c.expect(brute == expected, tag + ": oracle says " + (brute ? "yes" : "no"));
    }

    void ness_path(Checker& c, std::string_view x, std::string_view y, std::initializer_list<std::string_view> path) const {
        std::set<oracle::Path> expected{ids(path)};
        std::set<oracle::Path> engine;
        for (const auto& p : ness_cause(pm.model, pm.context, ev(x), ev(y))) engine.insert(p.vars);
        std::string tag = std::string(x) + " NESS paths to " + std::string(y);
        c.expect(engine == expected, tag + ": engine differs");
        c.expect(oracle::ness_paths(pm.model, pm.context, ev(x), ev(y)) == expected, tag + ": oracle differs");
    }
};

ResponsibilitySetting setting(const dsl::ScenarioDocument& doc, std::string_view agent) {
    return corpus::detail::setting(doc, agent);
}

ResponsibilitySetting setting(std::string_view fixture, std::string_view agent) {
    return setting(resp::test::fixture_doc(fixture), agent);
}

Event act(const ResponsibilitySetting& s, std::string_view token) { return dsl::parse_event(s.signature(), token); }

std::string str(const Rational& r) { return to_fraction(r); }

// ---------------------------------------------------------------------------

void two_assassins(Checker& c) {
    Scene s("ex1_assassins");
    s.cause(c, Causation::direct_ness, "A1=1", "V=1", true);
    auto v = direct_ness_cause(s.pm.model, s.pm.context, s.ev("A1=1"), s.ev("V=1"));
    c.expect(v.holds && std::get<DirectNessWitness>(v.witness).set.empty(), "direct NESS witness W is not empty");
    c.expect(oracle::sufficient(s.pm.model, s.pm.context, {s.ev("A1=1")}, s.ev("V=1")) &&
                 !oracle::sufficient(s.pm.model, s.pm.context, {}, s.ev("V=1")),
             "oracle: W = {} does not witness direct NESS");
    s.hp_set(c, {"A1=1"}, "V=1", false);
    s.hp_set(c, {"A1=1", "A2=1"}, "V=1", true);
    for (const char* agent : {"Assassin1", "Assassin2"}) {
        auto st = setting("ex1_assassins", agent);
        c.expect(responsible(st, Responsibility::bvh).responsible, std::string(agent) + " not responsible under bvh");
        c.expect(responsible(st, Responsibility::hk).responsible, std::string(agent) + " not responsible under hk");
    }
}

void late_preemption(Checker& c) {
    Scene s("ex2_latepreemption");
    s.cause(c, Causation::direct_ness, "A1=1", "V=1", false);
    s.cause(c, Causation::ness, "A1=1", "V=1", true);
    s.ness_path(c, "A1=1", "V=1", {"A1", "BH1", "V"});
    s.cause(c, Causation::cness, "A1=1", "V=1", true);
    auto cn = cness_cause(s.pm.model, s.pm.context, s.ev("A1=1"), s.ev("V=1"));
    if (cn.holds) {
        const auto& w = std::get<CnessWitness>(cn.witness);
        c.expect(w.path.vars == s.ids({"A1", "BH1", "V"}) && w.counterfactual == 0, "CNESS witness is not ({A1,BH1,V}, 0)");
    }
    s.cause(c, Causation::hp, "A1=1", "V=1", true);
    auto hp = hp_atomic_cause(s.pm.model, s.pm.context, s.ev("A1=1"), s.ev("V=1"));
    if (hp.holds) {
        const auto& w = std::get<HpWitness>(hp.witness);
        c.expect(w.conjuncts == s.evs({"A1=1"}) && w.frozen == s.evs({"BH2=0"}) && w.flip == std::vector<ValueId>{0},
                 "HP witness is not A1=1 with W = {BH2=0}, x' = 0");
    }
    c.expect(evaluate(s.pm.model, s.pm.context, dsl::parse_formula("[A1<-0, BH2<-0] V == 0")),
             "[A1<-0, BH2<-0] V == 0 does not hold");
    for (auto def : kAllCausation) s.cause(c, def, "A2=1", "V=1", false);
}

void counterfactual(Checker& c) {
    Scene s("ex3_counterfactual");
    s.cause(c, Causation::ness, "A1=0", "V=1", true);
    s.ness_path(c, "A1=0", "V=1", {"A1", "BH1", "BH2", "V"});
    s.cause(c, Causation::cness, "A1=0", "V=1", false);
    s.cause(c, Causation::hp, "A1=0", "V=1", false);
    auto st = setting("ex3_counterfactual", "Assassin1");
    auto bvh = responsible(st, Responsibility::bvh);
    c.expect(bvh.responsible, std::string("flare-gun fixture not responsible under bvh (causal condition ") +
                                  (bvh.causal_condition ? "met" : "not met") + ", epistemic condition " +
                                  (bvh.epistemic_condition ? "met" : "not met") + ")");
    c.expect(!responsible(st, Responsibility::beckers).responsible, "flare-gun fixture responsible under beckers");
}

// The same reductio with the path-based causal condition.
void counterfactual_path_variant(Checker& c) {
    auto st = setting("ex3_counterfactual", "Assassin1");
    c.expect(responsible(st, Responsibility::bvh_ness).responsible, "not responsible under bvh-ness");
    auto b = responsible(st, Responsibility::beckers);
    c.expect(!b.responsible && !b.causal_condition, "beckers causal condition holds");
}

void loader(Checker& c) {
    Scene base("ex4_loader");
    for (auto def : kAllCausation) base.cause(c, def, "C=1", "D=1", true);
    base.cause(c, Causation::hp, "A=1", "D=1", false);
    base.hp_set(c, {"A=1"}, "D=1", false);
    Scene variant("ex4b_loader_variant");
    variant.hp_set(c, {"A=1", "B=0"}, "D=1", true);
    variant.cause(c, Causation::hp, "A=1", "D=1", true);
    variant.cause(c, Causation::ness, "A=1", "D=1", false);
    variant.cause(c, Causation::cness, "A=1", "D=1", false);
}

void bombing(Checker& c) {
    auto doc = resp::test::fixture_doc("ex5_bombing");
    auto st = setting(doc, "Assassin2");
    const auto& e = st.epistemic();
    for (auto def : {Causation::ness, Causation::cness, Causation::hp}) {
        auto p1 = causation_probability(e, act(st, "S2=1"), st.outcome(), def);
        auto p0 = causation_probability(e, act(st, "S2=0"), st.outcome(), def);
        c.expect(p1 == q("2/5"), std::string(to_string(def)) + ": Pr(S2=1 causes) = " + str(p1));
        c.expect(p0 == q("3/5"), std::string(to_string(def)) + ": Pr(S2=0 causes) = " + str(p0));
    }
    auto o1 = outcome_probability(e, act(st, "S2=1"), st.outcome());
    auto o0 = outcome_probability(e, act(st, "S2=0"), st.outcome());
    c.expect(o1 == 1 && o0 == q("3/5"), "outcome probabilities " + str(o1) + " and " + str(o0));
    c.expect(!responsible(st, Responsibility::bvh).responsible, "responsible under bvh");
    c.expect(responsible(st, Responsibility::hk).responsible, "not responsible under hk");
    auto b = responsible(st, Responsibility::beckers);
    c.expect(b.responsible && b.epistemic_evidence.branch == 1, "beckers not responsible by branch 1");

    auto scenario = [&](const char* s1, const char* s2) {
        return Scene(corpus::detail::with_context(doc, {{"U1", s1}, {"U2", s2}}));
    };
    scenario("0", "1").cause(c, Causation::cness, "S2=1", "B=1", true);
    auto two = scenario("1", "1");
    two.cause(c, Causation::ness, "S2=1", "B=1", false);
    two.cause(c, Causation::hp, "S2=1", "B=1", false);
    auto four = scenario("1", "0");
    four.cause(c, Causation::cness, "S2=0", "B=1", true);
    four.cause(c, Causation::hp, "D3=1", "B=1", true);
    four.cause(c, Causation::hp, "S2=0", "B=1", true);
}

void firing_squad(Checker& c) {
    auto st = setting("firing_squad", "Assassin1");
    c.expect(!responsible(st, Responsibility::hk).responsible, "responsible under hk");
    auto b = responsible(st, Responsibility::beckers);
    const auto& t = b.epistemic_evidence.table;
    c.expect(b.responsible && b.epistemic_evidence.branch == 2, "beckers not responsible by branch 2");
    c.expect(t.size() == 2 && t[1].causation == 1 && t[0].causation == 0, "causation probabilities are not 1 vs 0");
    for (const char* a : {"0", "1/4", "1/2", "1", "3"}) {
        auto d = degree_of_responsibility(st, q(a));
        c.expect(d == q(a), std::string("alpha ") + a + ": degree " + str(d));
    }
}

void frankfurt(Checker& c) {
    Scene s("frankfurt");
    for (auto def : {Causation::ness, Causation::cness, Causation::hp}) s.cause(c, def, "JP=1", "SD=1", true);
    auto st = setting("frankfurt", "Jones");
    c.expect(responsible(st, Responsibility::bvh).epistemic_condition, "bvh epistemic condition fails");
    c.expect(responsible(st, Responsibility::hk).epistemic_condition, "hk epistemic condition fails");
}

void rosenberg_glymour(Checker& c) {
    Scene s("rosenberg_glymour");
    s.cause(c, Causation::hp, "X=1", "Y=1", false);
    s.cause(c, Causation::cness, "X=1", "Y=1", true);
    s.cause(c, Causation::hp, "D=1", "Y=1", true);
    s.cause(c, Causation::cness, "D=1", "Y=1", true);
}

void typicality(Checker& c) {
    auto doc = resp::test::fixture_doc("ex6_typicality");
    for (const char* a : {"0", "1/2", "1", "2"}) {
        auto d1 = degree_of_responsibility(setting(doc, "Assassin1"), q(a));
        auto d2 = degree_of_responsibility(setting(doc, "Assassin2"), q(a));
        c.expect(d1 == q("9/10") + q(a), std::string("alpha ") + a + ": d1 = " + str(d1));
        c.expect(d2 == q("1/10") + q(a), std::string("alpha ") + a + ": d2 = " + str(d2));
        c.expect(d1 > d2, std::string("alpha ") + a + ": d1 <= d2");
    }
    auto eells = [](const dsl::ScenarioDocument& d, const char* agent, const char* a, const char* alt) {
        auto st = setting(d, agent);
        return causal_strength_eells(st.epistemic(), st.outcome(), act(st, a), act(st, alt));
    };
    auto conj = doc;
    for (auto& v : conj.variables)
        if (v.name == "V") v.equation = Expr::all({Expr::ref("A1"), Expr::ref("A2")});
    c.expect(eells(doc, "Assassin1", "A1=1", "A1=0") > eells(doc, "Assassin2", "A2=1", "A2=0"),
             "disjunctive: CS_e of Assassin1 not above Assassin2");
    c.expect(eells(conj, "Assassin1", "A1=1", "A1=0") < eells(conj, "Assassin2", "A2=1", "A2=0"),
             "conjunctive: CS_e ordering not reversed");
}

void property_suites(Checker& c, std::string& note) {
    auto started = std::chrono::steady_clock::now();
    std::map<std::string, int> failures;
    std::size_t rows = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        auto s = testkit::random_specimen(seed);
        const auto& sig = s.model.signature();
        bool small = sig.endogenous().size() <= 6;
        for (VarId v : sig.endogenous()) small = small && sig.is_boolean(v);
        c.expect(small, "seed " + std::to_string(seed) + " exceeds 6 Boolean variables");
        rows += testkit::differential_causes(s).size();
        for (const auto& r : testkit::metamorphic_suite(s)) {
            if (r.passed) continue;
            if (failures[r.name]++ == 0)
                c.expect(false, r.name + " fails at seed " + std::to_string(seed) + ": " + r.counterexample);
        }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    c.expect(secs < 60.0, "took " + std::to_string(secs) + " s");
    std::ostringstream os;
    os << testkit::properties().size() << " properties, " << rows << " differential rows, " << secs << " s";
    note = os.str();
}

}  // namespace

int main() {
    struct Criterion {
        std::string label;
        std::function<void(Checker&, std::string&)> run;
    };
    auto plain = [](void (*f)(Checker&)) { return [f](Checker& c, std::string&) { f(c); }; };
    std::vector<Criterion> criteria = {
        {"1 two assassins", plain(two_assassins)},
        {"2 late preemption", plain(late_preemption)},
        {"3 counterfactual setting and flare gun", plain(counterfactual)},
        {"3+ flare gun with path-based bvh", plain(counterfactual_path_variant)},
        {"4 loader and variant", plain(loader)},
        {"5 bombing", plain(bombing)},
        {"6 firing squad", plain(firing_squad)},
        {"7 frankfurt", plain(frankfurt)},
        {"8 rosenberg-glymour", plain(rosenberg_glymour)},
        {"9 typicality", plain(typicality)},
        {"10 property suites over 1000 seeds", property_suites},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Checker c;
        std::string note;
        try {
            cr.run(c, note);
        } catch (const std::exception& e) {
            c.expect(false, std::string("threw: ") + e.what());
        }
        bool ok = c.misses.empty();
        // The supplementary line is informational and does not gate the exit code.
        if (!ok && cr.label.find('+') == std::string::npos) ++failed;
        std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << cr.label;
        if (!note.empty()) std::cout << " (" << note << ")";
        std::cout << '\n';
        for (const auto& m : c.misses) std::cout << "        " << m << '\n';
    }
    std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << '\n';
    return failed == 0 ? 0 : 1;
}
