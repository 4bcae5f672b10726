#pragma once

#include "resp/corpus_data.hpp"
#include "resp/resp.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace resp::corpus {

inline std::string_view stem(std::string_view file) {
    auto slash = file.find_last_of('/');
    if (slash != std::string_view::npos) file.remove_prefix(slash + 1);
    auto dot = file.find_last_of('.');
    return dot == std::string_view::npos ? file : file.substr(0, dot);
}

// "ex2_latepreemption" also answers to "latepreemption"; underscores are
// optional ("firingsquad").
inline std::string loose_key(std::string_view name) {
    std::string s(stem(name));
    if (s.size() > 3 && s.rfind("ex", 0) == 0) {
        auto us = s.find('_');
        if (us != std::string::npos && us > 2 &&
            std::all_of(s.begin() + 2, s.begin() + static_cast<std::ptrdiff_t>(us),
                        [](char c) { return std::isalnum(static_cast<unsigned char>(c)); }))
            s = s.substr(us + 1);
    }
    std::erase(s, '_');
    return s;
}

inline const Fixture* find_fixture(std::string_view name) {
    for (const auto& f : kFixtures)
        if (f.file == name || stem(f.file) == stem(name)) return &f;
    for (const auto& f : kFixtures)
        if (loose_key(f.file) == loose_key(name)) return &f;
    return nullptr;
}

struct Check {
    std::string fixture;
    std::string description;
    std::function<bool(const dsl::ScenarioDocument&)> run;
};

namespace detail {

inline Event ev(const dsl::ScenarioDocument& doc, std::string_view token) {
    return dsl::parse_event(dsl::model_of(doc).signature(), token);
}

inline bool cause(const dsl::ScenarioDocument& doc, Causation def, std::string_view c, std::string_view e) {
    auto pm = dsl::load_model(doc);
    auto sig = pm.model.signature_ptr();
    return is_cause(pm.model, pm.context, def, dsl::parse_event(*sig, c), dsl::parse_event(*sig, e)).holds;
}

inline dsl::ScenarioDocument with_context(dsl::ScenarioDocument doc, std::vector<dsl::Assign> ctx) {
    for (const auto& a : ctx)
        for (auto& b : doc.context)
            if (b.var == a.var) b.value = a.value;
    return doc;
}

inline ResponsibilitySetting setting(const dsl::ScenarioDocument& doc, std::string_view agent) {
    for (auto& s : dsl::settings_of(doc))
        if (s.agent() == agent) return s;
    throw QueryError("no agent '" + std::string(agent) + "'");
}

inline std::vector<std::string> names(const Signature& sig, const std::vector<VarId>& vars) {
    std::vector<std::string> out;
    for (VarId v : vars) out.push_back(sig.name(v));
    return out;
}

}  // namespace detail

/// Expected verdicts for the bundled fixtures.
inline std::vector<Check> checks() {
    using namespace detail;
    using C = Causation;
    using R = Responsibility;
    using V = std::vector<std::string>;
    std::vector<Check> out;
    auto add = [&](std::string fixture, std::string what, std::function<bool(const dsl::ScenarioDocument&)> fn) {
        out.push_back({std::move(fixture), std::move(what), std::move(fn)});
    };

    add("ex1_assassins", "A1=1 directly NESS-causes V=1 with W empty", [](const auto& d) {
        auto pm = dsl::load_model(d);
        auto v = direct_ness_cause(pm.model, pm.context, ev(d, "A1=1"), ev(d, "V=1"));
        return v.holds && std::get<DirectNessWitness>(v.witness).set.empty();
    });
    add("ex1_assassins", "{A1=1} is not an HP cause of V=1; {A1=1, A2=1} is", [](const auto& d) {
        auto pm = dsl::load_model(d);
        return !hp_cause_set(pm.model, pm.context, {ev(d, "A1=1")}, ev(d, "V=1")).holds &&
               hp_cause_set(pm.model, pm.context, {ev(d, "A1=1"), ev(d, "A2=1")}, ev(d, "V=1")).holds;
    });
    add("ex1_assassins", "both assassins responsible under bvh and hk", [](const auto& d) {
        for (auto& s : dsl::settings_of(d))
            if (!responsible(s, R::bvh).responsible || !responsible(s, R::hk).responsible) return false;
        return true;
    });

    add("ex2_latepreemption", "A1=1 is not a direct NESS cause of V=1", [](const auto& d) {
        return !cause(d, C::direct_ness, "A1=1", "V=1");
    });
    add("ex2_latepreemption", "A1=1 NESS-causes V=1 along {A1, BH1, V} only", [](const auto& d) {
        auto pm = dsl::load_model(d);
        auto paths = ness_cause(pm.model, pm.context, ev(d, "A1=1"), ev(d, "V=1"));
        return paths.size() == 1 && names(pm.model.signature(), paths[0].vars) == V{"A1", "BH1", "V"};
    });
    add("ex2_latepreemption", "A1=1 CNESS-causes V=1 with x'=0", [](const auto& d) {
        auto pm = dsl::load_model(d);
        auto v = cness_cause(pm.model, pm.context, ev(d, "A1=1"), ev(d, "V=1"));
        return v.holds && std::get<CnessWitness>(v.witness).counterfactual == 0;
    });
    add("ex2_latepreemption", "A1=1 HP-causes V=1", [](const auto& d) { return cause(d, C::hp, "A1=1", "V=1"); });
    add("ex2_latepreemption", "A2=1 causes V=1 under no definition", [](const auto& d) {
        return std::none_of(kAllCausation.begin(), kAllCausation.end(),
                            [&](C c) { return cause(d, c, "A2=1", "V=1"); });
    });

    add("ex3_counterfactual", "A1=0 NESS-causes V=1 along {A1, BH1, BH2, V}", [](const auto& d) {
        auto pm = dsl::load_model(d);
        auto paths = ness_cause(pm.model, pm.context, ev(d, "A1=0"), ev(d, "V=1"));
        return std::any_of(paths.begin(), paths.end(), [&](const CausalPath& p) {
            return names(pm.model.signature(), p.vars) == V{"A1", "BH1", "BH2", "V"};
        });
    });
    add("ex3_counterfactual", "A1=0 is neither a CNESS nor an HP cause of V=1", [](const auto& d) {
        return !cause(d, C::cness, "A1=0", "V=1") && !cause(d, C::hp, "A1=0", "V=1");
    });
    add("ex3_counterfactual", "flare-gun Assassin1 responsible under bvh", [](const auto& d) {
        return responsible(setting(d, "Assassin1"), R::bvh).responsible;
    });
    add("ex3_counterfactual", "flare-gun Assassin1 responsible under bvh-ness", [](const auto& d) {
        return responsible(setting(d, "Assassin1"), R::bvh_ness).responsible;
    });
    add("ex3_counterfactual", "flare-gun Assassin1 not responsible under beckers", [](const auto& d) {
        return !responsible(setting(d, "Assassin1"), R::beckers).responsible;
    });

    add("ex4_loader", "C=1 causes D=1 under every definition", [](const auto& d) {
        return std::all_of(kAllCausation.begin(), kAllCausation.end(),
                           [&](C c) { return cause(d, c, "C=1", "D=1"); });
    });
    add("ex4_loader", "A=1 is not an HP cause of D=1", [](const auto& d) { return !cause(d, C::hp, "A=1", "D=1"); });

    add("ex4b_loader_variant", "{A=1, B=0} is an HP cause of D=1", [](const auto& d) {
        auto pm = dsl::load_model(d);
        return hp_cause_set(pm.model, pm.context, {ev(d, "A=1"), ev(d, "B=0")}, ev(d, "D=1")).holds;
    });
    add("ex4b_loader_variant", "A=1 is an atomic HP cause of D=1", [](const auto& d) {
        return cause(d, C::hp, "A=1", "D=1");
    });
    add("ex4b_loader_variant", "A=1 is neither a NESS nor a CNESS cause of D=1", [](const auto& d) {
        return !cause(d, C::ness, "A=1", "D=1") && !cause(d, C::cness, "A=1", "D=1");
    });

    add("ex5_bombing", "causation probabilities 2/5 (S2=1) and 3/5 (S2=0) under ness, cness, hp", [](const auto& d) {
        auto s = setting(d, "Assassin2");
        for (C c : {C::ness, C::cness, C::hp}) {
            if (causation_probability(s.epistemic(), ev(d, "S2=1"), s.outcome(), c) != Rational(2, 5)) return false;
            if (causation_probability(s.epistemic(), ev(d, "S2=0"), s.outcome(), c) != Rational(3, 5)) return false;
        }
        return true;
    });
    add("ex5_bombing", "outcome probabilities 1 (S2=1) and 3/5 (S2=0)", [](const auto& d) {
        auto s = setting(d, "Assassin2");
        return outcome_probability(s.epistemic(), ev(d, "S2=1"), s.outcome()) == 1 &&
               outcome_probability(s.epistemic(), ev(d, "S2=0"), s.outcome()) == Rational(3, 5);
    });
    add("ex5_bombing", "bvh not responsible, hk responsible, beckers responsible by branch 1", [](const auto& d) {
        auto s = setting(d, "Assassin2");
        auto b = responsible(s, R::beckers);
        return !responsible(s, R::bvh).responsible && responsible(s, R::hk).responsible && b.responsible &&
               b.epistemic_evidence.branch == 1;
    });
    add("ex5_bombing", "scenario 1: S2=1 CNESS-causes B=1", [](const auto& d) {
        return cause(with_context(d, {{"U1", "0"}, {"U2", "1"}}), C::cness, "S2=1", "B=1");
    });
    add("ex5_bombing", "scenario 2: S2=1 is not a NESS cause and not part of any HP cause", [](const auto& d) {
        auto s2 = with_context(d, {{"U1", "1"}, {"U2", "1"}});
        return !cause(s2, C::ness, "S2=1", "B=1") && !cause(s2, C::hp, "S2=1", "B=1");
    });
    add("ex5_bombing", "scenario 4: S2=0 CNESS-causes B=1; D3=1 and S2=0 each HP-cause B=1", [](const auto& d) {
        auto s4 = with_context(d, {{"U1", "1"}, {"U2", "0"}});
        return cause(s4, C::cness, "S2=0", "B=1") && cause(s4, C::hp, "D3=1", "B=1") &&
               cause(s4, C::hp, "S2=0", "B=1");
    });

    add("ex6_typicality", "d1 = 9/10 + alpha and d2 = 1/10 + alpha", [](const auto& d) {
        for (Rational alpha : {Rational(1, 2), Rational(1, 3), Rational(0)}) {
            if (degree_of_responsibility(setting(d, "Assassin1"), alpha) != Rational(9, 10) + alpha) return false;
            if (degree_of_responsibility(setting(d, "Assassin2"), alpha) != Rational(1, 10) + alpha) return false;
        }
        return true;
    });
    add("ex6_typicality", "conjunctive variant reverses the Eells ordering", [](const auto& d) {
        auto conj = d;
        for (auto& v : conj.variables)
            if (v.name == "V") v.equation = Expr::all({Expr::ref("A1"), Expr::ref("A2")});
        auto cs = [](const dsl::ScenarioDocument& doc, std::string_view agent) {
            return degree_report(setting(doc, agent), Rational(1, 2)).eells;
        };
        return cs(d, "Assassin1") > cs(d, "Assassin2") && cs(conj, "Assassin1") < cs(conj, "Assassin2");
    });

    add("firing_squad", "hk not responsible", [](const auto& d) {
        return !responsible(setting(d, "Assassin1"), R::hk).responsible;
    });
    add("firing_squad", "beckers responsible by branch 2 with causation probabilities 1 vs 0", [](const auto& d) {
        auto v = responsible(setting(d, "Assassin1"), R::beckers);
        const auto& t = v.epistemic_evidence.table;
        return v.responsible && v.epistemic_evidence.branch == 2 && t.at(1).causation == 1 && t.at(0).causation == 0;
    });
    add("firing_squad", "degree equals alpha", [](const auto& d) {
        for (Rational alpha : {Rational(1, 2), Rational(1, 4), Rational(1)})
            if (degree_of_responsibility(setting(d, "Assassin1"), alpha) != alpha) return false;
        return true;
    });

    add("frankfurt", "JP=1 causes SD=1 under ness, cness and hp", [](const auto& d) {
        return cause(d, C::ness, "JP=1", "SD=1") && cause(d, C::cness, "JP=1", "SD=1") &&
               cause(d, C::hp, "JP=1", "SD=1");
    });
    add("frankfurt", "bvh and hk epistemic conditions hold", [](const auto& d) {
        auto s = setting(d, "Jones");
        return responsible(s, R::bvh).epistemic_condition && responsible(s, R::hk).epistemic_condition;
    });

    add("rosenberg_glymour", "X=1 is a CNESS cause but not an HP cause of Y=1", [](const auto& d) {
        return cause(d, C::cness, "X=1", "Y=1") && !cause(d, C::hp, "X=1", "Y=1");
    });
    add("rosenberg_glymour", "D=1 is both a CNESS and an HP cause of Y=1", [](const auto& d) {
        return cause(d, C::cness, "D=1", "Y=1") && cause(d, C::hp, "D=1", "Y=1");
    });
    return out;
}

}  // namespace resp::corpus
