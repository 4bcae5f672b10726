#pragma once

#include "resp/causation.hpp"
#include "resp/dsl.hpp"
#include "resp/model.hpp"
#include "resp/oracle.hpp"
#include "resp/responsibility.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace resp::testkit {

struct SpecimenParams {
    std::size_t max_vars = 6;       // endogenous
    std::size_t max_exogenous = 3;
    std::size_t max_range = 2;      // 2 keeps every variable Boolean
    std::size_t max_depth = 2;
    std::size_t max_fanin = 3;
};

struct ModelSpecimen {
    std::uint64_t seed = 0;
    SpecimenParams params;
    /// Variables, equations and context; no agents.
    dsl::ScenarioDocument document;
    CausalModel model;
    Context context;
};

inline ModelSpecimen specimen_from(dsl::ScenarioDocument doc, std::uint64_t seed = 0, SpecimenParams params = {}) {
    auto model = dsl::model_of(doc);
    auto ctx = dsl::context_of(doc, model.signature());
    ctx.require_total(model.signature());
    return {seed, params, std::move(doc), std::move(model), std::move(ctx)};
}

namespace detail {

// Modulo reduction keeps sequences identical across standard libraries,
// unlike the <random> distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::size_t below(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(engine_() % n); }
    bool chance(std::size_t num, std::size_t den) { return below(den) < num; }

private:
    std::mt19937_64 engine_;
};

inline std::vector<std::string> make_range(std::size_t size) {
    if (size <= 2) return {"0", "1"};
    std::vector<std::string> r;
    for (std::size_t i = 0; i < size; ++i) r.push_back("v" + std::to_string(i));
    return r;
}

class Generator {
public:
    Generator(Rng& rng, const SpecimenParams& p) : rng_(rng), p_(p) {}

    Expr condition(const std::vector<const dsl::VariableDecl*>& pool, std::size_t depth) {
        if (depth == 0 || rng_.chance(1, 3)) return literal(pool);
        std::size_t fanin = 2 + rng_.below(std::max<std::size_t>(p_.max_fanin, 2) - 1);
        std::vector<Expr> kids;
        for (std::size_t i = 0; i < fanin; ++i) kids.push_back(condition(pool, depth - 1));
        return rng_.chance(1, 2) ? Expr::all(std::move(kids)) : Expr::any(std::move(kids));
    }

    Expr equation(const dsl::VariableDecl& target, const std::vector<const dsl::VariableDecl*>& pool) {
        if (target.range == std::vector<std::string>{"0", "1"}) return condition(pool, p_.max_depth);
        std::vector<std::pair<Expr, Expr>> arms;
        std::size_t n = 1 + rng_.below(2);
        for (std::size_t i = 0; i < n; ++i)
            arms.emplace_back(condition(pool, p_.max_depth > 0 ? p_.max_depth - 1 : 0),
                              Expr::constant(target.range[rng_.below(target.range.size())]));
        return Expr::cases(std::move(arms), Expr::constant(target.range[rng_.below(target.range.size())]));
    }

private:
    Expr literal(const std::vector<const dsl::VariableDecl*>& pool) {
        const auto& v = *pool[rng_.below(pool.size())];
        if (v.range == std::vector<std::string>{"0", "1"})
            return rng_.chance(1, 4) ? Expr::negate(Expr::ref(v.name)) : Expr::ref(v.name);
        const auto& value = v.range[rng_.below(v.range.size())];
        return rng_.chance(1, 4) ? Expr::ne(v.name, value) : Expr::eq(v.name, value);
    }

    Rng& rng_;
    const SpecimenParams& p_;
};

}  // namespace detail

/// Acyclic model with a total context, reproducible from `seed`.
inline ModelSpecimen random_specimen(std::uint64_t seed, const SpecimenParams& params = {}) {
    detail::Rng rng(seed);
    detail::Generator gen(rng, params);
    std::size_t n = 1 + rng.below(std::max<std::size_t>(params.max_vars, 1));
    std::size_t k = 1 + rng.below(std::max<std::size_t>(params.max_exogenous, 1));
    auto range_size = [&] {
        return params.max_range <= 2 ? std::size_t{2} : 2 + rng.below(params.max_range - 1);
    };

    std::vector<dsl::VariableDecl> exo, endo;
    for (std::size_t i = 0; i < k; ++i) exo.push_back({"U" + std::to_string(i), true, detail::make_range(range_size()), {}});
    for (std::size_t i = 0; i < n; ++i)
        endo.push_back({"X" + std::to_string(i), false, detail::make_range(range_size()), {}});
    // X_i reads only exogenous variables and X_j with j < i.
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<const dsl::VariableDecl*> pool;
        for (const auto& u : exo) pool.push_back(&u);
        for (std::size_t j = 0; j < i; ++j) pool.push_back(&endo[j]);
        endo[i].equation = gen.equation(endo[i], pool);
    }
    // Declaration order is shuffled so the solver cannot rely on it.
    for (std::size_t i = n; i > 1; --i) std::swap(endo[i - 1], endo[rng.below(i)]);

    dsl::ScenarioDocument doc;
    for (auto& u : exo) {
        doc.context.push_back({u.name, u.range[rng.below(u.range.size())]});
        doc.variables.push_back(std::move(u));
    }
    for (auto& x : endo) doc.variables.push_back(std::move(x));
    return specimen_from(std::move(doc), seed, params);
}

/// The specimen plus one agent whose epistemic state has 1 to 3 worlds with
/// random contexts, rational weights and an occasional replaced equation.
/// Needs at least two endogenous variables.
inline std::optional<dsl::ScenarioDocument> random_scenario(const ModelSpecimen& s, std::uint64_t seed) {
    const auto& sig = s.model.signature();
    auto endo = sig.endogenous();
    if (endo.size() < 2) return std::nullopt;
    detail::Rng rng(seed);
    dsl::ScenarioDocument doc = s.document;
    doc.agents.clear();
    auto solution = solve(s.model, s.context);
    VarId action = endo[rng.below(endo.size())];
    VarId outcome = action;
    while (outcome == action) outcome = endo[rng.below(endo.size())];
    std::string outcome_value = rng.chance(3, 4) ? sig.value_name(outcome, solution[outcome])
                                                 : sig.range(outcome)[rng.below(sig.range(outcome).size())];
    doc.outcome = dsl::Assign{sig.name(outcome), outcome_value};

    dsl::AgentDecl agent{"Agent", sig.name(action), {}};
    std::size_t worlds = 1 + rng.below(3);
    std::vector<std::int64_t> raw(worlds);
    std::int64_t total = 0;
    for (auto& w : raw) total += (w = 1 + static_cast<std::int64_t>(rng.below(5)));
    for (std::size_t i = 0; i < worlds; ++i) {
        dsl::WorldDecl w;
        w.weight = Rational(raw[i], total);
        for (VarId u : sig.exogenous()) w.context.push_back({sig.name(u), sig.range(u)[rng.below(sig.range(u).size())]});
        if (rng.chance(1, 3)) {
            VarId v = endo[rng.below(endo.size())];
            if (v != action) w.equations.push_back({sig.name(v), Expr::constant(sig.range(v)[rng.below(sig.range(v).size())])});
        }
        agent.worlds.push_back(std::move(w));
    }
    doc.agents.push_back(std::move(agent));
    return doc;
}

// ---------------------------------------------------------------------------
// Differential comparison

struct DifferentialRow {
    Event cause;
    Event effect;
    /// Indexed like kAllCausation: direct-ness, ness, cness, hp.
    std::array<bool, 4> verdicts{};

    bool direct_without_ness() const { return verdicts[0] && !verdicts[1]; }
    bool cness_without_ness() const { return verdicts[2] && !verdicts[1]; }
    bool lattice_violation() const { return direct_without_ness() || cness_without_ness(); }
    bool disagreement() const {
        return !(verdicts[0] == verdicts[1] && verdicts[1] == verdicts[2] && verdicts[2] == verdicts[3]);
    }
};

/// One row per ordered pair of distinct endogenous variables, at actual values.
inline std::vector<DifferentialRow> differential_causes(const ModelSpecimen& s, const Limits& limits = {}) {
    std::vector<DifferentialRow> rows;
    resp::detail::Engine engine(s.model, s.context, limits);
    const auto& sig = s.model.signature();
    for (VarId y : sig.endogenous())
        for (VarId x : sig.endogenous()) {
            if (x == y) continue;
            DifferentialRow row{engine.actual_event(x), engine.actual_event(y), {}};
            for (std::size_t d = 0; d < kAllCausation.size(); ++d)
                row.verdicts[d] = resp::detail::decide(engine, kAllCausation[d], row.cause, row.effect).holds;
            rows.push_back(row);
        }
    return rows;
}

// ---------------------------------------------------------------------------
// Shrinking

namespace detail {

/// Replaces references to `var` by its actual value.
inline std::optional<Expr> substitute(const Expr& e, const std::string& var, const std::string& value, bool value_ctx) {
    using K = Expr::Kind;
    switch (e.kind()) {
    case K::constant: return e;
    case K::ref:
        if (e.var() != var) return e;
        if (!value_ctx && value != "0" && value != "1") return std::nullopt;
        return Expr::constant(value);
    case K::eq:
    case K::ne:
        if (e.var() != var) return e;
        return Expr::constant(((e.value() == value) == (e.kind() == K::eq)) ? "1" : "0");
    case K::negation: {
        auto inner = substitute(e.children()[0], var, value, false);
        if (!inner) return std::nullopt;
        return Expr::negate(std::move(*inner));
    }
    case K::conjunction:
    case K::disjunction: {
        std::vector<Expr> kids;
        for (const auto& c : e.children()) {
            auto k = substitute(c, var, value, false);
            if (!k) return std::nullopt;
            kids.push_back(std::move(*k));
        }
        return e.kind() == K::conjunction ? Expr::all(std::move(kids)) : Expr::any(std::move(kids));
    }
    case K::cases: {
        std::vector<std::pair<Expr, Expr>> arms;
        for (std::size_t i = 0; i < e.arm_count(); ++i) {
            auto g = substitute(e.guard(i), var, value, false);
            auto a = substitute(e.arm(i), var, value, value_ctx);
            if (!g || !a) return std::nullopt;
            arms.emplace_back(std::move(*g), std::move(*a));
        }
        auto f = substitute(e.fallback(), var, value, value_ctx);
        if (!f) return std::nullopt;
        return Expr::cases(std::move(arms), std::move(*f));
    }
    }
    return std::nullopt;
}

/// Expressions one step simpler than `e`: operands of connectives, a
/// connective with one operand fewer, the body of a negation.
inline std::vector<Expr> simplifications(const Expr& e) {
    using K = Expr::Kind;
    std::vector<Expr> out;
    const auto& kids = e.children();
    switch (e.kind()) {
    case K::negation: out.push_back(kids[0]); break;
    case K::conjunction:
    case K::disjunction:
        for (const auto& k : kids) out.push_back(k);
        if (kids.size() > 2)
            for (std::size_t i = 0; i < kids.size(); ++i) {
                std::vector<Expr> rest;
                for (std::size_t j = 0; j < kids.size(); ++j)
                    if (j != i) rest.push_back(kids[j]);
                out.push_back(e.kind() == K::conjunction ? Expr::all(std::move(rest)) : Expr::any(std::move(rest)));
            }
        for (std::size_t i = 0; i < kids.size(); ++i)
            for (auto& smaller : simplifications(kids[i])) {
                auto copy = kids;
                copy[i] = std::move(smaller);
                out.push_back(e.kind() == K::conjunction ? Expr::all(std::move(copy)) : Expr::any(std::move(copy)));
            }
        break;
    case K::cases:
        out.push_back(e.fallback());
        for (std::size_t i = 0; i < e.arm_count(); ++i) out.push_back(e.arm(i));
        break;
    default: break;
    }
    return out;
}

inline std::optional<ModelSpecimen> try_specimen(dsl::ScenarioDocument doc, const ModelSpecimen& like) {
    try {
        return specimen_from(std::move(doc), like.seed, like.params);
    } catch (const Error&) {
        return std::nullopt;
    }
}

inline std::vector<ModelSpecimen> shrink_candidates(const ModelSpecimen& s) {
    std::vector<ModelSpecimen> out;
    const auto& doc = s.document;
    auto solution = solve(s.model, s.context);
    const auto& sig = s.model.signature();
    // Drop one endogenous variable, replacing its uses by its actual value.
    for (std::size_t i = 0; i < doc.variables.size(); ++i) {
        const auto& victim = doc.variables[i];
        if (victim.exogenous) continue;
        VarId vid = sig.id(victim.name);
        const auto& value = sig.value_name(vid, solution[vid]);
        dsl::ScenarioDocument next;
        next.context = doc.context;
        bool ok = true;
        for (std::size_t j = 0; j < doc.variables.size() && ok; ++j) {
            if (j == i) continue;
            auto v = doc.variables[j];
            if (v.equation) {
                auto e = substitute(*v.equation, victim.name, value, true);
                ok = e.has_value();
                if (ok) v.equation = std::move(*e);
            }
            next.variables.push_back(std::move(v));
        }
        if (ok)
            if (auto c = try_specimen(std::move(next), s)) out.push_back(std::move(*c));
    }
    // Drop exogenous variables nothing reads.
    std::set<std::string> used;
    for (const auto& v : doc.variables)
        if (v.equation) v.equation->collect_vars(used);
    for (std::size_t i = 0; i < doc.variables.size(); ++i) {
        const auto& u = doc.variables[i];
        if (!u.exogenous || used.count(u.name)) continue;
        dsl::ScenarioDocument next = doc;
        next.variables.erase(next.variables.begin() + static_cast<std::ptrdiff_t>(i));
        std::erase_if(next.context, [&](const dsl::Assign& a) { return a.var == u.name; });
        if (auto c = try_specimen(std::move(next), s)) out.push_back(std::move(*c));
    }
    // Simplify one equation.
    for (std::size_t i = 0; i < doc.variables.size(); ++i) {
        if (!doc.variables[i].equation) continue;
        for (auto& smaller : simplifications(*doc.variables[i].equation)) {
            dsl::ScenarioDocument next = doc;
            next.variables[i].equation = std::move(smaller);
            if (auto c = try_specimen(std::move(next), s)) out.push_back(std::move(*c));
        }
    }
    return out;
}

}  // namespace detail

/// Greedy shrinking: repeatedly takes the first smaller valid specimen on
/// which `fails` still holds.
inline ModelSpecimen shrink(const ModelSpecimen& s, const std::function<bool(const ModelSpecimen&)>& fails,
                            std::size_t max_steps = 200) {
    ModelSpecimen current = s;
    for (std::size_t step = 0; step < max_steps; ++step) {
        bool progressed = false;
        for (auto& candidate : detail::shrink_candidates(current)) {
            bool still_fails = false;
            try {
                still_fails = fails(candidate);
            } catch (const Error&) {
            }
            if (still_fails) {
                current = std::move(candidate);
                progressed = true;
                break;
            }
        }
        if (!progressed) break;
    }
    return current;
}

// ---------------------------------------------------------------------------
// Metamorphic properties

struct PropertyResult {
    std::string name;
    bool passed = true;
    std::string counterexample;
    /// Minimised failing specimen, present when the property failed.
    std::optional<ModelSpecimen> shrunk;
};

/// A property returns a description of its first counterexample, if any.
using Property = std::function<std::optional<std::string>(const ModelSpecimen&)>;

namespace detail {

inline std::string describe(const Signature& sig, const Event& e) { return to_string(sig, e); }

inline std::optional<std::string> intervention_effectiveness(const ModelSpecimen& s) {
    const auto& sig = s.model.signature();
    for (VarId v : sig.endogenous())
        for (ValueId x = 0; x < sig.range(v).size(); ++x) {
            Event e{v, x};
            auto sol = solve(intervene(s.model, std::span<const Event>(&e, 1)), s.context);
            if (!sol.holds(e)) return "after [" + describe(sig, e) + "] the variable has another value";
        }
    return std::nullopt;
}

/// Intervening on a variable with its actual value changes nothing, and the
/// intervened solution still satisfies every remaining equation.
inline std::optional<std::string> intervention_consistency(const ModelSpecimen& s) {
    const auto& sig = s.model.signature();
    auto actual = solve(s.model, s.context);
    for (VarId v : sig.endogenous()) {
        Event e{v, actual[v]};
        if (!(solve(intervene(s.model, std::span<const Event>(&e, 1)), s.context) == actual))
            return "intervening " + describe(sig, e) + " at its actual value changed the solution";
        for (ValueId x = 0; x < sig.range(v).size(); ++x) {
            Event f{v, x};
            auto m = intervene(s.model, std::span<const Event>(&f, 1));
            auto sol = solve(m, s.context);
            for (VarId w : sig.endogenous()) {
                if (w == v) continue;
                // Re-solving with everything but w frozen must reproduce w.
                std::vector<Event> frozen;
                for (VarId z : sig.endogenous())
                    if (z != w) frozen.push_back({z, sol[z]});
                if (!solve(intervene(s.model, frozen), s.context).holds({w, sol[w]}))
                    return "after [" + describe(sig, f) + "] " + sig.name(w) + " violates its equation";
            }
        }
    }
    return std::nullopt;
}

inline std::optional<std::string> lattice(const ModelSpecimen& s) {
    const auto& sig = s.model.signature();
    for (const auto& row : differential_causes(s)) {
        if (row.direct_without_ness())
            return describe(sig, row.cause) + " directly NESS-causes " + describe(sig, row.effect) +
                   " without being a NESS cause";
        if (row.cness_without_ness())
            return describe(sig, row.cause) + " CNESS-causes " + describe(sig, row.effect) +
                   " without being a NESS cause";
    }
    return std::nullopt;
}

inline std::optional<std::string> direct_ness_parenthood(const ModelSpecimen& s) {
    const auto& sig = s.model.signature();
    for (const auto& row : differential_causes(s)) {
        if (!row.verdicts[0]) continue;
        std::set<std::string> names;
        s.model.equation(row.effect.var)->collect_vars(names);
        if (!names.count(sig.name(row.cause.var)))
            return describe(sig, row.cause) + " directly NESS-causes " + describe(sig, row.effect) +
                   " but is not a parent";
    }
    return std::nullopt;
}

inline std::optional<std::string> dependence_implies_causes(const ModelSpecimen& s) {
    const auto& sig = s.model.signature();
    auto actual = solve(s.model, s.context);
    for (const auto& row : differential_causes(s)) {
        bool depends = false;
        for (ValueId x = 0; x < sig.range(row.cause.var).size() && !depends; ++x) {
            if (x == row.cause.value) continue;
            Event e{row.cause.var, x};
            depends = !solve(intervene(s.model, std::span<const Event>(&e, 1)), s.context).holds(row.effect);
        }
        if (depends && !(row.verdicts[2] && row.verdicts[3]))
            return describe(sig, row.effect) + " depends on " + describe(sig, row.cause) + " but cness=" +
                   (row.verdicts[2] ? "true" : "false") + " hp=" + (row.verdicts[3] ? "true" : "false");
    }
    return std::nullopt;
}

inline std::uint64_t scenario_seed(const ModelSpecimen& s) { return s.seed * 0x9E3779B97F4A7C15ULL + 17; }

inline std::optional<std::string> causation_bounded(const ModelSpecimen& s) {
    auto doc = random_scenario(s, scenario_seed(s));
    if (!doc) return std::nullopt;
    auto settings = dsl::settings_of(*doc);
    const auto& st = settings.front();
    const auto& sig = st.signature();
    for (ValueId a = 0; a < sig.range(st.action_variable()).size(); ++a) {
        Event act{st.action_variable(), a};
        Rational outcome = outcome_probability(st.epistemic(), act, st.outcome());
        for (auto def : kAllCausation) {
            Rational caused = causation_probability(st.epistemic(), act, st.outcome(), def);
            if (caused > outcome)
                return std::string(to_string(def)) + " causation probability " + to_string(caused) +
                       " exceeds outcome probability " + to_string(outcome) + " for " + describe(sig, act);
        }
    }
    return std::nullopt;
}

inline std::optional<std::string> beckers_iff_degree(const ModelSpecimen& s) {
    auto doc = random_scenario(s, scenario_seed(s));
    if (!doc) return std::nullopt;
    auto settings = dsl::settings_of(*doc);
    const auto& st = settings.front();
    bool resp = responsible(st, Responsibility::beckers).responsible;
    Rational d = degree_of_responsibility(st, Rational(1, 2));
    if (resp != (d > 0))
        return std::string("beckers responsible=") + (resp ? "true" : "false") + " but degree=" + to_string(d);
    return std::nullopt;
}

inline std::optional<std::string> dsl_round_trip(const ModelSpecimen& s) {
    auto check = [](const dsl::ScenarioDocument& doc) -> std::optional<std::string> {
        auto text = dsl::serialize(doc);
        if (dsl::serialize(doc) != text) return "serialization is not deterministic";
        dsl::ScenarioDocument back;
        try {
            back = dsl::parse_document(text);
        } catch (const dsl::ParseError& e) {
            return std::string("serialized text does not parse: ") + e.what();
        }
        if (!(back == doc)) return "parse(serialize(d)) differs from d:\n" + text;
        return std::nullopt;
    };
    if (auto bad = check(s.document)) return bad;
    if (auto doc = random_scenario(s, scenario_seed(s)))
        if (auto bad = check(*doc)) return bad;
    return std::nullopt;
}

/// Engine witnesses re-checked through `evaluate`.
inline std::optional<std::string> witnesses_recheck(const ModelSpecimen& s) {
    const auto& sig = s.model.signature();
    resp::detail::Engine engine(s.model, s.context, {});
    for (const auto& row : differential_causes(s)) {
        auto tag = describe(sig, row.cause) + " -> " + describe(sig, row.effect);
        auto direct = resp::detail::decide(engine, Causation::direct_ness, row.cause, row.effect);
        if (direct.holds) {
            auto w = std::get<DirectNessWitness>(direct.witness).set;
            if (oracle::sufficient(s.model, s.context, w, row.effect)) return tag + ": W alone is sufficient";
            w.push_back(row.cause);
            if (!oracle::sufficient(s.model, s.context, w, row.effect)) return tag + ": W with cause is insufficient";
        }
        auto hp = resp::detail::decide(engine, Causation::hp, row.cause, row.effect);
        if (hp.holds) {
            const auto& w = std::get<HpWitness>(hp.witness);
            CausalFormula f;
            for (std::size_t i = 0; i < w.conjuncts.size(); ++i)
                f.interventions.emplace_back(sig.name(w.conjuncts[i].var), sig.value_name(w.conjuncts[i].var, w.flip[i]));
            for (const auto& e : w.frozen) f.interventions.emplace_back(sig.name(e.var), sig.value_name(e.var, e.value));
            f.body = Expr::ne(sig.name(row.effect.var), sig.value_name(row.effect.var, row.effect.value));
            if (!evaluate(s.model, s.context, f)) return tag + ": HP witness does not flip the effect";
        }
    }
    return std::nullopt;
}

}  // namespace detail

struct NamedProperty {
    std::string name;
    Property check;
};

inline const std::vector<NamedProperty>& properties() {
    static const std::vector<NamedProperty> all = {
        {"intervention-effectiveness", detail::intervention_effectiveness},
        {"intervention-consistency", detail::intervention_consistency},
        {"causation-lattice", detail::lattice},
        {"direct-ness-parenthood", detail::direct_ness_parenthood},
        {"dependence-implies-hp-and-cness", detail::dependence_implies_causes},
        {"causation-probability-bounded", detail::causation_bounded},
        {"beckers-iff-positive-degree", detail::beckers_iff_degree},
        {"dsl-round-trip", detail::dsl_round_trip},
        {"witness-recheck", detail::witnesses_recheck},
    };
    return all;
}

/// Runs every property on the specimen; failures carry a shrunken specimen.
inline std::vector<PropertyResult> metamorphic_suite(const ModelSpecimen& s, bool shrink_failures = true) {
    std::vector<PropertyResult> out;
    for (const auto& p : properties()) {
        PropertyResult r{p.name, true, {}, std::nullopt};
        std::optional<std::string> failure;
        try {
            failure = p.check(s);
        } catch (const Error& e) {
            failure = std::string("error: ") + e.what();
        }
        if (failure) {
            r.passed = false;
            r.counterexample = *failure;
            if (shrink_failures) {
                auto check = p.check;
                r.shrunk = shrink(s, [&](const ModelSpecimen& c) { return check(c).has_value(); });
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace resp::testkit
