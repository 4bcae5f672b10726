#pragma once

#include "resp/causation.hpp"
#include "resp/error.hpp"
#include "resp/model.hpp"
#include "resp/rational.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace resp {

/// One causal setting the agent considers possible, with its probability.
struct World {
    Rational weight;
    CausalModel model;
    Context context;
};

/// Agent's probability distribution over causal settings that share one
/// signature. Weights are exact and sum to exactly 1.
class EpistemicState {
public:
    explicit EpistemicState(std::vector<World> worlds, const std::string& owner = {}) : worlds_(std::move(worlds)) {
        if (worlds_.empty()) throw QueryError("epistemic state has no worlds");
        Rational total = 0;
        for (const auto& w : worlds_) {
            if (w.weight < 0) throw QueryError("negative epistemic weight " + to_string(w.weight));
            if (!(w.model.signature() == worlds_.front().model.signature()))
                throw SignatureMismatch("worlds of an epistemic state must share one signature");
            w.context.require_total(w.model.signature());
            total += w.weight;
        }
        if (total != 1) throw WeightSumError(owner, to_fraction(total));
    }

    const std::vector<World>& worlds() const noexcept { return worlds_; }
    const Signature& signature() const { return worlds_.front().model.signature(); }

private:
    std::vector<World> worlds_;
};

enum class Responsibility { bvh, bvh_ness, hk, beckers };

inline constexpr std::array<Responsibility, 4> kAllResponsibility = {Responsibility::bvh, Responsibility::bvh_ness,
                                                                     Responsibility::hk, Responsibility::beckers};

inline std::string_view to_string(Responsibility r) {
    switch (r) {
    case Responsibility::bvh: return "bvh";
    case Responsibility::bvh_ness: return "bvh-ness";
    case Responsibility::hk: return "hk";
    case Responsibility::beckers: return "beckers";
    }
    return "?";
}

inline std::optional<Responsibility> parse_responsibility(std::string_view s) {
    for (auto r : kAllResponsibility)
        if (to_string(r) == s) return r;
    return std::nullopt;
}

/// Causation definition used by each responsibility definition's causal
/// condition.
inline Causation causal_condition_of(Responsibility r) {
    switch (r) {
    case Responsibility::bvh: return Causation::direct_ness;
    case Responsibility::bvh_ness: return Causation::ness;
    case Responsibility::hk: return Causation::hp;
    case Responsibility::beckers: return Causation::cness;
    }
    return Causation::cness;
}

/// Actual causal setting, the agent's epistemic state, the agent's action
/// variable and the outcome under consideration.
class ResponsibilitySetting {
public:
    ResponsibilitySetting(std::string agent, CausalModel model, Context context, EpistemicState epistemic,
                          VarId action, Event outcome)
        : agent_(std::move(agent)),
          model_(std::move(model)),
          context_(std::move(context)),
          epistemic_(std::move(epistemic)),
          action_(action),
          outcome_(outcome) {
        const auto& sig = model_.signature();
        if (!(epistemic_.signature() == sig))
            throw SignatureMismatch("epistemic worlds do not share the actual model's signature");
        if (action_ >= sig.size() || sig.is_exogenous(action_))
            throw ModelError("action variable must be endogenous");
        if (outcome_.var >= sig.size() || sig.is_exogenous(outcome_.var))
            throw ModelError("outcome variable must be endogenous");
        if (outcome_.value >= sig.range(outcome_.var).size())
            throw ValueOutOfRange(sig.name(outcome_.var), "#" + std::to_string(outcome_.value));
        if (outcome_.var == action_) throw SameVariableError(sig.name(action_));
        actual_action_ = solve(model_, context_)[action_];
    }

    const std::string& agent() const noexcept { return agent_; }
    const CausalModel& model() const noexcept { return model_; }
    const Context& context() const noexcept { return context_; }
    const EpistemicState& epistemic() const noexcept { return epistemic_; }
    VarId action_variable() const noexcept { return action_; }
    ValueId actual_action() const noexcept { return actual_action_; }
    Event action() const noexcept { return {action_, actual_action_}; }
    const Event& outcome() const noexcept { return outcome_; }
    const Signature& signature() const noexcept { return model_.signature(); }

private:
    std::string agent_;
    CausalModel model_;
    Context context_;
    EpistemicState epistemic_;
    VarId action_;
    ValueId actual_action_ = 0;
    Event outcome_;
};

namespace detail {

inline void require_action(const EpistemicState& e, const Event& action, const Event& outcome) {
    const auto& sig = e.signature();
    if (action.var >= sig.size() || sig.is_exogenous(action.var))
        throw SignatureMismatch("action variable is not endogenous in the epistemic signature");
    if (action.value >= sig.range(action.var).size())
        throw ValueOutOfRange(sig.name(action.var), "#" + std::to_string(action.value));
    if (outcome.var >= sig.size() || sig.is_exogenous(outcome.var))
        throw SignatureMismatch("outcome variable is not endogenous in the epistemic signature");
    if (outcome.var == action.var) throw SameVariableError(sig.name(action.var));
}

}  // namespace detail

/// Pr(O=o | [A <- a]): weight of the worlds where the outcome follows the
/// action.
inline Rational outcome_probability(const EpistemicState& e, const Event& action, const Event& outcome) {
    detail::require_action(e, action, outcome);
    Rational total = 0;
    for (const auto& w : e.worlds()) {
        auto acted = intervene(w.model, std::span<const Event>(&action, 1));
        if (solve(acted, w.context).holds(outcome)) total += w.weight;
    }
    return total;
}

/// Pr(A=a causes O=o), each world read under the intervention A <- a.
inline Rational causation_probability(const EpistemicState& e, const Event& action, const Event& outcome,
                                      Causation def, const Limits& limits = {}) {
    detail::require_action(e, action, outcome);
    Rational total = 0;
    for (const auto& w : e.worlds()) {
        auto acted = intervene(w.model, std::span<const Event>(&action, 1));
        if (is_cause(acted, w.context, def, action, outcome, limits).holds) total += w.weight;
    }
    return total;
}

/// Probabilities for one candidate action.
struct ActionProbabilities {
    ValueId action = 0;
    Rational outcome;
    Rational causation;

    bool operator==(const ActionProbabilities&) const = default;
};

/// Evidence for the epistemic condition. `alternative` is the first a' that
/// discharges it, if any.
struct EpistemicEvidence {
    std::optional<ValueId> alternative;
    /// 1 or 2 for the two branches of the combined condition, 0 otherwise.
    int branch = 0;
    /// Probabilities of every action in range order; `causation` uses the
    /// definition's causal selector.
    std::vector<ActionProbabilities> table;

    bool operator==(const EpistemicEvidence&) const = default;
};

struct ResponsibilityVerdict {
    Responsibility definition = Responsibility::beckers;
    bool responsible = false;
    /// Always met; agents are assumed to control their action.
    bool control_condition = true;
    bool causal_condition = false;
    bool epistemic_condition = false;
    CausalVerdict causal_evidence;
    EpistemicEvidence epistemic_evidence;
};

/// Outcome and causation probabilities for every value of the action
/// variable, in range order.
inline std::vector<ActionProbabilities> action_table(const ResponsibilitySetting& s, Causation def,
                                                     const Limits& limits = {}) {
    std::vector<ActionProbabilities> table;
    const auto& sig = s.signature();
    for (ValueId a = 0; a < sig.range(s.action_variable()).size(); ++a) {
        Event act{s.action_variable(), a};
        table.push_back({a, outcome_probability(s.epistemic(), act, s.outcome()),
                         causation_probability(s.epistemic(), act, s.outcome(), def, limits)});
    }
    return table;
}

inline ResponsibilityVerdict responsible(const ResponsibilitySetting& s, Responsibility def,
                                         const Limits& limits = {}) {
    ResponsibilityVerdict v;
    v.definition = def;
    Causation causal = causal_condition_of(def);
    v.causal_evidence = is_cause(s.model(), s.context(), causal, s.action(), s.outcome(), limits);
    v.causal_condition = v.causal_evidence.holds;

    auto& ev = v.epistemic_evidence;
    ev.table = action_table(s, causal, limits);
    const auto& mine = ev.table.at(s.actual_action());
    for (const auto& alt : ev.table) {
        if (alt.action == s.actual_action()) continue;
        int branch = 0;
        switch (def) {
        case Responsibility::bvh:
        case Responsibility::bvh_ness:
            if (mine.causation > alt.causation) branch = 1;
            break;
        case Responsibility::hk:
            if (mine.outcome > alt.outcome) branch = 1;
            break;
        case Responsibility::beckers:
            if (mine.outcome > alt.outcome)
                branch = 1;
            else if (mine.outcome == alt.outcome && mine.causation > alt.causation)
                branch = 2;
            break;
        }
        if (branch != 0) {
            ev.alternative = alt.action;
            ev.branch = branch;
            break;
        }
    }
    v.epistemic_condition = ev.alternative.has_value();
    v.responsible = v.causal_condition && v.epistemic_condition;
    return v;
}

/// Eells measure: Pr(O=o | [A <- a]) - Pr(O=o | [A <- a']).
inline Rational causal_strength_eells(const EpistemicState& e, const Event& outcome, const Event& action,
                                      const Event& alternative) {
    if (action.var != alternative.var) throw QueryError("causal strength compares values of one action variable");
    return outcome_probability(e, action, outcome) - outcome_probability(e, alternative, outcome);
}

/// Actual-causation measure over CNESS causation probabilities.
inline Rational causal_strength_actual(const EpistemicState& e, const Event& outcome, const Event& action,
                                       const Event& alternative, const Limits& limits = {}) {
    if (action.var != alternative.var) throw QueryError("causal strength compares values of one action variable");
    return causation_probability(e, action, outcome, Causation::cness, limits) -
           causation_probability(e, alternative, outcome, Causation::cness, limits);
}

struct DegreeReport {
    Rational degree = 0;
    bool responsible = false;
    /// The reference alternative a''; unset when not responsible.
    std::optional<ValueId> reference;
    Rational eells = 0;
    Rational actual = 0;
    /// Several outcome-minimising actions share the minimal causation
    /// probability; the earliest in range order was used.
    bool tie = false;
};

inline DegreeReport degree_report(const ResponsibilitySetting& s, const Rational& alpha, const Limits& limits = {}) {
    if (alpha < 0) throw QueryError("alpha must be nonnegative");
    DegreeReport r;
    auto verdict = responsible(s, Responsibility::beckers, limits);
    r.responsible = verdict.responsible;
    if (!r.responsible) return r;
    const auto& table = verdict.epistemic_evidence.table;
    Rational min_outcome = table.front().outcome;
    for (const auto& row : table) min_outcome = std::min(min_outcome, row.outcome);
    const ActionProbabilities* best = nullptr;
    for (const auto& row : table)
        if (row.outcome == min_outcome && (!best || row.causation < best->causation)) best = &row;
    r.tie = std::count_if(table.begin(), table.end(), [&](const ActionProbabilities& row) {
                return row.outcome == min_outcome && row.causation == best->causation;
            }) > 1;
    const auto& mine = table.at(s.actual_action());
    r.reference = best->action;
    r.eells = mine.outcome - best->outcome;
    r.actual = mine.causation - best->causation;
    r.degree = r.eells + alpha * std::max(Rational(0), r.actual);
    return r;
}

/// 0 when not responsible; otherwise CS_e + alpha * max(0, CS_ac) against the
/// outcome-minimising, then causation-minimising, alternative.
inline Rational degree_of_responsibility(const ResponsibilitySetting& s, const Rational& alpha,
                                         const Limits& limits = {}) {
    return degree_report(s, alpha, limits).degree;
}

}  // namespace resp
