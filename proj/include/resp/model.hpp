#pragma once

#include "resp/error.hpp"
#include "resp/expression.hpp"
#include "resp/signature.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace resp {

/// Limits of the exhaustive engine.
struct Limits {
    /// Largest admissible product of endogenous range sizes.
    std::uint64_t max_states = std::uint64_t{1} << 20;
    /// Largest HP conjunct set searched; unset means every endogenous
    /// variable except the effect.
    std::optional<std::size_t> max_conjuncts;
};

namespace detail {

inline constexpr std::int32_t kFree = -1;

struct EquationSet {
    std::vector<std::optional<Expr>> source;   // by VarId; set for endogenous only
    std::vector<Node> compiled;                // by VarId
    std::vector<std::vector<VarId>> parents;   // sorted, by VarId
    std::vector<std::vector<VarId>> children;  // endogenous children, sorted
    std::vector<VarId> order;                  // endogenous, topological
};

}  // namespace detail

/// Acyclic structural causal model over finite ranges. Immutable; intervened
/// copies share the signature and equations with the original.
class CausalModel {
public:
    const Signature& signature() const noexcept { return *sig_; }
    const std::shared_ptr<const Signature>& signature_ptr() const noexcept { return sig_; }

    bool is_fixed(VarId v) const { return fixed_.at(v) != detail::kFree; }
    std::optional<ValueId> fixed_value(VarId v) const {
        if (!is_fixed(v)) return std::nullopt;
        return static_cast<ValueId>(fixed_[v]);
    }
    /// Intervened variables with their constants, in VarId order.
    std::vector<Event> fixed() const {
        std::vector<Event> out;
        for (VarId v = 0; v < fixed_.size(); ++v)
            if (is_fixed(v)) out.push_back({v, static_cast<ValueId>(fixed_[v])});
        return out;
    }

    /// Equation of a non-fixed endogenous variable; nullptr otherwise.
    const Expr* equation(VarId v) const {
        if (is_fixed(v) || !eqs_->source.at(v)) return nullptr;
        return &*eqs_->source[v];
    }

    /// Variables syntactically referenced by the equation; empty when fixed.
    std::span<const VarId> parents(VarId v) const {
        if (is_fixed(v)) return {};
        return eqs_->parents.at(v);
    }

    bool is_parent(VarId parent, VarId child) const {
        auto ps = parents(child);
        return std::binary_search(ps.begin(), ps.end(), parent);
    }

    /// Endogenous, non-fixed variables whose equation reads `v`.
    std::vector<VarId> children(VarId v) const {
        std::vector<VarId> out;
        for (VarId c : eqs_->children.at(v))
            if (!is_fixed(c)) out.push_back(c);
        return out;
    }

    /// Endogenous variables, parents before children, declaration order
    /// breaking ties.
    const std::vector<VarId>& topological_order() const noexcept { return eqs_->order; }

    /// Product of endogenous range sizes, saturating.
    std::uint64_t state_space() const {
        std::uint64_t total = 1;
        for (VarId v : sig_->endogenous()) {
            std::uint64_t r = sig_->range(v).size();
            if (total > std::numeric_limits<std::uint64_t>::max() / r) return std::numeric_limits<std::uint64_t>::max();
            total *= r;
        }
        return total;
    }

    void require_within(const Limits& limits) const {
        if (state_space() > limits.max_states)
            throw CapacityError("model has " + std::to_string(state_space()) +
                                " endogenous states, above the cap of " + std::to_string(limits.max_states));
    }

    const detail::EquationSet& equations() const noexcept { return *eqs_; }
    const std::vector<std::int32_t>& fixed_slots() const noexcept { return fixed_; }

private:
    friend CausalModel build_model(Signature, std::map<std::string, Expr>);
    friend CausalModel intervene(const CausalModel&, std::span<const Event>);

    std::shared_ptr<const Signature> sig_;
    std::shared_ptr<const detail::EquationSet> eqs_;
    std::vector<std::int32_t> fixed_;
};

namespace detail {

inline std::vector<std::string> find_cycle(const Signature& sig, const std::vector<std::vector<VarId>>& parents) {
    enum : std::uint8_t { white, grey, black };
    std::vector<std::uint8_t> colour(sig.size(), white);
    std::vector<VarId> stack;
    std::vector<std::string> cycle;
    auto visit = [&](auto&& self, VarId v) -> bool {
        colour[v] = grey;
        stack.push_back(v);
        for (VarId p : parents[v]) {
            if (sig.is_exogenous(p)) continue;
            if (colour[p] == grey) {
                auto it = std::find(stack.begin(), stack.end(), p);
                // stack runs child -> parent; report in dependency order
                for (auto r = stack.end(); r != it;) cycle.push_back(sig.name(*--r));
                return true;
            }
            if (colour[p] == white && self(self, p)) return true;
        }
        stack.pop_back();
        colour[v] = black;
        return false;
    };
    for (VarId v : sig.endogenous())
        if (colour[v] == white && visit(visit, v)) return cycle;
    return {};
}

}  // namespace detail

/// Validates and assembles a model. `equations` must be keyed exactly by the
/// endogenous variables.
inline CausalModel build_model(Signature signature, std::map<std::string, Expr> equations) {
    auto sig = std::make_shared<const Signature>(std::move(signature));
    auto eqs = std::make_shared<detail::EquationSet>();
    const std::size_t n = sig->size();
    eqs->source.resize(n);
    eqs->compiled.resize(n);
    eqs->parents.resize(n);
    eqs->children.resize(n);

    for (auto& [name, expr] : equations) {
        VarId v = sig->id(name);
        if (sig->is_exogenous(v)) throw ModelError("exogenous variable '" + name + "' cannot have an equation");
        eqs->source[v] = std::move(expr);
    }
    detail::Compiler compiler(*sig);
    for (VarId v : sig->endogenous()) {
        if (!eqs->source[v]) throw MissingEquation(sig->name(v));
        eqs->compiled[v] = compiler.value(*eqs->source[v], v);
        std::set<std::string> names;
        eqs->source[v]->collect_vars(names);
        for (const auto& p : names) eqs->parents[v].push_back(sig->id(p));
        std::sort(eqs->parents[v].begin(), eqs->parents[v].end());
        for (VarId p : eqs->parents[v]) eqs->children[p].push_back(v);
    }
    for (auto& c : eqs->children) std::sort(c.begin(), c.end());

    if (auto cycle = detail::find_cycle(*sig, eqs->parents); !cycle.empty()) throw CycleError(std::move(cycle));

    // Kahn's algorithm, always taking the earliest-declared ready variable.
    std::vector<std::size_t> pending(n, 0);
    for (VarId v : sig->endogenous())
        for (VarId p : eqs->parents[v])
            if (!sig->is_exogenous(p)) ++pending[v];
    std::set<VarId> ready;
    for (VarId v : sig->endogenous())
        if (pending[v] == 0) ready.insert(v);
    while (!ready.empty()) {
        VarId v = *ready.begin();
        ready.erase(ready.begin());
        eqs->order.push_back(v);
        for (VarId c : eqs->children[v])
            if (--pending[c] == 0) ready.insert(c);
    }

    CausalModel m;
    m.sig_ = std::move(sig);
    m.eqs_ = std::move(eqs);
    m.fixed_.assign(n, detail::kFree);
    return m;
}

/// Returns the model with `targets` replaced by constants. Later interventions
/// on an already-fixed variable overwrite it.
inline CausalModel intervene(const CausalModel& model, std::span<const Event> targets) {
    const auto& sig = model.signature();
    CausalModel out = model;
    std::vector<bool> seen(sig.size(), false);
    for (const auto& t : targets) {
        if (t.var >= sig.size()) throw ModelError("variable id out of bounds");
        if (sig.is_exogenous(t.var)) throw ExogenousInterventionError(sig.name(t.var));
        if (t.value >= sig.range(t.var).size())
            throw ValueOutOfRange(sig.name(t.var), "#" + std::to_string(t.value));
        if (seen[t.var]) throw ModelError("variable '" + sig.name(t.var) + "' is intervened on twice");
        seen[t.var] = true;
        out.fixed_[t.var] = static_cast<std::int32_t>(t.value);
    }
    return out;
}

inline CausalModel intervene(const CausalModel& model,
                             const std::vector<std::pair<std::string, std::string>>& targets) {
    std::vector<Event> events;
    for (const auto& [var, value] : targets) {
        VarId v = model.signature().id(var);
        if (model.signature().is_exogenous(v)) throw ExogenousInterventionError(var);
        events.push_back({v, model.signature().value_id(v, value)});
    }
    return intervene(model, events);
}

/// Values of the exogenous variables. May be partial; solving requires it to
/// be total.
class Context {
public:
    Context() = default;

    Context(const Signature& sig, const std::vector<std::pair<std::string, std::string>>& values)
        : values_(sig.size(), detail::kFree) {
        for (const auto& [var, value] : values) {
            VarId v = sig.id(var);
            if (!sig.is_exogenous(v)) throw ModelError("context sets endogenous variable '" + var + "'");
            values_[v] = static_cast<std::int32_t>(sig.value_id(v, value));
        }
    }

    static Context from_ids(std::size_t var_count, std::span<const Event> values) {
        Context c;
        c.values_.assign(var_count, detail::kFree);
        for (const auto& e : values) c.values_.at(e.var) = static_cast<std::int32_t>(e.value);
        return c;
    }

    std::optional<ValueId> get(VarId v) const {
        if (v >= values_.size() || values_[v] == detail::kFree) return std::nullopt;
        return static_cast<ValueId>(values_[v]);
    }

    Context with(VarId v, ValueId value) const {
        Context c = *this;
        c.values_.at(v) = static_cast<std::int32_t>(value);
        return c;
    }

    /// Throws IncompleteContext when an exogenous variable is unset.
    void require_total(const Signature& sig) const {
        for (VarId u : sig.exogenous())
            if (!get(u)) throw IncompleteContext(sig.name(u));
    }

    bool operator==(const Context&) const = default;

private:
    std::vector<std::int32_t> values_;
};

/// Total assignment of a causal setting.
class Assignment {
public:
    Assignment(std::shared_ptr<const Signature> sig, std::vector<ValueId> values)
        : sig_(std::move(sig)), values_(std::move(values)) {}

    ValueId operator[](VarId v) const { return values_.at(v); }
    const std::string& value(std::string_view var) const {
        VarId v = sig_->id(var);
        return sig_->value_name(v, values_[v]);
    }
    bool holds(const Event& e) const { return values_.at(e.var) == e.value; }
    const std::vector<ValueId>& values() const noexcept { return values_; }
    const Signature& signature() const noexcept { return *sig_; }

    bool operator==(const Assignment& o) const { return values_ == o.values_; }

private:
    std::shared_ptr<const Signature> sig_;
    std::vector<ValueId> values_;
};

namespace detail {

/// Solves `model` in `ctx` with extra interventions in `overrides`
/// (kFree = none) taking precedence over the model's own fixed values.
inline void solve_into(const CausalModel& model, const Context& ctx, const std::int32_t* overrides,
                       std::vector<ValueId>& out) {
    const auto& sig = model.signature();
    const auto& eqs = model.equations();
    const auto& fixed = model.fixed_slots();
    out.resize(sig.size());
    for (VarId u : sig.exogenous()) {
        auto val = ctx.get(u);
        if (!val) throw IncompleteContext(sig.name(u));
        out[u] = *val;
    }
    for (VarId v : eqs.order) {
        if (overrides && overrides[v] != kFree)
            out[v] = static_cast<ValueId>(overrides[v]);
        else if (fixed[v] != kFree)
            out[v] = static_cast<ValueId>(fixed[v]);
        else
            out[v] = eval_value(eqs.compiled[v], out.data());
    }
}

/// Reusable scratch for repeated solves of one setting under varying
/// interventions.
class Solver {
public:
    Solver(const CausalModel& model, const Context& ctx)
        : model_(model), ctx_(ctx), overrides_(model.signature().size(), kFree) {
        ctx.require_total(model.signature());
    }

    void set(VarId v, ValueId value) { overrides_[v] = static_cast<std::int32_t>(value); }
    void clear(VarId v) { overrides_[v] = kFree; }
    void clear_all() { std::fill(overrides_.begin(), overrides_.end(), kFree); }

    const std::vector<ValueId>& solve() {
        solve_into(model_, ctx_, overrides_.data(), values_);
        return values_;
    }

    const CausalModel& model() const noexcept { return model_; }
    const Context& context() const noexcept { return ctx_; }

private:
    const CausalModel& model_;
    const Context& ctx_;
    std::vector<std::int32_t> overrides_;
    std::vector<ValueId> values_;
};

}  // namespace detail

/// The unique solution of the equations in `ctx`.
inline Assignment solve(const CausalModel& model, const Context& ctx) {
    ctx.require_total(model.signature());
    std::vector<ValueId> values;
    detail::solve_into(model, ctx, nullptr, values);
    return Assignment(model.signature_ptr(), std::move(values));
}

/// `[Y1 <- y1, ..., Yk <- yk] body`, body a Boolean combination of
/// endogenous atoms.
struct CausalFormula {
    std::vector<std::pair<std::string, std::string>> interventions;
    Expr body = Expr::constant("1");

    bool operator==(const CausalFormula&) const = default;
};

inline bool evaluate(const CausalModel& model, const Context& ctx, const CausalFormula& formula) {
    const auto& sig = model.signature();
    std::vector<bool> seen(sig.size(), false);
    for (const auto& [var, value] : formula.interventions) {
        VarId v = sig.id(var);
        if (seen[v]) throw ModelError("variable '" + var + "' is intervened on twice in the formula");
        seen[v] = true;
    }
    auto intervened = intervene(model, formula.interventions);
    auto body = detail::Compiler(sig, /*endogenous_only=*/true).boolean(formula.body);
    auto solution = solve(intervened, ctx);
    return detail::eval_bool(body, solution.values().data());
}

}  // namespace resp
