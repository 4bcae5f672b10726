#pragma once

#include "resp/error.hpp"
#include "resp/model.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace resp {

enum class Causation { direct_ness, ness, cness, hp };

inline constexpr std::array<Causation, 4> kAllCausation = {Causation::direct_ness, Causation::ness,
                                                           Causation::cness, Causation::hp};

inline std::string_view to_string(Causation c) {
    switch (c) {
    case Causation::direct_ness: return "direct-ness";
    case Causation::ness: return "ness";
    case Causation::cness: return "cness";
    case Causation::hp: return "hp";
    }
    return "?";
}

inline std::optional<Causation> parse_causation(std::string_view s) {
    for (auto c : kAllCausation)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

/// Directed path through the model graph, cause first, effect last.
struct CausalPath {
    std::vector<VarId> vars;

    /// Subpath test used by CNESS: inclusion of variable sets.
    bool subset_of(const CausalPath& other) const {
        for (VarId v : vars)
            if (std::find(other.vars.begin(), other.vars.end(), v) == other.vars.end()) return false;
        return true;
    }

    bool operator==(const CausalPath&) const = default;
};

/// W = w making the cause a necessary element of a sufficient set.
struct DirectNessWitness {
    std::vector<Event> set;
    bool operator==(const DirectNessWitness&) const = default;
};

struct NessWitness {
    CausalPath path;
    bool operator==(const NessWitness&) const = default;
};

/// Actual NESS path and the counterfactual value that fails to NESS-cause
/// the effect along any subpath of it.
struct CnessWitness {
    CausalPath path;
    ValueId counterfactual = 0;
    bool operator==(const CnessWitness&) const = default;
};

/// Minimal conjunction, the frozen set W = w, and the flip setting x'.
struct HpWitness {
    std::vector<Event> conjuncts;
    std::vector<Event> frozen;
    std::vector<ValueId> flip;
    bool operator==(const HpWitness&) const = default;
};

using Witness = std::variant<std::monostate, DirectNessWitness, NessWitness, CnessWitness, HpWitness>;

struct CausalVerdict {
    Causation definition = Causation::direct_ness;
    bool holds = false;
    Witness witness;

    bool operator==(const CausalVerdict&) const = default;
};

namespace detail {

/// Calls `fn(subset)` for every k-subset of `items` in lexicographic order
/// until it returns true. Returns whether it did.
template <class Fn>
bool for_each_subset_of_size(const std::vector<VarId>& items, std::size_t k, Fn&& fn) {
    if (k > items.size()) return false;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::vector<VarId> subset(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i) subset[i] = items[idx[i]];
        if (fn(std::as_const(subset))) return true;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == items.size() - k + i - 1) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

/// Subsets ordered by size, then lexicographically by declaration order.
template <class Fn>
bool for_each_subset(const std::vector<VarId>& items, Fn&& fn) {
    for (std::size_t k = 0; k <= items.size(); ++k)
        if (for_each_subset_of_size(items, k, fn)) return true;
    return false;
}

/// Odometer over the product of ranges of `vars`, first variable slowest.
template <class Fn>
bool for_each_setting(const Signature& sig, const std::vector<VarId>& vars, Fn&& fn) {
    std::vector<ValueId> setting(vars.size(), 0);
    while (true) {
        if (fn(std::as_const(setting))) return true;
        std::size_t i = vars.size();
        while (i > 0) {
            --i;
            if (++setting[i] < sig.range(vars[i]).size()) break;
            setting[i] = 0;
            if (i == 0) return false;
        }
        if (vars.empty()) return false;
    }
}

inline std::vector<VarId> ancestors_of(const CausalModel& m, VarId target) {
    std::vector<bool> mark(m.signature().size(), false);
    std::vector<VarId> stack{target};
    while (!stack.empty()) {
        VarId v = stack.back();
        stack.pop_back();
        for (VarId p : m.parents(v))
            if (!mark[p]) {
                mark[p] = true;
                stack.push_back(p);
            }
    }
    std::vector<VarId> out;
    for (VarId v : m.signature().endogenous())
        if (mark[v] && v != target) out.push_back(v);
    return out;
}

/// Sufficiency of `set` for `effect`. With every endogenous variable but the
/// effect intervened on, only the effect's own equation matters, so the
/// quantification runs over its endogenous parents outside the set.
inline bool sufficient(const CausalModel& m, const Context& ctx, const std::vector<Event>& set, const Event& effect) {
    if (auto fixed = m.fixed_value(effect.var)) return *fixed == effect.value;
    const auto& sig = m.signature();
    std::vector<ValueId> values(sig.size(), 0);
    std::vector<bool> in_set(sig.size(), false);
    for (VarId u : sig.exogenous()) values[u] = *ctx.get(u);
    for (const auto& e : set) {
        values[e.var] = e.value;
        in_set[e.var] = true;
    }
    std::vector<VarId> free;
    for (VarId p : m.parents(effect.var))
        if (!sig.is_exogenous(p) && !in_set[p]) free.push_back(p);
    const auto& eq = m.equations().compiled[effect.var];
    bool counterexample = for_each_setting(sig, free, [&](const std::vector<ValueId>& z) {
        for (std::size_t i = 0; i < free.size(); ++i) values[free[i]] = z[i];
        return eval_value(eq, values.data()) != effect.value;
    });
    return !counterexample;
}

/// Causation queries against one causal setting, with memoised direct-NESS
/// edges and HP AC2 results.
class Engine {
public:
    Engine(const CausalModel& model, const Context& ctx, const Limits& limits)
        : model_(model), ctx_(ctx), limits_(limits) {
        model_.require_within(limits_);
        ctx_.require_total(model_.signature());
        actual_ = solve(model_, ctx_).values();
    }

    const std::vector<ValueId>& actual() const noexcept { return actual_; }
    const CausalModel& model() const noexcept { return model_; }
    const Context& context() const noexcept { return ctx_; }
    const Limits& limits() const noexcept { return limits_; }
    Event actual_event(VarId v) const { return {v, actual_[v]}; }
    bool is_actual(const Event& e) const { return actual_[e.var] == e.value; }

    std::optional<DirectNessWitness> direct_ness(const Event& cause, const Event& effect) {
        if (!is_actual(cause) || !is_actual(effect)) return std::nullopt;
        if (!model_.is_parent(cause.var, effect.var)) return std::nullopt;
        auto key = std::make_pair(cause.var, effect.var);
        if (auto it = direct_memo_.find(key); it != direct_memo_.end()) return it->second;

        const auto& sig = model_.signature();
        std::vector<VarId> candidates;
        for (VarId p : model_.parents(effect.var))
            if (!sig.is_exogenous(p) && p != cause.var) candidates.push_back(p);
        std::optional<DirectNessWitness> found;
        for_each_subset(candidates, [&](const std::vector<VarId>& w) {
            std::vector<Event> frozen;
            for (VarId v : w) frozen.push_back(actual_event(v));
            if (sufficient(model_, ctx_, frozen, effect)) return false;  // DN3
            auto with_cause = frozen;
            with_cause.push_back(cause);
            if (!sufficient(model_, ctx_, with_cause, effect)) return false;  // DN2
            found = DirectNessWitness{std::move(frozen)};
            return true;
        });
        direct_memo_.emplace(key, found);
        return found;
    }

    /// Every path of actual direct-NESS links from `cause` to `effect`, DFS
    /// over declaration-ordered children.
    std::vector<CausalPath> ness_paths(const Event& cause, const Event& effect) {
        std::vector<CausalPath> out;
        if (cause.var == effect.var || !is_actual(cause) || !is_actual(effect)) return out;
        std::vector<bool> reaches(model_.signature().size(), false);
        for (VarId a : ancestors_of(model_, effect.var)) reaches[a] = true;
        reaches[effect.var] = true;
        if (!reaches[cause.var]) return out;
        std::vector<VarId> path{cause.var};
        auto dfs = [&](auto&& self, VarId v) -> void {
            for (VarId c : model_.children(v)) {
                if (!reaches[c] || std::find(path.begin(), path.end(), c) != path.end()) continue;
                if (!direct_ness(actual_event(v), actual_event(c))) continue;
                path.push_back(c);
                if (c == effect.var)
                    out.push_back(CausalPath{path});
                else
                    self(self, c);
                path.pop_back();
            }
        };
        dfs(dfs, cause.var);
        return out;
    }

    /// AC2 for the conjunct variables `xs` (actual values) and this engine's
    /// effect. Memoised per variable set.
    std::optional<std::pair<std::vector<Event>, std::vector<ValueId>>> ac2(const std::vector<VarId>& xs,
                                                                          const Event& effect) {
        auto key = std::make_pair(effect, xs);
        if (auto it = ac2_memo_.find(key); it != ac2_memo_.end()) return it->second;
        std::optional<std::pair<std::vector<Event>, std::vector<ValueId>>> found;
        if (!xs.empty()) {
            const auto& sig = model_.signature();
            std::vector<VarId> pool;
            for (VarId a : ancestors_of(model_, effect.var))
                if (std::find(xs.begin(), xs.end(), a) == xs.end()) pool.push_back(a);
            Solver solver(model_, ctx_);
            for_each_subset(pool, [&](const std::vector<VarId>& w) {
                solver.clear_all();
                for (VarId v : w) solver.set(v, actual_[v]);
                return for_each_setting(sig, xs, [&](const std::vector<ValueId>& flip) {
                    for (std::size_t i = 0; i < xs.size(); ++i) solver.set(xs[i], flip[i]);
                    if (solver.solve()[effect.var] == effect.value) return false;
                    std::vector<Event> frozen;
                    for (VarId v : w) frozen.push_back(actual_event(v));
                    found.emplace(std::move(frozen), flip);
                    return true;
                });
            });
        }
        ac2_memo_.emplace(std::move(key), found);
        return found;
    }

    std::optional<HpWitness> hp_set(const std::vector<VarId>& xs, const Event& effect) {
        if (!is_actual(effect)) return std::nullopt;
        auto witness = ac2(xs, effect);
        if (!witness) return std::nullopt;
        // AC3: no nonempty strict subset satisfies AC2.
        for (std::size_t k = 1; k < xs.size(); ++k) {
            bool smaller = for_each_subset_of_size(xs, k, [&](const std::vector<VarId>& sub) {
                return ac2(sub, effect).has_value();
            });
            if (smaller) return std::nullopt;
        }
        HpWitness out;
        for (VarId v : xs) out.conjuncts.push_back(actual_event(v));
        out.frozen = std::move(witness->first);
        out.flip = std::move(witness->second);
        return out;
    }

private:
    const CausalModel& model_;
    const Context& ctx_;
    Limits limits_;
    std::vector<ValueId> actual_;
    std::map<std::pair<VarId, VarId>, std::optional<DirectNessWitness>> direct_memo_;
    std::map<std::pair<Event, std::vector<VarId>>, std::optional<std::pair<std::vector<Event>, std::vector<ValueId>>>>
        ac2_memo_;
};

inline void require_endogenous(const Signature& sig, const Event& e) {
    if (e.var >= sig.size()) throw ModelError("variable id out of bounds");
    if (sig.is_exogenous(e.var)) throw ModelError("'" + sig.name(e.var) + "' is exogenous; events must be endogenous");
    if (e.value >= sig.range(e.var).size()) throw ValueOutOfRange(sig.name(e.var), "#" + std::to_string(e.value));
}

inline void require_pair(const Signature& sig, const Event& cause, const Event& effect) {
    require_endogenous(sig, cause);
    require_endogenous(sig, effect);
    if (cause.var == effect.var) throw SameVariableError(sig.name(cause.var));
}

}  // namespace detail

/// True iff forcing `set` guarantees `effect` whatever values the remaining
/// endogenous variables are forced to.
inline bool is_sufficient(const CausalModel& model, const Context& ctx, const std::vector<Event>& set,
                          const Event& effect, const Limits& limits = {}) {
    const auto& sig = model.signature();
    detail::require_endogenous(sig, effect);
    std::vector<bool> seen(sig.size(), false);
    for (const auto& e : set) {
        detail::require_endogenous(sig, e);
        if (e.var == effect.var) throw EffectInSetError(sig.name(e.var));
        if (seen[e.var]) throw ModelError("variable '" + sig.name(e.var) + "' appears twice in the set");
        seen[e.var] = true;
    }
    model.require_within(limits);
    ctx.require_total(sig);
    return detail::sufficient(model, ctx, set, effect);
}

inline CausalVerdict direct_ness_cause(const CausalModel& model, const Context& ctx, const Event& cause,
                                       const Event& effect, const Limits& limits = {}) {
    detail::require_pair(model.signature(), cause, effect);
    detail::Engine engine(model, ctx, limits);
    CausalVerdict v{Causation::direct_ness, false, {}};
    if (auto w = engine.direct_ness(cause, effect)) {
        v.holds = true;
        v.witness = std::move(*w);
    }
    return v;
}

/// All paths along which `cause` NESS-causes `effect`; empty when it does not.
inline std::vector<CausalPath> ness_cause(const CausalModel& model, const Context& ctx, const Event& cause,
                                          const Event& effect, const Limits& limits = {}) {
    detail::require_pair(model.signature(), cause, effect);
    detail::Engine engine(model, ctx, limits);
    return engine.ness_paths(cause, effect);
}

namespace detail {

inline CausalVerdict cness(Engine& engine, const Event& cause, const Event& effect) {
    CausalVerdict v{Causation::cness, false, {}};
    auto paths = engine.ness_paths(cause, effect);
    if (paths.empty()) return v;
    const auto& model = engine.model();
    const auto& sig = model.signature();
    // Counterfactual NESS paths per alternative value, computed lazily.
    std::map<ValueId, std::vector<CausalPath>> alternatives;
    for (const auto& p : paths) {
        for (ValueId alt = 0; alt < sig.range(cause.var).size(); ++alt) {
            if (alt == cause.value) continue;
            auto it = alternatives.find(alt);
            if (it == alternatives.end()) {
                Event flipped{cause.var, alt};
                auto counterfactual = intervene(model, std::span<const Event>(&flipped, 1));
                Engine cf(counterfactual, engine.context(), engine.limits());
                it = alternatives.emplace(alt, cf.ness_paths(flipped, effect)).first;
            }
            bool along_subpath = std::any_of(it->second.begin(), it->second.end(),
                                             [&](const CausalPath& q) { return q.subset_of(p); });
            if (!along_subpath) {
                v.holds = true;
                v.witness = CnessWitness{p, alt};
                return v;
            }
        }
    }
    return v;
}

inline std::optional<HpWitness> hp_atomic(Engine& engine, const Event& cause, const Event& effect) {
    if (!engine.is_actual(cause) || !engine.is_actual(effect)) return std::nullopt;
    const auto& model = engine.model();
    auto ancestors = ancestors_of(model, effect.var);
    // A conjunct that cannot influence the effect never survives AC3.
    if (std::find(ancestors.begin(), ancestors.end(), cause.var) == ancestors.end()) return std::nullopt;
    std::vector<VarId> others;
    for (VarId a : ancestors)
        if (a != cause.var) others.push_back(a);
    std::size_t bound = engine.limits().max_conjuncts.value_or(model.signature().endogenous().size());
    if (bound == 0) throw CapacityError("HP conjunct bound is zero");
    std::optional<HpWitness> found;
    std::size_t max_extra = std::min(others.size(), bound - 1);
    for (std::size_t k = 0; k <= max_extra && !found; ++k) {
        for_each_subset_of_size(others, k, [&](const std::vector<VarId>& extra) {
            std::vector<VarId> xs = extra;
            xs.insert(std::upper_bound(xs.begin(), xs.end(), cause.var), cause.var);
            found = engine.hp_set(xs, effect);
            return found.has_value();
        });
    }
    if (!found && max_extra < others.size())
        throw CapacityError("HP conjunct search needs sets larger than the bound of " + std::to_string(bound));
    return found;
}

inline CausalVerdict decide(Engine& engine, Causation def, const Event& cause, const Event& effect) {
    CausalVerdict v{def, false, {}};
    switch (def) {
    case Causation::direct_ness:
        if (auto w = engine.direct_ness(cause, effect)) {
            v.holds = true;
            v.witness = std::move(*w);
        }
        return v;
    case Causation::ness: {
        auto paths = engine.ness_paths(cause, effect);
        if (!paths.empty()) {
            v.holds = true;
            v.witness = NessWitness{std::move(paths.front())};
        }
        return v;
    }
    case Causation::cness: return cness(engine, cause, effect);
    case Causation::hp:
        if (auto w = hp_atomic(engine, cause, effect)) {
            v.holds = true;
            v.witness = std::move(*w);
        }
        return v;
    }
    return v;
}

}  // namespace detail

inline CausalVerdict cness_cause(const CausalModel& model, const Context& ctx, const Event& cause,
                                 const Event& effect, const Limits& limits = {}) {
    detail::require_pair(model.signature(), cause, effect);
    detail::Engine engine(model, ctx, limits);
    return detail::cness(engine, cause, effect);
}

/// HP causation of `effect` by the conjunction of `conjuncts`.
inline CausalVerdict hp_cause_set(const CausalModel& model, const Context& ctx, const std::vector<Event>& conjuncts,
                                  const Event& effect, const Limits& limits = {}) {
    const auto& sig = model.signature();
    detail::require_endogenous(sig, effect);
    std::vector<VarId> xs;
    for (const auto& c : conjuncts) {
        detail::require_endogenous(sig, c);
        if (c.var == effect.var) throw EffectInSetError(sig.name(c.var));
        if (std::find(xs.begin(), xs.end(), c.var) != xs.end())
            throw ModelError("variable '" + sig.name(c.var) + "' appears twice among the conjuncts");
        xs.push_back(c.var);
    }
    std::size_t bound = limits.max_conjuncts.value_or(sig.endogenous().size());
    if (xs.size() > bound)
        throw CapacityError("conjunct set of size " + std::to_string(xs.size()) + " exceeds the bound of " +
                            std::to_string(bound));
    detail::Engine engine(model, ctx, limits);
    CausalVerdict v{Causation::hp, false, {}};
    // AC1
    for (const auto& c : conjuncts)
        if (!engine.is_actual(c)) return v;
    if (!engine.is_actual(effect)) return v;
    std::sort(xs.begin(), xs.end());
    if (auto w = engine.hp_set(xs, effect)) {
        v.holds = true;
        v.witness = std::move(*w);
    }
    return v;
}

/// `cause` is a conjunct of some HP cause of `effect`.
inline CausalVerdict hp_atomic_cause(const CausalModel& model, const Context& ctx, const Event& cause,
                                     const Event& effect, const Limits& limits = {}) {
    detail::require_pair(model.signature(), cause, effect);
    detail::Engine engine(model, ctx, limits);
    return detail::decide(engine, Causation::hp, cause, effect);
}

/// Dispatches to the selected definition.
inline CausalVerdict is_cause(const CausalModel& model, const Context& ctx, Causation def, const Event& cause,
                              const Event& effect, const Limits& limits = {}) {
    detail::require_pair(model.signature(), cause, effect);
    detail::Engine engine(model, ctx, limits);
    return detail::decide(engine, def, cause, effect);
}

struct FoundCause {
    Event cause;
    CausalVerdict verdict;
};

/// Every actual atomic event that causes `effect` under `def`, in
/// declaration order.
inline std::vector<FoundCause> find_causes(const CausalModel& model, const Context& ctx, const Event& effect,
                                           Causation def, const Limits& limits = {}) {
    const auto& sig = model.signature();
    detail::require_endogenous(sig, effect);
    detail::Engine engine(model, ctx, limits);
    if (!engine.is_actual(effect)) throw EffectNotActual(to_string(sig, effect));
    std::vector<FoundCause> out;
    for (VarId v : sig.endogenous()) {
        if (v == effect.var) continue;
        auto verdict = detail::decide(engine, def, engine.actual_event(v), effect);
        if (verdict.holds) out.push_back({engine.actual_event(v), std::move(verdict)});
    }
    return out;
}

}  // namespace resp
