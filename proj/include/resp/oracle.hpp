#pragma once

#include "resp/model.hpp"
#include "resp/signature.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Brute-force reference implementations of the causation definitions. They go
// through `evaluate` only, quantify over every endogenous variable instead of
// parents or ancestors, and share no code with the engine's search.

namespace resp::oracle {

using Path = std::vector<VarId>;

namespace detail {

inline std::vector<VarId> endogenous_except(const Signature& sig, const std::vector<VarId>& skip) {
    std::vector<VarId> out;
    for (VarId v : sig.endogenous())
        if (std::find(skip.begin(), skip.end(), v) == skip.end()) out.push_back(v);
    return out;
}

/// All assignments to `vars` as value-id vectors, by plain counting.
inline std::vector<std::vector<ValueId>> all_settings(const Signature& sig, const std::vector<VarId>& vars) {
    std::vector<std::vector<ValueId>> out{{}};
    for (VarId v : vars) {
        std::vector<std::vector<ValueId>> next;
        for (const auto& prefix : out)
            for (ValueId x = 0; x < sig.range(v).size(); ++x) {
                auto s = prefix;
                s.push_back(x);
                next.push_back(std::move(s));
            }
        out = std::move(next);
    }
    return out;
}

inline std::vector<std::vector<VarId>> all_subsets(const std::vector<VarId>& items) {
    std::vector<std::vector<VarId>> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << items.size()); ++mask) {
        std::vector<VarId> s;
        for (std::size_t i = 0; i < items.size(); ++i)
            if (mask >> i & 1) s.push_back(items[i]);
        out.push_back(std::move(s));
    }
    return out;
}

inline bool holds_after(const CausalModel& m, const Context& ctx, const std::vector<Event>& setting,
                        const Event& effect) {
    const auto& sig = m.signature();
    CausalFormula f;
    for (const auto& e : setting) f.interventions.emplace_back(sig.name(e.var), sig.value_name(e.var, e.value));
    f.body = Expr::eq(sig.name(effect.var), sig.value_name(effect.var, effect.value));
    return evaluate(m, ctx, f);
}

inline std::vector<std::vector<VarId>> parent_lists(const CausalModel& m) {
    const auto& sig = m.signature();
    std::vector<std::vector<VarId>> parents(sig.size());
    for (VarId v : sig.endogenous()) {
        const Expr* eq = m.equation(v);
        if (!eq) continue;
        std::set<std::string> names;
        eq->collect_vars(names);
        for (const auto& n : names) parents[v].push_back(sig.id(n));
    }
    return parents;
}

}  // namespace detail

/// Every setting of the remaining endogenous variables, together with `set`,
/// yields `effect`.
inline bool sufficient(const CausalModel& m, const Context& ctx, const std::vector<Event>& set, const Event& effect) {
    std::vector<VarId> skip{effect.var};
    for (const auto& e : set) skip.push_back(e.var);
    auto rest = detail::endogenous_except(m.signature(), skip);
    for (const auto& z : detail::all_settings(m.signature(), rest)) {
        std::vector<Event> setting = set;
        for (std::size_t i = 0; i < rest.size(); ++i) setting.push_back({rest[i], z[i]});
        if (!detail::holds_after(m, ctx, setting, effect)) return false;
    }
    return true;
}

inline std::optional<std::vector<Event>> direct_ness(const CausalModel& m, const Context& ctx, const Event& cause,
                                                     const Event& effect) {
    auto actual = solve(m, ctx);
    if (!actual.holds(cause) || !actual.holds(effect) || cause.var == effect.var) return std::nullopt;
    auto pool = detail::endogenous_except(m.signature(), {cause.var, effect.var});
    for (const auto& w : detail::all_subsets(pool)) {
        std::vector<Event> frozen;
        for (VarId v : w) frozen.push_back({v, actual[v]});
        if (sufficient(m, ctx, frozen, effect)) continue;
        frozen.push_back(cause);
        if (sufficient(m, ctx, frozen, effect)) {
            frozen.pop_back();
            return frozen;
        }
    }
    return std::nullopt;
}

/// Every simple path from cause to effect along which each link, at actual
/// values, is a direct NESS link.
inline std::set<Path> ness_paths(const CausalModel& m, const Context& ctx, const Event& cause, const Event& effect) {
    std::set<Path> out;
    auto actual = solve(m, ctx);
    if (!actual.holds(cause) || !actual.holds(effect) || cause.var == effect.var) return out;
    auto parents = detail::parent_lists(m);
    std::map<std::pair<VarId, VarId>, bool> link;
    auto is_link = [&](VarId a, VarId b) {
        auto key = std::make_pair(a, b);
        if (auto it = link.find(key); it != link.end()) return it->second;
        bool ok = direct_ness(m, ctx, {a, actual[a]}, {b, actual[b]}).has_value();
        link.emplace(key, ok);
        return ok;
    };
    Path path{cause.var};
    auto extend = [&](auto&& self) -> void {
        VarId last = path.back();
        if (last == effect.var) {
            out.insert(path);
            return;
        }
        for (VarId next : m.signature().endogenous()) {
            const auto& ps = parents[next];
            if (std::find(ps.begin(), ps.end(), last) == ps.end()) continue;
            if (std::find(path.begin(), path.end(), next) != path.end()) continue;
            if (!is_link(last, next)) continue;
            path.push_back(next);
            self(self);
            path.pop_back();
        }
    };
    extend(extend);
    return out;
}

inline bool path_subset(const Path& a, const Path& b) {
    for (VarId v : a)
        if (std::find(b.begin(), b.end(), v) == b.end()) return false;
    return true;
}

/// Some actual NESS path p and some other value x' such that x' NESS-causes
/// the effect along no subpath of p once X is set to x'.
inline bool cness(const CausalModel& m, const Context& ctx, const Event& cause, const Event& effect) {
    auto paths = ness_paths(m, ctx, cause, effect);
    const auto& sig = m.signature();
    for (const auto& p : paths)
        for (ValueId alt = 0; alt < sig.range(cause.var).size(); ++alt) {
            if (alt == cause.value) continue;
            Event other{cause.var, alt};
            auto changed = intervene(m, std::span<const Event>(&other, 1));
            bool along_subpath = false;
            for (const auto& q : ness_paths(changed, ctx, other, effect)) along_subpath |= path_subset(q, p);
            if (!along_subpath) return true;
        }
    return false;
}

/// HP causes of `effect` as conjunct variable sets, at actual values.
class Hp {
public:
    Hp(const CausalModel& m, const Context& ctx, const Event& effect)
        : m_(m), ctx_(ctx), effect_(effect), actual_(solve(m, ctx)) {}

    bool ac2(const std::vector<VarId>& xs) {
        if (auto it = memo_.find(xs); it != memo_.end()) return it->second;
        bool found = false;
        if (!xs.empty() && actual_.holds(effect_)) {
            std::vector<VarId> skip = xs;
            skip.push_back(effect_.var);
            auto pool = detail::endogenous_except(m_.signature(), skip);
            auto flips = detail::all_settings(m_.signature(), xs);
            for (const auto& w : detail::all_subsets(pool)) {
                for (const auto& flip : flips) {
                    std::vector<Event> setting;
                    for (std::size_t i = 0; i < xs.size(); ++i) setting.push_back({xs[i], flip[i]});
                    for (VarId v : w) setting.push_back({v, actual_[v]});
                    if (!detail::holds_after(m_, ctx_, setting, effect_)) {
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
        }
        memo_.emplace(xs, found);
        return found;
    }

    bool cause_set(const std::vector<VarId>& xs) {
        if (!ac2(xs)) return false;
        for (const auto& sub : detail::all_subsets(xs))
            if (!sub.empty() && sub.size() < xs.size() && ac2(sub)) return false;
        return true;
    }

    /// Some HP cause has `cause` as a conjunct.
    bool atomic(const Event& cause) {
        if (!actual_.holds(cause) || cause.var == effect_.var) return false;
        auto pool = detail::endogenous_except(m_.signature(), {cause.var, effect_.var});
        for (auto xs : detail::all_subsets(pool)) {
            xs.push_back(cause.var);
            std::sort(xs.begin(), xs.end());
            if (cause_set(xs)) return true;
        }
        return false;
    }

private:
    const CausalModel& m_;
    const Context& ctx_;
    Event effect_;
    Assignment actual_;
    std::map<std::vector<VarId>, bool> memo_;
};

}  // namespace resp::oracle
