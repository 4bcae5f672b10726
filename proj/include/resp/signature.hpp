#pragma once

#include "resp/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace resp {

using VarId = std::uint32_t;
using ValueId = std::uint32_t;

inline constexpr std::array<std::string_view, 15> kKeywords = {
    "model", "exo",  "var",  "in",   "context", "outcome", "agent", "action",
    "epistemic", "world", "case", "else", "not", "and", "or"};

inline bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

/// ASCII letter followed by letters, digits or underscores; not a keyword.
inline bool is_identifier(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return !is_keyword(s);
}

/// Identifier or one of the reserved Boolean tokens.
inline bool is_value_token(std::string_view s) { return s == "0" || s == "1" || is_identifier(s); }

struct Variable {
    std::string name;
    std::vector<std::string> range;
    bool exogenous = false;

    bool operator==(const Variable&) const = default;
};

/// Variables of a causal model with their finite ranges, in declaration order.
/// Exogenous and endogenous variables share one id space.
class Signature {
public:
    Signature() = default;

    explicit Signature(std::vector<Variable> vars) : vars_(std::move(vars)) {
        for (VarId id = 0; id < vars_.size(); ++id) {
            const auto& v = vars_[id];
            if (!is_identifier(v.name))
                throw ModelError("'" + v.name + "' is not a valid variable name");
            if (!index_.emplace(v.name, id).second)
                throw ModelError("variable '" + v.name + "' is declared twice");
            if (v.range.empty()) throw ModelError("variable '" + v.name + "' has an empty range");
            bool boolean_token = false;
            for (std::size_t i = 0; i < v.range.size(); ++i) {
                const auto& tok = v.range[i];
                if (!is_value_token(tok))
                    throw ModelError("'" + tok + "' is not a valid value of '" + v.name + "'");
                if (std::find(v.range.begin(), v.range.begin() + static_cast<std::ptrdiff_t>(i), tok) !=
                    v.range.begin() + static_cast<std::ptrdiff_t>(i))
                    throw ModelError("value '" + tok + "' is repeated in the range of '" + v.name + "'");
                boolean_token = boolean_token || tok == "0" || tok == "1";
            }
            if (boolean_token && v.range != std::vector<std::string>{"0", "1"})
                throw ModelError("range of '" + v.name + "' uses 0/1 but is not the Boolean range {0,1}");
            (v.exogenous ? exogenous_ : endogenous_).push_back(id);
        }
    }

    std::size_t size() const noexcept { return vars_.size(); }
    const std::vector<Variable>& variables() const noexcept { return vars_; }
    const Variable& var(VarId id) const { return vars_.at(id); }
    const std::string& name(VarId id) const { return vars_.at(id).name; }
    const std::vector<std::string>& range(VarId id) const { return vars_.at(id).range; }
    bool is_exogenous(VarId id) const { return vars_.at(id).exogenous; }
    bool is_boolean(VarId id) const { return vars_.at(id).range == std::vector<std::string>{"0", "1"}; }

    const std::vector<VarId>& exogenous() const noexcept { return exogenous_; }
    const std::vector<VarId>& endogenous() const noexcept { return endogenous_; }

    std::optional<VarId> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    VarId id(std::string_view name) const {
        if (auto id = find(name)) return *id;
        throw UnknownVariable(std::string(name));
    }

    std::optional<ValueId> find_value(VarId var, std::string_view token) const {
        const auto& r = range(var);
        auto it = std::find(r.begin(), r.end(), token);
        if (it == r.end()) return std::nullopt;
        return static_cast<ValueId>(it - r.begin());
    }

    ValueId value_id(VarId var, std::string_view token) const {
        if (auto v = find_value(var, token)) return *v;
        throw ValueOutOfRange(name(var), std::string(token));
    }

    const std::string& value_name(VarId var, ValueId value) const { return range(var).at(value); }

    bool operator==(const Signature& other) const { return vars_ == other.vars_; }

private:
    std::vector<Variable> vars_;
    std::unordered_map<std::string, VarId> index_;
    std::vector<VarId> exogenous_;
    std::vector<VarId> endogenous_;
};

/// Atomic event Var = value over resolved ids.
struct Event {
    VarId var = 0;
    ValueId value = 0;

    auto operator<=>(const Event&) const = default;
};

inline Event make_event(const Signature& sig, std::string_view var, std::string_view value) {
    VarId id = sig.id(var);
    return Event{id, sig.value_id(id, value)};
}

inline std::string to_string(const Signature& sig, const Event& e) {
    return sig.name(e.var) + "=" + sig.value_name(e.var, e.value);
}

}  // namespace resp
