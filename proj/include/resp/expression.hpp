#pragma once

#include "resp/error.hpp"
#include "resp/signature.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace resp {

/// Structural equation right-hand side, over variable and value names.
///
/// The same tree is read in two contexts. In a value context (the top of an
/// equation, a case arm) it yields a value of the target variable's range; in
/// a Boolean context (guards, connective operands, formula bodies) it yields a
/// truth value. Connectives in a value context require a Boolean target and
/// produce 1/0; a bare reference to a Boolean variable in a Boolean context
/// reads as `Var == 1`.
class Expr {
public:
    enum class Kind { constant, ref, eq, ne, negation, conjunction, disjunction, cases };

    static Expr constant(std::string value) { return Expr(Kind::constant, {}, std::move(value), {}); }
    static Expr ref(std::string var) { return Expr(Kind::ref, std::move(var), {}, {}); }
    static Expr eq(std::string var, std::string value) {
        return Expr(Kind::eq, std::move(var), std::move(value), {});
    }
    static Expr ne(std::string var, std::string value) {
        return Expr(Kind::ne, std::move(var), std::move(value), {});
    }
    static Expr negate(Expr operand) { return Expr(Kind::negation, {}, {}, {std::move(operand)}); }
    static Expr all(std::vector<Expr> operands) {
        return Expr(Kind::conjunction, {}, {}, std::move(operands));
    }
    static Expr any(std::vector<Expr> operands) {
        return Expr(Kind::disjunction, {}, {}, std::move(operands));
    }
    /// Guarded arms evaluated in order, then the mandatory fallback.
    static Expr cases(std::vector<std::pair<Expr, Expr>> arms, Expr otherwise) {
        std::vector<Expr> kids;
        kids.reserve(arms.size() * 2 + 1);
        for (auto& [guard, value] : arms) {
            kids.push_back(std::move(guard));
            kids.push_back(std::move(value));
        }
        kids.push_back(std::move(otherwise));
        return Expr(Kind::cases, {}, {}, std::move(kids));
    }

    Kind kind() const noexcept { return kind_; }
    /// Variable name for ref/eq/ne.
    const std::string& var() const noexcept { return var_; }
    /// Value token for constant/eq/ne.
    const std::string& value() const noexcept { return value_; }
    /// Operands; for cases: guard0, arm0, guard1, arm1, ..., fallback.
    const std::vector<Expr>& children() const noexcept { return children_; }

    std::size_t arm_count() const noexcept { return kind_ == Kind::cases ? children_.size() / 2 : 0; }
    const Expr& guard(std::size_t i) const { return children_.at(2 * i); }
    const Expr& arm(std::size_t i) const { return children_.at(2 * i + 1); }
    const Expr& fallback() const { return children_.back(); }

    void collect_vars(std::set<std::string>& out) const {
        if (kind_ == Kind::ref || kind_ == Kind::eq || kind_ == Kind::ne) out.insert(var_);
        for (const auto& c : children_) c.collect_vars(out);
    }

    bool operator==(const Expr&) const = default;

private:
    Expr(Kind kind, std::string var, std::string value, std::vector<Expr> children)
        : kind_(kind), var_(std::move(var)), value_(std::move(value)), children_(std::move(children)) {}

    Kind kind_ = Kind::constant;
    std::string var_;
    std::string value_;
    std::vector<Expr> children_;
};

namespace detail {

/// Expression resolved against a signature. Evaluation reads a dense
/// assignment indexed by VarId.
struct Node {
    enum class Op : std::uint8_t {
        b_const,   // value != 0 -> true
        b_test,    // values[var] == value
        b_diff,    // values[var] != value
        b_not,
        b_and,
        b_or,
        b_cases,   // kids: g0,a0,...,fallback; arms Boolean
        v_const,   // value
        v_copy,    // map[values[var]]
        v_bool,    // kids[0] Boolean -> value (1) / map[0] (0)
        v_cases,
    };
    Op op = Op::b_const;
    VarId var = 0;
    ValueId value = 0;
    std::vector<ValueId> map;
    std::vector<Node> kids;
};

inline bool eval_bool(const Node& n, const ValueId* values);

inline ValueId eval_value(const Node& n, const ValueId* values) {
    using Op = Node::Op;
    switch (n.op) {
    case Op::v_const: return n.value;
    case Op::v_copy: return n.map[values[n.var]];
    case Op::v_bool: return eval_bool(n.kids[0], values) ? n.value : n.map[0];
    case Op::v_cases: {
        std::size_t arms = n.kids.size() / 2;
        for (std::size_t i = 0; i < arms; ++i)
            if (eval_bool(n.kids[2 * i], values)) return eval_value(n.kids[2 * i + 1], values);
        return eval_value(n.kids.back(), values);
    }
    default: return eval_bool(n, values) ? 1 : 0;
    }
}

inline bool eval_bool(const Node& n, const ValueId* values) {
    using Op = Node::Op;
    switch (n.op) {
    case Op::b_const: return n.value != 0;
    case Op::b_test: return values[n.var] == n.value;
    case Op::b_diff: return values[n.var] != n.value;
    case Op::b_not: return !eval_bool(n.kids[0], values);
    case Op::b_and:
        for (const auto& k : n.kids)
            if (!eval_bool(k, values)) return false;
        return true;
    case Op::b_or:
        for (const auto& k : n.kids)
            if (eval_bool(k, values)) return true;
        return false;
    case Op::b_cases: {
        std::size_t arms = n.kids.size() / 2;
        for (std::size_t i = 0; i < arms; ++i)
            if (eval_bool(n.kids[2 * i], values)) return eval_bool(n.kids[2 * i + 1], values);
        return eval_bool(n.kids.back(), values);
    }
    default: return eval_value(n, values) == 1;
    }
}

/// Resolves expressions against a signature; `allow` filters which variables
/// may be referenced (e.g. endogenous only for formula bodies).
class Compiler {
public:
    explicit Compiler(const Signature& sig, bool endogenous_only = false)
        : sig_(sig), endogenous_only_(endogenous_only) {}

    Node boolean(const Expr& e) const {
        using K = Expr::Kind;
        using Op = Node::Op;
        Node n;
        switch (e.kind()) {
        case K::constant:
            if (e.value() != "0" && e.value() != "1")
                throw ModelError("value '" + e.value() + "' used where a condition is expected");
            n.op = Op::b_const;
            n.value = e.value() == "1" ? 1 : 0;
            return n;
        case K::ref: {
            VarId v = lookup(e.var());
            if (!sig_.is_boolean(v))
                throw ModelError("non-Boolean variable '" + e.var() + "' used as a condition");
            n.op = Op::b_test;
            n.var = v;
            n.value = 1;
            return n;
        }
        case K::eq:
        case K::ne: {
            VarId v = lookup(e.var());
            n.op = e.kind() == K::eq ? Op::b_test : Op::b_diff;
            n.var = v;
            n.value = sig_.value_id(v, e.value());
            return n;
        }
        case K::negation:
            n.op = Op::b_not;
            n.kids.push_back(boolean(e.children().at(0)));
            return n;
        case K::conjunction:
        case K::disjunction:
            if (e.children().size() < 2) throw ModelError("connective needs at least two operands");
            n.op = e.kind() == K::conjunction ? Op::b_and : Op::b_or;
            for (const auto& c : e.children()) n.kids.push_back(boolean(c));
            return n;
        case K::cases:
            n.op = Op::b_cases;
            for (std::size_t i = 0; i < e.arm_count(); ++i) {
                n.kids.push_back(boolean(e.guard(i)));
                n.kids.push_back(boolean(e.arm(i)));
            }
            n.kids.push_back(boolean(e.fallback()));
            return n;
        }
        throw ModelError("unknown expression kind");
    }

    /// Compiles `e` as the equation of `target`.
    Node value(const Expr& e, VarId target) const {
        using K = Expr::Kind;
        using Op = Node::Op;
        Node n;
        switch (e.kind()) {
        case K::constant:
            n.op = Op::v_const;
            n.value = sig_.value_id(target, e.value());
            return n;
        case K::ref: {
            VarId src = lookup(e.var());
            n.op = Op::v_copy;
            n.var = src;
            for (const auto& tok : sig_.range(src)) {
                auto mapped = sig_.find_value(target, tok);
                if (!mapped)
                    throw ModelError("range of '" + e.var() + "' is not contained in the range of '" +
                                     sig_.name(target) + "'");
                n.map.push_back(*mapped);
            }
            return n;
        }
        case K::cases:
            n.op = Op::v_cases;
            for (std::size_t i = 0; i < e.arm_count(); ++i) {
                n.kids.push_back(boolean(e.guard(i)));
                n.kids.push_back(value(e.arm(i), target));
            }
            n.kids.push_back(value(e.fallback(), target));
            return n;
        default:
            if (!sig_.is_boolean(target))
                throw ModelError("condition assigned to non-Boolean variable '" + sig_.name(target) + "'");
            n.op = Op::v_bool;
            n.value = 1;
            n.map = {0};
            n.kids.push_back(boolean(e));
            return n;
        }
    }

private:
    VarId lookup(const std::string& name) const {
        VarId v = sig_.id(name);
        if (endogenous_only_ && sig_.is_exogenous(v))
            throw ModelError("exogenous variable '" + name + "' cannot appear in a causal formula");
        return v;
    }

    const Signature& sig_;
    bool endogenous_only_;
};

}  // namespace detail
}  // namespace resp
