#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace resp {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed model or query input (bad names, ranges, missing pieces).
class ModelError : public Error {
public:
    using Error::Error;
};

class UnknownVariable : public ModelError {
public:
    explicit UnknownVariable(const std::string& name)
        : ModelError("unknown variable '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class ValueOutOfRange : public ModelError {
public:
    ValueOutOfRange(const std::string& var, const std::string& value)
        : ModelError("value '" + value + "' is not in the range of '" + var + "'"),
          variable_(var), value_(value) {}
    const std::string& variable() const noexcept { return variable_; }
    const std::string& value() const noexcept { return value_; }

private:
    std::string variable_;
    std::string value_;
};

class MissingEquation : public ModelError {
public:
    explicit MissingEquation(const std::string& var)
        : ModelError("endogenous variable '" + var + "' has no equation"), variable_(var) {}
    const std::string& variable() const noexcept { return variable_; }

private:
    std::string variable_;
};

class CycleError : public ModelError {
public:
    explicit CycleError(std::vector<std::string> cycle)
        : ModelError(describe(cycle)), cycle_(std::move(cycle)) {}
    /// Variables on the cycle, in dependency order.
    const std::vector<std::string>& cycle() const noexcept { return cycle_; }

private:
    static std::string describe(const std::vector<std::string>& cycle) {
        std::string msg = "cyclic equations:";
        for (const auto& v : cycle) msg += " " + v + " ->";
        if (!cycle.empty()) msg += " " + cycle.front();
        return msg;
    }
    std::vector<std::string> cycle_;
};

class ExogenousInterventionError : public ModelError {
public:
    explicit ExogenousInterventionError(const std::string& var)
        : ModelError("cannot intervene on exogenous variable '" + var + "'") {}
};

class IncompleteContext : public ModelError {
public:
    explicit IncompleteContext(const std::string& var)
        : ModelError("context assigns no value to exogenous variable '" + var + "'") {}
};

/// Query preconditions that the caller violated.
class QueryError : public Error {
public:
    using Error::Error;
};

class EffectInSetError : public QueryError {
public:
    explicit EffectInSetError(const std::string& var)
        : QueryError("effect variable '" + var + "' also appears in the candidate set") {}
};

class SameVariableError : public QueryError {
public:
    explicit SameVariableError(const std::string& var)
        : QueryError("cause and effect are both on variable '" + var + "'") {}
};

class EffectNotActual : public QueryError {
public:
    explicit EffectNotActual(const std::string& event)
        : QueryError("effect " + event + " does not hold in the actual setting") {}
};

class SignatureMismatch : public QueryError {
public:
    using QueryError::QueryError;
};

class WeightSumError : public QueryError {
public:
    WeightSumError(const std::string& owner, const std::string& sum)
        : QueryError("epistemic weights" + (owner.empty() ? std::string() : " of '" + owner + "'") + " sum to " +
                     sum + ", not 1"),
          sum_(sum) {}
    const std::string& sum() const noexcept { return sum_; }

private:
    std::string sum_;
};

/// Limits of the exhaustive engine (state-space cap, conjunct cap).
class CapacityError : public Error {
public:
    using Error::Error;
};

}  // namespace resp
