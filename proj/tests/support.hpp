#pragma once

#include "corpus_table.hpp"
#include "resp/resp.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace resp::test {

inline std::string_view fixture_text(std::string_view name) {
    const auto* f = corpus::find_fixture(name);
    if (!f) throw std::runtime_error("missing fixture " + std::string(name));
    return f->text;
}

inline dsl::ScenarioDocument fixture_doc(std::string_view name) { return dsl::parse_document(fixture_text(name)); }

inline dsl::ParsedModel fixture(std::string_view name) { return dsl::parse_model(fixture_text(name)); }

inline ResponsibilitySetting agent_setting(std::string_view name, std::string_view agent) {
    return corpus::detail::setting(fixture_doc(name), agent);
}

inline Event ev(const dsl::ParsedModel& pm, std::string_view token) {
    return dsl::parse_event(pm.model.signature(), token);
}

inline Event ev(const Signature& sig, std::string_view token) { return dsl::parse_event(sig, token); }

inline Rational q(std::string_view text) { return *parse_rational(text); }

// Late preemption built without the DSL.
inline CausalModel late_preemption() {
    Signature sig({{"U1", {"0", "1"}, true},
                   {"U2", {"0", "1"}, true},
                   {"A1", {"0", "1"}, false},
                   {"A2", {"0", "1"}, false},
                   {"BH1", {"0", "1"}, false},
                   {"BH2", {"0", "1"}, false},
                   {"V", {"0", "1"}, false}});
    return build_model(sig, {{"A1", Expr::ref("U1")},
                             {"A2", Expr::ref("U2")},
                             {"BH1", Expr::ref("A1")},
                             {"BH2", Expr::all({Expr::ref("A2"), Expr::negate(Expr::ref("BH1"))})},
                             {"V", Expr::any({Expr::ref("BH1"), Expr::ref("BH2")})}});
}

}  // namespace resp::test
