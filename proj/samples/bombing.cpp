// Builds the two-switch bombing model through the C++ API, then asks who is
// responsible for the explosion under each definition.

#include "resp/resp.hpp"

#include <iostream>

using namespace resp;

int main() {
    Signature sig({{"U1", {"0", "1"}, true},
                   {"U2", {"0", "1"}, true},
                   {"S1", {"0", "1"}, false},
                   {"S2", {"0", "1"}, false},
                   {"D1", {"0", "1"}, false},
                   {"D2", {"0", "1"}, false},
                   {"D3", {"0", "1"}, false},
                   {"B", {"0", "1"}, false}});
    auto off = [](const char* v) { return Expr::negate(Expr::ref(v)); };
    auto model = build_model(sig, {{"S1", Expr::ref("U1")},
                                   {"S2", Expr::ref("U2")},
                                   {"D1", Expr::all({Expr::ref("S1"), off("S2")})},
                                   {"D2", Expr::all({Expr::ref("S2"), off("S1")})},
                                   {"D3", Expr::ref("S1")},
                                   {"B", Expr::any({Expr::ref("D1"), Expr::ref("D2"), Expr::ref("D3")})}});
    Context actual(model.signature(), {{"U1", "0"}, {"U2", "1"}});

    // Assassin2 thinks there is a 60% chance the other switch is on.
    EpistemicState beliefs({{Rational(3, 5), model, Context(model.signature(), {{"U1", "1"}, {"U2", "1"}})},
                            {Rational(2, 5), model, Context(model.signature(), {{"U1", "0"}, {"U2", "1"}})}},
                           "Assassin2");
    const auto& s = model.signature();
    ResponsibilitySetting setting("Assassin2", model, actual, beliefs, s.id("S2"), make_event(s, "B", "1"));

    auto solution = solve(model, actual);
    std::cout << "actual world:";
    for (VarId v : s.endogenous()) std::cout << ' ' << s.name(v) << '=' << s.value_name(v, solution[v]);
    std::cout << "\n\n";

    for (auto def : kAllCausation) {
        std::cout << "causes of B=1 under " << to_string(def) << ':';
        for (const auto& f : find_causes(model, actual, make_event(s, "B", "1"), def))
            std::cout << ' ' << to_string(s, f.cause);
        std::cout << '\n';
    }
    std::cout << '\n';

    for (auto def : kAllResponsibility) {
        auto v = responsible(setting, def);
        std::cout << to_string(def) << ": " << (v.responsible ? "responsible" : "not responsible") << " (causal "
                  << (v.causal_condition ? "yes" : "no") << ", epistemic " << (v.epistemic_condition ? "yes" : "no")
                  << ")\n";
        for (const auto& row : v.epistemic_evidence.table)
            std::cout << "    S2=" << row.action << "  Pr(B=1) = " << to_string(row.outcome)
                      << "  Pr(S2 causes B=1) = " << to_string(row.causation) << '\n';
    }
    std::cout << "\ndegree of responsibility (alpha 1/2): " << to_string(degree_of_responsibility(setting, Rational(1, 2)))
              << '\n';
}
