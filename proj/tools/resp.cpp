// resp: command-line front end for causation and responsibility queries.

#include "corpus_table.hpp"
#include "resp/resp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef RESP_VERSION
#define RESP_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;
using namespace resp;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string input;
    std::string def;
    std::string cause;
    std::string effect;
    std::string outcome;
    std::string agent;
    std::string alpha = "1/2";
    std::string formula;
    std::vector<std::string> interventions;
    std::string witnesses = "include";
    std::optional<std::uint64_t> max_states;
    std::optional<std::size_t> max_conjuncts;
    bool json = false;
    bool timing = false;
};

struct Source {
    std::string name;
    std::string text;
};

Source load(const std::string& input) {
    if (input.empty()) throw UsageError("no input file given");
    if (input == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return {"<stdin>", ss.str()};
    }
    if (std::filesystem::exists(input)) {
        std::ifstream in(input, std::ios::binary);
        if (!in) throw UsageError("cannot read '" + input + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return {input, ss.str()};
    }
    if (const auto* f = corpus::find_fixture(input)) return {std::string(f->file), std::string(f->text)};
    throw UsageError("no such file or bundled fixture: '" + input + "'");
}

Limits limits_of(const Options& o) {
    Limits l;
    if (const char* env = std::getenv("RESP_MAX_STATES"); env && *env) {
        try {
            l.max_states = std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError("RESP_MAX_STATES must be a positive integer");
        }
    }
    if (o.max_states) l.max_states = *o.max_states;
    l.max_conjuncts = o.max_conjuncts;
    return l;
}

json exact(const Rational& r) { return {{"exact", to_fraction(r)}, {"decimal", to_double(r)}}; }

std::string event_text(const Signature& sig, const Event& e) { return to_string(sig, e); }

json events(const Signature& sig, const std::vector<Event>& es) {
    json out = json::array();
    for (const auto& e : es) out.push_back(event_text(sig, e));
    return out;
}

json path_json(const Signature& sig, const CausalPath& p) {
    json out = json::array();
    for (VarId v : p.vars) out.push_back(sig.name(v));
    return out;
}

json witness_json(const Signature& sig, const CausalVerdict& v, const Event& cause) {
    return std::visit(
        [&](const auto& w) -> json {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, DirectNessWitness>) {
                return {{"kind", "direct-ness"}, {"set", events(sig, w.set)}};
            } else if constexpr (std::is_same_v<T, NessWitness>) {
                return {{"kind", "ness"}, {"path", path_json(sig, w.path)}};
            } else if constexpr (std::is_same_v<T, CnessWitness>) {
                return {{"kind", "cness"},
                        {"path", path_json(sig, w.path)},
                        {"counterfactual", event_text(sig, {cause.var, w.counterfactual})}};
            } else {
                std::vector<Event> flip;
                for (std::size_t i = 0; i < w.conjuncts.size(); ++i) flip.push_back({w.conjuncts[i].var, w.flip[i]});
                return {{"kind", "hp"},
                        {"conjuncts", events(sig, w.conjuncts)},
                        {"frozen", events(sig, w.frozen)},
                        {"flip", events(sig, flip)}};
            }
        },
        v.witness);
}

std::string witness_text(const json& w) {
    if (w.is_null()) return "";
    auto list = [](const json& a) {
        std::string s = "{";
        for (std::size_t i = 0; i < a.size(); ++i) s += (i ? ", " : "") + a[i].get<std::string>();
        return s + "}";
    };
    std::string kind = w["kind"];
    if (kind == "direct-ness") return "W = " + list(w["set"]);
    if (kind == "ness") return "path " + list(w["path"]);
    if (kind == "cness") return "path " + list(w["path"]) + ", x' " + w["counterfactual"].get<std::string>();
    return "X = " + list(w["conjuncts"]) + ", W = " + list(w["frozen"]) + ", x' = " + list(w["flip"]);
}

Causation causation_of(const std::string& s) {
    auto c = parse_causation(s);
    if (!c) throw UsageError("unknown causation definition '" + s + "' (direct-ness, ness, cness, hp)");
    return *c;
}

Responsibility responsibility_of(const std::string& s) {
    auto r = parse_responsibility(s);
    if (!r) throw UsageError("unknown responsibility definition '" + s + "' (bvh, bvh-ness, hk, beckers)");
    return *r;
}

Event event_of(const Signature& sig, const std::string& token, const char* flag) {
    if (token.empty()) throw UsageError(std::string(flag) + " is required");
    return dsl::parse_event(sig, token);
}

std::vector<ResponsibilitySetting> settings_for(const Options& o, const Source& src) {
    auto doc = dsl::parse_document(src.text);
    if (!o.outcome.empty()) {
        auto sig = dsl::model_of(doc).signature();
        auto e = dsl::parse_event(sig, o.outcome);
        doc.outcome = dsl::Assign{sig.name(e.var), sig.value_name(e.var, e.value)};
    }
    if (doc.agents.empty()) throw UsageError(src.name + " declares no agents");
    auto all = dsl::settings_of(doc);
    if (o.agent.empty()) return all;
    for (auto& s : all)
        if (s.agent() == o.agent) return {s};
    throw UsageError("no agent '" + o.agent + "' in " + src.name);
}

json cmd_solve(const Options& o, const Source& src, json& query) {
    auto pm = dsl::parse_model(src.text);
    const auto& sig = pm.model.signature();
    std::vector<Event> targets;
    for (const auto& t : o.interventions) targets.push_back(dsl::parse_event(sig, t));
    query["interventions"] = events(sig, targets);
    auto model = targets.empty() ? pm.model : intervene(pm.model, targets);
    model.require_within(limits_of(o));
    auto sol = solve(model, pm.context);
    json values = json::object();
    for (VarId v = 0; v < sig.size(); ++v) values[sig.name(v)] = sig.value_name(v, sol[v]);
    return {{"values", values}};
}

json cmd_eval(const Options& o, const Source& src, json& query) {
    if (o.formula.empty()) throw UsageError("--formula is required");
    auto pm = dsl::parse_model(src.text);
    auto f = dsl::parse_formula(o.formula);
    query["formula"] = dsl::to_source(f);
    pm.model.require_within(limits_of(o));
    return {{"holds", evaluate(pm.model, pm.context, f)}};
}

json cmd_cause(const Options& o, const Source& src, json& query) {
    auto pm = dsl::parse_model(src.text);
    const auto& sig = pm.model.signature();
    auto def = causation_of(o.def);
    auto cause = event_of(sig, o.cause, "--cause");
    auto effect = event_of(sig, o.effect, "--effect");
    query["definition"] = to_string(def);
    query["cause"] = event_text(sig, cause);
    query["effect"] = event_text(sig, effect);
    auto v = is_cause(pm.model, pm.context, def, cause, effect, limits_of(o));
    json r = {{"holds", v.holds}};
    if (o.witnesses == "include") {
        r["witness"] = witness_json(sig, v, cause);
        if (def == Causation::ness) {
            json paths = json::array();
            for (const auto& p : ness_cause(pm.model, pm.context, cause, effect, limits_of(o)))
                paths.push_back(path_json(sig, p));
            r["paths"] = paths;
        }
    }
    return r;
}

json cmd_causes(const Options& o, const Source& src, json& query) {
    auto pm = dsl::parse_model(src.text);
    const auto& sig = pm.model.signature();
    auto def = causation_of(o.def);
    auto effect = event_of(sig, o.effect, "--effect");
    query["definition"] = to_string(def);
    query["effect"] = event_text(sig, effect);
    json list = json::array();
    for (const auto& f : find_causes(pm.model, pm.context, effect, def, limits_of(o))) {
        json item = {{"cause", event_text(sig, f.cause)}};
        if (o.witnesses == "include") item["witness"] = witness_json(sig, f.verdict, f.cause);
        list.push_back(item);
    }
    return {{"causes", list}};
}

json cmd_responsibility(const Options& o, const Source& src, json& query) {
    auto def = responsibility_of(o.def.empty() ? "beckers" : o.def);
    query["definition"] = to_string(def);
    if (!o.agent.empty()) query["agent"] = o.agent;
    json agents = json::array();
    for (const auto& s : settings_for(o, src)) {
        const auto& sig = s.signature();
        auto v = responsible(s, def, limits_of(o));
        const auto& ev = v.epistemic_evidence;
        json table = json::array();
        for (const auto& row : ev.table)
            table.push_back({{"action", event_text(sig, {s.action_variable(), row.action})},
                             {"outcome_probability", exact(row.outcome)},
                             {"causation_probability", exact(row.causation)}});
        json a = {{"agent", s.agent()},
                  {"action", event_text(sig, s.action())},
                  {"outcome", event_text(sig, s.outcome())},
                  {"responsible", v.responsible},
                  {"conditions",
                   {{"control", v.control_condition}, {"causal", v.causal_condition}, {"epistemic", v.epistemic_condition}}},
                  {"causal_definition", to_string(causal_condition_of(def))},
                  {"branch", ev.branch},
                  {"alternative", ev.alternative ? json(event_text(sig, {s.action_variable(), *ev.alternative})) : json()},
                  {"table", table}};
        if (o.witnesses == "include") a["causal_witness"] = witness_json(sig, v.causal_evidence, s.action());
        agents.push_back(a);
    }
    return {{"agents", agents}};
}

json cmd_degree(const Options& o, const Source& src, json& query) {
    auto alpha = parse_rational(o.alpha);
    if (!alpha || *alpha < 0) throw UsageError("--alpha must be a nonnegative rational or decimal");
    query["alpha"] = to_fraction(*alpha);
    if (!o.agent.empty()) query["agent"] = o.agent;
    json agents = json::array();
    for (const auto& s : settings_for(o, src)) {
        const auto& sig = s.signature();
        auto d = degree_report(s, *alpha, limits_of(o));
        agents.push_back({{"agent", s.agent()},
                          {"action", event_text(sig, s.action())},
                          {"outcome", event_text(sig, s.outcome())},
                          {"responsible", d.responsible},
                          {"degree", exact(d.degree)},
                          {"eells", exact(d.eells)},
                          {"actual", exact(d.actual)},
                          {"reference", d.reference ? json(event_text(sig, {s.action_variable(), *d.reference})) : json()},
                          {"tie", d.tie}});
    }
    return {{"agents", agents}};
}

json cmd_corpus(const Options&, json&) {
    json fixtures = json::array();
    bool all = true;
    auto table = corpus::checks();
    for (const auto& f : corpus::kFixtures) {
        json checks = json::array();
        auto name = std::string(corpus::stem(f.file));
        std::optional<dsl::ScenarioDocument> doc;
        std::string error;
        try {
            doc = dsl::parse_document(f.text);
        } catch (const std::exception& e) {
            error = e.what();
        }
        for (const auto& c : table) {
            if (c.fixture != name) continue;
            bool passed = false;
            std::string detail;
            if (doc) {
                try {
                    passed = c.run(*doc);
                } catch (const std::exception& e) {
                    detail = e.what();
                }
            } else {
                detail = error;
            }
            all = all && passed;
            json item = {{"check", c.description}, {"passed", passed}};
            if (!detail.empty()) item["error"] = detail;
            checks.push_back(item);
        }
        fixtures.push_back({{"fixture", std::string(f.file)}, {"checks", checks}});
    }
    return {{"fixtures", fixtures}, {"passed", all}};
}

std::string decimal_text(const json& p) {
    std::string e = p["exact"];
    auto r = parse_rational(e);
    return r ? to_string(*r) : e;
}

void print_text(const std::string& command, const json& report) {
    const auto& q = report["query"];
    const auto& r = report["result"];
    std::ostream& os = std::cout;
    if (command == "solve") {
        for (const auto& [k, v] : r["values"].items()) os << k << " = " << v.get<std::string>() << '\n';
    } else if (command == "eval") {
        os << q["formula"].get<std::string>() << ": " << (r["holds"].get<bool>() ? "true" : "false") << '\n';
    } else if (command == "cause") {
        os << q["cause"].get<std::string>() << ' ' << q["definition"].get<std::string>() << "-causes "
           << q["effect"].get<std::string>() << ": " << (r["holds"].get<bool>() ? "yes" : "no") << '\n';
        if (r.contains("witness") && !r["witness"].is_null()) os << "  witness: " << witness_text(r["witness"]) << '\n';
        if (r.contains("paths"))
            for (const auto& p : r["paths"]) {
                os << "  path:";
                for (const auto& v : p) os << ' ' << v.get<std::string>();
                os << '\n';
            }
    } else if (command == "causes") {
        os << q["definition"].get<std::string>() << " causes of " << q["effect"].get<std::string>() << ":";
        if (r["causes"].empty()) os << " none";
        os << '\n';
        for (const auto& c : r["causes"]) {
            os << "  " << c["cause"].get<std::string>();
            if (c.contains("witness")) os << "  (" << witness_text(c["witness"]) << ")";
            os << '\n';
        }
    } else if (command == "responsibility") {
        for (const auto& a : r["agents"]) {
            os << a["agent"].get<std::string>() << " (" << a["action"].get<std::string>() << ") "
               << (a["responsible"].get<bool>() ? "is" : "is not") << " responsible for "
               << a["outcome"].get<std::string>() << " under " << q["definition"].get<std::string>() << '\n';
            const auto& c = a["conditions"];
            os << "  causal condition (" << a["causal_definition"].get<std::string>()
               << "): " << (c["causal"].get<bool>() ? "met" : "not met") << '\n';
            if (a.contains("causal_witness") && !a["causal_witness"].is_null())
                os << "    witness: " << witness_text(a["causal_witness"]) << '\n';
            os << "  epistemic condition: " << (c["epistemic"].get<bool>() ? "met" : "not met");
            if (!a["alternative"].is_null())
                os << " (alternative " << a["alternative"].get<std::string>() << ", branch " << a["branch"].get<int>()
                   << ")";
            os << '\n';
            for (const auto& row : a["table"])
                os << "    " << row["action"].get<std::string>() << ": Pr(outcome) = "
                   << decimal_text(row["outcome_probability"])
                   << ", Pr(causes outcome) = " << decimal_text(row["causation_probability"]) << '\n';
        }
    } else if (command == "degree") {
        for (const auto& a : r["agents"]) {
            os << a["agent"].get<std::string>() << " (" << a["action"].get<std::string>() << "): degree "
               << decimal_text(a["degree"]) << " for " << a["outcome"].get<std::string>() << " with alpha "
               << q["alpha"].get<std::string>() << '\n';
            if (a["responsible"].get<bool>()) {
                os << "  reference " << a["reference"].get<std::string>() << ", CS_e " << decimal_text(a["eells"])
                   << ", CS_ac " << decimal_text(a["actual"]);
                if (a["tie"].get<bool>()) os << " (tie broken by range order)";
                os << '\n';
            } else {
                os << "  not responsible\n";
            }
        }
    } else if (command == "corpus") {
        for (const auto& f : r["fixtures"]) {
            os << f["fixture"].get<std::string>() << '\n';
            for (const auto& c : f["checks"]) {
                os << "  [" << (c["passed"].get<bool>() ? "PASS" : "FAIL") << "] " << c["check"].get<std::string>();
                if (c.contains("error")) os << " (" << c["error"].get<std::string>() << ")";
                os << '\n';
            }
        }
        os << (r["passed"].get<bool>() ? "all expected verdicts hold" : "some expected verdicts do not hold") << '\n';
    }
    if (report.contains("timing")) os << "elapsed " << report["timing"]["elapsed_ms"].get<double>() << " ms\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Actual causation and responsibility queries over structural causal models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", RESP_VERSION);
    Options o;

    auto common = [&](CLI::App* sub, bool needs_input = true) {
        if (needs_input) sub->add_option("file", o.input, "Model (.scm) or scenario (.rsp) file, or a bundled fixture name")->required();
        sub->add_flag("--json", o.json, "Emit a JSON report");
        sub->add_flag("--timing", o.timing, "Report elapsed time");
        sub->add_option("--max-states", o.max_states, "State-space cap (also RESP_MAX_STATES)");
    };
    auto witnesses = [&](CLI::App* sub) {
        sub->add_option("--witnesses", o.witnesses, "Include or omit witnesses")
            ->check(CLI::IsMember({"include", "omit"}));
    };

    auto* solve_cmd = app.add_subcommand("solve", "Solve the model in its context");
    common(solve_cmd);
    solve_cmd->add_option("--do", o.interventions, "Intervention Var=value (repeatable)");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a causal formula such as \"[A1<-0] V == 0\"");
    common(eval_cmd);
    eval_cmd->add_option("--formula", o.formula, "Formula")->required();

    auto* cause_cmd = app.add_subcommand("cause", "Decide whether one event causes another");
    common(cause_cmd);
    witnesses(cause_cmd);
    cause_cmd->add_option("--def", o.def, "direct-ness, ness, cness or hp")->required();
    cause_cmd->add_option("--cause", o.cause, "Cause Var=value")->required();
    cause_cmd->add_option("--effect", o.effect, "Effect Var=value")->required();
    cause_cmd->add_option("--max-conjuncts", o.max_conjuncts, "Largest HP conjunction to search");

    auto* causes_cmd = app.add_subcommand("causes", "List every actual event causing the effect");
    common(causes_cmd);
    witnesses(causes_cmd);
    causes_cmd->add_option("--def", o.def, "direct-ness, ness, cness or hp")->required();
    causes_cmd->add_option("--effect", o.effect, "Effect Var=value")->required();
    causes_cmd->add_option("--max-conjuncts", o.max_conjuncts, "Largest HP conjunction to search");

    auto* resp_cmd = app.add_subcommand("responsibility", "Responsibility verdicts for the scenario's agents");
    common(resp_cmd);
    witnesses(resp_cmd);
    resp_cmd->add_option("--def", o.def, "bvh, bvh-ness, hk or beckers (default beckers)");
    resp_cmd->add_option("--agent", o.agent, "Only this agent");
    resp_cmd->add_option("--outcome", o.outcome, "Override the scenario's outcome Var=value");

    auto* degree_cmd = app.add_subcommand("degree", "Degree of responsibility");
    common(degree_cmd);
    degree_cmd->add_option("--alpha", o.alpha, "Weight of the actual-causation measure (default 1/2)");
    degree_cmd->add_option("--agent", o.agent, "Only this agent");
    degree_cmd->add_option("--outcome", o.outcome, "Override the scenario's outcome Var=value");

    auto* corpus_cmd = app.add_subcommand("corpus", "Check the expected verdicts of every bundled fixture");
    common(corpus_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    std::string command = app.get_subcommands().front()->get_name();
    auto started = std::chrono::steady_clock::now();
    json report = {{"command", command}, {"engine", {{"name", "resp"}, {"version", RESP_VERSION}}}};
    json query = json::object();
    try {
        json result;
        if (command == "corpus") {
            result = cmd_corpus(o, query);
        } else {
            auto src = load(o.input);
            query["input"] = src.name;
            if (command == "solve") result = cmd_solve(o, src, query);
            else if (command == "eval") result = cmd_eval(o, src, query);
            else if (command == "cause") result = cmd_cause(o, src, query);
            else if (command == "causes") result = cmd_causes(o, src, query);
            else if (command == "responsibility") result = cmd_responsibility(o, src, query);
            else if (command == "degree") result = cmd_degree(o, src, query);
        }
        report["query"] = query;
        report["result"] = result;
        if (o.timing)
            report["timing"] = {{"elapsed_ms", std::chrono::duration<double, std::milli>(
                                                   std::chrono::steady_clock::now() - started)
                                                   .count()}};
        if (o.json)
            std::cout << report.dump(2) << '\n';
        else
            print_text(command, report);
        if (command == "corpus" && !result["passed"].get<bool>()) return 1;
        return 0;
    } catch (const dsl::ParseError& e) {
        std::string name = o.input.empty() ? "<input>" : o.input;
        for (const auto& d : e.diagnostics()) std::cerr << dsl::format(d, name) << '\n';
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "resp: " << e.what() << '\n';
        return 1;
    } catch (const CapacityError& e) {
        std::cerr << "resp: " << e.what() << '\n';
        return 2;
    } catch (const ModelError& e) {
        std::cerr << "resp: " << e.what() << '\n';
        return 1;
    } catch (const QueryError& e) {
        std::cerr << "resp: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "resp: " << e.what() << '\n';
        return 2;
    }
}
