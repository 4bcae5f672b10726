// resp-test: seeded random models run through the metamorphic property suite.

#include "resp/testkit.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>
#include <map>

namespace {

using nlohmann::json;
using namespace resp;

testkit::SpecimenParams params_of(const std::vector<std::string>& pairs) {
    testkit::SpecimenParams p;
    for (const auto& item : pairs) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--param", "expected key=value, got '" + item + "'");
        std::string key = item.substr(0, eq);
        std::size_t value = 0;
        try {
            value = std::stoul(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--param", "'" + item + "' needs a nonnegative integer");
        }
        if (key == "max_vars") p.max_vars = value;
        else if (key == "max_exogenous") p.max_exogenous = value;
        else if (key == "max_range") p.max_range = value;
        else if (key == "max_depth") p.max_depth = value;
        else if (key == "max_fanin") p.max_fanin = value;
        else throw CLI::ValidationError("--param", "unknown parameter '" + key + "'");
    }
    if (p.max_range < 2) throw CLI::ValidationError("--param", "max_range must be at least 2");
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomised differential and metamorphic checks of the causation engine"};
    std::uint64_t seeds = 1000;
    std::uint64_t first = 0;
    std::vector<std::string> raw;
    bool as_json = false;
    bool no_shrink = false;
    app.add_option("--seeds", seeds, "Number of seeds to run")->check(CLI::PositiveNumber);
    app.add_option("--first-seed", first, "First seed");
    app.add_option("--param", raw, "Generator parameter key=value (max_vars, max_exogenous, max_range, max_depth, max_fanin)")
        ->delimiter(',');
    app.add_flag("--json", as_json, "Emit a JSON summary");
    app.add_flag("--no-shrink", no_shrink, "Report failures without shrinking");

    testkit::SpecimenParams params;
    try {
        app.parse(argc, argv);
        params = params_of(raw);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    auto started = std::chrono::steady_clock::now();
    std::map<std::string, std::uint64_t> failures;
    for (const auto& p : testkit::properties()) failures[p.name] = 0;
    json failed = json::array();
    std::uint64_t rows = 0;
    std::uint64_t errors = 0;

    for (std::uint64_t seed = first; seed < first + seeds; ++seed) {
        try {
            auto s = testkit::random_specimen(seed, params);
            rows += testkit::differential_causes(s).size();
            for (const auto& r : testkit::metamorphic_suite(s, !no_shrink)) {
                if (r.passed) continue;
                ++failures[r.name];
                json item = {{"seed", seed}, {"property", r.name}, {"counterexample", r.counterexample}};
                if (r.shrunk) item["shrunk"] = dsl::serialize(r.shrunk->document);
                failed.push_back(item);
            }
        } catch (const std::exception& e) {
            ++errors;
            failed.push_back({{"seed", seed}, {"property", "generation"}, {"counterexample", e.what()}});
        }
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    bool ok = failed.empty();

    if (as_json) {
        json summary = {{"seeds", seeds},
                        {"first_seed", first},
                        {"differential_rows", rows},
                        {"properties", failures},
                        {"generation_errors", errors},
                        {"failures", failed},
                        {"elapsed_s", elapsed},
                        {"passed", ok}};
        std::cout << summary.dump(2) << '\n';
    } else {
        std::cout << "seeds " << first << ".." << first + seeds - 1 << ", " << rows << " differential rows, "
                  << elapsed << " s\n";
        for (const auto& [name, count] : failures)
            std::cout << "  " << (count == 0 ? "ok  " : "FAIL") << ' ' << name << (count ? " (" + std::to_string(count) + ")" : "")
                      << '\n';
        for (const auto& f : failed) {
            std::cout << "seed " << f["seed"].get<std::uint64_t>() << ' ' << f["property"].get<std::string>() << ": "
                      << f["counterexample"].get<std::string>() << '\n';
            if (f.contains("shrunk")) std::cout << "shrunk to:\n" << f["shrunk"].get<std::string>() << '\n';
        }
    }
    return ok ? 0 : 1;
}
