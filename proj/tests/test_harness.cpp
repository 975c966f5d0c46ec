#include <doctest.h>

#include "melda/flatten.hpp"
#include "melda/harness.hpp"
#include "scenarios.hpp"

using namespace melda::harness;
using melda::Value;

namespace {

std::multiset<std::string> ids_in(const Value& doc) {
    std::multiset<std::string> out;
    for (const auto& key : {"alpha\xE2\x99\xAD", "beta\xE2\x99\xAD"}) {
        for (const auto& e : doc.at(key)) out.insert(e.at("_id").get<std::string>());
    }
    return out;
}

}  // namespace

TEST_CASE("seed document has two arrays of 51 objects") {
    auto doc = build_seed_document();
    CHECK(doc.at("alpha\xE2\x99\xAD").size() == 51);
    CHECK(doc.at("beta\xE2\x99\xAD").size() == 51);
    CHECK(doc.at("alpha\xE2\x99\xAD").front() == Value{{"_id", "O001"}});
    CHECK(doc.at("alpha\xE2\x99\xAD").back() == Value{{"_id", "OZA"}});
    CHECK(doc.at("beta\xE2\x99\xAD").front() == Value{{"_id", "O051"}});
    CHECK(doc.at("beta\xE2\x99\xAD").back() == Value{{"_id", "OZB"}});
    auto ids = ids_in(doc);
    CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == 102);
    CHECK(std::set<std::string>(ids.begin(), ids.end()) == seed_ids());
    CHECK(melda::flatten(doc).objects.size() == 103);
}

TEST_CASE("random moves keep the id multiset") {
    Rng rng(1);
    auto doc = build_seed_document();
    CHECK(random_move_edit(doc, rng, 0) == doc);
    for (int i = 0; i < 100; ++i) {
        auto edited = random_move_edit(doc, rng, 1, 5);
        CHECK(ids_in(edited) == ids_in(doc));
        doc = edited;
    }
    CHECK(doc != build_seed_document());
}

TEST_CASE("random moves are reproducible from the seed") {
    Rng a(99), b(99);
    auto doc = build_seed_document();
    for (int i = 0; i < 10; ++i) CHECK(random_move_edit(doc, a, 1, 5) == random_move_edit(doc, b, 1, 5));
}

TEST_CASE("invariant checks flag duplicates, missing ids and cycles") {
    auto seed = build_seed_document();
    auto ok = check_invariants(seed, seed_ids());
    CHECK(ok.ok());
    CHECK(ok.present == 102);

    auto dup = scenarios::root({scenarios::node("B", {scenarios::node("A", {scenarios::node("C")})}), scenarios::node("A")});
    auto e = check_invariants(dup, {"A", "B", "C"});
    CHECK(e.duplicates == std::vector<std::string>{"A"});
    CHECK_FALSE(e.ok());

    Value missing = seed;
    missing.at("beta\xE2\x99\xAD").erase(50);
    auto m = check_invariants(missing, seed_ids());
    CHECK(m.missing == std::vector<std::string>{"OZB"});
    CHECK(check_invariants(missing, seed_ids(), {"OZB"}).ok());

    auto cyc = scenarios::root({scenarios::node("A", {scenarios::node("A")})});
    CHECK(check_invariants(cyc, {"A"}).cycle);
}

TEST_CASE("two clients converge after a single move each") {
    ScenarioConfig cfg;
    cfg.clients = 2;
    cfg.edits_per_client = 1;
    cfg.min_moves = cfg.max_moves = 1;
    cfg.seed = 5;
    auto report = run_scenario(cfg);
    CHECK(report.converged);
    CHECK(report.violations() == 0);
}

TEST_CASE("scenarios are deterministic per seed") {
    ScenarioConfig cfg;
    cfg.clients = 3;
    cfg.edits_per_client = 8;
    cfg.seed = 1234;
    auto a = run_scenario(cfg);
    auto b = run_scenario(cfg);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(a.entries[i].to_json() == b.entries[i].to_json());
    CHECK(a.passed());
}

TEST_CASE("legacy checks expose duplicates that the updated view avoids") {
    ScenarioConfig cfg;
    cfg.clients = 4;
    cfg.edits_per_client = 10;
    cfg.seed = 77;
    cfg.mode = melda::MaterializeMode::Legacy;
    auto legacy = run_scenario(cfg);
    CHECK(legacy.violations() > 0);
    cfg.mode = melda::MaterializeMode::Updated;
    CHECK(run_scenario(cfg).passed());
}

TEST_CASE("scenario needs two clients") {
    ScenarioConfig cfg;
    cfg.clients = 1;
    CHECK_THROWS_AS(run_scenario(cfg), melda::Error);
}
