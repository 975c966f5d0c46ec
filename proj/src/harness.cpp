#include "melda/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "melda/replica.hpp"

namespace melda::harness {
namespace {

const std::string kAlpha = "alpha\xE2\x99\xAD";
const std::string kBeta = "beta\xE2\x99\xAD";

std::string numbered_id(int n) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "O%03d", n);
    return buf;
}

void walk(const Value& v, std::vector<ObjectId>& ancestors, std::map<ObjectId, std::size_t>& counts, bool& cycle) {
    if (v.is_array()) {
        for (const auto& e : v) walk(e, ancestors, counts, cycle);
        return;
    }
    if (!v.is_object()) return;
    bool pushed = false;
    if (auto it = v.find("_id"); it != v.end() && it->is_string()) {
        const auto& id = it->get_ref<const std::string&>();
        ++counts[id];
        if (std::find(ancestors.begin(), ancestors.end(), id) != ancestors.end()) cycle = true;
        ancestors.push_back(id);
        pushed = true;
    }
    for (const auto& [k, e] : v.items()) walk(e, ancestors, counts, cycle);
    if (pushed) ancestors.pop_back();
}

}  // namespace

Value InvariantEntry::to_json() const {
    return {{"phase", phase},       {"round", round},     {"client", client}, {"present", present},
            {"duplicates", duplicates}, {"missing", missing}, {"cycle", cycle},   {"ok", ok()}};
}

std::size_t InvariantReport::violations() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.ok(); }));
}

Value InvariantReport::summary_json() const {
    return {{"phase", "summary"},       {"checks", entries.size()}, {"violations", violations()},
            {"converged", converged},   {"blocks", blocks},         {"passed", passed()}};
}

Value build_seed_document() {
    Value alpha = Value::array();
    Value beta = Value::array();
    for (int i = 1; i <= 50; ++i) alpha.push_back({{"_id", numbered_id(i)}});
    alpha.push_back({{"_id", "OZA"}});
    for (int i = 51; i <= 100; ++i) beta.push_back({{"_id", numbered_id(i)}});
    beta.push_back({{"_id", "OZB"}});
    return {{kAlpha, std::move(alpha)}, {kBeta, std::move(beta)}};
}

std::set<ObjectId> seed_ids() {
    std::set<ObjectId> ids;
    for (int i = 1; i <= 100; ++i) ids.insert(numbered_id(i));
    ids.insert("OZA");
    ids.insert("OZB");
    return ids;
}

Value random_move_edit(const Value& doc, Rng& rng, std::size_t moves) {
    Value out = doc;
    Value& alpha = out.at(kAlpha);
    Value& beta = out.at(kBeta);
    for (std::size_t m = 0; m < moves; ++m) {
        const std::size_t total = alpha.size() + beta.size();
        if (total == 0) break;
        std::size_t pick = std::uniform_int_distribution<std::size_t>(0, total - 1)(rng);
        bool from_alpha = pick < alpha.size();
        Value& src = from_alpha ? alpha : beta;
        Value& dst = from_alpha ? beta : alpha;
        std::size_t idx = from_alpha ? pick : pick - alpha.size();
        Value moved = src[idx];
        src.erase(idx);
        std::size_t pos = std::uniform_int_distribution<std::size_t>(0, dst.size())(rng);
        dst.insert(dst.begin() + static_cast<std::ptrdiff_t>(pos), std::move(moved));
    }
    return out;
}

Value random_move_edit(const Value& doc, Rng& rng, std::size_t min_moves, std::size_t max_moves) {
    std::size_t k = std::uniform_int_distribution<std::size_t>(min_moves, std::max(min_moves, max_moves))(rng);
    return random_move_edit(doc, rng, k);
}

InvariantEntry check_invariants(const Value& doc, const std::set<ObjectId>& expected,
                                const std::set<ObjectId>& deleted) {
    InvariantEntry entry;
    std::map<ObjectId, std::size_t> counts;
    std::vector<ObjectId> ancestors;
    walk(doc, ancestors, counts, entry.cycle);
    entry.present = counts.size();
    for (const auto& [id, n] : counts) {
        if (n > 1) entry.duplicates.push_back(id);
    }
    for (const auto& id : expected) {
        if (!counts.contains(id) && !deleted.contains(id)) entry.missing.push_back(id);
    }
    return entry;
}

InvariantReport run_scenario(const ScenarioConfig& cfg, const std::function<void(const InvariantEntry&)>& on_entry) {
    if (cfg.clients < 2) throw Error("a scenario needs at least two clients");
    Rng rng(cfg.seed);
    InvariantReport report;
    const auto expected = seed_ids();

    auto record = [&](InvariantEntry e, const char* phase, std::size_t round, std::size_t client) {
        e.phase = phase;
        e.round = round;
        e.client = client;
        if (on_entry) on_entry(e);
        report.entries.push_back(std::move(e));
    };
    auto check = [&](const ReplicaState& r, const char* phase, std::size_t round, std::size_t client) {
        record(check_invariants(unflatten(r, cfg.mode), expected), phase, round, client);
    };

    std::vector<ReplicaState> replicas(cfg.clients);
    auto seed_block = commit(replicas[0], build_seed_document());
    for (std::size_t c = 1; c < cfg.clients; ++c) replicas[c].apply(*seed_block);

    for (std::size_t round = 0; round < cfg.edits_per_client; ++round) {
        for (std::size_t c = 0; c < cfg.clients; ++c) {
            Value doc = unflatten(replicas[c]);
            commit(replicas[c], random_move_edit(doc, rng, cfg.min_moves, cfg.max_moves));
            check(replicas[c], "edit", round, c);
        }
        if (cfg.meld_every != 0 && (round + 1) % cfg.meld_every == 0) {
            std::size_t a = std::uniform_int_distribution<std::size_t>(0, cfg.clients - 1)(rng);
            std::size_t b = std::uniform_int_distribution<std::size_t>(0, cfg.clients - 2)(rng);
            if (b >= a) ++b;
            meld_into(replicas[a], replicas[b]);
            meld_into(replicas[b], replicas[a]);
            check(replicas[a], "meld", round, a);
            check(replicas[b], "meld", round, b);
        }
    }

    for (std::size_t a = 0; a < cfg.clients; ++a) {
        for (std::size_t b = a + 1; b < cfg.clients; ++b) {
            meld_into(replicas[a], replicas[b]);
            meld_into(replicas[b], replicas[a]);
        }
    }
    std::string reference;
    report.converged = true;
    for (std::size_t c = 0; c < cfg.clients; ++c) {
        Value doc = unflatten(replicas[c], cfg.mode);
        record(check_invariants(doc, expected), "final", cfg.edits_per_client, c);
        auto bytes = canonical_serialize(doc);
        if (c == 0)
            reference = std::move(bytes);
        else if (bytes != reference)
            report.converged = false;
    }
    report.blocks = replicas[0].blocks().size();
    return report;
}

}  // namespace melda::harness
