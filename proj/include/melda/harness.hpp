#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "melda/materialize.hpp"
#include "melda/value.hpp"

namespace melda::harness {

using Rng = std::mt19937_64;

struct ScenarioConfig {
    std::size_t clients = 10;
    std::size_t edits_per_client = 100;
    std::size_t min_moves = 1;
    std::size_t max_moves = 5;
    std::uint64_t seed = 1;
    /// A random pair of clients melds after every `meld_every` rounds of edits
    /// (0 disables incremental gossip). All pairs meld at the end regardless.
    std::size_t meld_every = 1;
    /// Mode used for the invariant checks. Clients always edit the updated view.
    MaterializeMode mode = MaterializeMode::Updated;
};

struct InvariantEntry {
    std::string phase;  // "edit", "meld" or "final"
    std::size_t round = 0;
    std::size_t client = 0;
    std::size_t present = 0;
    std::vector<ObjectId> duplicates;
    std::vector<ObjectId> missing;
    bool cycle = false;

    bool ok() const { return duplicates.empty() && missing.empty() && !cycle; }
    Value to_json() const;
};

struct InvariantReport {
    std::vector<InvariantEntry> entries;
    bool converged = false;
    std::size_t blocks = 0;

    std::size_t violations() const;
    bool passed() const { return converged && violations() == 0; }
    Value summary_json() const;
};

/// Two arrays of 51 objects: O001..O050 + OZA under "alpha♭", O051..O100 + OZB under "beta♭".
Value build_seed_document();
std::set<ObjectId> seed_ids();

/// Moves `moves` randomly chosen objects to a random position in the other array.
Value random_move_edit(const Value& doc, Rng& rng, std::size_t moves);
/// Same, with the number of moves drawn uniformly from [min_moves, max_moves].
Value random_move_edit(const Value& doc, Rng& rng, std::size_t min_moves, std::size_t max_moves);

/// Counts "_id" occurrences. Ids in `deleted` are not reported as missing.
InvariantEntry check_invariants(const Value& doc, const std::set<ObjectId>& expected,
                                const std::set<ObjectId>& deleted = {});

/// `on_entry` sees every entry as soon as it is recorded.
InvariantReport run_scenario(const ScenarioConfig& cfg,
                             const std::function<void(const InvariantEntry&)>& on_entry = {});

}  // namespace melda::harness
