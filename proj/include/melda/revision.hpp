#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "melda/value.hpp"

namespace melda {

/// A version of an object: generation number plus content digest, rendered "seq-digest".
/// Ordered by seq, then lexicographically by digest.
struct RevisionId {
    std::uint64_t seq = 0;
    Digest digest;

    std::string str() const;
    static RevisionId parse(std::string_view text);

    auto operator<=>(const RevisionId&) const = default;
};

RevisionId new_root_revision(const Digest& d);
RevisionId child_revision(const RevisionId& parent, const Digest& d);

/// The distinguished content of a deleted object's final version.
const Value& tombstone_value();
const Digest& tombstone_digest();

struct RevisionEdge {
    std::optional<RevisionId> parent;
    RevisionId child;

    auto operator<=>(const RevisionEdge&) const = default;
};

class RevisionTree {
public:
    RevisionTree() = default;
    explicit RevisionTree(ObjectId object) : object_(std::move(object)) {}

    const ObjectId& object() const { return object_; }
    const std::set<RevisionEdge>& edges() const { return edges_; }
    const std::set<RevisionId>& tombstones() const { return tombstones_; }
    bool empty() const { return edges_.empty(); }

    /// Records an edge; returns false when it was already present.
    bool add_edge(std::optional<RevisionId> parent, RevisionId child);
    void mark_tombstone(const RevisionId& rev) { tombstones_.insert(rev); }
    bool is_tombstone(const RevisionId& rev) const { return tombstones_.contains(rev); }

    /// Revisions that never appear as a parent, in ascending order.
    std::vector<RevisionId> leaves() const;

    bool operator==(const RevisionTree&) const = default;

private:
    ObjectId object_;
    std::set<RevisionEdge> edges_;
    std::set<RevisionId> tombstones_;
    std::set<RevisionId> parents_;
};

/// Union of edges and tombstones. Throws Error if the trees describe different objects.
RevisionTree merge_trees(const RevisionTree& a, const RevisionTree& b);

/// Greatest leaf. Throws Error for an empty tree.
RevisionId winner(const RevisionTree& t);

bool is_deleted(const RevisionTree& t);

}  // namespace melda
