#include "melda/revision.hpp"

#include <charconv>

namespace melda {

std::string RevisionId::str() const { return std::to_string(seq) + "-" + digest; }

RevisionId RevisionId::parse(std::string_view text) {
    auto dash = text.find('-');
    if (dash == std::string_view::npos || dash == 0) throw Error("malformed revision '" + std::string(text) + "'");
    std::uint64_t seq = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + dash, seq);
    if (ec != std::errc{} || end != text.data() + dash || seq == 0)
        throw Error("malformed revision sequence in '" + std::string(text) + "'");
    auto d = text.substr(dash + 1);
    if (!is_digest(d)) throw Error("malformed revision digest in '" + std::string(text) + "'");
    return {seq, std::string(d)};
}

RevisionId new_root_revision(const Digest& d) { return {1, d}; }

RevisionId child_revision(const RevisionId& parent, const Digest& d) { return {parent.seq + 1, d}; }

const Value& tombstone_value() {
    static const Value v = {{"_deleted", true}};
    return v;
}

const Digest& tombstone_digest() {
    static const Digest d = digest(tombstone_value());
    return d;
}

bool RevisionTree::add_edge(std::optional<RevisionId> parent, RevisionId child) {
    if (parent) parents_.insert(*parent);
    return edges_.insert({std::move(parent), std::move(child)}).second;
}

std::vector<RevisionId> RevisionTree::leaves() const {
    std::set<RevisionId> out;
    for (const auto& e : edges_) {
        if (!parents_.contains(e.child)) out.insert(e.child);
    }
    return {out.begin(), out.end()};
}

RevisionTree merge_trees(const RevisionTree& a, const RevisionTree& b) {
    if (a.object() != b.object())
        throw Error("cannot merge revision trees of '" + a.object() + "' and '" + b.object() + "'");
    RevisionTree out = a;
    for (const auto& e : b.edges()) out.add_edge(e.parent, e.child);
    for (const auto& t : b.tombstones()) out.mark_tombstone(t);
    return out;
}

RevisionId winner(const RevisionTree& t) {
    auto leaves = t.leaves();
    if (leaves.empty()) throw Error("revision tree of '" + t.object() + "' is empty");
    return leaves.back();
}

bool is_deleted(const RevisionTree& t) { return t.is_tombstone(winner(t)); }

}  // namespace melda
