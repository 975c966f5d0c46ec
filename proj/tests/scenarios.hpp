#pragma once

// Two-replica fixtures for the worked move/delete examples.

#include <string>

#include "melda/replica.hpp"
#include "oracle/oracle.hpp"

namespace scenarios {

using melda::ReplicaState;
using melda::Value;

inline const std::string kKids = "children\xE2\x99\xAD";

/// `{"_id": id, "children♭": [...]}`; pass no children to omit the key.
inline Value node(const std::string& id, std::initializer_list<Value> kids = {}, bool with_key = false) {
    Value v = {{"_id", id}};
    if (kids.size() > 0 || with_key) v[kKids] = Value(std::vector<Value>(kids));
    return v;
}

inline Value root(std::initializer_list<Value> kids) { return {{kKids, Value(std::vector<Value>(kids))}}; }

struct Fork {
    ReplicaState left;
    ReplicaState right;
    ReplicaState merged;
};

/// Commits `base` on one replica, copies it to a second, applies one edit on
/// each side, then melds both ways.
inline Fork fork(const Value& base, const Value& left_doc, const Value& right_doc) {
    Fork f;
    melda::commit(f.left, base);
    melda::meld_into(f.right, f.left);
    melda::commit(f.left, left_doc);
    melda::commit(f.right, right_doc);
    f.merged = melda::meld(f.left, f.right);
    return f;
}

// Reordering with a delete: 1a removes A, 1b inserts D in front and moves A last.
inline Value reorder_base() { return root({node("A"), node("B"), node("C")}); }
inline Value reorder_delete() { return root({node("B"), node("C")}); }
inline Value reorder_insert() { return root({node("D"), node("C"), node("B"), node("A")}); }

// Move with a delete: 1a removes A, 1b moves C into B.
inline Value move_delete_base() { return root({node("A"), node("B"), node("C")}); }
inline Value move_delete_remove() { return root({node("B"), node("C")}); }
inline Value move_delete_move() { return root({node("A"), node("B", {node("C")})}); }

// Crossing reparenting: 1a moves B under A, 1b moves A under B.
inline Value cross_base() { return root({node("A", {node("C")}), node("B")}); }
inline Value cross_a() { return root({node("A", {node("B"), node("C")})}); }
inline Value cross_b() { return root({node("B", {node("A", {node("C")})})}); }

// Array to field: 1a moves B into A's array, 1b moves C out of A into a field of B.
inline const std::string kFieldC = "C\xE2\x99\xAD";
inline Value mix_base() { return cross_base(); }
inline Value mix_a() { return cross_a(); }
inline Value mix_b() { return root({node("A"), Value{{"_id", "B"}, {kFieldC, node("C")}}}); }

using oracle::Version;

inline Version arr(std::initializer_list<std::string> ids) { return Version{{{kKids, oracle::Ids(ids)}}, {}}; }

/// Live leaves after melding cross_a / cross_b.
inline std::map<std::string, std::vector<Version>> cross_leaves() {
    return {{"root", {arr({"A"}), arr({"B"})}}, {"A", {arr({"B", "C"})}}, {"B", {arr({"A"})}}, {"C", {Version{}}}};
}

/// Live leaves after melding mix_a / mix_b. The root is only edited by mix_a.
inline std::map<std::string, std::vector<Version>> mix_leaves() {
    return {{"root", {arr({"A"})}},
            {"A", {arr({"B", "C"}), Version{}}},
            {"B", {Version{{}, {{kFieldC, "C"}}}}},
            {"C", {Version{}}}};
}

}  // namespace scenarios
