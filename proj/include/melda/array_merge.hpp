#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "melda/value.hpp"

namespace melda {

/// Element identity used by array merging: strings (including references)
/// compare by content, other values by canonical bytes.
bool same_element(const Value& a, const Value& b);

/// Non-destructive merge: returns `target` with every element of `source`
/// that it lacks inserted next to the neighbours it had in `source`.
Value merge_arrays(const Value& source, Value target);

/// Merged view of a conflicted object. Starts from the winner and, for every
/// flat-marked key holding an array, folds in the same key of each other leaf.
/// `others` must already be in descending revision order.
Value merged_view(std::span<const Value* const> others, const Value& winner_value);

struct Retain {
    std::size_t count = 0;
    bool operator==(const Retain&) const = default;
};
struct Delete {
    std::size_t count = 0;
    bool operator==(const Delete&) const = default;
};
struct Insert {
    std::vector<Value> values;
    bool operator==(const Insert&) const = default;
};

using EditOp = std::variant<Retain, Delete, Insert>;

struct EditScript {
    Digest base;
    std::vector<EditOp> ops;

    bool operator==(const EditScript&) const = default;
};

class PatchError : public Error {
public:
    using Error::Error;
};

/// LCS-based script turning `base` into `updated`.
EditScript diff_array(const Value& base, const Value& updated);

/// Throws PatchError when the script does not consume exactly the base length.
Value patch_array(const Value& base, const EditScript& script);

/// `[["r",n],["d",n],["i",[...]]]`
Value ops_to_json(const std::vector<EditOp>& ops);
std::vector<EditOp> ops_from_json(const Value& v);

}  // namespace melda
