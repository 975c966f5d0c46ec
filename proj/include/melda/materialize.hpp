#pragma once

#include <functional>
#include <map>
#include <optional>

#include "melda/flatten.hpp"
#include "melda/replica.hpp"
#include "melda/value.hpp"

namespace melda {

enum class MaterializeMode {
    /// Each object is used at most once; later references to it are dropped.
    Updated,
    /// References are resolved every time they occur (duplicates possible).
    /// Revisiting an object already on the current descent path is cut to
    /// keep the walk finite.
    Legacy,
};

/// Current flattened value of an object (no "_id"): the merged view of its
/// live leaves, or nullopt when the winner is a tombstone. Throws Error for an
/// unknown object and MissingContentError when a leaf cannot be reconstructed.
std::optional<Value> resolve_value(const ReplicaState& state, const ObjectId& id);

struct Materialization {
    Value document;
    /// For each object emitted into `document`: its flattened value as it was
    /// actually used, i.e. without the references that were dropped.
    std::map<ObjectId, Value> effective;
};

/// Looks up the flattened form of an object; nullopt means absent or deleted.
using ObjectSource = std::function<std::optional<Value>(const ObjectId&)>;

Materialization reconstruct(const ObjectId& root, const ObjectSource& source, MaterializeMode mode);

/// Throws EmptyReplicaError when the state has no root.
Materialization materialize(const ReplicaState& state, MaterializeMode mode = MaterializeMode::Updated);

Value unflatten(const ReplicaState& state, MaterializeMode mode = MaterializeMode::Updated);
Value unflatten(const FlatCollection& objects, const ObjectId& root, MaterializeMode mode = MaterializeMode::Updated);

}  // namespace melda
