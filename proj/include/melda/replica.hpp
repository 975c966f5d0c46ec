#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "melda/revision.hpp"
#include "melda/value.hpp"

namespace melda {

using BlockId = Digest;

class BlockError : public Error {
public:
    using Error::Error;
};

class RootMismatchError : public Error {
public:
    using Error::Error;
};

class MissingContentError : public Error {
public:
    using Error::Error;
};

class EmptyReplicaError : public Error {
public:
    using Error::Error;
};

/// One revision-tree edge carried by a block. A revision with several
/// parents (a commit that closes a conflict) appears once per parent.
struct Change {
    ObjectId object;
    std::optional<RevisionId> parent;
    RevisionId revision;
    bool deleted = false;

    auto operator<=>(const Change&) const = default;
};

/// Idempotent unit of replication.
///
/// `objects` maps a content digest either to the full flattened Record
/// (without its top-level "_id") or to a patch entry
/// `{"base": <digest>, "patch": {key: edit-ops}, "set": {...}, "unset": [...]}`
/// that rebuilds the Record from another stored version.
struct DeltaBlock {
    BlockId id;
    ObjectId root;
    std::map<Digest, Value> objects;
    std::set<Change> changes;
    std::set<BlockId> parents;

    Value to_json() const;
    /// Canonical bytes; the block id is their SHA-256.
    std::string serialize() const;
    /// Recomputes `id` from the current contents.
    void seal();

    /// Parses a serialized block. When `expected_id` is given it must equal the
    /// digest of `bytes`.
    static DeltaBlock parse(std::string_view bytes, const std::optional<BlockId>& expected_id = std::nullopt);
    static DeltaBlock from_json(const Value& v);

    bool operator==(const DeltaBlock&) const = default;
};

bool is_patch_entry(const Value& v);

/// Full CRDT state of one replica: revision trees, content store, and the
/// blocks that produced them.
class ReplicaState {
public:
    bool empty() const { return blocks_.empty(); }
    const std::optional<ObjectId>& root_id() const { return root_; }
    const std::map<ObjectId, RevisionTree>& trees() const { return trees_; }
    const RevisionTree* tree(const ObjectId& id) const;
    /// Raw content entries as received (records and patch entries).
    const std::map<Digest, Value>& contents() const { return contents_; }
    /// Fully expanded Record for a digest, or nullptr when it is not (yet) reconstructible.
    const Value* content(const Digest& d) const;
    const std::map<BlockId, DeltaBlock>& blocks() const { return blocks_; }
    bool has_block(const BlockId& id) const { return blocks_.contains(id); }
    /// Applied blocks that no other applied block names as a parent.
    std::set<BlockId> heads() const;

    /// Applies a block in place. Returns false if it had already been applied.
    /// Throws BlockError when the id does not match the contents and
    /// RootMismatchError when the block belongs to another document.
    bool apply(const DeltaBlock& block);

    /// Equality of the replicated state (trees, contents, applied blocks, root).
    bool operator==(const ReplicaState& other) const;

private:
    void store_content(const Digest& d, const Value& v);
    void expand(const Digest& d, const Value& entry);

    std::optional<ObjectId> root_;
    std::map<ObjectId, RevisionTree> trees_;
    std::map<Digest, Value> contents_;
    std::map<Digest, Value> expanded_;
    std::map<Digest, std::set<Digest>> waiting_on_base_;
    std::map<BlockId, DeltaBlock> blocks_;
    std::set<BlockId> referenced_;
};

ReplicaState apply_block(ReplicaState state, const DeltaBlock& block);

/// Records the document as the replica's next version. Returns the block that
/// was created and applied, or nullopt when the document matches what the
/// replica currently materializes.
std::optional<DeltaBlock> commit(ReplicaState& state, const Value& doc);

/// Copies into `into` every block of `from` it does not have; returns how many.
std::size_t meld_into(ReplicaState& into, const ReplicaState& from);
ReplicaState meld(const ReplicaState& a, const ReplicaState& b);

inline constexpr std::string_view kBlockSuffix = ".delta.json";

/// Writes every block as `<block-id>.delta.json`; existing files are kept.
/// Returns the number of files written.
std::size_t save_pack(const ReplicaState& state, const std::filesystem::path& dir);
ReplicaState load_pack(const std::filesystem::path& dir);

}  // namespace melda
