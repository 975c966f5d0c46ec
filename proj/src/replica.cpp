#include "melda/replica.hpp"

#include "melda/array_merge.hpp"
#include "melda/flatten.hpp"
#include "melda/materialize.hpp"

namespace melda {
namespace {

Value strip_id(Value v) {
    v.erase("_id");
    return v;
}

Value change_to_json(const Change& c) {
    return Value::array({c.object, c.parent ? Value(c.parent->str()) : Value(nullptr), c.revision.str(), c.deleted});
}

Change change_from_json(const Value& v) {
    if (!v.is_array() || v.size() != 4 || !v[0].is_string() || !(v[1].is_null() || v[1].is_string()) ||
        !v[2].is_string() || !v[3].is_boolean())
        throw BlockError("malformed change entry");
    Change c;
    c.object = v[0].get<std::string>();
    if (c.object.empty()) throw BlockError("change names an empty object id");
    if (v[1].is_string()) c.parent = RevisionId::parse(v[1].get<std::string>());
    c.revision = RevisionId::parse(v[2].get<std::string>());
    c.deleted = v[3].get<bool>();
    if (c.parent ? c.revision.seq <= c.parent->seq : c.revision.seq != 1)
        throw BlockError("revision " + c.revision.str() + " has an inconsistent sequence number");
    if (c.deleted && c.revision.digest != tombstone_digest())
        throw BlockError("deletion " + c.revision.str() + " does not carry the tombstone digest");
    return c;
}

/// Patch entry describing `updated` relative to `base`.
Value make_patch(const Digest& base_digest, const Value& base, const Value& updated) {
    Value patch = Value::object();
    Value set = Value::object();
    Value unset = Value::array();
    for (const auto& [k, v] : updated.items()) {
        auto it = base.find(k);
        if (it != base.end() && canonical_serialize(*it) == canonical_serialize(v)) continue;
        if (it != base.end() && it->is_array() && v.is_array())
            patch[k] = ops_to_json(diff_array(*it, v).ops);
        else
            set[k] = v;
    }
    for (const auto& [k, v] : base.items()) {
        if (!updated.contains(k)) unset.push_back(k);
    }
    Value entry = {{"base", base_digest}, {"patch", std::move(patch)}};
    if (!set.empty()) entry["set"] = std::move(set);
    if (!unset.empty()) entry["unset"] = std::move(unset);
    return entry;
}

Value apply_patch(const Value& base, const Value& entry) {
    Value out = base;
    for (const auto& [k, ops] : entry.at("patch").items()) {
        auto it = out.find(k);
        if (it == out.end()) throw PatchError("patched key '" + k + "' is absent from the base");
        *it = patch_array(*it, EditScript{{}, ops_from_json(ops)});
    }
    if (auto it = entry.find("set"); it != entry.end()) {
        if (!it->is_object()) throw PatchError("patch 'set' must be an object");
        for (const auto& [k, v] : it->items()) out[k] = v;
    }
    if (auto it = entry.find("unset"); it != entry.end()) {
        if (!it->is_array()) throw PatchError("patch 'unset' must be an array");
        for (const auto& k : *it) out.erase(k.get<std::string>());
    }
    return out;
}

}  // namespace

bool is_patch_entry(const Value& v) {
    if (!v.is_object() || v.size() < 2 || v.size() > 4) return false;
    auto base = v.find("base");
    auto patch = v.find("patch");
    // literal strings in records always carry the escape prefix, so an
    // unprefixed digest under "base" cannot come from a user record
    return base != v.end() && base->is_string() && is_digest(base->get_ref<const std::string&>()) &&
           patch != v.end() && patch->is_object();
}

Value DeltaBlock::to_json() const {
    Value changes_json = Value::array();
    for (const auto& c : changes) changes_json.push_back(change_to_json(c));
    Value objects_json = Value::object();
    for (const auto& [d, v] : objects) objects_json[d] = v;
    Value parents_json = Value::array();
    for (const auto& p : parents) parents_json.push_back(p);
    return {{"changes", std::move(changes_json)},
            {"objects", std::move(objects_json)},
            {"parents", std::move(parents_json)},
            {"root", root}};
}

std::string DeltaBlock::serialize() const { return canonical_serialize(to_json()); }

void DeltaBlock::seal() { id = sha256_hex(serialize()); }

DeltaBlock DeltaBlock::from_json(const Value& v) {
    if (!v.is_object()) throw BlockError("block must be an object");
    for (const char* key : {"changes", "objects", "parents", "root"}) {
        if (!v.contains(key)) throw BlockError(std::string("block lacks '") + key + "'");
    }
    if (v.size() != 4) throw BlockError("block has unexpected keys");
    const auto& changes = v.at("changes");
    const auto& objects = v.at("objects");
    const auto& parents = v.at("parents");
    const auto& root = v.at("root");
    if (!changes.is_array() || !objects.is_object() || !parents.is_array() || !root.is_string())
        throw BlockError("block fields have the wrong types");

    DeltaBlock b;
    b.root = root.get<std::string>();
    if (b.root.empty()) throw BlockError("block root id is empty");
    for (const auto& c : changes) b.changes.insert(change_from_json(c));
    for (const auto& [d, o] : objects.items()) {
        if (!is_digest(d)) throw BlockError("object key '" + d + "' is not a digest");
        if (!o.is_object()) throw BlockError("object " + d + " is not a record");
        b.objects.emplace(d, o);
    }
    for (const auto& p : parents) {
        if (!p.is_string() || !is_digest(p.get_ref<const std::string&>()))
            throw BlockError("block parent is not a digest");
        b.parents.insert(p.get<std::string>());
    }
    b.seal();
    return b;
}

DeltaBlock DeltaBlock::parse(std::string_view bytes, const std::optional<BlockId>& expected_id) {
    if (expected_id && sha256_hex(bytes) != *expected_id)
        throw BlockError("block bytes do not hash to " + *expected_id);
    Value v;
    try {
        v = parse_json(bytes);
    } catch (const SerializationError& e) {
        throw BlockError(std::string("block is not valid JSON: ") + e.what());
    }
    auto b = from_json(v);
    if (expected_id && b.id != *expected_id) throw BlockError("block " + *expected_id + " is not in canonical form");
    return b;
}

const RevisionTree* ReplicaState::tree(const ObjectId& id) const {
    auto it = trees_.find(id);
    return it == trees_.end() ? nullptr : &it->second;
}

const Value* ReplicaState::content(const Digest& d) const {
    auto it = expanded_.find(d);
    return it == expanded_.end() ? nullptr : &it->second;
}

std::set<BlockId> ReplicaState::heads() const {
    std::set<BlockId> out;
    for (const auto& [id, b] : blocks_) {
        if (!referenced_.contains(id)) out.insert(id);
    }
    return out;
}

bool ReplicaState::operator==(const ReplicaState& other) const {
    return root_ == other.root_ && trees_ == other.trees_ && contents_ == other.contents_ &&
           blocks_.size() == other.blocks_.size() &&
           std::equal(blocks_.begin(), blocks_.end(), other.blocks_.begin(),
                      [](const auto& a, const auto& b) { return a.first == b.first; });
}

void ReplicaState::expand(const Digest& d, const Value& full) {
    if (expanded_.contains(d)) return;
    if (digest(full) != d) throw BlockError("content does not hash to its digest " + d);
    expanded_.emplace(d, full);
    auto waiting = waiting_on_base_.find(d);
    if (waiting == waiting_on_base_.end()) return;
    auto dependents = std::move(waiting->second);
    waiting_on_base_.erase(waiting);
    for (const auto& dep : dependents) expand(dep, apply_patch(expanded_.at(d), contents_.at(dep)));
}

void ReplicaState::store_content(const Digest& d, const Value& v) {
    if (contents_.contains(d)) return;
    contents_.emplace(d, v);
    if (!is_patch_entry(v)) {
        expand(d, v);
        return;
    }
    const auto& base = v.at("base").get_ref<const std::string&>();
    if (const Value* b = content(base)) {
        expand(d, apply_patch(*b, v));
    } else {
        waiting_on_base_[base].insert(d);
    }
}

bool ReplicaState::apply(const DeltaBlock& block) {
    if (blocks_.contains(block.id)) return false;
    if (sha256_hex(block.serialize()) != block.id) throw BlockError("block id " + block.id + " does not match its contents");
    if (root_ && *root_ != block.root)
        throw RootMismatchError("block " + block.id + " belongs to document '" + block.root + "', replica holds '" +
                                *root_ + "'");

    // Validate everything that can be checked locally before mutating.
    for (const auto& [d, v] : block.objects) {
        if (!is_patch_entry(v) && digest(v) != d) throw BlockError("object " + d + " does not match its digest");
    }

    root_ = block.root;
    for (const auto& [d, v] : block.objects) store_content(d, v);
    for (const auto& c : block.changes) {
        auto [it, inserted] = trees_.try_emplace(c.object, c.object);
        it->second.add_edge(c.parent, c.revision);
        if (c.deleted) it->second.mark_tombstone(c.revision);
    }
    referenced_.insert(block.parents.begin(), block.parents.end());
    blocks_.emplace(block.id, block);
    return true;
}

ReplicaState apply_block(ReplicaState state, const DeltaBlock& block) {
    state.apply(block);
    return state;
}

std::optional<DeltaBlock> commit(ReplicaState& state, const Value& doc) {
    Flattened flat = flatten(doc);
    if (state.root_id() && *state.root_id() != flat.root_id)
        throw RootMismatchError("document root '" + flat.root_id + "' differs from replica root '" + *state.root_id() +
                                "'");

    std::map<ObjectId, Value> previous;
    if (!state.empty()) previous = materialize(state).effective;

    DeltaBlock block;
    block.root = flat.root_id;
    block.parents = state.heads();

    auto store = [&](const Digest& d, Value v) {
        if (!state.contents().contains(d)) block.objects.emplace(d, std::move(v));
    };
    auto add_successor = [&](const ObjectId& id, const RevisionTree& tree, const Digest& d, bool deleted) {
        auto leaves = tree.leaves();
        RevisionId next = child_revision(leaves.back(), d);
        for (const auto& leaf : leaves) block.changes.insert({id, leaf, next, deleted});
        return leaves.back();
    };

    for (auto& [id, obj] : flat.objects) {
        Value content = strip_id(std::move(obj));
        Digest d = digest(content);
        const RevisionTree* tree = state.tree(id);
        if (tree == nullptr) {
            block.changes.insert({id, std::nullopt, new_root_revision(d), false});
            store(d, std::move(content));
            continue;
        }
        if (auto prev = previous.find(id); prev != previous.end()) {
            if (digest(prev->second) == d) continue;
        } else if (auto current = resolve_value(state, id); current && digest(*current) == d) {
            continue;
        }
        RevisionId base = add_successor(id, *tree, d, false);
        if (state.contents().contains(d)) continue;
        const Value* base_value = tree->is_tombstone(base) ? nullptr : state.content(base.digest);
        if (base_value != nullptr) {
            Value patch = make_patch(base.digest, *base_value, content);
            if (canonical_serialize(patch).size() < canonical_serialize(content).size()) {
                store(d, std::move(patch));
                continue;
            }
        }
        store(d, std::move(content));
    }

    for (const auto& [id, eff] : previous) {
        if (flat.objects.contains(id)) continue;
        add_successor(id, *state.tree(id), tombstone_digest(), true);
        store(tombstone_digest(), tombstone_value());
    }

    if (block.changes.empty()) return std::nullopt;
    block.seal();
    state.apply(block);
    return block;
}

std::size_t meld_into(ReplicaState& into, const ReplicaState& from) {
    if (into.root_id() && from.root_id() && *into.root_id() != *from.root_id())
        throw RootMismatchError("cannot meld document '" + *from.root_id() + "' into '" + *into.root_id() + "'");
    std::size_t added = 0;
    for (const auto& [id, block] : from.blocks()) {
        if (into.apply(block)) ++added;
    }
    return added;
}

ReplicaState meld(const ReplicaState& a, const ReplicaState& b) {
    ReplicaState out = a;
    meld_into(out, b);
    return out;
}

}  // namespace melda
