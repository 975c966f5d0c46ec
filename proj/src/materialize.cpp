#include "melda/materialize.hpp"

#include <unordered_set>
#include <vector>

#include "melda/array_merge.hpp"

namespace melda {
namespace {

class Reconstructor {
public:
    Reconstructor(const ObjectSource& source, MaterializeMode mode, std::map<ObjectId, Value>& effective)
        : source_(source), mode_(mode), effective_(effective) {}

    std::optional<Value> object(const ObjectId& id) {
        if (mode_ == MaterializeMode::Updated) {
            if (!used_.insert(id).second) return std::nullopt;
            return build(id);
        }
        if (!on_path_.insert(id).second) return std::nullopt;
        auto out = build(id);
        on_path_.erase(id);
        return out;
    }

private:
    const ObjectSource& source_;
    MaterializeMode mode_;
    std::map<ObjectId, Value>& effective_;
    std::unordered_set<ObjectId> used_;
    std::unordered_set<ObjectId> on_path_;

    std::optional<Value> build(const ObjectId& id) {
        auto flat = source_(id);
        if (!flat) return std::nullopt;
        Value out = Value::object();
        Value eff = Value::object();
        for (const auto& [k, v] : flat->items()) {
            if (k == "_id" && v.is_string()) {
                out[k] = unescape(v.get_ref<const std::string&>());
                continue;
            }
            Value o, e;
            if (value(v, o, e)) {
                out[k] = std::move(o);
                eff[k] = std::move(e);
            }
        }
        effective_[id] = std::move(eff);
        return out;
    }

    // Returns false when `flat` is a reference that resolves to nothing.
    bool value(const Value& flat, Value& out, Value& eff) {
        switch (flat.type()) {
        case Value::value_t::string: {
            const auto& s = flat.get_ref<const std::string&>();
            if (is_reference(std::string_view(s))) {
                auto child = object(ObjectId(reference_target(s)));
                if (!child) return false;
                out = std::move(*child);
            } else {
                out = unescape(s);
            }
            eff = flat;
            return true;
        }
        case Value::value_t::array: {
            out = Value::array();
            eff = Value::array();
            for (const auto& e : flat) {
                Value o, ef;
                if (value(e, o, ef)) {
                    out.push_back(std::move(o));
                    eff.push_back(std::move(ef));
                }
            }
            return true;
        }
        case Value::value_t::object: {
            out = Value::object();
            eff = Value::object();
            for (const auto& [k, e] : flat.items()) {
                Value o, ef;
                if (value(e, o, ef)) {
                    out[k] = std::move(o);
                    eff[k] = std::move(ef);
                }
            }
            return true;
        }
        default:
            out = flat;
            eff = flat;
            return true;
        }
    }
};

}  // namespace

std::optional<Value> resolve_value(const ReplicaState& state, const ObjectId& id) {
    const RevisionTree* tree = state.tree(id);
    if (tree == nullptr || tree->empty()) throw Error("no revision tree for object '" + id + "'");
    auto leaves = tree->leaves();
    const RevisionId& win = leaves.back();
    if (tree->is_tombstone(win)) return std::nullopt;

    auto lookup = [&](const RevisionId& rev) -> const Value* {
        const Value* v = state.content(rev.digest);
        if (v == nullptr)
            throw MissingContentError("content " + rev.digest + " of object '" + id + "' is not available");
        return v;
    };

    const Value* winner_value = lookup(win);
    std::vector<const Value*> others;
    for (auto it = std::next(leaves.rbegin()); it != leaves.rend(); ++it) {
        if (!tree->is_tombstone(*it)) others.push_back(lookup(*it));
    }
    return merged_view(others, *winner_value);
}

Materialization reconstruct(const ObjectId& root, const ObjectSource& source, MaterializeMode mode) {
    Materialization m;
    Reconstructor r(source, mode, m.effective);
    auto doc = r.object(root);
    if (!doc) throw Error("root object '" + root + "' is missing or deleted");
    m.document = std::move(*doc);
    return m;
}

Materialization materialize(const ReplicaState& state, MaterializeMode mode) {
    if (!state.root_id()) throw EmptyReplicaError("replica holds no document");
    ObjectSource source = [&state](const ObjectId& id) -> std::optional<Value> {
        if (state.tree(id) == nullptr) return std::nullopt;
        auto v = resolve_value(state, id);
        if (v && !is_anonymous(id)) (*v)["_id"] = escape(id);
        return v;
    };
    return reconstruct(*state.root_id(), source, mode);
}

Value unflatten(const ReplicaState& state, MaterializeMode mode) { return materialize(state, mode).document; }

Value unflatten(const FlatCollection& objects, const ObjectId& root, MaterializeMode mode) {
    ObjectSource source = [&objects](const ObjectId& id) -> std::optional<Value> {
        auto it = objects.find(id);
        if (it == objects.end()) return std::nullopt;
        return it->second;
    };
    return reconstruct(root, source, mode).document;
}

}  // namespace melda
