#include "melda/flatten.hpp"

namespace melda {
namespace {

constexpr char kSegmentSeparator = '\x1F';
constexpr char kIndexSeparator = '\x1D';

class Flattener {
public:
    Flattened run(const Value& doc) {
        if (!doc.is_object()) throw FlattenError("document root must be an object");
        Flattened out;
        out.root_id = extract(doc, {}, 0);
        out.objects = std::move(objects_);
        return out;
    }

private:
    FlatCollection objects_;

    ObjectId extract(const Value& obj, const FlatPath& path, std::size_t ordinal) {
        ObjectId id = make_identifier(obj, path, ordinal);
        Value flat = Value::object();
        for (const auto& [k, v] : obj.items()) {
            FlatPath child = path;
            child.push_back({id, k});
            flat[k] = value(v, child, is_flat_key(k), 0);
        }
        if (!objects_.emplace(id, std::move(flat)).second)
            throw FlattenError("object id '" + id + "' appears more than once in the document");
        return id;
    }

    Value value(const Value& v, const FlatPath& path, bool flat, std::size_t ordinal) {
        switch (v.type()) {
        case Value::value_t::string:
            return escape(v.get_ref<const std::string&>());
        case Value::value_t::array: {
            Value out = Value::array();
            std::size_t i = 0;
            for (const auto& e : v) {
                if (e.is_array()) {
                    // nested arrays fold the outer position into the key so
                    // anonymous grandchildren stay distinct
                    FlatPath nested = path;
                    nested.back().key += kIndexSeparator + std::to_string(i);
                    out.push_back(value(e, nested, flat, 0));
                } else {
                    out.push_back(value(e, path, flat, i));
                }
                ++i;
            }
            return out;
        }
        case Value::value_t::object: {
            if (flat) return make_reference(extract(v, path, ordinal));
            Value out = Value::object();
            const ObjectId& owner = path.back().owner;
            for (const auto& [k, e] : v.items()) {
                FlatPath child = path;
                if (ordinal != 0) child.back().key += kIndexSeparator + std::to_string(ordinal);
                child.push_back({owner, k});
                out[k] = value(e, child, is_flat_key(k), 0);
            }
            return out;
        }
        default:
            return v;
        }
    }
};

}  // namespace

bool is_flat_key(std::string_view key) { return key.ends_with(kFlatMarker); }

std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 1);
    out.push_back(kLiteralPrefix);
    out.append(s);
    return out;
}

std::string unescape(std::string_view s) {
    if (s.empty() || s.front() != kLiteralPrefix) {
        if (!s.empty() && s.front() == kReferencePrefix)
            throw FlattenError("attempt to unescape an object reference");
        throw FlattenError("string is not in escaped form");
    }
    return std::string(s.substr(1));
}

std::string make_reference(std::string_view id) {
    std::string out;
    out.reserve(id.size() + 1);
    out.push_back(kReferencePrefix);
    out.append(id);
    return out;
}

bool is_reference(std::string_view s) { return s.size() > 1 && s.front() == kReferencePrefix; }

bool is_reference(const Value& v) {
    return v.is_string() && is_reference(std::string_view(v.get_ref<const std::string&>()));
}

std::string_view reference_target(std::string_view s) { return s.substr(1); }

bool is_anonymous(std::string_view id) { return !id.empty() && id.front() == kAnonymousPrefix; }

ObjectId anonymous_root_id() { return ObjectId(1, kAnonymousPrefix); }

ObjectId make_identifier(const Value& obj, const FlatPath& path, std::size_t sibling_ordinal) {
    if (!obj.is_object()) throw FlattenError("identifiers are only assigned to objects");
    if (auto it = obj.find("_id"); it != obj.end()) {
        if (!it->is_string()) throw FlattenError("_id must be a string");
        const auto& id = it->get_ref<const std::string&>();
        if (id.empty()) throw FlattenError("_id must not be empty");
        if (is_anonymous(id)) throw FlattenError("_id must not start with a reserved control character");
        return id;
    }
    if (path.empty()) return anonymous_root_id();

    const ObjectId& owner = path.back().owner;
    auto first = path.end();
    while (first != path.begin() && std::prev(first)->owner == owner) --first;

    ObjectId id = is_anonymous(owner) ? owner : kAnonymousPrefix + owner;
    for (auto it = first; it != path.end(); ++it) {
        id.push_back(kSegmentSeparator);
        id += it->key;
    }
    id.push_back(kSegmentSeparator);
    id += std::to_string(sibling_ordinal);
    return id;
}

Flattened flatten(const Value& doc) { return Flattener{}.run(doc); }

}  // namespace melda
