#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "melda/value.hpp"

namespace melda {

/// UTF-8 encoding of U+266D, the suffix that enables extraction of a key's objects.
inline constexpr std::string_view kFlatMarker = "\xE2\x99\xAD";

/// Prefix of every literal string in flattened form.
inline constexpr char kLiteralPrefix = '\x01';
/// Prefix of every object reference in flattened form.
inline constexpr char kReferencePrefix = '\x02';
/// Leading character of identifiers generated from the document path.
inline constexpr char kAnonymousPrefix = '\x1E';

class FlattenError : public Error {
public:
    using Error::Error;
};

bool is_flat_key(std::string_view key);

std::string escape(std::string_view s);
/// Throws FlattenError for references and for strings lacking the literal prefix.
std::string unescape(std::string_view s);

std::string make_reference(std::string_view id);
bool is_reference(std::string_view s);
bool is_reference(const Value& v);
/// Target of a reference string; the caller guarantees is_reference(s).
std::string_view reference_target(std::string_view s);

/// True for identifiers synthesized from a path rather than taken from "_id".
bool is_anonymous(std::string_view id);

/// The anonymous root identifier (a root document without "_id").
ObjectId anonymous_root_id();

struct PathSegment {
    ObjectId owner;
    std::string key;

    bool operator==(const PathSegment&) const = default;
};

using FlatPath = std::vector<PathSegment>;

/// Explicit "_id" when present, otherwise an identifier derived from the
/// trailing segments that share the nearest extracted owner plus the position
/// among array siblings.
ObjectId make_identifier(const Value& obj, const FlatPath& path, std::size_t sibling_ordinal);

/// Flattened objects keyed by id. Each value is a Record whose strings are
/// escaped and whose extracted children are replaced by references.
using FlatCollection = std::map<ObjectId, Value>;

struct Flattened {
    ObjectId root_id;
    FlatCollection objects;
};

/// Decomposes a Record document. Records are extracted when the nearest key
/// above them ends with the flat marker (array elements inherit the marking
/// of the array's key); the top-level Record is always extracted as the root.
Flattened flatten(const Value& doc);

}  // namespace melda
