#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace melda {

/// A JSON value. Objects are backed by std::map, so iteration is always in
/// byte (and therefore Unicode code point) order of the keys.
using Value = nlohmann::json;

/// Stable identifier of an object across all of its versions.
using ObjectId = std::string;

/// 64-character lowercase hex SHA-256.
using Digest = std::string;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for values that have no canonical JSON form (NaN, infinities,
/// invalid UTF-8) and for malformed JSON input.
class SerializationError : public Error {
public:
    using Error::Error;
};

/// Compact canonical form: keys sorted by code point, no whitespace,
/// shortest round-trip numbers, integral doubles below 2^53 printed as
/// integers, minimal string escaping.
std::string canonical_serialize(const Value& v);

/// Same number and string rules as canonical_serialize, laid out with
/// 4-space indentation.
std::string pretty_serialize(const Value& v);

Value parse_json(std::string_view text);

std::string sha256_hex(std::string_view bytes);

/// SHA-256 of the canonical bytes, ignoring a top-level "_id" field.
Digest digest(const Value& v);

bool is_digest(std::string_view s);

}  // namespace melda
