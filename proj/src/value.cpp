#include "melda/value.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include <openssl/evp.h>

namespace melda {
namespace {

constexpr double kExactIntegerLimit = 9007199254740992.0;  // 2^53

void check_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            throw SerializationError("invalid UTF-8 lead byte");
        }
        if (i + len > s.size()) throw SerializationError("truncated UTF-8 sequence");
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) throw SerializationError("invalid UTF-8 continuation byte");
            cp = (cp << 6) | (cc & 0x3F);
        }
        static constexpr std::array<char32_t, 5> min_for_len{0, 0, 0x80, 0x800, 0x10000};
        if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            throw SerializationError("invalid UTF-8 code point");
        i += len;
    }
}

void write_string(std::string& out, std::string_view s) {
    check_utf8(s);
    out.push_back('"');
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\b': out += "\\b"; break;
        case '\f': out += "\\f"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (c < 0x20) {
                static constexpr char hex[] = "0123456789abcdef";
                out += "\\u00";
                out.push_back(hex[c >> 4]);
                out.push_back(hex[c & 0xF]);
            } else {
                out.push_back(ch);
            }
        }
    }
    out.push_back('"');
}

void write_double(std::string& out, double d) {
    if (!std::isfinite(d)) throw SerializationError("non-finite number has no JSON form");
    if (std::trunc(d) == d && std::fabs(d) < kExactIntegerLimit) {
        out += std::to_string(static_cast<std::int64_t>(d));
        return;
    }
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d);
    if (ec != std::errc{}) throw SerializationError("number formatting failed");
    out.append(buf.data(), end);
}

void newline(std::string& out, int indent, int depth) {
    if (indent < 0) return;
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent * depth), ' ');
}

void write_value(std::string& out, const Value& v, int indent, int depth) {
    switch (v.type()) {
    case Value::value_t::null: out += "null"; break;
    case Value::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
    case Value::value_t::number_integer: out += std::to_string(v.get<std::int64_t>()); break;
    case Value::value_t::number_unsigned: out += std::to_string(v.get<std::uint64_t>()); break;
    case Value::value_t::number_float: write_double(out, v.get<double>()); break;
    case Value::value_t::string: write_string(out, v.get_ref<const std::string&>()); break;
    case Value::value_t::array: {
        out.push_back('[');
        bool first = true;
        for (const auto& e : v) {
            if (!first) out.push_back(',');
            first = false;
            newline(out, indent, depth + 1);
            write_value(out, e, indent, depth + 1);
        }
        if (!v.empty()) newline(out, indent, depth);
        out.push_back(']');
        break;
    }
    case Value::value_t::object: {
        out.push_back('{');
        bool first = true;
        for (const auto& [k, e] : v.items()) {
            if (!first) out.push_back(',');
            first = false;
            newline(out, indent, depth + 1);
            write_string(out, k);
            out.push_back(':');
            if (indent >= 0) out.push_back(' ');
            write_value(out, e, indent, depth + 1);
        }
        if (!v.empty()) newline(out, indent, depth);
        out.push_back('}');
        break;
    }
    case Value::value_t::binary:
    case Value::value_t::discarded:
        throw SerializationError("value has no JSON form");
    }
}

}  // namespace

std::string canonical_serialize(const Value& v) {
    std::string out;
    write_value(out, v, -1, 0);
    return out;
}

std::string pretty_serialize(const Value& v) {
    std::string out;
    write_value(out, v, 4, 0);
    return out;
}

Value parse_json(std::string_view text) {
    try {
        return Value::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SerializationError(e.what());
    }
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xF]);
    }
    return out;
}

Digest digest(const Value& v) {
    if (v.is_object() && v.contains("_id")) {
        Value stripped = v;
        stripped.erase("_id");
        return sha256_hex(canonical_serialize(stripped));
    }
    return sha256_hex(canonical_serialize(v));
}

bool is_digest(std::string_view s) {
    if (s.size() != 64) return false;
    for (char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

}  // namespace melda
