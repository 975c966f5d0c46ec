#include "melda/array_merge.hpp"

#include <algorithm>

#include "melda/flatten.hpp"

namespace melda {
namespace {

// Beyond this many DP cells the diff degrades to delete-all/insert-all.
constexpr std::size_t kMaxLcsCells = std::size_t{1} << 22;

std::ptrdiff_t index_of(const Value& arr, const Value& e) {
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (same_element(arr[i], e)) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
}

void push_op(std::vector<EditOp>& ops, EditOp op) {
    if (!ops.empty() && ops.back().index() == op.index()) {
        std::visit(
            [&](auto& last) {
                using T = std::decay_t<decltype(last)>;
                auto& next = std::get<T>(op);
                if constexpr (std::is_same_v<T, Insert>) {
                    for (auto& v : next.values) last.values.push_back(std::move(v));
                } else {
                    last.count += next.count;
                }
            },
            ops.back());
        return;
    }
    ops.push_back(std::move(op));
}

}  // namespace

bool same_element(const Value& a, const Value& b) {
    if (a.is_string() && b.is_string()) return a.get_ref<const std::string&>() == b.get_ref<const std::string&>();
    if (a.type() != b.type() && !(a.is_number() && b.is_number())) return false;
    return canonical_serialize(a) == canonical_serialize(b);
}

Value merge_arrays(const Value& source, Value target) {
    std::ptrdiff_t at = 0;
    std::size_t pending = 0;
    for (const auto& e : source) {
        if (auto i = index_of(target, e); i >= 0) {
            at = i;
            break;
        }
        ++pending;
    }
    std::size_t step = 0;
    for (const auto& e : source) {
        if (auto i = index_of(target, e); i >= 0) {
            at = i;
        } else if (step < pending) {
            target.insert(target.begin() + at, e);
            pending = step;
        } else {
            ++at;
            target.insert(target.begin() + at, e);
        }
        ++step;
    }
    return target;
}

Value merged_view(std::span<const Value* const> others, const Value& winner_value) {
    Value out = winner_value;
    if (others.empty() || !out.is_object()) return out;
    for (auto& [key, field] : out.items()) {
        if (!field.is_array() || !is_flat_key(key)) continue;
        for (const Value* other : others) {
            auto it = other->find(key);
            if (it == other->end() || !it->is_array()) continue;
            field = merge_arrays(*it, std::move(field));
        }
    }
    return out;
}

EditScript diff_array(const Value& base, const Value& updated) {
    EditScript script;
    script.base = digest(base);
    const std::size_t n = base.size();
    const std::size_t m = updated.size();

    std::size_t prefix = 0;
    while (prefix < n && prefix < m && same_element(base[prefix], updated[prefix])) ++prefix;
    std::size_t suffix = 0;
    while (suffix < n - prefix && suffix < m - prefix &&
           same_element(base[n - 1 - suffix], updated[m - 1 - suffix]))
        ++suffix;

    auto& ops = script.ops;
    if (prefix > 0) push_op(ops, Retain{prefix});

    const std::size_t rows = n - prefix - suffix;
    const std::size_t cols = m - prefix - suffix;
    auto b = [&](std::size_t i) -> const Value& { return base[prefix + i]; };
    auto u = [&](std::size_t j) -> const Value& { return updated[prefix + j]; };

    if (rows > 0 && cols > 0 && (rows + 1) * (cols + 1) <= kMaxLcsCells) {
        // lcs[i][j] = LCS length of b[i..] and u[j..]
        std::vector<std::uint32_t> lcs((rows + 1) * (cols + 1), 0);
        auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return lcs[i * (cols + 1) + j]; };
        for (std::size_t i = rows; i-- > 0;) {
            for (std::size_t j = cols; j-- > 0;) {
                at(i, j) = same_element(b(i), u(j)) ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
            }
        }
        std::size_t i = 0, j = 0;
        while (i < rows && j < cols) {
            if (same_element(b(i), u(j))) {
                push_op(ops, Retain{1});
                ++i;
                ++j;
            } else if (at(i + 1, j) >= at(i, j + 1)) {
                push_op(ops, Delete{1});
                ++i;
            } else {
                push_op(ops, Insert{{u(j)}});
                ++j;
            }
        }
        if (i < rows) push_op(ops, Delete{rows - i});
        for (; j < cols; ++j) push_op(ops, Insert{{u(j)}});
    } else {
        if (rows > 0) push_op(ops, Delete{rows});
        for (std::size_t j = 0; j < cols; ++j) push_op(ops, Insert{{u(j)}});
    }

    if (suffix > 0) push_op(ops, Retain{suffix});
    return script;
}

Value patch_array(const Value& base, const EditScript& script) {
    if (!base.is_array()) throw PatchError("patch base is not an array");
    Value out = Value::array();
    std::size_t pos = 0;
    for (const auto& op : script.ops) {
        if (const auto* r = std::get_if<Retain>(&op)) {
            if (pos + r->count > base.size()) throw PatchError("retain runs past the end of the base array");
            for (std::size_t k = 0; k < r->count; ++k) out.push_back(base[pos + k]);
            pos += r->count;
        } else if (const auto* d = std::get_if<Delete>(&op)) {
            if (pos + d->count > base.size()) throw PatchError("delete runs past the end of the base array");
            pos += d->count;
        } else {
            for (const auto& v : std::get<Insert>(op).values) out.push_back(v);
        }
    }
    if (pos != base.size()) throw PatchError("patch does not consume the whole base array");
    return out;
}

Value ops_to_json(const std::vector<EditOp>& ops) {
    Value out = Value::array();
    for (const auto& op : ops) {
        if (const auto* r = std::get_if<Retain>(&op)) {
            out.push_back(Value::array({"r", r->count}));
        } else if (const auto* d = std::get_if<Delete>(&op)) {
            out.push_back(Value::array({"d", d->count}));
        } else {
            Value vals = Value::array();
            for (const auto& v : std::get<Insert>(op).values) vals.push_back(v);
            out.push_back(Value::array({"i", std::move(vals)}));
        }
    }
    return out;
}

std::vector<EditOp> ops_from_json(const Value& v) {
    if (!v.is_array()) throw PatchError("edit script must be an array");
    std::vector<EditOp> ops;
    for (const auto& op : v) {
        if (!op.is_array() || op.size() != 2 || !op[0].is_string()) throw PatchError("malformed edit operation");
        const auto& tag = op[0].get_ref<const std::string&>();
        if (tag == "r" || tag == "d") {
            if (!op[1].is_number_unsigned() && !(op[1].is_number_integer() && op[1].get<std::int64_t>() >= 0))
                throw PatchError("edit count must be a non-negative integer");
            auto n = op[1].get<std::size_t>();
            if (tag == "r")
                ops.emplace_back(Retain{n});
            else
                ops.emplace_back(Delete{n});
        } else if (tag == "i") {
            if (!op[1].is_array()) throw PatchError("insert payload must be an array");
            ops.emplace_back(Insert{std::vector<Value>(op[1].begin(), op[1].end())});
        } else {
            throw PatchError("unknown edit operation '" + tag + "'");
        }
    }
    return ops;
}

}  // namespace melda
