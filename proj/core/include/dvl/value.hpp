#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace dvl {

/// Error type for everything that can go wrong while loading, validating,
/// compiling or executing. Carries a plain message; callers add context.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A cell value: null, integer, real, boolean or text.
using Value = std::variant<std::monostate, int64_t, double, bool, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

enum class TypeKind { Integer, Real, Text, Boolean };

struct AttributeType {
    TypeKind kind = TypeKind::Text;

    bool operator==(const AttributeType&) const = default;
};

std::string type_name(TypeKind k);
TypeKind type_from_name(const std::string& name);

/// True when a column of kind `a` may reference a column of kind `b`
/// (numeric kinds are interchangeable, everything else must match).
bool types_compatible(TypeKind a, TypeKind b);

/// Equality with numeric coercion: 1 == 1.0, but "1" != 1.
/// Nulls are equal only to nulls.
bool value_equals(const Value& a, const Value& b);

/// Ordering used for active domains and deterministic output:
/// null < booleans < numbers (by value) < text (lexicographic).
bool value_less(const Value& a, const Value& b);

/// Numeric view of a value; nullopt for null/text.
std::optional<double> as_number(const Value& v);

/// Display form ("" for null, shortest round-trip for reals).
std::string value_to_string(const Value& v);

/// Shortest decimal string that parses back to exactly this double.
std::string format_double(double v);

} // namespace dvl
