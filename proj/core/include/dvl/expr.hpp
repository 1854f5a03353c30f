#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>

#include "dvl/value.hpp"

namespace dvl {

/// Looks up a name (column or channel) in whatever row is being evaluated.
/// Returns nullopt for unknown names.
using NameLookup = std::function<std::optional<Value>(const std::string&)>;

/// A parsed expression over row attributes: arithmetic, comparisons,
/// boolean connectives, a handful of math functions, and
/// format('{a}={b}') string templating.
class Expr {
public:
    static Expr parse(const std::string& source);

    Value eval(const NameLookup& lookup) const;

    /// Names the expression reads (columns/channels), for dependency analysis.
    const std::set<std::string>& references() const { return refs_; }

    /// The column name when the expression is a bare column reference.
    std::optional<std::string> as_column() const;

    /// Translation to SQL text (identifiers double-quoted).
    std::string to_sql() const;

    const std::string& source() const { return source_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::set<std::string> refs_;
    std::string source_;
};

} // namespace dvl
