#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dvl/value.hpp"

namespace dvl {

struct Attribute {
    std::string name;
    AttributeType type;
};

struct Schema {
    std::string table_name;
    std::vector<Attribute> attributes;
    std::vector<std::string> primary_key;

    int index_of(const std::string& attr) const;          // -1 if absent
    int require_index(const std::string& attr) const;     // throws if absent
    bool has_attribute(const std::string& attr) const { return index_of(attr) >= 0; }
};

using Row = std::vector<Value>;

struct Table {
    Schema schema;
    std::vector<Row> rows;
    /// All declared keys, primary key first. Attribute-name sets.
    std::vector<std::vector<std::string>> declared_keys;

    const Value& at(size_t row, const std::string& attr) const;
    bool is_declared_key(const std::vector<std::string>& attrs) const;
};

struct ForeignKey {
    std::string name;
    std::string src_table;
    std::vector<std::string> src_attrs;
    std::string dst_table;
    std::vector<std::string> dst_attrs;
    bool src_is_key = false;
    bool dst_is_key = false;
};

enum class Relationship { OneToOne, ManyToOne, General };

struct Database {
    std::map<std::string, Table> tables;
    std::map<std::string, ForeignKey> constraints;

    const Table& table(const std::string& name) const;
    bool has_table(const std::string& name) const { return tables.count(name) > 0; }

    /// Registers the table; fails on name collision.
    void add_table(Table t);
    void drop_table(const std::string& name);

    /// Validates endpoints, fills in src_is_key/dst_is_key from declared
    /// keys, and checks the constraint holds on the current instance.
    void add_constraint(ForeignKey fk);
};

// ---- operations -----------------------------------------------------------

/// Parses delimited text (RFC 4180, comma, header row) or a JSON array of
/// flat objects. Types are inferred per column unless hinted. When no key is
/// given, an existing unique non-null `id` column becomes the primary key;
/// otherwise a synthetic 0-based `id` column is added.
Table load_table(const std::string& source, const std::string& name,
                 const std::map<std::string, AttributeType>& type_hints = {},
                 const std::vector<std::vector<std::string>>& keys = {});

/// True iff the projection of rows onto attrs has no duplicates and no nulls.
bool check_key(const Table& table, const std::vector<std::string>& attrs);

/// True iff every src row (rows with nulls in the source attrs are skipped)
/// matches some dst row.
bool check_fk(const Database& db, const ForeignKey& fk);

Relationship classify_relationship(const ForeignKey& fk);

/// Sorted distinct non-null values of one column.
std::vector<Value> active_domain(const Table& table, const std::string& attr);

} // namespace dvl
