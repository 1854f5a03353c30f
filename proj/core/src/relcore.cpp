#include "dvl/relcore.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dvl {

// ---- value helpers ----------------------------------------------------------

std::string type_name(TypeKind k) {
    switch (k) {
        case TypeKind::Integer: return "integer";
        case TypeKind::Real: return "real";
        case TypeKind::Text: return "text";
        case TypeKind::Boolean: return "boolean";
    }
    return "text";
}

TypeKind type_from_name(const std::string& name) {
    if (name == "integer" || name == "int") return TypeKind::Integer;
    if (name == "real" || name == "double" || name == "float") return TypeKind::Real;
    if (name == "text" || name == "string") return TypeKind::Text;
    if (name == "boolean" || name == "bool") return TypeKind::Boolean;
    throw Error("unknown attribute type: " + name);
}

bool types_compatible(TypeKind a, TypeKind b) {
    auto numeric = [](TypeKind k) { return k == TypeKind::Integer || k == TypeKind::Real; };
    if (numeric(a) && numeric(b)) return true;
    return a == b;
}

std::optional<double> as_number(const Value& v) {
    if (auto* i = std::get_if<int64_t>(&v)) return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
}

bool value_equals(const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return is_null(a) && is_null(b);
    auto na = as_number(a), nb = as_number(b);
    if (na && nb) return *na == *nb;
    if (na || nb) return false;
    if (a.index() != b.index()) return false;
    return a == b;
}

bool value_less(const Value& a, const Value& b) {
    auto rank = [](const Value& v) -> int {
        if (is_null(v)) return 0;
        if (std::holds_alternative<bool>(v)) return 1;
        if (as_number(v)) return 2;
        return 3;
    };
    int ra = rank(a), rb = rank(b);
    if (ra != rb) return ra < rb;
    switch (ra) {
        case 0: return false;
        case 1: return !std::get<bool>(a) && std::get<bool>(b);
        case 2: return *as_number(a) < *as_number(b);
        default: return std::get<std::string>(a) < std::get<std::string>(b);
    }
}

std::string format_double(double v) {
    // Shortest representation that round-trips, same as the JSON writer.
    if (v == static_cast<int64_t>(v) && std::abs(v) < 1e15)
        return std::to_string(static_cast<int64_t>(v)) + ".0";
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string value_to_string(const Value& v) {
    if (is_null(v)) return "";
    if (auto* i = std::get_if<int64_t>(&v)) return std::to_string(*i);
    if (auto* d = std::get_if<double>(&v)) {
        double x = *d;
        if (x == static_cast<int64_t>(x) && std::abs(x) < 1e15)
            return std::to_string(static_cast<int64_t>(x));
        return format_double(x);
    }
    if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    return std::get<std::string>(v);
}

// ---- schema / table ---------------------------------------------------------

int Schema::index_of(const std::string& attr) const {
    for (size_t i = 0; i < attributes.size(); ++i)
        if (attributes[i].name == attr) return static_cast<int>(i);
    return -1;
}

int Schema::require_index(const std::string& attr) const {
    int i = index_of(attr);
    if (i < 0) throw Error("unknown attribute '" + attr + "' in table '" + table_name + "'");
    return i;
}

const Value& Table::at(size_t row, const std::string& attr) const {
    return rows[row][schema.require_index(attr)];
}

bool Table::is_declared_key(const std::vector<std::string>& attrs) const {
    std::set<std::string> want(attrs.begin(), attrs.end());
    for (const auto& key : declared_keys) {
        std::set<std::string> have(key.begin(), key.end());
        if (have == want) return true;
    }
    return false;
}

// ---- database ---------------------------------------------------------------

const Table& Database::table(const std::string& name) const {
    auto it = tables.find(name);
    if (it == tables.end()) throw Error("unknown table '" + name + "'");
    return it->second;
}

void Database::add_table(Table t) {
    if (tables.count(t.schema.table_name))
        throw Error("table '" + t.schema.table_name + "' already exists");
    tables.emplace(t.schema.table_name, std::move(t));
}

void Database::drop_table(const std::string& name) {
    if (!tables.erase(name)) throw Error("cannot drop unknown table '" + name + "'");
    for (auto it = constraints.begin(); it != constraints.end();) {
        if (it->second.src_table == name || it->second.dst_table == name)
            it = constraints.erase(it);
        else
            ++it;
    }
}

void Database::add_constraint(ForeignKey fk) {
    const Table& src = table(fk.src_table);
    const Table& dst = table(fk.dst_table);
    if (fk.src_attrs.size() != fk.dst_attrs.size() || fk.src_attrs.empty())
        throw Error("constraint '" + fk.name + "': attribute lists must be nonempty and equal length");
    for (size_t i = 0; i < fk.src_attrs.size(); ++i) {
        const auto& sa = src.schema.attributes[src.schema.require_index(fk.src_attrs[i])];
        const auto& da = dst.schema.attributes[dst.schema.require_index(fk.dst_attrs[i])];
        if (!types_compatible(sa.type.kind, da.type.kind))
            throw Error("constraint '" + fk.name + "': incompatible types for " + sa.name + " -> " + da.name);
    }
    fk.src_is_key = src.is_declared_key(fk.src_attrs);
    fk.dst_is_key = dst.is_declared_key(fk.dst_attrs);
    if (!check_fk(*this, fk))
        throw Error("constraint '" + fk.name + "' does not hold on the loaded instance");
    if (constraints.count(fk.name))
        throw Error("constraint '" + fk.name + "' already exists");
    constraints.emplace(fk.name, std::move(fk));
}

// ---- loading ----------------------------------------------------------------

namespace {

struct CsvCell {
    std::string text;
    bool quoted = false;
};

// RFC 4180: quoted fields may contain commas, newlines, and doubled quotes.
std::vector<std::vector<CsvCell>> parse_csv(const std::string& src) {
    std::vector<std::vector<CsvCell>> records;
    std::vector<CsvCell> record;
    CsvCell cell;
    size_t i = 0;
    bool in_quotes = false;
    bool row_open = false;
    while (i < src.size()) {
        char c = src[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < src.size() && src[i + 1] == '"') { cell.text += '"'; i += 2; continue; }
                in_quotes = false;
                ++i;
            } else {
                cell.text += c;
                ++i;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                cell.quoted = true;
                row_open = true;
                ++i;
                break;
            case ',':
                record.push_back(std::move(cell));
                cell = {};
                row_open = true;
                ++i;
                break;
            case '\r':
                ++i;
                break;
            case '\n':
                if (row_open || !record.empty()) {
                    record.push_back(std::move(cell));
                    records.push_back(std::move(record));
                    record = {};
                    cell = {};
                    row_open = false;
                }
                ++i;
                break;
            default:
                cell.text += c;
                row_open = true;
                ++i;
        }
    }
    if (in_quotes) throw Error("csv: unterminated quoted field");
    if (row_open || !record.empty()) {
        record.push_back(std::move(cell));
        records.push_back(std::move(record));
    }
    return records;
}

bool looks_like_int(const std::string& s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

bool looks_like_real(const std::string& s) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    std::strtod(begin, &end);
    return end == begin + s.size();
}

Value coerce(const std::string& text, bool quoted, TypeKind kind,
             size_t row, const std::string& col) {
    if (text.empty() && !quoted) return std::monostate{};
    switch (kind) {
        case TypeKind::Integer: {
            if (!looks_like_int(text))
                throw Error("cannot coerce '" + text + "' to integer at row " +
                            std::to_string(row) + ", column '" + col + "'");
            return static_cast<int64_t>(std::stoll(text));
        }
        case TypeKind::Real: {
            if (!looks_like_real(text))
                throw Error("cannot coerce '" + text + "' to real at row " +
                            std::to_string(row) + ", column '" + col + "'");
            return std::stod(text);
        }
        case TypeKind::Boolean: {
            if (text == "true") return true;
            if (text == "false") return false;
            throw Error("cannot coerce '" + text + "' to boolean at row " +
                        std::to_string(row) + ", column '" + col + "'");
        }
        case TypeKind::Text:
            return text;
    }
    return std::monostate{};
}

TypeKind infer_kind(const std::vector<std::vector<CsvCell>>& records, size_t col) {
    bool all_int = true, all_real = true, all_bool = true, any = false;
    for (size_t r = 1; r < records.size(); ++r) {
        const CsvCell& c = records[r][col];
        if (c.text.empty() && !c.quoted) continue;
        any = true;
        if (!looks_like_int(c.text)) all_int = false;
        if (!looks_like_real(c.text)) all_real = false;
        if (c.text != "true" && c.text != "false") all_bool = false;
    }
    if (!any) return TypeKind::Text;
    if (all_int) return TypeKind::Integer;
    if (all_real) return TypeKind::Real;
    if (all_bool) return TypeKind::Boolean;
    return TypeKind::Text;
}

Table from_csv(const std::string& src, const std::string& name,
               const std::map<std::string, AttributeType>& hints) {
    auto records = parse_csv(src);
    if (records.empty()) throw Error("csv: missing header row");
    Table t;
    t.schema.table_name = name;
    std::set<std::string> seen;
    for (const auto& cell : records[0]) {
        if (!seen.insert(cell.text).second)
            throw Error("csv: duplicate header '" + cell.text + "'");
        t.schema.attributes.push_back({cell.text, AttributeType{TypeKind::Text}});
    }
    for (size_t r = 1; r < records.size(); ++r)
        if (records[r].size() != records[0].size())
            throw Error("csv: ragged row " + std::to_string(r) + " has " +
                        std::to_string(records[r].size()) + " fields, expected " +
                        std::to_string(records[0].size()));
    for (size_t c = 0; c < t.schema.attributes.size(); ++c) {
        auto& attr = t.schema.attributes[c];
        auto hint = hints.find(attr.name);
        attr.type.kind = hint != hints.end() ? hint->second.kind : infer_kind(records, c);
    }
    for (size_t r = 1; r < records.size(); ++r) {
        Row row;
        for (size_t c = 0; c < records[r].size(); ++c)
            row.push_back(coerce(records[r][c].text, records[r][c].quoted,
                                 t.schema.attributes[c].type.kind, r, t.schema.attributes[c].name));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Value from_json_value(const nlohmann::json& j) {
    if (j.is_null()) return std::monostate{};
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<int64_t>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw Error("json table: scalar value expected, got " + std::string(j.type_name()));
}

Table from_json(const std::string& src, const std::string& name,
                const std::map<std::string, AttributeType>& hints) {
    nlohmann::json j = nlohmann::json::parse(src);
    if (!j.is_array()) throw Error("json table: top level must be an array of objects");
    Table t;
    t.schema.table_name = name;
    std::vector<std::string> order;
    for (const auto& obj : j) {
        if (!obj.is_object()) throw Error("json table: rows must be flat objects");
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (std::find(order.begin(), order.end(), it.key()) == order.end())
                order.push_back(it.key());
    }
    // Hints may introduce columns for empty arrays.
    for (const auto& [k, v] : hints)
        if (std::find(order.begin(), order.end(), k) == order.end()) order.push_back(k);
    for (const auto& col : order) t.schema.attributes.push_back({col, {TypeKind::Text}});
    for (const auto& obj : j) {
        Row row;
        for (const auto& col : order)
            row.push_back(obj.contains(col) ? from_json_value(obj[col]) : Value{});
        t.rows.push_back(std::move(row));
    }
    for (size_t c = 0; c < t.schema.attributes.size(); ++c) {
        auto& attr = t.schema.attributes[c];
        auto hint = hints.find(attr.name);
        if (hint != hints.end()) {
            attr.type.kind = hint->second.kind;
            continue;
        }
        bool all_int = true, all_real = true, all_bool = true, any = false;
        for (const auto& row : t.rows) {
            const Value& v = row[c];
            if (is_null(v)) continue;
            any = true;
            if (!std::holds_alternative<int64_t>(v)) all_int = false;
            if (!as_number(v)) all_real = false;
            if (!std::holds_alternative<bool>(v)) all_bool = false;
        }
        if (!any) attr.type.kind = TypeKind::Text;
        else if (all_int) attr.type.kind = TypeKind::Integer;
        else if (all_real) attr.type.kind = TypeKind::Real;
        else if (all_bool) attr.type.kind = TypeKind::Boolean;
        else attr.type.kind = TypeKind::Text;
    }
    // Enforce hinted kinds (integral doubles downcast, e.g. 2.0 with int hint).
    for (size_t c = 0; c < t.schema.attributes.size(); ++c) {
        TypeKind kind = t.schema.attributes[c].type.kind;
        for (auto& row : t.rows) {
            Value& v = row[c];
            if (is_null(v)) continue;
            if (kind == TypeKind::Integer) {
                if (auto* d = std::get_if<double>(&v)) {
                    if (*d != std::floor(*d))
                        throw Error("json table: non-integral value for integer column '" +
                                    t.schema.attributes[c].name + "'");
                    v = static_cast<int64_t>(*d);
                } else if (!std::holds_alternative<int64_t>(v)) {
                    throw Error("json table: type mismatch in column '" + t.schema.attributes[c].name + "'");
                }
            } else if (kind == TypeKind::Real) {
                if (auto* i = std::get_if<int64_t>(&v)) v = static_cast<double>(*i);
            }
        }
    }
    return t;
}

} // namespace

Table load_table(const std::string& source, const std::string& name,
                 const std::map<std::string, AttributeType>& type_hints,
                 const std::vector<std::vector<std::string>>& keys) {
    size_t i = source.find_first_not_of(" \t\r\n");
    Table t = (i != std::string::npos && source[i] == '[')
                  ? from_json(source, name, type_hints)
                  : from_csv(source, name, type_hints);

    if (!keys.empty()) {
        for (const auto& key : keys) {
            for (const auto& a : key) t.schema.require_index(a);
            if (!check_key(t, key)) {
                std::string names;
                for (const auto& a : key) names += (names.empty() ? "" : ",") + a;
                throw Error("table '" + name + "': declared key {" + names + "} is violated");
            }
        }
        t.declared_keys = keys;
        t.schema.primary_key = keys.front();
        return t;
    }

    // No declared key: reuse a valid `id` column, else synthesize one.
    if (t.schema.has_attribute("id")) {
        if (!check_key(t, {"id"}))
            throw Error("table '" + name + "': column 'id' exists but is not a key; declare keys explicitly");
    } else {
        t.schema.attributes.push_back({"id", {TypeKind::Integer}});
        for (size_t r = 0; r < t.rows.size(); ++r)
            t.rows[r].push_back(static_cast<int64_t>(r));
    }
    t.schema.primary_key = {"id"};
    t.declared_keys = {{"id"}};
    return t;
}

bool check_key(const Table& table, const std::vector<std::string>& attrs) {
    std::vector<int> idx;
    for (const auto& a : attrs) idx.push_back(table.schema.require_index(a));
    std::vector<Row> proj;
    proj.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Row p;
        for (int i : idx) {
            if (is_null(row[i])) return false;
            p.push_back(row[i]);
        }
        proj.push_back(std::move(p));
    }
    auto row_less = [](const Row& a, const Row& b) {
        for (size_t i = 0; i < a.size(); ++i) {
            if (value_less(a[i], b[i])) return true;
            if (value_less(b[i], a[i])) return false;
        }
        return false;
    };
    std::sort(proj.begin(), proj.end(), row_less);
    for (size_t i = 1; i < proj.size(); ++i) {
        bool equal = true;
        for (size_t c = 0; c < proj[i].size(); ++c)
            if (!value_equals(proj[i][c], proj[i - 1][c])) { equal = false; break; }
        if (equal) return false;
    }
    return true;
}

bool check_fk(const Database& db, const ForeignKey& fk) {
    const Table& src = db.table(fk.src_table);
    const Table& dst = db.table(fk.dst_table);
    std::vector<int> sidx, didx;
    for (const auto& a : fk.src_attrs) sidx.push_back(src.schema.require_index(a));
    for (const auto& a : fk.dst_attrs) didx.push_back(dst.schema.require_index(a));

    for (const auto& srow : src.rows) {
        bool has_null = false;
        for (int i : sidx)
            if (is_null(srow[i])) { has_null = true; break; }
        if (has_null) continue; // SQL match semantics: null references are not checked
        bool matched = false;
        for (const auto& drow : dst.rows) {
            bool eq = true;
            for (size_t k = 0; k < sidx.size(); ++k)
                if (!value_equals(srow[sidx[k]], drow[didx[k]])) { eq = false; break; }
            if (eq) { matched = true; break; }
        }
        if (!matched) return false;
    }
    return true;
}

Relationship classify_relationship(const ForeignKey& fk) {
    if (fk.src_is_key && fk.dst_is_key) return Relationship::OneToOne;
    if (!fk.src_is_key && fk.dst_is_key) return Relationship::ManyToOne;
    return Relationship::General;
}

std::vector<Value> active_domain(const Table& table, const std::string& attr) {
    int idx = table.schema.require_index(attr);
    std::vector<Value> vals;
    for (const auto& row : table.rows)
        if (!is_null(row[idx])) vals.push_back(row[idx]);
    std::sort(vals.begin(), vals.end(), value_less);
    vals.erase(std::unique(vals.begin(), vals.end(),
                           [](const Value& a, const Value& b) { return value_equals(a, b); }),
               vals.end());
    return vals;
}

} // namespace dvl
