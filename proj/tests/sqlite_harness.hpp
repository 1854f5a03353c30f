#pragma once

// Test-only helper: replays an in-memory database and a plan's emitted SQL on
// sqlite, then reads tables back for multiset comparison. The engine side of
// the dual-route check stays independent of apply_plan.

#include <algorithm>
#include <string>
#include <vector>

#include <sqlite3.h>

#include "dvl/dataprep.hpp"
#include "dvl/relcore.hpp"

namespace dvltest {

class Sqlite {
public:
    Sqlite() {
        if (sqlite3_open(":memory:", &db_) != SQLITE_OK)
            throw dvl::Error("sqlite: cannot open in-memory db");
    }
    ~Sqlite() { sqlite3_close(db_); }

    void exec(const std::string& sql) {
        char* err = nullptr;
        if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown";
            sqlite3_free(err);
            throw dvl::Error("sqlite: " + msg + " in: " + sql);
        }
    }

    void load_table(const dvl::Table& t) {
        std::string cols;
        for (const auto& a : t.schema.attributes) {
            if (!cols.empty()) cols += ", ";
            cols += "\"" + a.name + "\" ";
            switch (a.type.kind) {
                case dvl::TypeKind::Integer:
                case dvl::TypeKind::Boolean: cols += "INTEGER"; break;
                case dvl::TypeKind::Real: cols += "REAL"; break;
                case dvl::TypeKind::Text: cols += "TEXT"; break;
            }
        }
        exec("CREATE TABLE \"" + t.schema.table_name + "\" (" + cols + ");");
        std::string placeholders;
        for (size_t i = 0; i < t.schema.attributes.size(); ++i)
            placeholders += (i ? ",?" : "?");
        std::string sql = "INSERT INTO \"" + t.schema.table_name + "\" VALUES (" + placeholders + ");";
        sqlite3_stmt* stmt = nullptr;
        sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr);
        for (const auto& row : t.rows) {
            for (size_t i = 0; i < row.size(); ++i) {
                const dvl::Value& v = row[i];
                int col = static_cast<int>(i) + 1;
                if (dvl::is_null(v)) sqlite3_bind_null(stmt, col);
                else if (auto* b = std::get_if<bool>(&v)) sqlite3_bind_int64(stmt, col, *b ? 1 : 0);
                else if (auto* n = std::get_if<int64_t>(&v)) sqlite3_bind_int64(stmt, col, *n);
                else if (auto* d = std::get_if<double>(&v)) sqlite3_bind_double(stmt, col, *d);
                else sqlite3_bind_text(stmt, col, std::get<std::string>(v).c_str(), -1, SQLITE_TRANSIENT);
            }
            if (sqlite3_step(stmt) != SQLITE_DONE)
                throw dvl::Error("sqlite: insert failed for " + t.schema.table_name);
            sqlite3_reset(stmt);
        }
        sqlite3_finalize(stmt);
    }

    /// Rows of `table` projected onto `cols`, in storage order.
    std::vector<dvl::Row> read_rows(const std::string& table, const std::vector<std::string>& cols) {
        std::string list;
        for (const auto& c : cols) list += (list.empty() ? "" : ", ") + ("\"" + c + "\"");
        std::string sql = "SELECT " + list + " FROM \"" + table + "\" ORDER BY _rowid_;";
        sqlite3_stmt* stmt = nullptr;
        if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
            throw dvl::Error("sqlite: cannot read table " + table);
        std::vector<dvl::Row> rows;
        while (sqlite3_step(stmt) == SQLITE_ROW) {
            dvl::Row row;
            for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
                switch (sqlite3_column_type(stmt, i)) {
                    case SQLITE_NULL: row.push_back({}); break;
                    case SQLITE_INTEGER: row.push_back(int64_t{sqlite3_column_int64(stmt, i)}); break;
                    case SQLITE_FLOAT: row.push_back(sqlite3_column_double(stmt, i)); break;
                    default:
                        row.push_back(std::string(
                            reinterpret_cast<const char*>(sqlite3_column_text(stmt, i))));
                }
            }
            rows.push_back(std::move(row));
        }
        sqlite3_finalize(stmt);
        return rows;
    }

private:
    sqlite3* db_ = nullptr;
};

/// Equality with bool/int coercion (sqlite stores booleans as 0/1).
inline bool sql_value_equals(const dvl::Value& a, const dvl::Value& b) {
    auto widen = [](const dvl::Value& v) -> dvl::Value {
        if (auto* x = std::get_if<bool>(&v)) return int64_t{*x ? 1 : 0};
        return v;
    };
    return dvl::value_equals(widen(a), widen(b));
}

inline bool sql_multiset_equal(std::vector<dvl::Row> a, std::vector<dvl::Row> b) {
    if (a.size() != b.size()) return false;
    auto norm = [](std::vector<dvl::Row>& rows) {
        for (auto& row : rows)
            for (auto& v : row)
                if (auto* x = std::get_if<bool>(&v)) v = int64_t{*x ? 1 : 0};
        std::sort(rows.begin(), rows.end(), [](const dvl::Row& x, const dvl::Row& y) {
            for (size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
                if (dvl::value_less(x[i], y[i])) return true;
                if (dvl::value_less(y[i], x[i])) return false;
            }
            return x.size() < y.size();
        });
    };
    norm(a);
    norm(b);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t c = 0; c < a[i].size(); ++c)
            if (!sql_value_equals(a[i][c], b[i][c])) return false;
    return true;
}

/// Runs `plan` both in memory and on sqlite; true when every surviving table
/// matches as a multiset (column order per the in-memory schema).
inline bool plan_matches_sqlite(const dvl::Database& base, const dvl::TransformPlan& plan) {
    dvl::Database mem = base;
    dvl::apply_plan(mem, plan);

    Sqlite sq;
    for (const auto& [name, t] : base.tables) sq.load_table(t);
    for (const auto& stmt : dvl::emit_sql(base, plan)) sq.exec(stmt);

    for (const auto& [name, t] : mem.tables) {
        std::vector<std::string> cols;
        for (const auto& a : t.schema.attributes) cols.push_back(a.name);
        std::vector<dvl::Row> mem_rows = t.rows;
        if (!sql_multiset_equal(mem_rows, sq.read_rows(name, cols))) return false;
    }
    return true;
}

} // namespace dvltest
