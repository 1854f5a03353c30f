#include "dvl/expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace dvl {

namespace {

enum class Tok { Number, String, Ident, Op, End };

struct Token {
    Tok kind;
    std::string text;
    Value literal;
    size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return cur_; }

    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
        cur_.pos = i_;
        if (i_ >= src_.size()) { cur_ = {Tok::End, "", {}, i_}; return; }
        char c = src_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
            size_t start = i_;
            bool real = false;
            while (i_ < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[i_])) || src_[i_] == '.' ||
                    src_[i_] == 'e' || src_[i_] == 'E' ||
                    ((src_[i_] == '+' || src_[i_] == '-') && (src_[i_ - 1] == 'e' || src_[i_ - 1] == 'E')))) {
                if (src_[i_] == '.' || src_[i_] == 'e' || src_[i_] == 'E') real = true;
                ++i_;
            }
            std::string text = src_.substr(start, i_ - start);
            Value v = real ? Value{std::stod(text)} : Value{static_cast<int64_t>(std::stoll(text))};
            cur_ = {Tok::Number, text, v, start};
            return;
        }
        if (c == '\'') {
            size_t start = ++i_;
            std::string s;
            while (i_ < src_.size() && src_[i_] != '\'') s += src_[i_++];
            if (i_ >= src_.size()) throw Error("expr: unterminated string at " + std::to_string(start));
            ++i_;
            cur_ = {Tok::String, s, s, start};
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = i_;
            while (i_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                ++i_;
            cur_ = {Tok::Ident, src_.substr(start, i_ - start), {}, start};
            return;
        }
        static const char* two[] = {"<=", ">=", "==", "!=", "&&", "||"};
        for (const char* op : two) {
            if (src_.compare(i_, 2, op) == 0) {
                cur_ = {Tok::Op, op, {}, i_};
                i_ += 2;
                return;
            }
        }
        if (std::string("+-*/%<>!(),").find(c) != std::string::npos) {
            cur_ = {Tok::Op, std::string(1, c), {}, i_};
            ++i_;
            return;
        }
        throw Error("expr: unexpected character '" + std::string(1, c) + "' at " + std::to_string(i_));
    }

    const std::string& src_;
    size_t i_ = 0;
    Token cur_;
};

} // namespace

struct Expr::Node {
    enum Kind { Literal, Column, Unary, Binary, Call, Format } kind;
    Value literal;
    std::string name; // column name, operator, or function name
    std::vector<std::shared_ptr<const Node>> args;
    std::string tmpl; // format template
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Expr::Node n) { return std::make_shared<const Expr::Node>(std::move(n)); }

class Parser {
public:
    Parser(const std::string& src, std::set<std::string>& refs) : lex_(src), refs_(refs) {}

    NodePtr parse() {
        NodePtr e = parse_or();
        if (lex_.peek().kind != Tok::End)
            throw Error("expr: trailing input at " + std::to_string(lex_.peek().pos));
        return e;
    }

private:
    bool eat_op(const std::string& op) {
        if (lex_.peek().kind == Tok::Op && lex_.peek().text == op) {
            lex_.take();
            return true;
        }
        return false;
    }

    NodePtr parse_or() {
        NodePtr lhs = parse_and();
        while (eat_op("||"))
            lhs = make({Expr::Node::Binary, {}, "||", {lhs, parse_and()}, {}});
        return lhs;
    }

    NodePtr parse_and() {
        NodePtr lhs = parse_cmp();
        while (eat_op("&&"))
            lhs = make({Expr::Node::Binary, {}, "&&", {lhs, parse_cmp()}, {}});
        return lhs;
    }

    NodePtr parse_cmp() {
        NodePtr lhs = parse_add();
        for (const char* op : {"<=", ">=", "==", "!=", "<", ">"}) {
            if (eat_op(op)) return make({Expr::Node::Binary, {}, op, {lhs, parse_add()}, {}});
        }
        return lhs;
    }

    NodePtr parse_add() {
        NodePtr lhs = parse_mul();
        while (true) {
            if (eat_op("+")) lhs = make({Expr::Node::Binary, {}, "+", {lhs, parse_mul()}, {}});
            else if (eat_op("-")) lhs = make({Expr::Node::Binary, {}, "-", {lhs, parse_mul()}, {}});
            else return lhs;
        }
    }

    NodePtr parse_mul() {
        NodePtr lhs = parse_unary();
        while (true) {
            if (eat_op("*")) lhs = make({Expr::Node::Binary, {}, "*", {lhs, parse_unary()}, {}});
            else if (eat_op("/")) lhs = make({Expr::Node::Binary, {}, "/", {lhs, parse_unary()}, {}});
            else if (eat_op("%")) lhs = make({Expr::Node::Binary, {}, "%", {lhs, parse_unary()}, {}});
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (eat_op("-")) return make({Expr::Node::Unary, {}, "-", {parse_unary()}, {}});
        if (eat_op("!")) return make({Expr::Node::Unary, {}, "!", {parse_unary()}, {}});
        return parse_primary();
    }

    void scan_format_refs(const std::string& tmpl) {
        size_t i = 0;
        while ((i = tmpl.find('{', i)) != std::string::npos) {
            size_t j = tmpl.find('}', i);
            if (j == std::string::npos) throw Error("format: unbalanced '{' in template");
            refs_.insert(tmpl.substr(i + 1, j - i - 1));
            i = j + 1;
        }
    }

    NodePtr parse_primary() {
        Token t = lex_.take();
        switch (t.kind) {
            case Tok::Number:
            case Tok::String:
                return make({Expr::Node::Literal, t.literal, {}, {}, {}});
            case Tok::Ident: {
                if (t.text == "true") return make({Expr::Node::Literal, Value{true}, {}, {}, {}});
                if (t.text == "false") return make({Expr::Node::Literal, Value{false}, {}, {}, {}});
                if (t.text == "null") return make({Expr::Node::Literal, Value{}, {}, {}, {}});
                if (lex_.peek().kind == Tok::Op && lex_.peek().text == "(") {
                    lex_.take();
                    if (t.text == "format") {
                        Token tpl = lex_.take();
                        if (tpl.kind != Tok::String) throw Error("format: template string expected");
                        if (!eat_op(")")) throw Error("format: ')' expected");
                        scan_format_refs(tpl.text);
                        return make({Expr::Node::Format, {}, {}, {}, tpl.text});
                    }
                    std::vector<NodePtr> args;
                    if (!eat_op(")")) {
                        args.push_back(parse_or());
                        while (eat_op(",")) args.push_back(parse_or());
                        if (!eat_op(")")) throw Error("expr: ')' expected at " + std::to_string(lex_.peek().pos));
                    }
                    return make({Expr::Node::Call, {}, t.text, std::move(args), {}});
                }
                refs_.insert(t.text);
                return make({Expr::Node::Column, {}, t.text, {}, {}});
            }
            case Tok::Op:
                if (t.text == "(") {
                    NodePtr e = parse_or();
                    if (!eat_op(")")) throw Error("expr: ')' expected at " + std::to_string(lex_.peek().pos));
                    return e;
                }
                [[fallthrough]];
            default:
                throw Error("expr: unexpected token at " + std::to_string(t.pos));
        }
    }

    Lexer lex_;
    std::set<std::string>& refs_;
};

double num_or_throw(const Value& v, const char* what) {
    auto n = as_number(v);
    if (!n) throw Error(std::string("expr: ") + what + " requires a number, got '" + value_to_string(v) + "'");
    return *n;
}

bool truthy(const Value& v) {
    if (is_null(v)) return false;
    if (auto* b = std::get_if<bool>(&v)) return *b;
    if (auto n = as_number(v)) return *n != 0.0;
    return !std::get<std::string>(v).empty();
}

Value eval_node(const Expr::Node& n, const NameLookup& lookup);

Value eval_binary(const Expr::Node& n, const NameLookup& lookup) {
    const std::string& op = n.name;
    if (op == "&&") {
        Value l = eval_node(*n.args[0], lookup);
        if (!truthy(l)) return false;
        return truthy(eval_node(*n.args[1], lookup));
    }
    if (op == "||") {
        Value l = eval_node(*n.args[0], lookup);
        if (truthy(l)) return true;
        return truthy(eval_node(*n.args[1], lookup));
    }
    Value l = eval_node(*n.args[0], lookup);
    Value r = eval_node(*n.args[1], lookup);
    if (op == "==") return value_equals(l, r);
    if (op == "!=") return !value_equals(l, r);
    if (is_null(l) || is_null(r)) return Value{};
    if (op == "<") return value_less(l, r);
    if (op == ">") return value_less(r, l);
    if (op == "<=") return !value_less(r, l);
    if (op == ">=") return !value_less(l, r);

    bool both_int = std::holds_alternative<int64_t>(l) && std::holds_alternative<int64_t>(r);
    double a = num_or_throw(l, op.c_str());
    double b = num_or_throw(r, op.c_str());
    if (op == "+") return both_int ? Value{std::get<int64_t>(l) + std::get<int64_t>(r)} : Value{a + b};
    if (op == "-") return both_int ? Value{std::get<int64_t>(l) - std::get<int64_t>(r)} : Value{a - b};
    if (op == "*") return both_int ? Value{std::get<int64_t>(l) * std::get<int64_t>(r)} : Value{a * b};
    if (op == "/") {
        if (b == 0) throw Error("expr: division by zero");
        return a / b;
    }
    if (op == "%") {
        if (both_int) {
            int64_t d = std::get<int64_t>(r);
            if (d == 0) throw Error("expr: modulo by zero");
            return std::get<int64_t>(l) % d;
        }
        return std::fmod(a, b);
    }
    throw Error("expr: unknown operator " + op);
}

Value eval_call(const Expr::Node& n, const NameLookup& lookup) {
    auto arg = [&](size_t i) { return eval_node(*n.args[i], lookup); };
    auto need = [&](size_t k) {
        if (n.args.size() != k)
            throw Error("expr: " + n.name + " expects " + std::to_string(k) + " argument(s)");
    };
    if (n.name == "abs") { need(1); return std::abs(num_or_throw(arg(0), "abs")); }
    if (n.name == "floor") { need(1); return std::floor(num_or_throw(arg(0), "floor")); }
    if (n.name == "round") { need(1); return std::round(num_or_throw(arg(0), "round")); }
    if (n.name == "min") {
        need(2);
        Value a = arg(0), b = arg(1);
        return value_less(a, b) ? a : b;
    }
    if (n.name == "max") {
        need(2);
        Value a = arg(0), b = arg(1);
        return value_less(a, b) ? b : a;
    }
    if (n.name == "iif") {
        need(3);
        return truthy(arg(0)) ? arg(1) : arg(2);
    }
    throw Error("expr: unknown function '" + n.name + "'");
}

Value eval_format(const std::string& tmpl, const NameLookup& lookup) {
    std::string out;
    size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            size_t j = tmpl.find('}', i);
            std::string name = tmpl.substr(i + 1, j - i - 1);
            auto v = lookup(name);
            if (!v) throw Error("format: unknown name '" + name + "'");
            out += value_to_string(*v);
            i = j + 1;
        } else {
            out += tmpl[i++];
        }
    }
    return out;
}

Value eval_node(const Expr::Node& n, const NameLookup& lookup) {
    switch (n.kind) {
        case Expr::Node::Literal: return n.literal;
        case Expr::Node::Column: {
            auto v = lookup(n.name);
            if (!v) throw Error("expr: unknown name '" + n.name + "'");
            return *v;
        }
        case Expr::Node::Unary: {
            Value v = eval_node(*n.args[0], lookup);
            if (n.name == "!") return !truthy(v);
            if (is_null(v)) return v;
            if (std::holds_alternative<int64_t>(v)) return -std::get<int64_t>(v);
            return -num_or_throw(v, "-");
        }
        case Expr::Node::Binary: return eval_binary(n, lookup);
        case Expr::Node::Call: return eval_call(n, lookup);
        case Expr::Node::Format: return eval_format(n.tmpl, lookup);
    }
    throw Error("expr: corrupt node");
}

std::string sql_quote_ident(const std::string& name) { return "\"" + name + "\""; }

std::string sql_quote_string(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        out += c;
        if (c == '\'') out += '\'';
    }
    return out + "'";
}

std::string node_to_sql(const Expr::Node& n) {
    switch (n.kind) {
        case Expr::Node::Literal:
            if (is_null(n.literal)) return "NULL";
            if (auto* b = std::get_if<bool>(&n.literal)) return *b ? "TRUE" : "FALSE";
            if (auto* s = std::get_if<std::string>(&n.literal)) return sql_quote_string(*s);
            return value_to_string(n.literal);
        case Expr::Node::Column:
            return sql_quote_ident(n.name);
        case Expr::Node::Unary:
            return (n.name == "!" ? "NOT " : "-") + ("(" + node_to_sql(*n.args[0]) + ")");
        case Expr::Node::Binary: {
            std::string op = n.name;
            if (op == "==") op = "=";
            else if (op == "!=") op = "<>";
            else if (op == "&&") op = "AND";
            else if (op == "||") op = "OR";
            // Division is real-valued here; SQL divides integers integrally.
            if (op == "/")
                return "(CAST(" + node_to_sql(*n.args[0]) + " AS REAL) / " +
                       node_to_sql(*n.args[1]) + ")";
            return "(" + node_to_sql(*n.args[0]) + " " + op + " " + node_to_sql(*n.args[1]) + ")";
        }
        case Expr::Node::Call: {
            if (n.name == "iif")
                return "(CASE WHEN " + node_to_sql(*n.args[0]) + " THEN " +
                       node_to_sql(*n.args[1]) + " ELSE " + node_to_sql(*n.args[2]) + " END)";
            std::string name = n.name;
            if (name == "abs") name = "ABS";
            else if (name == "floor") name = "FLOOR";
            else if (name == "round") name = "ROUND";
            else if (name == "min") name = "MIN";
            else if (name == "max") name = "MAX";
            std::string out = name + "(";
            for (size_t i = 0; i < n.args.size(); ++i)
                out += (i ? ", " : "") + node_to_sql(*n.args[i]);
            return out + ")";
        }
        case Expr::Node::Format: {
            // '{a}={b}' becomes '' || "a" || '=' || "b"
            std::string out = "''";
            size_t i = 0;
            std::string lit;
            auto flush = [&] {
                if (!lit.empty()) { out += " || " + sql_quote_string(lit); lit.clear(); }
            };
            while (i < n.tmpl.size()) {
                if (n.tmpl[i] == '{') {
                    size_t j = n.tmpl.find('}', i);
                    flush();
                    out += " || " + sql_quote_ident(n.tmpl.substr(i + 1, j - i - 1));
                    i = j + 1;
                } else {
                    lit += n.tmpl[i++];
                }
            }
            flush();
            return "(" + out + ")";
        }
    }
    throw Error("expr: corrupt node");
}

} // namespace

Expr Expr::parse(const std::string& source) {
    Expr e;
    e.source_ = source;
    Parser p(source, e.refs_);
    e.root_ = p.parse();
    return e;
}

Value Expr::eval(const NameLookup& lookup) const { return eval_node(*root_, lookup); }

std::optional<std::string> Expr::as_column() const {
    if (root_->kind == Node::Column) return root_->name;
    return std::nullopt;
}

std::string Expr::to_sql() const { return node_to_sql(*root_); }

} // namespace dvl
