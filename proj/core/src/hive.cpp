#include "dvl/hive.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace dvl {

namespace {

struct Cursor {
    const std::string& src;
    size_t i = 0;
    int line = 1, col = 1;

    bool done() const { return i >= src.size(); }
    char peek() const { return src[i]; }

    void advance() {
        if (src[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    }

    void skip_ws() {
        while (!done() && std::isspace(static_cast<unsigned char>(peek()))) advance();
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error("hive parse error at " + std::to_string(line) + ":" + std::to_string(col) +
                    ": " + msg);
    }

    void expect(char c) {
        skip_ws();
        if (done() || peek() != c) fail(std::string("expected '") + c + "'");
        advance();
    }

    std::string ident() {
        skip_ws();
        std::string out;
        while (!done() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
            out += src[i], advance();
        if (out.empty()) fail("identifier expected");
        return out;
    }
};

const std::set<std::string>& layout_codes() {
    static const std::set<std::string> codes = {"SQ", "OS", "VT", "HZ", "EQ"};
    return codes;
}

} // namespace

HiveProgram parse_hive(const std::string& src) {
    HiveProgram prog;
    std::set<std::string> seen;
    Cursor cur{src};
    cur.skip_ws();
    while (!cur.done()) {
        std::string stmt = cur.ident();
        if (stmt != "sHier" && stmt != "sLayout" && stmt != "sSize" && stmt != "sColor")
            cur.fail("unknown statement '" + stmt + "'");
        if (!seen.insert(stmt).second) cur.fail("duplicate statement '" + stmt + "'");
        cur.expect('(');
        cur.skip_ws();
        if (cur.done() || cur.peek() != '/') cur.fail("path '/' expected");
        cur.advance();

        std::vector<std::string> args;
        cur.skip_ws();
        while (!cur.done() && cur.peek() == ',') {
            cur.advance();
            cur.skip_ws();
            if (!cur.done() && cur.peek() == '$') {
                cur.advance();
                args.push_back("$" + cur.ident());
            } else {
                args.push_back(cur.ident());
            }
            cur.skip_ws();
        }
        cur.expect(')');

        if (stmt == "sHier") {
            for (const auto& a : args) {
                if (a[0] != '$') cur.fail("sHier arguments must be $attributes");
                prog.hier.push_back(a.substr(1));
            }
            if (prog.hier.empty()) cur.fail("sHier needs at least one attribute");
        } else if (stmt == "sLayout") {
            for (const auto& a : args) {
                if (a == "_") {
                    prog.layouts.push_back("_");
                    continue;
                }
                if (!layout_codes().count(a)) cur.fail("unknown layout code '" + a + "'");
                prog.layouts.push_back(a);
            }
        } else {
            auto& list = stmt == "sSize" ? prog.sizes : prog.colors;
            for (const auto& a : args) {
                if (a == "_") list.push_back("_");
                else if (a[0] == '$') list.push_back(a.substr(1));
                else cur.fail("expected $attribute or _");
            }
        }
        cur.skip_ws();
        if (!cur.done()) {
            if (cur.peek() != ';') cur.fail("';' expected between statements");
            cur.advance();
            cur.skip_ws();
        }
    }
    if (prog.hier.empty()) throw Error("hive: program has no sHier statement");

    auto pad = [&](std::vector<std::string>& list, const std::string& fill) {
        if (list.size() > prog.hier.size())
            throw Error("hive: statement lists a level beyond the hierarchy depth");
        while (list.size() < prog.hier.size()) list.push_back(fill);
    };
    pad(prog.layouts, "_");
    pad(prog.sizes, "_");
    pad(prog.colors, "_");
    for (auto& code : prog.layouts)
        if (code == "_") code = "SQ";  // unset layout defaults to squarified
    return prog;
}

std::string print_hive(const HiveProgram& prog) {
    auto stmt = [](const std::string& name, const std::vector<std::string>& args, bool attrs) {
        std::string out = name + "(/";
        for (const auto& a : args)
            out += "," + (a == "_" || !attrs ? a : "$" + a);
        return out + ")";
    };
    std::string out = stmt("sHier", prog.hier, true);
    out += "; " + stmt("sLayout", prog.layouts, false);
    out += "; " + stmt("sSize", prog.sizes, true);
    out += "; " + stmt("sColor", prog.colors, true);
    return out + "\n";
}

HiveCompilation compile_hive(const HiveProgram& prog, const std::string& table,
                             const Database& db, double width, double height) {
    const Table& t = db.table(table);
    for (const auto& a : prog.hier) t.schema.require_index(a);
    for (const auto& lists : {prog.sizes, prog.colors})
        for (const auto& a : lists)
            if (a != "_") t.schema.require_index(a);

    HiveCompilation out;
    size_t depth = prog.hier.size();

    // hier step: each level aggregates the size/color attributes it encodes
    TransformStep step;
    step.op = TransformStep::Op::Hier;
    step.table = table;
    step.attrs = prog.hier;
    for (size_t k = 0; k < depth; ++k) {
        std::vector<AggExpr> aggs;
        std::set<std::string> added;
        for (const auto& attr : {prog.sizes[k], prog.colors[k]})
            if (attr != "_" && added.insert(attr).second)
                aggs.push_back({AggOp::Avg, attr, attr});
        step.level_aggs.push_back(std::move(aggs));
        std::string name = table + "_l" + std::to_string(k + 1);
        step.names.push_back(name);
        out.level_tables.push_back(name);
    }
    out.plan.steps.push_back(std::move(step));
    TransformStep drop;
    drop.op = TransformStep::Op::Drop;
    drop.table = table;
    out.plan.steps.push_back(std::move(drop));

    out.spec.width = width;
    out.spec.height = height;
    for (size_t k = 0; k < depth; ++k) {
        LayoutBinding binding;
        binding.name = "l" + std::to_string(k + 1);
        binding.algo = layout_algo_from_name(prog.layouts[k]);
        if (prog.sizes[k] != "_") binding.weight_attr = prog.sizes[k];
        out.spec.layouts.emplace(binding.name, binding);

        ViewSpec view;
        view.name = "V" + std::to_string(k + 1);
        view.table = out.level_tables[k];
        view.mark = MarkType::Rect;
        auto use = std::make_shared<LayoutUse>();
        use->name = binding.name;
        use->channels = {"x", "y", "w", "h"};
        Encoding le;
        le.kind = Encoding::Kind::Layout;
        le.layout = use;
        for (const auto& ch : use->channels) view.encodings.emplace(ch, le);
        if (prog.colors[k] != "_") {
            Encoding ce;
            ce.kind = Encoding::Kind::Field;
            ce.field = prog.colors[k];
            view.encodings.emplace("color", ce);
        } else {
            Encoding stroke;
            stroke.kind = Encoding::Kind::Const;
            stroke.constant = std::string("black");
            view.encodings.emplace("stroke", stroke);
            Encoding fill;
            fill.kind = Encoding::Kind::Const;
            fill.constant = std::string("none");
            view.encodings.emplace("fill", fill);
        }
        out.spec.views.push_back(std::move(view));

        if (k > 0) {
            NestDecl nest;
            nest.child = "V" + std::to_string(k + 1);
            nest.parent = "V" + std::to_string(k);
            nest.using_constraint = "fk_" + out.level_tables[k] + "_" + out.level_tables[k - 1];
            out.spec.nests.push_back(std::move(nest));
        }
    }
    return out;
}

} // namespace dvl
