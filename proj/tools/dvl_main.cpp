#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dvl/compiler.hpp"
#include "dvl/faithful.hpp"
#include "dvl/fixtures.hpp"
#include "dvl/hive.hpp"
#include "dvl/manifest.hpp"
#include "dvl/render.hpp"
#include "dvl/specmodel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitLoad = 1;
constexpr int kExitUnfaithful = 2;
constexpr int kExitCompile = 3;
constexpr int kExitExecute = 4;

struct Pipeline {
    dvl::Database base;
    dvl::TransformPlan prep;
    dvl::PlotSpec spec;
    dvl::TaskGraph graph;
    dvl::ExecutionResult result;
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dvl::Error("cannot write '" + path + "'");
    out << content;
}

int run_pipeline(const std::string& db_path, const std::string& spec_path, Pipeline& p,
                 const std::string& emit_plan) {
    try {
        dvl::Manifest manifest = dvl::Manifest::parse(dvl::read_text_file(db_path));
        p.base = dvl::load_database_from_dir(
            manifest, std::filesystem::path(db_path).parent_path().string());
        if (manifest.prep) p.prep = *manifest.prep;
        p.spec = dvl::parse_spec(dvl::read_text_file(spec_path));
    } catch (const dvl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitLoad;
    }
    try {
        p.graph = dvl::compile(p.spec, p.base, &p.prep);
        if (!emit_plan.empty()) write_file(emit_plan, p.graph.to_json());
    } catch (const dvl::Error& e) {
        std::cerr << "compile error: " << e.what() << "\n";
        return kExitCompile;
    }
    try {
        p.result = dvl::execute(p.graph, p.base);
    } catch (const dvl::Error& e) {
        std::cerr << "execution error: " << e.what() << "\n";
        return kExitExecute;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dvl - database visualization compiler and linter"};
    app.set_version_flag("--version", "dvl 0.1.0");
    app.require_subcommand(1);

    auto* render = app.add_subcommand("render", "Execute a spec and write SVG");
    std::string db_path, spec_path, out_path, emit_marks, emit_plan;
    render->add_option("--db", db_path, "database manifest")->required();
    render->add_option("--spec", spec_path, "visualization spec (.dvl.json)")->required();
    render->add_option("-o,--out", out_path, "output SVG path")->required();
    render->add_option("--emit-marks", emit_marks, "also dump mark tables as JSON");
    render->add_option("--emit-plan", emit_plan, "also dump the task graph as JSON");
    render->callback([&]() {
        Pipeline p;
        int rc = run_pipeline(db_path, spec_path, p, emit_plan);
        if (rc != kExitOk) std::exit(rc);
        try {
            write_file(out_path, dvl::render_svg(dvl::build_scene(p.result, p.spec)));
            if (!emit_marks.empty()) write_file(emit_marks, dvl::marks_to_json(p.result));
        } catch (const dvl::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            std::exit(kExitExecute);
        }
    });

    auto* lint = app.add_subcommand("lint", "Check faithfulness of a spec against its database");
    std::string lint_db, lint_spec;
    bool lint_json = false;
    lint->add_option("--db", lint_db, "database manifest")->required();
    lint->add_option("--spec", lint_spec, "visualization spec")->required();
    lint->add_flag("--json", lint_json, "machine-readable report");
    lint->callback([&]() {
        Pipeline p;
        int rc = run_pipeline(lint_db, lint_spec, p, "");
        if (rc != kExitOk) std::exit(rc);
        dvl::FaithfulnessReport report =
            dvl::check_faithfulness(p.result.prepared, p.spec, p.result);
        std::cout << (lint_json ? report.to_json() : report.to_text());
        std::exit(report.faithful ? kExitOk : kExitUnfaithful);
    });

    auto* hive = app.add_subcommand("hive", "Compile and render a HiVE program");
    std::string hive_program, hive_table, hive_db, hive_out, hive_emit_spec;
    hive->add_option("--program", hive_program, "HiVE source file")->required();
    hive->add_option("--table", hive_table, "input table name")->required();
    hive->add_option("--db", hive_db, "database manifest")->required();
    hive->add_option("-o,--out", hive_out, "output SVG path")->required();
    hive->add_option("--emit-spec", hive_emit_spec, "also dump the compiled spec");
    hive->callback([&]() {
        dvl::Database base;
        dvl::HiveCompilation compiled;
        try {
            dvl::Manifest manifest = dvl::Manifest::parse(dvl::read_text_file(hive_db));
            base = dvl::load_database_from_dir(
                manifest, std::filesystem::path(hive_db).parent_path().string());
            dvl::HiveProgram prog = dvl::parse_hive(dvl::read_text_file(hive_program));
            compiled = dvl::compile_hive(prog, hive_table, base);
            if (!hive_emit_spec.empty())
                write_file(hive_emit_spec, dvl::serialize_spec(compiled.spec));
        } catch (const dvl::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            std::exit(kExitLoad);
        }
        try {
            dvl::TaskGraph graph = dvl::compile(compiled.spec, base, &compiled.plan);
            dvl::ExecutionResult result = dvl::execute(graph, base);
            write_file(hive_out, dvl::render_svg(dvl::build_scene(result, compiled.spec)));
        } catch (const dvl::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            std::exit(kExitExecute);
        }
    });

    auto* sql = app.add_subcommand("sql", "Print the SQL a preparation plan compiles to");
    std::string sql_db, sql_prep;
    sql->add_option("--db", sql_db, "database manifest")->required();
    sql->add_option("--prep", sql_prep, "plan JSON (defaults to the manifest's prep)");
    sql->callback([&]() {
        try {
            dvl::Manifest manifest = dvl::Manifest::parse(dvl::read_text_file(sql_db));
            dvl::Database base = dvl::load_database_from_dir(
                manifest, std::filesystem::path(sql_db).parent_path().string());
            dvl::TransformPlan plan;
            if (!sql_prep.empty())
                plan = dvl::TransformPlan::from_json(dvl::read_text_file(sql_prep));
            else if (manifest.prep)
                plan = *manifest.prep;
            for (const auto& stmt : dvl::emit_sql(base, plan)) std::cout << stmt << "\n";
        } catch (const dvl::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            std::exit(kExitLoad);
        }
    });

    auto* fixtures = app.add_subcommand("fixtures", "List, run, or export the bundled examples");
    auto* fx_list = fixtures->add_subcommand("list", "List fixture names");
    fx_list->callback([]() {
        for (const auto& name : dvl::list_fixtures()) std::cout << name << "\n";
    });
    auto* fx_run = fixtures->add_subcommand("run", "Execute fixtures and lint them");
    std::string fx_name, goldens_dir;
    bool update_goldens = false;
    fx_run->add_option("name", fx_name, "fixture name (default: all)");
    fx_run->add_option("--goldens", goldens_dir, "directory of marks-JSON goldens to diff");
    fx_run->add_flag("--update", update_goldens, "rewrite goldens instead of diffing");
    fx_run->callback([&]() {
        std::vector<std::string> names =
            fx_name.empty() ? dvl::list_fixtures() : std::vector<std::string>{fx_name};
        bool all_ok = true;
        for (const auto& name : names) {
            try {
                dvl::FixtureRun run = dvl::run_fixture(name);
                bool ok = run.report.faithful == dvl::fixture(name).expect_faithful;
                std::string note;
                if (ok && !goldens_dir.empty()) {
                    std::string path = goldens_dir + "/" + name + ".marks.json";
                    if (update_goldens) {
                        write_file(path, run.marks_json);
                        note = " (golden updated)";
                    } else if (dvl::read_text_file(path) != run.marks_json) {
                        ok = false;
                        note = " (golden mismatch)";
                    }
                }
                std::cout << (ok ? "PASS " : "FAIL ") << name << note << "\n";
                all_ok = all_ok && ok;
            } catch (const dvl::Error& e) {
                std::cout << "FAIL " << name << ": " << e.what() << "\n";
                all_ok = false;
            }
        }
        std::exit(all_ok ? kExitOk : kExitExecute);
    });
    auto* fx_export = fixtures->add_subcommand("export", "Write fixture files to a directory");
    std::string export_dir;
    fx_export->add_option("dir", export_dir, "target directory")->required();
    fx_export->callback([&]() { dvl::export_fixtures(export_dir); });
    fixtures->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);
    return kExitOk;
}
