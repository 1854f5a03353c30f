#pragma once

#include <map>
#include <string>
#include <vector>

#include "dvl/compiler.hpp"
#include "dvl/faithful.hpp"
#include "dvl/manifest.hpp"
#include "dvl/specmodel.hpp"

namespace dvl {

/// A self-contained example: manifest + data payloads + spec, with the
/// expected lint verdict. These power the golden and acceptance tests and
/// the `dvl fixtures` subcommand.
struct Fixture {
    std::string name;
    std::string manifest;                       // manifest JSON; paths index `files`
    std::map<std::string, std::string> files;   // path -> payload
    std::string spec;                           // .dvl.json document
    bool expect_faithful = true;
};

const std::vector<Fixture>& all_fixtures();
const Fixture& fixture(const std::string& name);
std::vector<std::string> list_fixtures();

struct FixtureRun {
    PlotSpec spec;
    Database base;           // loaded tables + constraints, before prep
    TaskGraph graph;
    ExecutionResult result;
    FaithfulnessReport report;
    std::string marks_json;
    std::string svg;
};

/// Loads, compiles, executes, renders, and lints one fixture.
FixtureRun run_fixture(const std::string& name);
FixtureRun run_fixture(const Fixture& fx);

/// Writes each fixture to `dir/<name>/` as manifest.json, data files, and
/// spec.dvl.json, so the CLI can drive them from disk.
void export_fixtures(const std::string& dir);

} // namespace dvl
