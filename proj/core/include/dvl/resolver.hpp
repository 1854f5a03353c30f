#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dvl/marks.hpp"
#include "dvl/relcore.hpp"
#include "dvl/specmodel.hpp"

namespace dvl {

/// One hop along a foreign key. Forward hops run src -> dst and land on a
/// key of the destination; reverse hops are used only by aggregating
/// references (and 1-1 constraints, where they also land on a key).
struct FkHop {
    std::string constraint;
    bool forward = true;
};

struct FkPath {
    std::string origin;    // table name
    std::string terminal;  // table name
    std::vector<FkHop> hops;
};

struct PathInfo {
    bool unambiguous = false;
    /// Retrieved prop tuples are distinct over the terminal instance, so the
    /// reference transfers a key of the target into the source view.
    bool preserves_key = false;
    /// Every hop is 1-1 (static sufficient condition for key transfer).
    bool all_one_to_one = false;
    std::string terminal;
    FkPath path;
};

/// All distinct forward key-landing hop sequences from `from` to `to`,
/// length 1..max_hops. Mark tables ride along for free (1-1 with data).
std::vector<FkPath> enumerate_paths(const Database& db, const std::string& from,
                                    const std::string& to, int max_hops = 3);

/// Resolution context: executed (or partially executed) mark tables by view
/// name; null entries mean "not materialized yet".
struct ResolveContext {
    const Database* db = nullptr;
    const PlotSpec* spec = nullptr;
    std::function<const MarkTable*(const std::string&)> marks = {};
};

/// Checks a reference from `view` and classifies it. Throws Error when no
/// path matches or several do without an aggregate.
PathInfo validate_ref(const ResolveContext& ctx, const ViewSpec& view, const ForeignRefSpec& ref);

/// Per-source-row resolved values, one column per requested channel
/// (a single unnamed column for aggregating refs, keyed "").
struct ForeignValue {
    std::map<std::string, std::vector<Value>> columns;
};

/// Evaluates the reference for every row of the view's data table.
/// Dangling references (no matching mark) and multiple matches without an
/// aggregate are hard errors.
ForeignValue get(const ResolveContext& ctx, const ViewSpec& source_view, const ForeignRefSpec& ref);

} // namespace dvl
