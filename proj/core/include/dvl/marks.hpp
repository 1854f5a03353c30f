#pragma once

#include <map>
#include <string>
#include <vector>

#include "dvl/layouts.hpp"
#include "dvl/relcore.hpp"
#include "dvl/specmodel.hpp"

namespace dvl {

/// One mark: the source row's key values plus resolved channels. Channels
/// hold pixel numbers, paint strings, or text.
struct MarkRecord {
    Row key;
    std::map<std::string, Value> channels;
    Extent extent;
};

/// The relation of a view's marks, 1-1 and row-aligned with its data table.
struct MarkTable {
    std::string view;
    MarkType mark = MarkType::Point;
    std::string table;
    std::vector<MarkRecord> records;
    Extent view_extent;

    const Value* channel(size_t row, const std::string& name) const {
        auto it = records[row].channels.find(name);
        return it == records[row].channels.end() ? nullptr : &it->second;
    }
};

/// Spatial extent of one mark from its resolved channels (defaults applied).
Extent mark_extent(MarkType mark, const MarkRecord& rec);

} // namespace dvl
