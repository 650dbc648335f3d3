#pragma once

#include <string>

#include <json.hpp>

#include "sortgraph/harness/compare.hpp"
#include "sortgraph/harness/memory.hpp"
#include "sortgraph/harness/workload.hpp"

namespace sortgraph::harness {

using Json = nlohmann::ordered_json;

Json to_json(const MemoryReport& m);
Json to_json(const std::vector<WindowSample>& series);
Json to_json(const IndexRow& row);

// {command, params, throughput_ops_per_sec, duration_sec, memory, series}
Json make_report(const std::string& command, Json params, double throughput, double duration,
                 const MemoryReport& memory, Json series);

}  // namespace sortgraph::harness
