#include "sortgraph/harness/report.hpp"

namespace sortgraph::harness {

Json to_json(const MemoryReport& m) {
  Json j;
  j["sort_bytes"] = m.sort_bytes;
  j["vertex_table_bytes"] = m.vertex_table_bytes;
  j["snapshot_bytes"] = m.snapshot_bytes;
  j["log_bytes"] = m.log_bytes;
  j["bitmap_bytes"] = m.bitmap_bytes;
  j["total_bytes"] = m.total();
  return j;
}

Json to_json(const std::vector<WindowSample>& series) {
  Json j = Json::array();
  for (const WindowSample& w : series) {
    Json row;
    row["window"] = w.window;
    row["ops"] = w.ops;
    row["seconds"] = w.seconds;
    row["throughput_ops_per_sec"] = w.throughput;
    j.push_back(std::move(row));
  }
  return j;
}

Json to_json(const IndexRow& row) {
  Json j;
  j["name"] = row.name;
  j["config"] = row.config.to_string();
  j["slots"] = row.slots;
  j["slot_bytes"] = row.bytes;
  j["expected_slots"] = row.expected_slots;
  j["insert_seconds"] = row.insert_seconds;
  return j;
}

Json make_report(const std::string& command, Json params, double throughput, double duration,
                 const MemoryReport& memory, Json series) {
  Json j;
  j["command"] = command;
  j["params"] = std::move(params);
  j["throughput_ops_per_sec"] = throughput;
  j["duration_sec"] = duration;
  j["memory"] = to_json(memory);
  j["series"] = series.is_null() ? Json::array() : std::move(series);
  return j;
}

}  // namespace sortgraph::harness
