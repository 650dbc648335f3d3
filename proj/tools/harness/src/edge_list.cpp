#include "sortgraph/harness/edge_list.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "sortgraph/error.hpp"

namespace sortgraph::harness {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  raise(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + what);
}

std::string_view next_token(std::string_view& rest) {
  std::size_t i = 0;
  while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
  std::size_t j = i;
  while (j < rest.size() && !std::isspace(static_cast<unsigned char>(rest[j]))) ++j;
  const std::string_view token = rest.substr(i, j - i);
  rest.remove_prefix(j);
  return token;
}

VertexId parse_id(std::string_view token, std::size_t line) {
  VertexId v = 0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || end != token.data() + token.size())
    fail(line, "expected a vertex id, got '" + std::string(token) + "'");
  return v;
}

}  // namespace

EdgeList parse_edge_list(std::istream& in) {
  EdgeList out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::string_view rest(text);
    const std::string_view first = next_token(rest);
    if (first.empty() || first.front() == '#') continue;
    const std::string_view second = next_token(rest);
    if (second.empty()) fail(line, "expected 'src dst [weight]'");
    EdgeRecord e{parse_id(first, line), parse_id(second, line), 1.0f};
    const std::string_view third = next_token(rest);
    if (!third.empty()) {
      const std::string w(third);
      char* end = nullptr;
      const double value = std::strtod(w.c_str(), &end);
      if (end != w.c_str() + w.size() || std::isnan(value))
        fail(line, "expected a weight, got '" + w + "'");
      e.weight = static_cast<Weight>(value);
      if (e.weight == kTombstone) {
        e.weight = std::numeric_limits<Weight>::denorm_min();
        out.zero_weight_lines.push_back(line);
      }
    }
    if (!next_token(rest).empty()) fail(line, "trailing fields");
    out.edges.push_back(e);
  }
  return out;
}

EdgeList load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::not_found, "cannot open '" + path + "'");
  return parse_edge_list(in);
}

}  // namespace sortgraph::harness
