#ifndef DPINFER_CSV_HPP
#define DPINFER_CSV_HPP

// Readers for the three input layouts:
//   unit-level   group,outcome
//   aggregate    group,successes,trials
//   censored     group,applications,hired
// UTF-8, comma separated, no quoting. A label that would need quoting (it
// contains a comma or a double quote) is rejected.

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpinfer/data_model.hpp"
#include "dpinfer/error.hpp"

namespace dpinfer::csv {

enum class Layout { unit, aggregate, censored };

inline const char* to_string(Layout layout) {
  switch (layout) {
    case Layout::unit: return "unit";
    case Layout::aggregate: return "aggregate";
    case Layout::censored: return "censored";
  }
  return "unknown";
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::string where(std::size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

inline std::uint64_t parse_count(std::string_view field, std::size_t line_no,
                                 std::string_view name) {
  std::uint64_t value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    fail(ErrorKind::invalid_input, where(line_no) + std::string(name) +
                                       " must be a non-negative integer, got '" +
                                       std::string(field) + "'");
  }
  return value;
}

inline int parse_binary(std::string_view field, std::size_t line_no, std::string_view name) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  fail(ErrorKind::invalid_input, where(line_no) + std::string(name) +
                                     " must be 0 or 1, got '" + std::string(field) + "'");
}

inline std::string parse_label(std::string_view field, std::size_t line_no) {
  if (field.empty()) fail(ErrorKind::invalid_input, where(line_no) + "empty group label");
  if (field.find('"') != std::string_view::npos) {
    fail(ErrorKind::invalid_input, where(line_no) + "quoted group labels are not supported");
  }
  return std::string(field);
}

struct Rows {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

// Reads header and data rows; every data row must have the header's width.
inline Rows read_rows(std::istream& in, std::vector<std::string>& header) {
  Rows out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    auto fields = split(view);
    if (!have_header) {
      header.assign(fields.begin(), fields.end());
      have_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      fail(ErrorKind::invalid_input,
           where(line_no) + "expected " + std::to_string(header.size()) + " fields, found " +
               std::to_string(fields.size()) +
               " (labels containing commas are not supported)");
    }
    out.rows.emplace_back(fields.begin(), fields.end());
    out.line_numbers.push_back(line_no);
  }
  if (!have_header) fail(ErrorKind::invalid_input, "input is empty");
  if (out.rows.empty()) fail(ErrorKind::invalid_input, "input has a header but no data rows");
  return out;
}

inline void expect_header(const std::vector<std::string>& header,
                          const std::vector<std::string>& expected) {
  if (header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    fail(ErrorKind::invalid_input, "line 1: expected header '" + want + "'");
  }
}

}  // namespace detail

/// Guesses the layout from the header line alone.
inline std::optional<Layout> detect_layout(const std::vector<std::string>& header) {
  if (header == std::vector<std::string>{"group", "outcome"}) return Layout::unit;
  if (header == std::vector<std::string>{"group", "successes", "trials"}) {
    return Layout::aggregate;
  }
  if (header == std::vector<std::string>{"group", "applications", "hired"}) {
    return Layout::censored;
  }
  return std::nullopt;
}

inline std::vector<UnitRecord> read_units(std::istream& in) {
  std::vector<std::string> header;
  auto rows = detail::read_rows(in, header);
  detail::expect_header(header, {"group", "outcome"});
  std::vector<UnitRecord> out;
  out.reserve(rows.rows.size());
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    const auto& r = rows.rows[i];
    const auto ln = rows.line_numbers[i];
    out.push_back({detail::parse_label(r[0], ln), detail::parse_binary(r[1], ln, "outcome")});
  }
  return out;
}

inline GroupedCounts read_aggregate(std::istream& in) {
  std::vector<std::string> header;
  auto rows = detail::read_rows(in, header);
  detail::expect_header(header, {"group", "successes", "trials"});
  std::vector<GroupCount> groups;
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    const auto& r = rows.rows[i];
    const auto ln = rows.line_numbers[i];
    GroupCount g{detail::parse_label(r[0], ln),
                 detail::parse_count(r[1], ln, "successes"),
                 detail::parse_count(r[2], ln, "trials")};
    if (g.trials == 0) {
      fail(ErrorKind::invalid_input,
           detail::where(ln) + "group '" + g.label + "' has zero trials");
    }
    if (g.successes > g.trials) {
      fail(ErrorKind::invalid_input,
           detail::where(ln) + "group '" + g.label + "' has more successes than trials");
    }
    groups.push_back(std::move(g));
  }
  return GroupedCounts(std::move(groups));
}

inline std::vector<CensoredRecord> read_censored(std::istream& in) {
  std::vector<std::string> header;
  auto rows = detail::read_rows(in, header);
  detail::expect_header(header, {"group", "applications", "hired"});
  std::vector<CensoredRecord> out;
  out.reserve(rows.rows.size());
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    const auto& r = rows.rows[i];
    const auto ln = rows.line_numbers[i];
    CensoredRecord rec{detail::parse_label(r[0], ln),
                       detail::parse_count(r[1], ln, "applications"),
                       detail::parse_binary(r[2], ln, "hired")};
    if (rec.applications == 0) {
      fail(ErrorKind::invalid_input, detail::where(ln) + "applications must be at least 1");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

/// Reads the first non-empty line as a header without consuming the stream.
/// Intended for whole-file buffers (see the CLI), not pipes.
inline std::vector<std::string> peek_header(std::string_view text) {
  std::size_t start = 0;
  if (text.starts_with("\xEF\xBB\xBF")) start = 3;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = detail::trim(text.substr(start, end - start));
    if (!line.empty()) {
      auto fields = detail::split(line);
      return {fields.begin(), fields.end()};
    }
    start = end + 1;
  }
  return {};
}

}  // namespace dpinfer::csv

#endif  // DPINFER_CSV_HPP
