#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "npboot/errors.hpp"

namespace npboot {

namespace detail {

inline bool parse_double(const std::string& text, double& out) {
  const char* b = text.data();
  const char* e = b + text.size();
  const auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

inline void trim(std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  s = s.substr(b, e - b);
}

}  // namespace detail

/**
 * Read a one-column series: one finite number per row, optional single
 * header row, UTF-8 BOM and CRLF tolerated, trailing blank lines ignored.
 * Anything else is a ParseError carrying the 1-based row number (the
 * header, when present, counts as row 1).
 */
inline std::vector<double> ingest_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0)
    text.erase(0, 3);

  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    detail::trim(l);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw EmptyFile(path);

  std::vector<double> values;
  values.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t row = i + 1;
    const auto& line = lines[i];
    if (line.empty()) throw ParseError(row, "empty row");
    double v = 0.0;
    if (!detail::parse_double(line, v)) {
      if (i == 0) continue;  // the single permitted header row
      throw ParseError(row, "not a number: \"" + line + "\"");
    }
    if (!std::isfinite(v)) throw ParseError(row, "non-finite value: \"" + line + "\"");
    values.push_back(v);
  }
  if (values.empty()) throw EmptyFile(path);
  return values;
}

}  // namespace npboot
