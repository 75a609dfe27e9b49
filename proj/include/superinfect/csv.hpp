#pragma once

#include <concepts>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "superinfect/error.hpp"

namespace superinfect {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// FNV-1a, used to fingerprint manifests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Comma-separated writer. Every file starts with a "# manifest=<hash>" line,
/// then the header row.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::string_view manifest_hash,
            std::initializer_list<std::string_view> columns)
      : out_(path, std::ios::binary) {
    if (!out_) throw ValidationError("cannot open output file " + path);
    out_ << "# manifest=" << manifest_hash << '\n';
    bool first = true;
    for (auto col : columns) {
      if (!first) out_ << ',';
      out_ << col;
      first = false;
    }
    out_ << '\n';
    width_ = columns.size();
  }

  CsvWriter& field(double x) { return raw(format_double(x)); }
  CsvWriter& field(bool x) { return raw(x ? "1" : "0"); }
  template <std::integral T>
    requires(!std::same_as<T, bool>)
  CsvWriter& field(T x) {
    return raw(std::to_string(x));
  }
  CsvWriter& field(std::string_view s) { return raw(std::string(s)); }

  void end_row() {
    if (fields_ != width_) throw std::logic_error("csv row width mismatch");
    out_ << '\n';
    fields_ = 0;
  }

  void comment(std::string_view text) { out_ << "# " << text << '\n'; }

 private:
  CsvWriter& raw(const std::string& s) {
    if (fields_ > 0) out_ << ',';
    out_ << s;
    ++fields_;
    return *this;
  }

  std::ofstream out_;
  std::size_t width_ = 0;
  std::size_t fields_ = 0;
};

}  // namespace superinfect
