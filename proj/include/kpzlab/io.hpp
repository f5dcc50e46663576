#pragma once

// CSV tables, config hashing and atomic file output.

#include <concepts>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpzlab/errors.hpp"

namespace kpz {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// %.17g round-trips every double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& operator<<(double x) { cells_.push_back(format_double(x)); return *this; }
    template <std::integral T>
      requires(!std::same_as<T, bool>)
    Row& operator<<(T x) { cells_.push_back(std::to_string(x)); return *this; }
    Row& operator<<(const std::string& s) { cells_.push_back(s); return *this; }
    Row& operator<<(const char* s) { cells_.emplace_back(s); return *this; }
    Row& operator<<(bool b) { cells_.emplace_back(b ? "1" : "0"); return *this; }
    const std::vector<std::string>& cells() const { return cells_; }

   private:
    std::vector<std::string> cells_;
  };

  void add(const Row& r) {
    if (r.cells().size() != header_.size()) {
      throw Error("csv row has " + std::to_string(r.cells().size()) + " cells, header has " +
                  std::to_string(header_.size()));
    }
    rows_.push_back(r.cells());
  }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  bool empty() const { return header_.empty(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses a CSV written by CsvTable (no quoting).
inline CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) throw Error("empty csv");
  CsvTable t(split(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CsvTable::Row r;
    for (auto& c : split(line)) r << c;
    t.add(r);
  }
  return t;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Writes to a sibling temporary file and renames it into place, so a
/// reader never sees a partial file.
inline void atomic_write(const std::filesystem::path& p, std::string_view content) {
  std::filesystem::create_directories(p.parent_path());
  const auto tmp = p.parent_path() / ("." + p.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

/// Config keys that never influence numeric output.
inline nlohmann::json hashed_config(nlohmann::json cfg) {
  cfg.erase("workers");
  cfg.erase("output_dir");
  return cfg;
}

/// Hash of the canonical (sorted-key, compact) JSON of the config.
inline std::string config_hash(const nlohmann::json& cfg) {
  return hex64(fnv1a64(hashed_config(cfg).dump()));
}

}  // namespace kpz
