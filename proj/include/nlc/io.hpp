// CSV tables, content hashing, JSON helpers with strict key checking,
// flat key=value overrides and the run manifest.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace nlc::io {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

// Configuration problems: bad schema, unknown keys, unreadable files.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError(p.string(), "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Writes through a temporary file so a failed run leaves no partial output.
inline void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const auto tmp = std::filesystem::path(p.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError(p.string(), "cannot write file");
    out << text;
  }
  std::filesystem::rename(tmp, p);
}

// ---------------------------------------------------------------- strict JSON access

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  // Must be called once all fields are read.
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.contains(k)) throw ConfigError(path_ + "/" + k, "unknown key");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(path_ + "/" + key, "missing required key");
    return convert<T>(key);
  }
  template <class T>
  T get_or(const std::string& key, T fallback) {
    return j_.contains(key) ? convert<T>(key) : fallback;
  }
  Reader child(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(path_ + "/" + key, "missing required section");
    seen_.insert(key);
    return Reader(j_.at(key), path_ + "/" + key);
  }
  const json* raw(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }
  const std::string& path() const { return path_; }

 private:
  template <class T>
  T convert(const std::string& key) {
    seen_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "/" + key, std::string("wrong type: ") + e.what());
    }
  }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin, std::string("invalid JSON: ") + e.what());
  }
}

// key "a.b.c" must already exist; the value is parsed as JSON when possible.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override", "expected KEY=VALUE: " + assignment);
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json* node = &doc;
  std::string path;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) {
    path += "/" + part;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw ConfigError(path, "array index expected");
      }
      if (idx >= node->size()) throw ConfigError(path, "index out of range");
      node = &(*node)[idx];
    } else if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else {
      throw ConfigError(path, "override targets an unknown key");
    }
  }
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  *node = value;
}

// ---------------------------------------------------------------- CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ConfigError(name, "missing CSV column");
  }
  std::vector<double> column(const std::string& name) const {
    const auto k = index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

inline CsvTable parse_csv(const std::string& text, const std::string& origin = "csv") {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw ConfigError(origin + ":" + std::to_string(line_no), "wrong number of columns");
    std::vector<double> row;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != c.size()) throw ConfigError(origin + ":" + std::to_string(line_no), "not a number: " + c);
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ConfigError(origin, "empty CSV");
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& p) { return parse_csv(read_text(p), p.string()); }

inline std::string to_csv(const CsvTable& t) {
  std::ostringstream os;
  os << std::setprecision(12);
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- run manifest

struct RunManifest {
  std::string experiment;
  std::string fixture_path;
  std::uint64_t seed{1};
  std::string output_dir{"."};
  std::map<std::string, std::string> overrides;
  int threads{1};

  json to_json() const {
    json o = json::object();
    for (const auto& [k, v] : overrides) o[k] = v;
    return {{"experiment", experiment}, {"fixture", fixture_path}, {"seed", seed},
            {"output_dir", output_dir}, {"overrides", o},          {"threads", threads}};
  }

  static RunManifest from_json(const json& j) {
    Reader r(j, "manifest");
    RunManifest m;
    m.experiment = r.get<std::string>("experiment");
    m.fixture_path = r.get_or<std::string>("fixture", "");
    m.seed = r.get_or<std::uint64_t>("seed", 1);
    m.output_dir = r.get_or<std::string>("output_dir", ".");
    m.threads = r.get_or<int>("threads", 1);
    if (const json* o = r.raw("overrides")) {
      if (!o->is_object()) throw ConfigError("manifest/overrides", "expected an object");
      for (const auto& [k, v] : o->items()) m.overrides[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    r.finish();
    if (m.threads < 1) throw ConfigError("manifest/threads", "must be >= 1");
    return m;
  }
};

// Provenance block embedded in every output document.
inline json provenance(const std::string& fixture_hash, std::uint64_t seed) {
  return {{"fixture_hash", fixture_hash}, {"seed", seed}, {"tool_version", kToolVersion}};
}

}  // namespace nlc::io
