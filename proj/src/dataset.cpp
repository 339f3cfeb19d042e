#include "certiq/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "certiq/error.hpp"
#include "certiq/random.hpp"

namespace certiq {

Dataset make_two_moons(int n, std::uint64_t seed, double noise) {
  if (n < 2) throw Error("two-moons needs at least two points");
  if (noise < 0.0) throw Error("noise must be non-negative");
  const int n_out = n / 2;
  const int n_in = n - n_out;
  auto angle = [](int i, int count) {
    return count > 1 ? std::numbers::pi * i / (count - 1) : 0.0;
  };
  Dataset d;
  d.class_names = {"0", "1"};
  for (int i = 0; i < n_out; ++i) {
    Vector p(2);
    p << std::cos(angle(i, n_out)), std::sin(angle(i, n_out));
    d.x.push_back(p);
    d.y.push_back(0);
  }
  for (int i = 0; i < n_in; ++i) {
    Vector p(2);
    p << 1.0 - std::cos(angle(i, n_in)), 1.0 - std::sin(angle(i, n_in)) - 0.5;
    d.x.push_back(p);
    d.y.push_back(1);
  }
  Rng rng(seed);
  for (Vector& p : d.x) {
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] += noise * rng.normal();
  }
  return d;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool first = true;
  std::size_t width = 0;
  std::vector<std::pair<int, std::string>> labels;  // (line, raw label)
  Dataset d;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_row(line);
    if (cells.size() < 2) throw Error("line " + std::to_string(lineno) + ": need features and a label");
    if (first) {
      first = false;
      width = cells.size();
      double v;
      bool header = false;
      for (std::size_t i = 0; i + 1 < cells.size(); ++i) header = header || !parse_double(cells[i], v);
      if (header) continue;
    }
    if (cells.size() != width) {
      throw Error("line " + std::to_string(lineno) + ": expected " + std::to_string(width) + " columns, got " +
                  std::to_string(cells.size()));
    }
    Vector x(width - 1);
    for (std::size_t i = 0; i + 1 < width; ++i) {
      if (!parse_double(cells[i], x[i])) {
        throw Error("line " + std::to_string(lineno) + ": non-numeric value '" + cells[i] + "'");
      }
    }
    if (cells.back().empty()) throw Error("line " + std::to_string(lineno) + ": empty label");
    d.x.push_back(std::move(x));
    labels.emplace_back(lineno, cells.back());
  }
  if (d.x.empty()) throw Error("CSV contains no data rows");

  bool integer = true;
  int max_label = -1;
  for (const auto& [ln, raw] : labels) {
    int v;
    if (!parse_int(raw, v) || v < 0) {
      integer = false;
      break;
    }
    max_label = std::max(max_label, v);
  }
  if (integer) {
    for (const auto& [ln, raw] : labels) {
      int v;
      parse_int(raw, v);
      d.y.push_back(v);
    }
    for (int k = 0; k <= max_label; ++k) d.class_names.push_back(std::to_string(k));
  } else {
    std::map<std::string, int> ids;
    for (const auto& [ln, raw] : labels) {
      auto [it, fresh] = ids.emplace(raw, static_cast<int>(d.class_names.size()));
      if (fresh) d.class_names.push_back(raw);
      d.y.push_back(it->second);
    }
  }
  return d;
}

Dataset load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open dataset '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  char buf[64];
  for (int j = 0; j < data.num_features(); ++j) out += "x" + std::to_string(j) + ",";
  out += "label\n";
  for (int i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.x[i].size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", data.x[i][j]);
      out += buf;
    }
    out += data.class_names.empty() ? std::to_string(data.y[i]) : data.class_names[data.y[i]];
    out += "\n";
  }
  return out;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  f << dataset_to_csv(data);
}

Dataset filter_classes(const Dataset& data, const std::vector<int>& keep) {
  if (keep.size() < 2) throw Error("keep at least two classes");
  std::map<int, int> remap;
  Dataset d;
  for (int k : keep) {
    if (k < 0 || k >= data.num_classes()) throw Error("class " + std::to_string(k) + " does not exist");
    if (!remap.emplace(k, static_cast<int>(remap.size())).second) throw Error("class listed twice");
    d.class_names.push_back(data.class_names[k]);
  }
  for (int i = 0; i < data.size(); ++i) {
    auto it = remap.find(data.y[i]);
    if (it == remap.end()) continue;
    d.x.push_back(data.x[i]);
    d.y.push_back(it->second);
  }
  return d;
}

}  // namespace certiq
