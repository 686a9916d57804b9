#include "cotile/datasets.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cotile/rng.hpp"

namespace cotile {
namespace {

void add_noise(Dataset& d, double noise, Rng& rng) {
  if (noise == 0.0) return;
  for (auto& row : d.X) {
    for (double& v : row) v += noise * rng.normal();
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw CsvParseError(line, "cannot parse number '" + field + "'");
  }
  return v;
}

}  // namespace

Dataset gen_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("moons needs at least 2 points");
  if (noise < 0.0) throw std::invalid_argument("noise must be >= 0");
  const std::size_t n_out = n / 2;
  const std::size_t n_in = n - n_out;
  auto grid = [](std::size_t k, std::size_t count) {
    return count == 1 ? 0.0 : std::numbers::pi * static_cast<double>(k) / static_cast<double>(count - 1);
  };
  Dataset d;
  for (std::size_t k = 0; k < n_out; ++k) {
    const double t = grid(k, n_out);
    d.X.push_back({std::cos(t), std::sin(t)});
    d.Y.push_back(0);
  }
  for (std::size_t k = 0; k < n_in; ++k) {
    const double t = grid(k, n_in);
    d.X.push_back({1.0 - std::cos(t), 0.5 - std::sin(t)});
    d.Y.push_back(1);
  }
  Rng rng(seed);
  add_noise(d, noise, rng);
  return d;
}

Dataset gen_circles(std::size_t n, double noise, double factor, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("circles needs at least 2 points");
  if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("factor must lie in (0, 1)");
  if (noise < 0.0) throw std::invalid_argument("noise must be >= 0");
  const std::size_t n_out = n / 2;
  const std::size_t n_in = n - n_out;
  Dataset d;
  auto ring = [&d](std::size_t count, double radius, Label label) {
    for (std::size_t k = 0; k < count; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      d.X.push_back({radius * std::cos(t), radius * std::sin(t)});
      d.Y.push_back(label);
    }
  };
  ring(n_out, 1.0, 0);
  ring(n_in, factor, 1);
  Rng rng(seed);
  add_noise(d, noise, rng);
  return d;
}

Dataset gen_linear(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("linear dataset needs at least 2 points");
  const std::size_t n0 = n / 2;
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const Label y = i < n0 ? 0 : 1;
    const double mean = y == 0 ? -1.5 : 1.5;
    const double a = mean + rng.normal();
    const double b = rng.normal();
    d.X.push_back({a, b});
    d.Y.push_back(y);
  }
  return d;
}

Dataset standardize(const Dataset& d) {
  if (d.X.empty()) throw std::invalid_argument("cannot standardize an empty dataset");
  const std::size_t p = d.dim();
  const double n = static_cast<double>(d.size());
  Scaler s{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
  for (const auto& row : d.X) {
    for (std::size_t j = 0; j < p; ++j) s.mean[j] += row[j];
  }
  for (double& m : s.mean) m /= n;
  for (const auto& row : d.X) {
    for (std::size_t j = 0; j < p; ++j) s.std[j] += (row[j] - s.mean[j]) * (row[j] - s.mean[j]);
  }
  for (std::size_t j = 0; j < p; ++j) {
    s.std[j] = std::sqrt(s.std[j] / n);
    if (!(s.std[j] > 0.0)) {
      throw std::invalid_argument("column " + std::to_string(j) + " has zero variance");
    }
  }
  Dataset out;
  out.Y = d.Y;
  out.X.reserve(d.size());
  for (const auto& row : d.X) {
    std::vector<double> z(p);
    for (std::size_t j = 0; j < p; ++j) z[j] = (row[j] - s.mean[j]) / s.std[j];
    out.X.push_back(std::move(z));
  }
  out.scaler = std::move(s);
  return out;
}

std::string to_csv(const Dataset& d) {
  std::string out;
  for (std::size_t j = 0; j < d.dim(); ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "y\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (double v : d.X[i]) out += format_double(v) + ",";
    out += std::to_string(d.Y[i]) + "\n";
  }
  return out;
}

Dataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw CsvParseError(1, "missing header");
  const auto header = split(line, ',');
  if (header.size() < 2 || header.back() != "y") {
    throw CsvParseError(1, "header must end with a 'y' label column");
  }
  for (std::size_t j = 0; j + 1 < header.size(); ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) {
      throw CsvParseError(1, "unexpected column name '" + header[j] + "'");
    }
  }
  const std::size_t p = header.size() - 1;
  Dataset d;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != p + 1) {
      throw CsvParseError(lineno, "expected " + std::to_string(p + 1) + " fields, got " +
                                      std::to_string(fields.size()));
    }
    std::vector<double> row(p);
    for (std::size_t j = 0; j < p; ++j) row[j] = parse_number(fields[j], lineno);
    const std::string& label = fields.back();
    if (label != "0" && label != "1") throw CsvParseError(lineno, "label must be 0 or 1");
    d.X.push_back(std::move(row));
    d.Y.push_back(label == "1" ? 1 : 0);
  }
  if (d.Y.empty()) throw CsvParseError(lineno, "no data rows");
  return d;
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_csv(d);
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace cotile
