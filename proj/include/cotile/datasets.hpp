#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotile/online_linear.hpp"

namespace cotile {

struct Scaler {
  std::vector<double> mean;
  std::vector<double> std;  // population standard deviation

  bool operator==(const Scaler&) const = default;
};

struct Dataset {
  std::vector<std::vector<double>> X;
  std::vector<Label> Y;
  std::optional<Scaler> scaler;

  std::size_t size() const { return Y.size(); }
  std::size_t dim() const { return X.empty() ? 0 : X.front().size(); }

  bool operator==(const Dataset&) const = default;
};

/// Thrown by load_csv; `line()` is 1-based.
class CsvParseError : public std::runtime_error {
 public:
  CsvParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Two interleaved half circles. Class 0: (cos t, sin t); class 1:
/// (1 - cos t, 0.5 - sin t); t on a uniform grid over [0, pi].
Dataset gen_moons(std::size_t n, double noise, std::uint64_t seed);

/// Outer ring (class 0, radius 1) around an inner ring (class 1, radius
/// `factor`), angles on a uniform grid over [0, 2 pi).
Dataset gen_circles(std::size_t n, double noise, double factor, std::uint64_t seed);

/// Two unit-variance Gaussian blobs at (-1.5, 0) and (+1.5, 0); only the
/// first feature is informative.
Dataset gen_linear(std::size_t n, std::uint64_t seed);

/// Z-scores every column with full-dataset statistics and records them.
Dataset standardize(const Dataset& d);

void save_csv(const Dataset& d, const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path);

/// Writes rows as `x1,x2,...,y` with 17 significant digits.
std::string to_csv(const Dataset& d);
Dataset parse_csv(const std::string& text);

}  // namespace cotile
