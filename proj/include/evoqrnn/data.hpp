#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace evoqrnn::data {

/// dx/dt = beta x(t) + alpha x(t - tau) / (1 + x(t - tau)^10), with constant
/// history x(t) = x0 for t <= 0.
struct MackeyGlassParams {
  double alpha = 0.2;
  double beta = -0.1;
  double tau = 17.0;
  double x0 = 1.2;
  /// RK4 step.
  double dt = 0.1;
  /// Time between returned samples; a multiple of dt.
  double stride = 1.0;

  void validate() const;
};

/// Right-hand side for the current value and the delayed value.
double mackey_glass_rhs(const MackeyGlassParams& p, double x, double x_delayed);

/// `n_points` samples at t = 0, stride, 2 stride, ... RK4 on a fixed grid; the
/// delayed value at half steps is the average of the two neighbouring grid
/// points.
std::vector<double> mackey_glass(const MackeyGlassParams& params, std::size_t n_points);

/// Reads one numeric column from a comma-separated file with a header row.
/// Errors name the offending 1-based line.
std::vector<double> load_csv(const std::filesystem::path& path, const std::string& column);

/// Writes `t,<column>` rows with round-trippable precision.
void emit_csv(const std::filesystem::path& path, const std::string& column, std::span<const double> values);

struct Scaler {
  double min = 0.0;
  double max = 1.0;

  double normalize(double x) const noexcept { return (x - min) / (max - min); }
  double denormalize(double u) const noexcept { return min + u * (max - min); }
};

struct Normalized {
  std::vector<double> values;
  Scaler scaler;
};

/// Min-max scaling fitted on series[train_begin, train_end) and applied to
/// every point; values outside the train range map outside [0, 1].
Normalized normalize(std::span<const double> series, std::size_t train_begin, std::size_t train_end);

std::vector<double> denormalize(std::span<const double> values, const Scaler& scaler);

inline constexpr std::size_t kProtocolPoints = 100;
inline constexpr std::size_t kProtocolTrain = 80;

struct TimeSeriesDataset {
  std::string name;
  std::vector<double> raw;
  std::vector<double> normalized;
  Scaler scaler;
  std::size_t train_size = 0;
  std::size_t test_size = 0;

  std::span<const double> train_raw() const { return {raw.data(), train_size}; }
  std::span<const double> test_raw() const { return {raw.data() + train_size, test_size}; }
  std::span<const double> train_norm() const { return {normalized.data(), train_size}; }
  std::span<const double> test_norm() const { return {normalized.data() + train_size, test_size}; }
};

/// Keeps the first 100 points, train = 0..79, test = 80..99, normalized on
/// the train split.
TimeSeriesDataset split_80_20(std::span<const double> series, std::string name = "series");

}  // namespace evoqrnn::data
