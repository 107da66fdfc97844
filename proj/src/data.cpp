#include "evoqrnn/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "evoqrnn/errors.hpp"

namespace evoqrnn::data {

namespace {

// Integer ratio a / b, or -1 when it is not (close to) an integer.
long long integral_ratio(double a, double b) {
  const double r = a / b;
  const double rounded = std::round(r);
  if (std::abs(r - rounded) > 1e-9 * std::max(1.0, std::abs(r))) return -1;
  return static_cast<long long>(rounded);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

void MackeyGlassParams::validate() const {
  if (!(dt > 0.0)) throw ConfigError("Mackey-Glass dt must be positive");
  if (!(tau > 0.0)) throw ConfigError("Mackey-Glass tau must be positive");
  if (!(stride > 0.0)) throw ConfigError("Mackey-Glass stride must be positive");
  if (integral_ratio(tau, dt) < 1) throw ConfigError("Mackey-Glass tau must be an integral multiple of dt");
  if (integral_ratio(stride, dt) < 1) throw ConfigError("Mackey-Glass stride must be a multiple of dt");
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(x0)) {
    throw ConfigError("Mackey-Glass coefficients must be finite");
  }
}

double mackey_glass_rhs(const MackeyGlassParams& p, double x, double x_delayed) {
  return p.beta * x + p.alpha * x_delayed / (1.0 + std::pow(x_delayed, 10));
}

std::vector<double> mackey_glass(const MackeyGlassParams& params, std::size_t n_points) {
  params.validate();
  if (n_points < 1) throw ConfigError("Mackey-Glass needs at least one sample");
  const auto delay = static_cast<std::size_t>(integral_ratio(params.tau, params.dt));
  const auto per_sample = static_cast<std::size_t>(integral_ratio(params.stride, params.dt));
  const std::size_t n_steps = (n_points - 1) * per_sample;

  std::vector<double> grid;
  grid.reserve(n_steps + 1);
  grid.push_back(params.x0);
  const auto at = [&](std::size_t k, std::size_t back) { return k >= back ? grid[k - back] : params.x0; };

  const double h = params.dt;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double x = grid[k];
    const double d0 = at(k, delay);
    const double d1 = at(k + 1, delay);
    const double dmid = 0.5 * (d0 + d1);
    const double k1 = mackey_glass_rhs(params, x, d0);
    const double k2 = mackey_glass_rhs(params, x + 0.5 * h * k1, dmid);
    const double k3 = mackey_glass_rhs(params, x + 0.5 * h * k2, dmid);
    const double k4 = mackey_glass_rhs(params, x + h * k3, d1);
    grid.push_back(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  }

  std::vector<double> out(n_points);
  for (std::size_t i = 0; i < n_points; ++i) out[i] = grid[i * per_sample];
  return out;
}

std::vector<double> load_csv(const std::filesystem::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open CSV file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw RuntimeFailure("CSV file '" + path.string() + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == column) col = i;
  }
  if (col == header.size()) {
    throw ConfigError("column '" + column + "' not found in '" + path.string() + "'");
  }

  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    double v = 0.0;
    if (col >= fields.size() || !parse_double(trim(fields[col]), v)) {
      throw RuntimeFailure("non-numeric value in column '" + column + "' at row " + std::to_string(line_no) +
                           " of '" + path.string() + "'");
    }
    values.push_back(v);
  }
  if (values.size() < 2) {
    throw RuntimeFailure("column '" + column + "' in '" + path.string() + "' has fewer than 2 valid rows");
  }
  return values;
}

void emit_csv(const std::filesystem::path& path, const std::string& column, std::span<const double> values) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write CSV file '" + path.string() + "'");
  out << "t," << column << '\n';
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), values[i]);
    out << i << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << '\n';
  }
  if (!out) throw RuntimeFailure("failed while writing '" + path.string() + "'");
}

Normalized normalize(std::span<const double> series, std::size_t train_begin, std::size_t train_end) {
  if (train_begin >= train_end || train_end > series.size()) throw UsageError("invalid train range");
  const auto [lo, hi] = std::minmax_element(series.begin() + static_cast<std::ptrdiff_t>(train_begin),
                                            series.begin() + static_cast<std::ptrdiff_t>(train_end));
  if (!(*hi > *lo)) throw ConfigError("cannot normalize: training split is constant");
  Normalized out{{}, Scaler{*lo, *hi}};
  out.values.reserve(series.size());
  for (double x : series) out.values.push_back(out.scaler.normalize(x));
  return out;
}

std::vector<double> denormalize(std::span<const double> values, const Scaler& scaler) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double u : values) out.push_back(scaler.denormalize(u));
  return out;
}

TimeSeriesDataset split_80_20(std::span<const double> series, std::string name) {
  if (series.size() < kProtocolPoints) {
    throw ConfigError("series '" + name + "' has " + std::to_string(series.size()) + " points; at least " +
                      std::to_string(kProtocolPoints) + " are required");
  }
  TimeSeriesDataset ds;
  ds.name = std::move(name);
  ds.raw.assign(series.begin(), series.begin() + kProtocolPoints);
  ds.train_size = kProtocolTrain;
  ds.test_size = kProtocolPoints - kProtocolTrain;
  auto norm = normalize(ds.raw, 0, ds.train_size);
  ds.normalized = std::move(norm.values);
  ds.scaler = norm.scaler;
  return ds;
}

}  // namespace evoqrnn::data
