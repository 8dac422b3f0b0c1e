#pragma once

#include <vector>

namespace ddsim {

/// Piecewise-linear function of time given by samples; constant outside the
/// sampled range. A single sample is a constant.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(double constant);  // NOLINT(google-explicit-constructor)
  TimeSeries(std::vector<double> times, std::vector<double> values);

  double at(double t) const;
  bool is_constant() const noexcept { return values_.size() <= 1; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Adds `offset` to every sample.
  TimeSeries shifted(double offset) const;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> times_{0.0};
  std::vector<double> values_{0.0};
};

}  // namespace ddsim
