#include "ddsim/time_series.hpp"

#include <algorithm>
#include <cmath>

#include "ddsim/error.hpp"

namespace ddsim {

TimeSeries::TimeSeries(double constant) : times_{0.0}, values_{constant} {}

TimeSeries::TimeSeries(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size()) {
    throw DomainError("time series: need equally many (>= 1) times and values");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || !std::isfinite(values_[i])) {
      throw DomainError("time series: samples must be finite");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw DomainError("time series: sample times must be strictly increasing");
    }
  }
}

double TimeSeries::at(double t) const {
  if (values_.size() == 1 || t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin());
  const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
  return (1.0 - w) * values_[i - 1] + w * values_[i];
}

TimeSeries TimeSeries::shifted(double offset) const {
  TimeSeries out = *this;
  for (double& v : out.values_) v += offset;
  return out;
}

}  // namespace ddsim
