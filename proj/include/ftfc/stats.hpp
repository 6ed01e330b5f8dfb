#pragma once

#include <cstddef>
#include <span>

namespace ftfc {

/// Welford streaming mean and population standard deviation.
class RunningStats {
 public:
  void push(double x);
  std::size_t count() const { return n_; }
  double mean() const { return n_ ? mean_ : 0.0; }
  /// Population (1/N) standard deviation; 0 for fewer than two samples.
  double stddev() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Linear-interpolated percentile, q in [0, 1]. Throws on empty input.
double percentile(std::span<const double> values, double q);

}  // namespace ftfc
