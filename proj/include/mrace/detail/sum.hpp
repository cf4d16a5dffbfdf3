#pragma once

#include <cmath>
#include <type_traits>

namespace mrace::detail {

// Neumaier compensated accumulator. For non floating point Real (exact
// rationals) it degrades to a plain running sum.
template <class Real = double>
class CompensatedSum {
 public:
  void add(const Real& v) {
    if constexpr (std::is_floating_point_v<Real>) {
      const Real t = sum_ + v;
      if (std::fabs(sum_) >= std::fabs(v)) {
        comp_ += (sum_ - t) + v;
      } else {
        comp_ += (v - t) + sum_;
      }
      sum_ = t;
    } else {
      sum_ += v;
    }
  }
  CompensatedSum& operator+=(const Real& v) {
    add(v);
    return *this;
  }
  Real value() const {
    if constexpr (std::is_floating_point_v<Real>) {
      return sum_ + comp_;
    } else {
      return sum_;
    }
  }

 private:
  Real sum_{0};
  Real comp_{0};
};

template <class Range>
double compensated_sum(const Range& r) {
  CompensatedSum<double> s;
  for (double v : r) s.add(v);
  return s.value();
}

}  // namespace mrace::detail
