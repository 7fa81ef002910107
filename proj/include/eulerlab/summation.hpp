#pragma once

#include <cmath>

namespace eulerlab {

// Neumaier compensated summation. Results depend only on the order of add()
// calls, so serial reductions are run-to-run identical.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace eulerlab
