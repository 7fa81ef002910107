#pragma once

#include <span>
#include <vector>

#include "eulerlab/errors.hpp"

namespace eulerlab {

/// Second-order time derivative of samples f(t_i) on a possibly nonuniform,
/// strictly increasing grid: three-point centred weights inside, three-point
/// one-sided weights at both ends. T needs + and scalar *.
template <class T>
std::vector<T> time_derivative(std::span<const double> t, std::span<const T> f) {
  const std::size_t n = t.size();
  if (n < 3 || f.size() != n) throw ContractViolation("time derivative needs at least 3 matching samples");
  std::vector<T> out(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
    if (!(h1 > 0.0) || !(h2 > 0.0)) throw ContractViolation("sample times must increase strictly");
    out[i] = (-h2 / (h1 * (h1 + h2))) * f[i - 1] + ((h2 - h1) / (h1 * h2)) * f[i] + (h1 / (h2 * (h1 + h2))) * f[i + 1];
  }
  {
    const double h1 = t[1] - t[0], h2 = t[2] - t[1];
    out[0] = (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * f[0] + ((h1 + h2) / (h1 * h2)) * f[1] +
             (-h1 / (h2 * (h1 + h2))) * f[2];
  }
  {
    const double h1 = t[n - 2] - t[n - 3], h2 = t[n - 1] - t[n - 2];
    out[n - 1] = (h2 / (h1 * (h1 + h2))) * f[n - 3] + (-(h1 + h2) / (h1 * h2)) * f[n - 2] +
                 ((2.0 * h2 + h1) / (h2 * (h1 + h2))) * f[n - 1];
  }
  return out;
}

template <class T>
std::vector<T> time_derivative(const std::vector<double>& t, const std::vector<T>& f) {
  return time_derivative(std::span<const double>(t), std::span<const T>(f));
}

}  // namespace eulerlab
