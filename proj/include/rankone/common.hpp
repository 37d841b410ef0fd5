#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace rankone {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Log-magnitudes below this are reported as exact zeros.
inline constexpr double kLogUnderflowFloor = -700.0;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedInput : public Error {
 public:
  using Error::Error;
};

class PoleError : public Error {
 public:
  PoleError(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class ContourError : public Error {
 public:
  using Error::Error;
};

class SearchFailure : public Error {
 public:
  using Error::Error;
};

class AnchorUnsuitable : public Error {
 public:
  using Error::Error;
};

class InsufficientSparseness : public Error {
 public:
  using Error::Error;
};

/// A complex number held as log|w| and arg w, so products of thousands of
/// factors neither overflow nor underflow.
struct LogComplex {
  double log_abs = 0.0;
  double arg = 0.0;

  Complex value() const {
    if (log_abs == -kInf) return {0.0, 0.0};
    return std::polar(std::exp(log_abs), arg);
  }
  LogComplex inverse() const { return {-log_abs, -arg}; }
  LogComplex operator*(const LogComplex& o) const {
    return {log_abs + o.log_abs, arg + o.arg};
  }

  static LogComplex of(Complex w) {
    return {std::log(std::abs(w)), std::arg(w)};
  }
};

/// Neumaier-compensated accumulator; works for double and std::complex<double>.
template <class T>
class CompensatedSum {
 public:
  void add(T x) {
    if constexpr (std::is_same_v<T, Complex>) {
      add_real(sum_re_, comp_re_, x.real());
      add_real(sum_im_, comp_im_, x.imag());
    } else {
      add_real(sum_, comp_, x);
    }
  }
  T value() const {
    if constexpr (std::is_same_v<T, Complex>) {
      return {sum_re_ + comp_re_, sum_im_ + comp_im_};
    } else {
      return sum_ + comp_;
    }
  }

 private:
  static void add_real(double& sum, double& comp, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double sum_ = 0.0, comp_ = 0.0;
  double sum_re_ = 0.0, comp_re_ = 0.0, sum_im_ = 0.0, comp_im_ = 0.0;
};

/// Stable log(sum(exp(x_i))) over a range; returns -inf for an empty range.
template <class Range>
double log_sum_exp(const Range& xs) {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace rankone
