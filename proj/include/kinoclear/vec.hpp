#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>

namespace kinoclear {

inline constexpr std::size_t kMaxDim = 4;

// Small fixed-capacity vector used for states, velocities and controls.
// Avoids heap traffic in the integration kernels.
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t n) : size_(n) { assert(n <= kMaxDim); }
  Vec(std::initializer_list<double> values) : size_(values.size()) {
    assert(values.size() <= kMaxDim);
    std::copy(values.begin(), values.end(), data_.begin());
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  const double* begin() const { return data_.data(); }
  const double* end() const { return data_.data() + size_; }
  double* begin() { return data_.data(); }
  double* end() { return data_.data() + size_; }

  Vec& operator+=(const Vec& o) {
    for (std::size_t i = 0; i < size_; ++i) data_[i] += o.data_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (std::size_t i = 0; i < size_; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (std::size_t i = 0; i < size_; ++i) data_[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }

  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.size_ != b.size_) return false;
    for (std::size_t i = 0; i < a.size_; ++i)
      if (a.data_[i] != b.data_[i]) return false;
    return true;
  }

  friend std::ostream& operator<<(std::ostream& os, const Vec& v) {
    os << '(';
    for (std::size_t i = 0; i < v.size_; ++i) os << (i ? ", " : "") << v.data_[i];
    return os << ')';
  }

 private:
  std::array<double, kMaxDim> data_{};
  std::size_t size_ = 0;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

}  // namespace kinoclear
