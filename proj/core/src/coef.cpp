#include "flownet/coef.hpp"

#include <algorithm>
#include <cmath>

#include "flownet/errors.hpp"

namespace flownet {

CoefFn CoefFn::constant(double value) {
  CoefFn f;
  f.kind_ = Kind::Constant;
  f.base_ = value;
  f.values_ = {value};
  return f;
}

CoefFn CoefFn::sinusoid(double base, double amplitude, double omega, double phase) {
  if (omega == 0.0) return constant(base + amplitude * std::sin(phase));
  CoefFn f;
  f.kind_ = Kind::Sinusoid;
  f.base_ = base;
  f.amp_ = amplitude;
  f.omega_ = omega;
  f.phase_ = phase;
  return f;
}

CoefFn CoefFn::piecewise_constant(std::vector<double> breakpoints, std::vector<double> values) {
  if (values.size() != breakpoints.size() + 1)
    fail(Errc::BadParameter, "piecewise constant needs one more value than breakpoints");
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
    fail(Errc::BadParameter, "piecewise constant breakpoints must be sorted");
  CoefFn f;
  f.kind_ = Kind::PiecewiseConstant;
  f.breaks_ = std::move(breakpoints);
  f.values_ = std::move(values);
  return f;
}

std::size_t CoefFn::segment_index(double t) const {
  // first segment whose right endpoint is > t
  return static_cast<std::size_t>(
      std::upper_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin());
}

double CoefFn::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return base_;
    case Kind::Sinusoid:
      return base_ + amp_ * std::sin(omega_ * t + phase_);
    case Kind::PiecewiseConstant:
      return values_[segment_index(t)];
  }
  return 0.0;
}

double CoefFn::integral(double a, double b) const {
  if (a == b) return 0.0;
  if (b < a) return -integral(b, a);
  switch (kind_) {
    case Kind::Constant:
      return base_ * (b - a);
    case Kind::Sinusoid:
      // int a + b sin(w t + p) = a t - (b/w) cos(w t + p)
      return base_ * (b - a) - (amp_ / omega_) * (std::cos(omega_ * b + phase_) - std::cos(omega_ * a + phase_));
    case Kind::PiecewiseConstant: {
      double total = 0.0;
      double left = a;
      std::size_t k = segment_index(a);
      while (k < breaks_.size() && breaks_[k] < b) {
        total += values_[k] * (breaks_[k] - left);
        left = breaks_[k];
        ++k;
      }
      total += values_[k] * (b - left);
      return total;
    }
  }
  return 0.0;
}

double CoefFn::min_value() const {
  switch (kind_) {
    case Kind::Constant:
      return base_;
    case Kind::Sinusoid:
      return base_ - std::abs(amp_);
    case Kind::PiecewiseConstant:
      return *std::min_element(values_.begin(), values_.end());
  }
  return 0.0;
}

CoefFn CoefFn::affine(double shift, double scale) const {
  switch (kind_) {
    case Kind::Constant:
      return constant(shift + scale * base_);
    case Kind::Sinusoid:
      return sinusoid(shift + scale * base_, scale * amp_, omega_, phase_);
    case Kind::PiecewiseConstant: {
      std::vector<double> vals = values_;
      for (double& v : vals) v = shift + scale * v;
      return piecewise_constant(breaks_, std::move(vals));
    }
  }
  return constant(shift);
}

double CoefFn::max_value() const {
  switch (kind_) {
    case Kind::Constant:
      return base_;
    case Kind::Sinusoid:
      return base_ + std::abs(amp_);
    case Kind::PiecewiseConstant:
      return *std::max_element(values_.begin(), values_.end());
  }
  return 0.0;
}

}  // namespace flownet
