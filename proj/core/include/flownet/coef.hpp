#ifndef FLOWNET_COEF_HPP
#define FLOWNET_COEF_HPP

#include <cstddef>
#include <vector>

namespace flownet {

/// Time-dependent scalar coefficient from a closed-form family:
/// constant a, sinusoid a + b*sin(omega*t + phi), or piecewise constant.
/// Every variant has an exact antiderivative and exact global bounds,
/// which is what makes transit times and damping integrals cheap.
class CoefFn {
public:
  enum class Kind { Constant, Sinusoid, PiecewiseConstant };

  CoefFn() = default;  // constant 0

  static CoefFn constant(double value);
  static CoefFn sinusoid(double base, double amplitude, double omega, double phase);
  // values has one more entry than breakpoints; value k applies on
  // [breakpoints[k-1], breakpoints[k])
  static CoefFn piecewise_constant(std::vector<double> breakpoints, std::vector<double> values);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::Constant; }
  bool is_piecewise_constant() const { return kind_ != Kind::Sinusoid; }

  /// Pointwise value f(t).
  double operator()(double t) const;

  /// Exact signed integral over [a, b]; integral(a, b) = -integral(b, a).
  double integral(double a, double b) const;

  /// Exact global bounds (constant: value; sinusoid: base -+ |amplitude|;
  /// piecewise constant: min/max of values).
  double min_value() const;
  double max_value() const;

  /// The coefficient shift + scale*f(t) (demand range transformations).
  CoefFn affine(double shift, double scale) const;

  // piecewise-constant accessors (Constant is treated as a single step)
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& step_values() const { return values_; }

  double base() const { return base_; }
  double amplitude() const { return amp_; }
  double omega() const { return omega_; }
  double phase() const { return phase_; }

private:
  Kind kind_ = Kind::Constant;
  double base_ = 0.0, amp_ = 0.0, omega_ = 0.0, phase_ = 0.0;
  std::vector<double> breaks_;
  std::vector<double> values_;

  std::size_t segment_index(double t) const;
};

}  // namespace flownet

#endif
