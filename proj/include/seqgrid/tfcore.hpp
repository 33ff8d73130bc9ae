#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqgrid {

using Complex = std::complex<double>;

namespace tfcore {

/// Thrown when an expression is evaluated on (or numerically at) a pole.
/// Carries the offending frequency and the label of the sub-expression
/// whose denominator vanished, so sweep drivers can report which element
/// blew up instead of a bare NaN.
class PoleError : public std::runtime_error {
public:
  PoleError(Complex s, std::string leaf);
  Complex at() const noexcept { return s_; }
  const std::string& leaf() const noexcept { return leaf_; }

private:
  Complex s_;
  std::string leaf_;
};

/// Immutable lazy expression tree over the complex frequency variable s.
/// Leaves are circuit primitives (R, L, C, rational transfer functions,
/// complex constants) plus an explicit "open branch" marker; interior nodes
/// are electrical or algebraic combinators. Evaluation walks the tree, so
/// building an expression never divides by zero; eval() throws PoleError
/// where the value is singular or non-finite.
///
/// Trees are shared_ptr DAGs: copying a FreqExpr is cheap and evaluation is
/// const and thread-safe, which the parallel sweep kernels rely on.
class FreqExpr {
public:
  /// Tree node, defined with the evaluator. Public so the implementation
  /// file can build nodes; the type stays incomplete for everyone else.
  struct Node;

  // Leaf factories. Component values must be positive and finite.
  static FreqExpr constant(Complex value, std::string label = "const");
  static FreqExpr resistor(double r_ohm);
  static FreqExpr inductor(double l_henry);
  static FreqExpr capacitor(double c_farad);
  /// Polynomial ratio in ascending powers of s: num[0] + num[1] s + ...
  static FreqExpr rational(std::vector<Complex> num, std::vector<Complex> den,
                           std::string label = "rational");
  /// Marker for an absent branch. parallel() treats it as identity; all
  /// other combinators and eval() reject it.
  static FreqExpr open_branch();

  /// Value at complex frequency s. Throws PoleError on a vanishing
  /// denominator or a non-finite result, std::logic_error on open branches.
  Complex eval(Complex s) const;

  bool is_open() const noexcept;
  /// True when any coefficient, scale factor or frequency shift in the tree
  /// has a nonzero imaginary part. Such expressions do not satisfy
  /// Z(conj(s)) == conj(Z(s)); Nyquist sweeps must then sample negative
  /// frequencies explicitly instead of mirroring.
  bool has_complex_coeff() const noexcept;
  const std::string& label() const noexcept;
  /// Same tree under a new diagnostic name.
  FreqExpr labeled(std::string name) const;

private:
  explicit FreqExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;

  friend FreqExpr series(const FreqExpr&, const FreqExpr&);
  friend FreqExpr parallel(const FreqExpr&, const FreqExpr&);
  friend FreqExpr multiply(const FreqExpr&, const FreqExpr&);
  friend FreqExpr divide(const FreqExpr&, const FreqExpr&);
  friend FreqExpr reciprocal(const FreqExpr&);
  friend FreqExpr scale(const FreqExpr&, Complex);
  friend FreqExpr shift(const FreqExpr&, Complex);
};

/// Electrical series connection, a + b. Rejects open operands; callers that
/// want opens to swallow a whole chain must test is_open() themselves.
FreqExpr series(const FreqExpr& a, const FreqExpr& b);

/// Electrical parallel connection. Evaluates as a*b/(a+b), which is finite
/// where either operand is a zero impedance and only poles where a == -b.
/// An open operand acts as identity: parallel(a, open) == a.
FreqExpr parallel(const FreqExpr& a, const FreqExpr& b);

FreqExpr multiply(const FreqExpr& a, const FreqExpr& b);
FreqExpr divide(const FreqExpr& num, const FreqExpr& den);
FreqExpr reciprocal(const FreqExpr& e);
FreqExpr scale(const FreqExpr& e, Complex k);

/// Frequency translation: shift(e, d).eval(s) == e.eval(s - d).
/// Used to move dq-frame (rotating frame) transfer functions onto the
/// stationary-frame sequence axis, where d = +/- j*omega1.
FreqExpr shift(const FreqExpr& e, Complex delta);

/// kp + ki/s
FreqExpr pi_controller(double kp, double ki);
/// (s^2 + wn^2) / (s^2 + 2 zn wn s + wn^2); unity gain away from wn,
/// transmission zero at s = +/- j wn.
FreqExpr notch(double omega_n, double zeta_n);
/// 1/s
FreqExpr integrator();

/// Sampling grid over positive frequency in Hz, optionally mirrored to
/// negative frequencies for Nyquist contours. Points are strictly
/// ascending and positive; log spacing therefore cannot contain 0.
struct FrequencyGrid {
  enum class Spacing { Log, Linear, Explicit };

  Spacing spacing = Spacing::Log;
  bool symmetric = false;
  std::vector<double> f_hz;

  static FrequencyGrid log_spaced(double f_min_hz, double f_max_hz,
                                  std::size_t n, bool symmetric = false);
  static FrequencyGrid linear(double f_min_hz, double f_max_hz, std::size_t n,
                              bool symmetric = false);
  static FrequencyGrid explicit_points(std::vector<double> f_hz,
                                       bool symmetric = false);

  std::size_t size() const noexcept { return f_hz.size(); }
  /// 2*pi*f for the positive points.
  std::vector<double> omegas() const;
  /// Full signed sweep -w_max..-w_min, +w_min..+w_max (requires symmetric).
  std::vector<double> signed_omegas() const;
};

}  // namespace tfcore
}  // namespace seqgrid
