#include "seqgrid/tfcore.hpp"

#include <cmath>
#include <utility>

namespace seqgrid::tfcore {

PoleError::PoleError(Complex s, std::string leaf)
    : std::runtime_error("pole of '" + leaf + "' at s = (" +
                         std::to_string(s.real()) + ", " +
                         std::to_string(s.imag()) + ") rad/s"),
      s_(s),
      leaf_(std::move(leaf)) {}

namespace {

enum class Kind {
  Constant,
  Resistor,
  Inductor,
  Capacitor,
  Rational,
  Open,
  Series,
  Parallel,
  Multiply,
  Divide,
  Reciprocal,
  Scale,
  Shift,
};

bool finite(Complex v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

}  // namespace

struct FreqExpr::Node {
  Kind kind;
  std::string label;
  bool complex_coeff = false;

  // leaf payloads
  Complex value{};                    // Constant, Scale factor, Shift delta
  double component = 0.0;             // R, L, C value
  std::vector<Complex> num, den;      // Rational

  std::shared_ptr<const Node> a, b;   // children

  Complex eval(Complex s) const;
};

namespace {

Complex eval_poly(const std::vector<Complex>& c, Complex s) {
  Complex acc{0.0, 0.0};
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * s + c[i];
  return acc;
}

std::shared_ptr<const FreqExpr::Node> make_node(FreqExpr::Node n) {
  return std::make_shared<const FreqExpr::Node>(std::move(n));
}

}  // namespace

Complex FreqExpr::Node::eval(Complex s) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Resistor:
      return Complex{component, 0.0};
    case Kind::Inductor:
      return s * component;
    case Kind::Capacitor: {
      const Complex d = s * component;
      if (d == Complex{0.0, 0.0}) throw PoleError(s, label);
      return 1.0 / d;
    }
    case Kind::Rational: {
      const Complex d = eval_poly(den, s);
      if (d == Complex{0.0, 0.0}) throw PoleError(s, label);
      const Complex v = eval_poly(num, s) / d;
      if (!finite(v)) throw PoleError(s, label);
      return v;
    }
    case Kind::Open:
      throw std::logic_error("cannot evaluate an open branch");
    case Kind::Series:
      return a->eval(s) + b->eval(s);
    case Kind::Parallel: {
      const Complex za = a->eval(s);
      const Complex zb = b->eval(s);
      const Complex sum = za + zb;
      if (sum == Complex{0.0, 0.0}) throw PoleError(s, label);
      const Complex v = za * zb / sum;
      if (!finite(v)) throw PoleError(s, label);
      return v;
    }
    case Kind::Multiply:
      return a->eval(s) * b->eval(s);
    case Kind::Divide: {
      const Complex d = b->eval(s);
      if (d == Complex{0.0, 0.0}) throw PoleError(s, label);
      const Complex v = a->eval(s) / d;
      if (!finite(v)) throw PoleError(s, label);
      return v;
    }
    case Kind::Reciprocal: {
      const Complex d = a->eval(s);
      if (d == Complex{0.0, 0.0}) throw PoleError(s, label);
      return 1.0 / d;
    }
    case Kind::Scale:
      return value * a->eval(s);
    case Kind::Shift:
      return a->eval(s - value);
  }
  throw std::logic_error("corrupt expression node");
}

namespace {

void require_component(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) +
                                " value must be positive and finite");
}

void require_not_open(const FreqExpr& e, const char* combinator) {
  if (e.is_open())
    throw std::invalid_argument(std::string(combinator) +
                                " cannot take an open branch");
}

bool any_complex(const std::vector<Complex>& c) {
  for (const Complex& v : c)
    if (v.imag() != 0.0) return true;
  return false;
}

}  // namespace

FreqExpr FreqExpr::constant(Complex value, std::string label) {
  if (!finite(value)) throw std::invalid_argument("constant must be finite");
  Node n{};
  n.kind = Kind::Constant;
  n.label = std::move(label);
  n.value = value;
  n.complex_coeff = value.imag() != 0.0;
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr FreqExpr::resistor(double r_ohm) {
  require_component(r_ohm, "resistor");
  Node n{};
  n.kind = Kind::Resistor;
  n.label = "resistor";
  n.component = r_ohm;
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr FreqExpr::inductor(double l_henry) {
  require_component(l_henry, "inductor");
  Node n{};
  n.kind = Kind::Inductor;
  n.label = "inductor";
  n.component = l_henry;
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr FreqExpr::capacitor(double c_farad) {
  require_component(c_farad, "capacitor");
  Node n{};
  n.kind = Kind::Capacitor;
  n.label = "capacitor";
  n.component = c_farad;
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr FreqExpr::rational(std::vector<Complex> num, std::vector<Complex> den,
                            std::string label) {
  if (num.empty() || den.empty())
    throw std::invalid_argument("rational needs nonempty coefficient lists");
  bool den_nonzero = false;
  for (const Complex& c : den) {
    if (!finite(c)) throw std::invalid_argument("rational coefficients must be finite");
    if (c != Complex{0.0, 0.0}) den_nonzero = true;
  }
  for (const Complex& c : num)
    if (!finite(c)) throw std::invalid_argument("rational coefficients must be finite");
  if (!den_nonzero)
    throw std::invalid_argument("rational denominator is identically zero");
  Node n{};
  n.kind = Kind::Rational;
  n.label = std::move(label);
  n.complex_coeff = any_complex(num) || any_complex(den);
  n.num = std::move(num);
  n.den = std::move(den);
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr FreqExpr::open_branch() {
  Node n{};
  n.kind = Kind::Open;
  n.label = "open";
  return FreqExpr(make_node(std::move(n)));
}

Complex FreqExpr::eval(Complex s) const { return node_->eval(s); }

bool FreqExpr::is_open() const noexcept { return node_->kind == Kind::Open; }

bool FreqExpr::has_complex_coeff() const noexcept {
  return node_->complex_coeff;
}

const std::string& FreqExpr::label() const noexcept { return node_->label; }

FreqExpr FreqExpr::labeled(std::string name) const {
  Node n = *node_;
  n.label = std::move(name);
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr series(const FreqExpr& a, const FreqExpr& b) {
  require_not_open(a, "series");
  require_not_open(b, "series");
  FreqExpr::Node n{};
  n.kind = Kind::Series;
  n.label = "series";
  n.a = a.node_;
  n.b = b.node_;
  n.complex_coeff = a.has_complex_coeff() || b.has_complex_coeff();
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr parallel(const FreqExpr& a, const FreqExpr& b) {
  if (a.is_open()) return b;   // identity, even when b is open too
  if (b.is_open()) return a;
  FreqExpr::Node n{};
  n.kind = Kind::Parallel;
  n.label = "parallel";
  n.a = a.node_;
  n.b = b.node_;
  n.complex_coeff = a.has_complex_coeff() || b.has_complex_coeff();
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr multiply(const FreqExpr& a, const FreqExpr& b) {
  require_not_open(a, "multiply");
  require_not_open(b, "multiply");
  FreqExpr::Node n{};
  n.kind = Kind::Multiply;
  n.label = "multiply";
  n.a = a.node_;
  n.b = b.node_;
  n.complex_coeff = a.has_complex_coeff() || b.has_complex_coeff();
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr divide(const FreqExpr& num, const FreqExpr& den) {
  require_not_open(num, "divide");
  require_not_open(den, "divide");
  FreqExpr::Node n{};
  n.kind = Kind::Divide;
  n.label = "divide";
  n.a = num.node_;
  n.b = den.node_;
  n.complex_coeff = num.has_complex_coeff() || den.has_complex_coeff();
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr reciprocal(const FreqExpr& e) {
  require_not_open(e, "reciprocal");
  FreqExpr::Node n{};
  n.kind = Kind::Reciprocal;
  n.label = "reciprocal";
  n.a = e.node_;
  n.complex_coeff = e.has_complex_coeff();
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr scale(const FreqExpr& e, Complex k) {
  require_not_open(e, "scale");
  if (!finite(k)) throw std::invalid_argument("scale factor must be finite");
  FreqExpr::Node n{};
  n.kind = Kind::Scale;
  n.label = "scale";
  n.value = k;
  n.a = e.node_;
  n.complex_coeff = e.has_complex_coeff() || k.imag() != 0.0;
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr shift(const FreqExpr& e, Complex delta) {
  require_not_open(e, "shift");
  if (!finite(delta)) throw std::invalid_argument("shift must be finite");
  FreqExpr::Node n{};
  n.kind = Kind::Shift;
  n.label = "shift";
  n.value = delta;
  n.a = e.node_;
  n.complex_coeff = e.has_complex_coeff() || delta.imag() != 0.0;
  return FreqExpr(make_node(std::move(n)));
}

FreqExpr pi_controller(double kp, double ki) {
  if (!std::isfinite(kp) || !std::isfinite(ki))
    throw std::invalid_argument("PI gains must be finite");
  return FreqExpr::rational({Complex{ki, 0.0}, Complex{kp, 0.0}},
                            {Complex{0.0, 0.0}, Complex{1.0, 0.0}}, "pi");
}

FreqExpr notch(double omega_n, double zeta_n) {
  require_component(omega_n, "notch frequency");
  if (!(zeta_n > 0.0) || !std::isfinite(zeta_n))
    throw std::invalid_argument("notch damping must be positive and finite");
  const double wn2 = omega_n * omega_n;
  return FreqExpr::rational(
      {Complex{wn2, 0.0}, Complex{0.0, 0.0}, Complex{1.0, 0.0}},
      {Complex{wn2, 0.0}, Complex{2.0 * zeta_n * omega_n, 0.0},
       Complex{1.0, 0.0}},
      "notch");
}

FreqExpr integrator() {
  return FreqExpr::rational({Complex{1.0, 0.0}},
                            {Complex{0.0, 0.0}, Complex{1.0, 0.0}},
                            "integrator");
}

namespace {

void require_grid_args(double f_min, double f_max, std::size_t n) {
  if (!(f_min > 0.0) || !(f_max > f_min) || !std::isfinite(f_max))
    throw std::invalid_argument("grid needs 0 < f_min < f_max, both finite");
  if (n < 2) throw std::invalid_argument("grid needs at least 2 points");
}

}  // namespace

FrequencyGrid FrequencyGrid::log_spaced(double f_min_hz, double f_max_hz,
                                        std::size_t n, bool symmetric) {
  require_grid_args(f_min_hz, f_max_hz, n);
  FrequencyGrid g;
  g.spacing = Spacing::Log;
  g.symmetric = symmetric;
  g.f_hz.resize(n);
  const double l0 = std::log10(f_min_hz);
  const double l1 = std::log10(f_max_hz);
  for (std::size_t i = 0; i < n; ++i)
    g.f_hz[i] = std::pow(10.0, l0 + (l1 - l0) * double(i) / double(n - 1));
  g.f_hz.front() = f_min_hz;
  g.f_hz.back() = f_max_hz;
  return g;
}

FrequencyGrid FrequencyGrid::linear(double f_min_hz, double f_max_hz,
                                    std::size_t n, bool symmetric) {
  require_grid_args(f_min_hz, f_max_hz, n);
  FrequencyGrid g;
  g.spacing = Spacing::Linear;
  g.symmetric = symmetric;
  g.f_hz.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    g.f_hz[i] =
        f_min_hz + (f_max_hz - f_min_hz) * double(i) / double(n - 1);
  g.f_hz.back() = f_max_hz;
  return g;
}

FrequencyGrid FrequencyGrid::explicit_points(std::vector<double> f_hz,
                                             bool symmetric) {
  // An empty explicit grid is legal: sweeps over it yield empty results.
  for (std::size_t i = 0; i < f_hz.size(); ++i) {
    if (!(f_hz[i] > 0.0) || !std::isfinite(f_hz[i]))
      throw std::invalid_argument("grid frequencies must be positive and finite");
    if (i > 0 && !(f_hz[i] > f_hz[i - 1]))
      throw std::invalid_argument("grid frequencies must be strictly ascending");
  }
  FrequencyGrid g;
  g.spacing = Spacing::Explicit;
  g.symmetric = symmetric;
  g.f_hz = std::move(f_hz);
  return g;
}

std::vector<double> FrequencyGrid::omegas() const {
  std::vector<double> w(f_hz.size());
  for (std::size_t i = 0; i < f_hz.size(); ++i)
    w[i] = 2.0 * M_PI * f_hz[i];
  return w;
}

std::vector<double> FrequencyGrid::signed_omegas() const {
  if (!symmetric)
    throw std::logic_error("signed sweep requested from a one-sided grid");
  std::vector<double> w;
  w.reserve(2 * f_hz.size());
  for (std::size_t i = f_hz.size(); i-- > 0;)
    w.push_back(-2.0 * M_PI * f_hz[i]);
  for (double f : f_hz) w.push_back(2.0 * M_PI * f);
  return w;
}

}  // namespace seqgrid::tfcore
