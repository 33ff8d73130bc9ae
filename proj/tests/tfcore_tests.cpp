#include "doctest.h"

#include <cmath>
#include <complex>

#include "seqgrid/tfcore.hpp"

using namespace seqgrid;
using tfcore::FreqExpr;
using tfcore::FrequencyGrid;

namespace {
Complex at_f(const FreqExpr& e, double f_hz) {
  return e.eval(Complex{0.0, 2.0 * M_PI * f_hz});
}
}  // namespace

TEST_CASE("primitive impedances at a frequency point") {
  CHECK(at_f(FreqExpr::resistor(2.5), 123.0) == Complex{2.5, 0.0});

  // 2 pi 100 Hz * 3 mH
  const Complex zl = at_f(FreqExpr::inductor(3e-3), 100.0);
  CHECK(zl.real() == doctest::Approx(0.0));
  CHECK(zl.imag() == doctest::Approx(1.8849555922).epsilon(1e-9));

  // filter capacitor at the fundamental: 1/(j w1 C) with C = 50 uF
  const Complex zc = at_f(FreqExpr::capacitor(50e-6), 50.0);
  CHECK(zc.real() == doctest::Approx(0.0));
  CHECK(zc.imag() == doctest::Approx(-63.6619772368).epsilon(1e-9));

  const Complex zi = at_f(tfcore::integrator(), 1.0 / M_PI);
  CHECK(zi.imag() == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("pi controller value") {
  // kp + ki/s at s = j100: 0.015 - j0.03
  const Complex v = tfcore::pi_controller(0.015, 3.0).eval(Complex{0.0, 100.0});
  CHECK(v.real() == doctest::Approx(0.015).epsilon(1e-12));
  CHECK(v.imag() == doctest::Approx(-0.03).epsilon(1e-12));
}

TEST_CASE("series and parallel combinators") {
  const FreqExpr a = FreqExpr::constant(Complex{0.0, 0.3});
  const FreqExpr b = FreqExpr::constant(Complex{0.0, 0.6});
  const Complex s{0.0, 1.0};

  CHECK(tfcore::series(a, b).eval(s).imag() ==
        doctest::Approx(0.9).epsilon(1e-15));

  const Complex p = tfcore::parallel(a, b).eval(s);
  CHECK(p.real() == doctest::Approx(0.0));
  CHECK(p.imag() == doctest::Approx(0.2).epsilon(1e-12));

  // parallel with a zero impedance is zero, not a pole
  const Complex pz =
      tfcore::parallel(a, FreqExpr::constant(Complex{0.0, 0.0})).eval(s);
  CHECK(std::abs(pz) == doctest::Approx(0.0));

  // open branch: identity under parallel, rejected under series
  CHECK(tfcore::parallel(a, FreqExpr::open_branch()).eval(s) ==
        Complex{0.0, 0.3});
  CHECK_THROWS_AS(tfcore::series(a, FreqExpr::open_branch()),
                  std::invalid_argument);
  CHECK_THROWS_AS(FreqExpr::open_branch().eval(s), std::logic_error);
}

TEST_CASE("notch filter frozen points") {
  // (s^2 + wn^2) / (s^2 + 2 zn wn s + wn^2), wn = 2 pi 100, zn = 1
  const FreqExpr n = tfcore::notch(200.0 * M_PI, 1.0);

  // transmission zero at wn
  CHECK(std::abs(at_f(n, 100.0)) == doctest::Approx(0.0));

  // at the fundamental: 3/(3 + 4j) = 0.36 - j0.48
  const Complex v50 = at_f(n, 50.0);
  CHECK(v50.real() == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(v50.imag() == doctest::Approx(-0.48).epsilon(1e-12));
  CHECK(std::abs(v50) == doctest::Approx(0.6).epsilon(1e-12));

  // an octave above the zero the magnitude is 3.96/4.04 = 99/101; the
  // passband deviation there is 1 - 99/101 = 0.0198, settling just under
  // the 2 percent line
  const double m1k = std::abs(at_f(n, 1000.0));
  CHECK(m1k == doctest::Approx(99.0 / 101.0).epsilon(1e-12));
  CHECK(std::abs(m1k - 1.0) < 0.02);
}

TEST_CASE("rational evaluation and pole reporting") {
  // (1 + s) / (2 + s): simple real rational
  const FreqExpr r = FreqExpr::rational({Complex{1.0, 0.0}, Complex{1.0, 0.0}},
                                        {Complex{2.0, 0.0}, Complex{1.0, 0.0}},
                                        "r1");
  CHECK(r.eval(Complex{0.0, 0.0}) == Complex{0.5, 0.0});
  CHECK(r.eval(Complex{2.0, 0.0}) == Complex{0.75, 0.0});

  try {
    r.eval(Complex{-2.0, 0.0});
    FAIL("expected a pole");
  } catch (const tfcore::PoleError& e) {
    CHECK(e.at() == Complex{-2.0, 0.0});
    CHECK(e.leaf() == "r1");
  }

  CHECK_THROWS_AS(FreqExpr::rational({}, {Complex{1.0, 0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      FreqExpr::rational({Complex{1.0, 0.0}}, {Complex{0.0, 0.0}}),
      std::invalid_argument);
}

TEST_CASE("frequency shift is evaluation displacement") {
  const FreqExpr r = FreqExpr::rational(
      {Complex{1.0, 2.0}, Complex{0.5, 0.0}},
      {Complex{3.0, -1.0}, Complex{0.0, 1.0}, Complex{1.0, 0.0}}, "cx");
  const Complex d{0.0, 100.0 * M_PI};
  const FreqExpr sh = tfcore::shift(r, d);

  const Complex s{0.2, 700.0};
  CHECK(std::abs(sh.eval(s) - r.eval(s - d)) < 1e-15 * std::abs(r.eval(s - d)));

  // composition adds displacements
  const FreqExpr sh2 = tfcore::shift(sh, Complex{0.0, -40.0});
  const Complex expect = r.eval(s - d - Complex{0.0, -40.0});
  CHECK(std::abs(sh2.eval(s) - expect) < 1e-12 * (1.0 + std::abs(expect)));

  CHECK(sh.has_complex_coeff());
  CHECK_FALSE(tfcore::pi_controller(1.0, 2.0).has_complex_coeff());

  // a real tree only becomes conjugate-asymmetric through complex content
  const FreqExpr real_chain =
      tfcore::series(FreqExpr::resistor(1.0), FreqExpr::inductor(1e-3));
  const Complex up = real_chain.eval(Complex{0.0, 5.0});
  const Complex dn = real_chain.eval(Complex{0.0, -5.0});
  CHECK(std::abs(dn - std::conj(up)) < 1e-15);
}

TEST_CASE("algebra combinators") {
  const FreqExpr a = FreqExpr::constant(Complex{3.0, 4.0});
  const FreqExpr b = FreqExpr::constant(Complex{0.0, 2.0});
  const Complex s{0.0, 1.0};

  CHECK(tfcore::multiply(a, b).eval(s) == Complex{-8.0, 6.0});
  CHECK(tfcore::divide(a, b).eval(s) == Complex{2.0, -1.5});
  CHECK(tfcore::reciprocal(b).eval(s) == Complex{0.0, -0.5});
  CHECK(tfcore::scale(a, Complex{2.0, 0.0}).eval(s) == Complex{6.0, 8.0});
  CHECK_THROWS_AS(
      tfcore::divide(a, FreqExpr::constant(Complex{0.0, 0.0})).eval(s),
      tfcore::PoleError);

  CHECK(a.labeled("renamed").label() == "renamed");
}

TEST_CASE("frequency grids") {
  const FrequencyGrid g = FrequencyGrid::log_spaced(0.1, 1000.0, 200);
  CHECK(g.size() == 200);
  CHECK(g.f_hz.front() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(g.f_hz.back() == doctest::Approx(1000.0).epsilon(1e-12));
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    CHECK(g.f_hz[i] < g.f_hz[i + 1]);

  const FrequencyGrid lin = FrequencyGrid::linear(5.0, 10.0, 6);
  CHECK(lin.f_hz[1] == doctest::Approx(6.0).epsilon(1e-12));

  const FrequencyGrid sym = FrequencyGrid::log_spaced(1.0, 100.0, 10, true);
  const std::vector<double> sw = sym.signed_omegas();
  CHECK(sw.size() == 20);
  CHECK(sw.front() == doctest::Approx(-2.0 * M_PI * 100.0));
  CHECK(sw.back() == doctest::Approx(2.0 * M_PI * 100.0));
  for (std::size_t i = 0; i + 1 < sw.size(); ++i) CHECK(sw[i] < sw[i + 1]);
  CHECK(sw[0] == doctest::Approx(-sw[19]));

  CHECK(FrequencyGrid::explicit_points({}).size() == 0);
  CHECK_THROWS_AS(FrequencyGrid::log_spaced(10.0, 1.0, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(FrequencyGrid::explicit_points({3.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(FrequencyGrid::log_spaced(1.0, 10.0, 4).signed_omegas(),
                  std::logic_error);
}
