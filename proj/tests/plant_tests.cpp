#include "doctest.h"

#include <cmath>

#include "seqgrid/plant.hpp"

using namespace seqgrid;
using plant::Sequence;

namespace {

Complex at_f(const tfcore::FreqExpr& e, double f_hz) {
  return e.eval(Complex{0.0, 2.0 * M_PI * f_hz});
}

void check_cx(Complex got, Complex want, double rel = 1e-9) {
  CHECK(std::abs(got - want) <= rel * std::abs(want));
}

}  // namespace

TEST_CASE("per-unit bases and peak conversions") {
  const plant::BaseSet b;
  CHECK(b.z_base_hv() == doctest::Approx(161.333333333).epsilon(1e-10));
  CHECK(b.z_base_mv() == doctest::Approx(4.08333333333).epsilon(1e-10));
  CHECK(b.z_base_lv() == doctest::Approx(0.001587).epsilon(1e-12));

  CHECK(plant::phase_peak_voltage(690.0) ==
        doctest::Approx(563.3826408401).epsilon(1e-10));
  CHECK(plant::peak_current_base(300e6, 220e3) ==
        doctest::Approx(1113.404428538).epsilon(1e-10));
}

TEST_CASE("nominal operating point is the current reference at full voltage") {
  const plant::ConverterParams c;
  const plant::BaseSet b;
  const auto op = plant::nominal_operating_point(c, b);
  CHECK(op.v1_pk == doctest::Approx(563.3826408401).epsilon(1e-10));
  CHECK(op.i_d0_a == 2368.0);
  CHECK(op.i_q0_a == 0.0);
}

TEST_CASE("line impedance scales reactance with frequency and sequence") {
  const plant::LineParams l{0.041, 0.41, 3.0};
  const double w1 = 100.0 * M_PI;

  const Complex z50 = at_f(plant::line_impedance(l, Sequence::Positive, w1), 50.0);
  check_cx(z50, Complex{0.041, 0.41}, 1e-12);

  // reactance doubles at twice the fundamental, resistance stays
  const Complex z100 = at_f(plant::line_impedance(l, Sequence::Positive, w1), 100.0);
  check_cx(z100, Complex{0.041, 0.82}, 1e-12);

  const Complex z0 = at_f(plant::line_impedance(l, Sequence::Zero, w1), 50.0);
  check_cx(z0, Complex{0.123, 1.23}, 1e-12);

  plant::LineParams bad = l;
  bad.zero_seq_multiplier = 0.0;
  CHECK_THROWS_AS(plant::line_impedance(bad, Sequence::Zero, w1),
                  std::invalid_argument);
}

TEST_CASE("transformer leakage and zero-sequence termination") {
  const plant::TransformerParams t{0.03};
  const double w1 = 100.0 * M_PI;
  check_cx(at_f(plant::transformer_series(t, w1), 50.0), Complex{0.0, 0.03},
           1e-12);
  check_cx(at_f(plant::transformer_zero_path(t, w1, true), 100.0),
           Complex{0.0, 0.06}, 1e-12);
  CHECK(plant::transformer_zero_path(t, w1, false).is_open());
}

TEST_CASE("closed-loop PLL transfer") {
  const plant::ConverterParams c;
  const double v1 = plant::phase_peak_voltage(690.0);
  const auto t = plant::pll_closed_loop(c, v1);

  // independently recomputed: T = V1 H / (1 + V1 H) at p = j 2 pi 10
  check_cx(t.eval(Complex{0.0, 2.0 * M_PI * 10.0}),
           Complex{1.138054149042, -0.07091862859603}, 1e-9);

  // the PI integrator pins dc tracking to unity
  check_cx(t.eval(Complex{0.0, 1e-6}), Complex{1.0, 0.0}, 1e-6);

  // the notch zero at its center frequency opens the loop entirely
  CHECK(std::abs(t.eval(Complex{0.0, c.omega_n_rad_s})) < 1e-15);

  CHECK_THROWS_AS(plant::pll_closed_loop(c, 0.0), std::invalid_argument);
}

TEST_CASE("converter sequence impedances against recomputed references") {
  const plant::ConverterParams c;
  const plant::BaseSet b;
  const auto op = plant::nominal_operating_point(c, b);
  const double w1 = 100.0 * M_PI;

  const auto zp = plant::converter_impedance(c, op, Sequence::Positive, w1);
  const auto zn = plant::converter_impedance(c, op, Sequence::Negative, w1);

  // values recomputed with plain complex arithmetic, SI ohms
  check_cx(at_f(zp, 30.0), Complex{-1.060113283358, 0.5562924461502}, 1e-9);
  check_cx(at_f(zp, 40.0), Complex{-1.019022113220, 0.4504639277009}, 1e-9);
  check_cx(at_f(zn, 30.0), Complex{2.285500329648, -9.835598465674}, 1e-9);
  check_cx(at_f(zn, 70.0), Complex{-1.894979308924, -15.50395253147}, 1e-9);

  // the PLL shift makes both one-sided in frequency
  CHECK(zp.has_complex_coeff());
  CHECK(zn.has_complex_coeff());

  CHECK(plant::converter_impedance(c, op, Sequence::Zero, w1).is_open());
}

TEST_CASE("unit impedance pairs the converter branch with its filter") {
  const plant::ConverterParams c;
  const plant::BaseSet b;
  const auto op = plant::nominal_operating_point(c, b);
  const double w1 = 100.0 * M_PI;

  check_cx(at_f(plant::filter_shunt(c), 50.0), Complex{1.5, -63.66197723676},
           1e-10);
  check_cx(at_f(plant::unit_impedance(c, op, Sequence::Positive, w1), 30.0),
           Complex{-1.071320039778, 0.5486233588051}, 1e-9);
  CHECK(plant::unit_impedance(c, op, Sequence::Zero, w1).is_open());
}

TEST_CASE("aggregated WPP branch on the system base") {
  plant::SystemSpec sys;
  const auto op = plant::nominal_operating_point(sys.conv, sys.bases);

  const auto zwp = plant::wpp_branch(sys, op, Sequence::Positive);
  const auto zwn = plant::wpp_branch(sys, op, Sequence::Negative);
  check_cx(at_f(zwp, 30.0), Complex{-4.500399242922, 2.310655991620}, 1e-9);
  check_cx(at_f(zwn, 30.0), Complex{8.081834662458, -37.94589616671}, 1e-9);

  CHECK(plant::wpp_branch(sys, op, Sequence::Zero).is_open());

  // halving the fleet doubles the per-unit branch impedance exactly:
  // both the parallel aggregate and the T1 base conversion scale with 1/n
  plant::SystemSpec half = sys;
  half.n_units = 75;
  const Complex z150 = at_f(zwp, 30.0);
  const Complex z75 =
      at_f(plant::wpp_branch(half, op, Sequence::Positive), 30.0);
  check_cx(z75, 2.0 * z150, 1e-12);

  plant::SystemSpec none = sys;
  none.n_units = 0;
  CHECK_THROWS_AS(plant::wpp_branch(none, op, Sequence::Positive),
                  std::invalid_argument);
}
