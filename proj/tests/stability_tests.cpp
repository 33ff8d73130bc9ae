#include "doctest.h"

#include <cmath>
#include <vector>

#include "loop_cases.hpp"
#include "oracles.hpp"
#include "seqgrid/stability.hpp"

using namespace seqgrid;
using tfcore::FreqExpr;
using tfcore::FrequencyGrid;

namespace {

FrequencyGrid wide_grid() {
  // rad/s roots of order one: hertz grid must straddle them generously
  return FrequencyGrid::log_spaced(1e-4, 1e4, 600, true);
}

}  // namespace

TEST_CASE("winding number equals the oracle root count on synthetic loops") {
  int complex_cases = 0;
  for (const auto& rc : loop_cases::table()) {
    CAPTURE(rc.name);
    const FreqExpr l = FreqExpr::rational(rc.num, rc.den, rc.name);
    if (l.has_complex_coeff()) ++complex_cases;

    const int p_open = oracles::rhp_count(rc.den);
    const int z_closed = oracles::rhp_count(oracles::poly_sum(rc.den, rc.num));
    const int expected = z_closed - p_open;

    const auto lg = stability::loop_gain(l, wide_grid());
    const auto w = stability::encirclements(lg);
    CHECK(w.clockwise == expected);
    CHECK(w.residual < 0.05);

    const auto verdict = stability::assess(lg, p_open);
    CHECK(verdict.winding == expected);
    CHECK(verdict.closed_loop_rhp == z_closed);
    CHECK(verdict.stable == (z_closed == 0));
  }
  CHECK(complex_cases >= 1);
}

TEST_CASE("oracle spot checks") {
  // (s+1)^3 + 10 has a complex pair just right of the axis
  CHECK(oracles::rhp_count({{11, 0}, {3, 0}, {3, 0}, {1, 0}}) == 2);
  CHECK(oracles::rhp_count({{-2, 0}, {1, 0}, {1, 0}}) == 1);
  CHECK(oracles::rhp_count({{2, 0}, {1, 0}}) == 0);
  // roots of z^2 + 1 sit exactly on the axis: the margin must reject them
  CHECK_THROWS_AS(oracles::rhp_count({{1, 0}, {0, 0}, {1, 0}}),
                  std::runtime_error);
}

TEST_CASE("a sweep that never returns to its start is rejected") {
  // L = s grows without bound at both ends: the ends cannot be chord-closed
  const FreqExpr l = FreqExpr::rational({{0, 0}, {1, 0}}, {{1, 0}});
  const auto lg = stability::loop_gain(l, FrequencyGrid::log_spaced(0.1, 100.0, 80, true));
  CHECK_THROWS_AS(stability::encirclements(lg), std::runtime_error);
}

TEST_CASE("gain crossing carries the phase margin") {
  // |10 / (s + 1)| = 1 at w = sqrt(99); phase there is -atan(sqrt(99))
  const FreqExpr l = FreqExpr::rational({{10, 0}}, {{1, 0}, {1, 0}});
  const auto lg =
      stability::loop_gain(l, FrequencyGrid::log_spaced(0.01, 1e3, 200, true));
  const auto verdict = stability::assess(lg, 0);
  CHECK(verdict.stable);

  const double w_expect = std::sqrt(99.0);
  const double pm_expect = 180.0 - std::atan(w_expect) * 180.0 / M_PI;
  bool found = false;
  for (const auto& c : verdict.crossings) {
    if (c.omega > 0.0) {
      found = true;
      CHECK(c.omega == doctest::Approx(w_expect).epsilon(1e-6));
      CHECK(c.phase_margin_deg == doctest::Approx(pm_expect).epsilon(1e-6));
    }
  }
  CHECK(found);
}

TEST_CASE("bode table unwraps phase and marks poles") {
  // 1/(s+1)^4 runs from 0 to -360 degrees without wrapping back
  const FreqExpr e =
      FreqExpr::rational({{1, 0}}, {{1, 0}, {4, 0}, {6, 0}, {4, 0}, {1, 0}});
  const auto rows = stability::bode_table(
      e, FrequencyGrid::log_spaced(1e-3 / (2 * M_PI), 1e3 / (2 * M_PI), 120));
  REQUIRE(!rows.empty());
  CHECK(std::abs(rows.front().phase_deg) < 0.3);
  CHECK(rows.back().phase_deg == doctest::Approx(-360.0).epsilon(0.01));
  CHECK(rows.back().mag_db < -200.0);

  // an imaginary-axis pole lands on the grid and stays a marked gap
  const FreqExpr osc =
      FreqExpr::rational({{1, 0}}, {{0, -2.0 * M_PI * 10.0}, {1, 0}});
  const auto rows2 =
      stability::bode_table(osc, FrequencyGrid::explicit_points({5.0, 10.0, 20.0}));
  REQUIRE(rows2.size() == 3);
  CHECK(rows2[0].ok);
  CHECK(!rows2[1].ok);
  CHECK(rows2[2].ok);
}

TEST_CASE("magnitude intersections are refined between grid points") {
  // |s| crosses |1| at exactly 1 rad/s with 90 degrees between the curves
  const FreqExpr a = FreqExpr::rational({{0, 0}, {1, 0}}, {{1, 0}});
  const FreqExpr b = FreqExpr::constant({1.0, 0.0}, "unit");
  const auto xs = stability::intersections(
      a, b, FrequencyGrid::log_spaced(0.01, 10.0, 60));
  REQUIRE(xs.size() == 1);
  CHECK(xs[0].f_hz == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-9));
  CHECK(xs[0].mag == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(xs[0].delta_phase_deg == doctest::Approx(90.0).epsilon(1e-9));
  CHECK(xs[0].margin_deg == doctest::Approx(90.0).epsilon(1e-9));
}
