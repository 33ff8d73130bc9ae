#include "doctest.h"

#include <cmath>

#include "seqgrid/scan.hpp"
#include "seqgrid/wcsim.hpp"

using namespace seqgrid;
using plant::Sequence;

// End-to-end scanner runs against closed-form impedances. Each case costs
// seconds of simulated time, so the frequencies are chosen sparsely; the
// full-grid comparisons live in the acceptance runner.

namespace {

Complex at_f(const tfcore::FreqExpr& e, double f_hz) {
  return e.eval(Complex{0.0, 2.0 * M_PI * f_hz});
}

// Aggregated WPP branch with the converter removed: the filter bank stays.
tfcore::FreqExpr passive_wpp(const plant::SystemSpec& sys) {
  const auto f = plant::filter_shunt(sys.conv);
  const auto agg =
      scale(f, Complex{1.0 / (double(sys.n_units) * sys.bases.z_base_lv()), 0.0});
  const double x_t1_sys = sys.t1.x_pu * sys.bases.s_base_va /
                          (double(sys.n_units) * sys.conv.s_unit_va);
  return series(agg, tfcore::FreqExpr::inductor(x_t1_sys / sys.omega1_rad_s));
}

void check_polar(Complex got, Complex want, double mag_rel, double phase_deg) {
  CHECK(std::abs(got) ==
        doctest::Approx(std::abs(want)).epsilon(mag_rel));
  const double dphi = std::arg(got / want) * 180.0 / M_PI;
  CHECK(std::abs(dphi) <= phase_deg);
}

}  // namespace

TEST_CASE("passive positive-sequence point matches the analytic branch") {
  plant::SystemSpec sys;
  wcsim::FaultSpec fault;
  scan::ScannerSettings st;

  const auto row = scan::inject_and_measure(
      sys, fault, scan::Variant::PassiveWpp, scan::Port::GridFaultNode,
      Sequence::Positive, 37.0, st);
  REQUIRE_MESSAGE(row.ok, row.error);
  CHECK(row.f_hz == 37.0);
  CHECK(row.z_base_ohm == doctest::Approx(161.3333333).epsilon(1e-9));

  // fault switch open: plain balanced driving point at the fault node
  const auto op = plant::nominal_operating_point(sys.conv, sys.bases);
  const auto m = wcsim::build_composite(sys, op, fault);
  const auto z_ref =
      parallel(series(passive_wpp(sys), m.z_g1), m.z_g2);
  check_polar(row.z_pu, at_f(z_ref, row.f_hz), 0.005, 0.5);
}

TEST_CASE("zero-sequence injection sees the zero network alone") {
  plant::SystemSpec sys;
  wcsim::FaultSpec fault;
  scan::ScannerSettings st;

  const auto row = scan::inject_and_measure(
      sys, fault, scan::Variant::PassiveWpp, scan::Port::GridFaultNode,
      Sequence::Zero, 37.0, st);
  REQUIRE_MESSAGE(row.ok, row.error);

  const auto op = plant::nominal_operating_point(sys.conv, sys.bases);
  const auto m = wcsim::build_composite(sys, op, fault);
  check_polar(row.z_pu, at_f(wcsim::z0e(m), row.f_hz), 0.005, 0.5);
}

TEST_CASE("scan rows are deterministic") {
  plant::SystemSpec sys;
  wcsim::FaultSpec fault;
  scan::ScannerSettings st;

  const auto a = scan::inject_and_measure(
      sys, fault, scan::Variant::PassiveWpp, scan::Port::GridFaultNode,
      Sequence::Positive, 123.0, st);
  const auto b = scan::inject_and_measure(
      sys, fault, scan::Variant::PassiveWpp, scan::Port::GridFaultNode,
      Sequence::Positive, 123.0, st);
  REQUIRE_MESSAGE(a.ok, a.error);
  REQUIRE(b.ok);
  CHECK(a.z_pu.real() == b.z_pu.real());
  CHECK(a.z_pu.imag() == b.z_pu.imag());
  CHECK(a.settle_s == b.settle_s);
  CHECK(a.leakage == b.leakage);
}

TEST_CASE("the measurement is amplitude-invariant in its linear window") {
  plant::SystemSpec sys;
  wcsim::FaultSpec fault;

  scan::ScannerSettings lo;
  lo.amplitude_frac = 0.01;
  scan::ScannerSettings hi;
  hi.amplitude_frac = 0.02;

  const auto a = scan::inject_and_measure(
      sys, fault, scan::Variant::PassiveWpp, scan::Port::GridFaultNode,
      Sequence::Positive, 83.0, lo);
  const auto b = scan::inject_and_measure(
      sys, fault, scan::Variant::PassiveWpp, scan::Port::GridFaultNode,
      Sequence::Positive, 83.0, hi);
  REQUIRE_MESSAGE(a.ok, a.error);
  REQUIRE_MESSAGE(b.ok, b.error);
  CHECK(std::abs(a.z_pu - b.z_pu) <= 0.01 * std::abs(a.z_pu));
}

TEST_CASE("rig scan point agrees with the converter closed form") {
  plant::SystemSpec sys;
  wcsim::FaultSpec fault;
  scan::ScannerSettings st;

  const auto row = scan::inject_and_measure(
      sys, fault, scan::Variant::ConverterRig, scan::Port::WppTerminal,
      Sequence::Positive, 30.0, st);
  REQUIRE_MESSAGE(row.ok, row.error);

  const auto op = plant::nominal_operating_point(sys.conv, sys.bases);
  const auto z_c = plant::converter_impedance(sys.conv, op,
                                              Sequence::Positive,
                                              sys.omega1_rad_s);
  const Complex want = at_f(z_c, 30.0) / row.z_base_ohm;
  check_polar(row.z_pu, want, 0.10, 10.0);
}

TEST_CASE("run_scan fans out and keeps failures as rows") {
  plant::SystemSpec sys;
  wcsim::FaultSpec fault;
  scan::ScannerSettings st;

  // 50 Hz is excluded by construction, the others measure
  const auto grid = tfcore::FrequencyGrid::explicit_points({31.0, 50.0});
  const auto par = scan::run_scan(sys, fault, scan::Variant::PassiveWpp,
                                  scan::Port::GridFaultNode,
                                  Sequence::Positive, grid, st, true);
  const auto ser = scan::run_scan(sys, fault, scan::Variant::PassiveWpp,
                                  scan::Port::GridFaultNode,
                                  Sequence::Positive, grid, st, false);
  REQUIRE(par.rows.size() == 2);
  REQUIRE(ser.rows.size() == 2);
  CHECK(par.rows[0].ok);
  CHECK(!par.rows[1].ok);
  // parallel fan-out reproduces the sequential reference bit for bit
  for (std::size_t i = 0; i < par.rows.size(); ++i) {
    CHECK(par.rows[i].ok == ser.rows[i].ok);
    CHECK(par.rows[i].z_pu.real() == ser.rows[i].z_pu.real());
    CHECK(par.rows[i].z_pu.imag() == ser.rows[i].z_pu.imag());
  }
}
