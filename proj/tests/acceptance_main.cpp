// Gate runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Each check is self-contained and uses only the public library surface;
// expected values come from independent oracles (nodal solve, polynomial
// roots, the time-domain simulator) rather than from the code under test.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "loop_cases.hpp"
#include "oracles.hpp"
#include "seqgrid/io.hpp"
#include "seqgrid/nodal.hpp"
#include "seqgrid/plant.hpp"
#include "seqgrid/scan.hpp"
#include "seqgrid/stability.hpp"
#include "seqgrid/wcsim.hpp"

using namespace seqgrid;
using plant::Sequence;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void line(const char* id, bool pass, const std::string& detail) {
  std::printf("%-5s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++g_failures;
}

void fail_threw(const char* id, const std::exception& e) {
  line(id, false, std::string("threw: ") + e.what());
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Complex at_f(const tfcore::FreqExpr& e, double f_hz) {
  return e.eval(Complex{0.0, 2.0 * M_PI * f_hz});
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Aggregated WPP branch with the converter removed: what the passive scan
// variant physically contains.
tfcore::FreqExpr passive_wpp(const plant::SystemSpec& sys) {
  const auto f = plant::filter_shunt(sys.conv);
  const auto agg = scale(
      f, Complex{1.0 / (double(sys.n_units) * sys.bases.z_base_lv()), 0.0});
  const double x_t1_sys = sys.t1.x_pu * sys.bases.s_base_va /
                          (double(sys.n_units) * sys.conv.s_unit_va);
  return series(agg, tfcore::FreqExpr::inductor(x_t1_sys / sys.omega1_rad_s));
}

// Defaults everywhere; the documented flip point (configs/sssi-flip.conf)
// backs the current reference off to 375 A and moves the fault to 30% of
// line 2. a8_system/a8_fault mirror that file.
plant::SystemSpec a8_system() {
  plant::SystemSpec sys;
  sys.conv.i_ar_a = 375.0;
  return sys;
}

wcsim::FaultSpec a8_fault() {
  wcsim::FaultSpec fault;
  fault.alpha = 0.30;
  return fault;
}

// A-1: both composed driving-point impedances match the independent nodal
// solution to 1e-9 relative on 200 log points 0.1..1000 Hz, under 5 s.
void a1() {
  try {
    const auto t0 = Clock::now();
    plant::SystemSpec sys;
    wcsim::FaultSpec fault;
    const auto op = plant::nominal_operating_point(sys.conv, sys.bases);
    const auto m = wcsim::build_composite(sys, op, fault);
    const auto zp = wcsim::zgpe(m);
    const auto zn = wcsim::zgne(m);
    const auto grid = tfcore::FrequencyGrid::log_spaced(0.1, 1000.0, 200);
    double worst = 0.0;
    for (double f : grid.f_hz) {
      const Complex s{0.0, 2.0 * M_PI * f};
      const Complex rp = nodal::solve(m, s, nodal::Port::PositiveWpp)
                             .driving_point_z;
      const Complex rn = nodal::solve(m, s, nodal::Port::NegativeWpp)
                             .driving_point_z;
      worst = std::max(worst, std::abs(zp.eval(s) - rp) / std::abs(rp));
      worst = std::max(worst, std::abs(zn.eval(s) - rn) / std::abs(rn));
    }
    const double dt = seconds_since(t0);
    line("A-1", worst <= 1e-9 && dt < 5.0,
         fmt("composed z_gpe/z_gne vs nodal solve, max rel err %.2e in %.2f s "
             "(need <= 1e-9, < 5 s)",
             worst, dt));
  } catch (const std::exception& e) {
    fail_threw("A-1", e);
  }
}

// A-2: scaling the fault branch by 1e9 recovers the balanced grid
// impedance to 1e-6 relative at every grid point.
void a2() {
  try {
    plant::SystemSpec sys;
    wcsim::FaultSpec fault;
    fault.r_f_pu *= 1e9;
    const auto op = plant::nominal_operating_point(sys.conv, sys.bases);
    const auto m = wcsim::build_composite(sys, op, fault);
    const auto zp = wcsim::zgpe(m);
    const auto balanced = series(m.z_g1, m.z_g2);
    double worst = 0.0;
    for (double f : tfcore::FrequencyGrid::log_spaced(0.1, 1000.0, 200).f_hz) {
      const Complex s{0.0, 2.0 * M_PI * f};
      const Complex b = balanced.eval(s);
      worst = std::max(worst, std::abs(zp.eval(s) - b) / std::abs(b));
    }
    line("A-2", worst <= 1e-6,
         fmt("open-fault limit vs z_g1 + z_g2, max rel dev %.2e (need <= 1e-6)",
             worst));
  } catch (const std::exception& e) {
    fail_threw("A-2", e);
  }
}

// A-3: every nodal solution satisfies the single-line-to-ground boundary
// conditions to 1e-10 normalized.
void a3() {
  try {
    plant::SystemSpec sys;
    wcsim::FaultSpec fault;
    const auto op = plant::nominal_operating_point(sys.conv, sys.bases);
    const auto m = wcsim::build_composite(sys, op, fault);
    double worst = 0.0;
    for (double f : tfcore::FrequencyGrid::log_spaced(0.1, 1000.0, 200).f_hz) {
      const Complex s{0.0, 2.0 * M_PI * f};
      const auto sol = nodal::solve(m, s, nodal::Port::FaultNode);
      const auto r = nodal::boundary_residual(sol, m.z_f.eval(s), 1.0);
      worst = std::max({worst, r.voltage_law, r.current_law});
    }
    line("A-3", worst <= 1e-10,
         fmt("fault boundary residuals over the grid, max %.2e (need <= 1e-10)",
             worst));
  } catch (const std::exception& e) {
    fail_threw("A-3", e);
  }
}

struct ScanCheck {
  scan::ScanResult result;
  double worst_mag = 0.0;
  double worst_phase_deg = 0.0;
  int measured = 0;
  int skipped = 0;
  bool unexpected_failure = false;
};

ScanCheck passive_scan_vs_analytic(const scan::ScannerSettings& st) {
  plant::SystemSpec sys;
  wcsim::FaultSpec fault;
  ScanCheck out;
  const auto grid = tfcore::FrequencyGrid::log_spaced(5.0, 500.0, 20);
  out.result =
      scan::run_scan(sys, fault, scan::Variant::PassiveWpp,
                     scan::Port::GridFaultNode, Sequence::Positive, grid, st);
  const auto op = plant::nominal_operating_point(sys.conv, sys.bases);
  const auto m = wcsim::build_composite(sys, op, fault);
  const auto z_ref = parallel(series(passive_wpp(sys), m.z_g1), m.z_g2);
  const double f1 = sys.omega1_rad_s / (2.0 * M_PI);
  for (const auto& row : out.result.rows) {
    if (!row.ok) {
      if (scan::excluded_frequency(row.f_hz, f1))
        ++out.skipped;
      else
        out.unexpected_failure = true;
      continue;
    }
    ++out.measured;
    const Complex want = at_f(z_ref, row.f_hz);
    out.worst_mag = std::max(
        out.worst_mag, std::abs(std::abs(row.z_pu) / std::abs(want) - 1.0));
    out.worst_phase_deg =
        std::max(out.worst_phase_deg,
                 std::abs(std::arg(row.z_pu / want)) * 180.0 / M_PI);
  }
  return out;
}

// A-4: the simulated scan of the converter-free network lands on the
// analytic branch composition within 0.5% / 0.5 degrees, under 2 minutes.
void a4(const ScanCheck& c, double elapsed_s) {
  const bool pass = !c.unexpected_failure && c.measured >= 18 &&
                    c.worst_mag <= 0.005 && c.worst_phase_deg <= 0.5 &&
                    elapsed_s < 120.0;
  line("A-4", pass,
       fmt("passive scan vs analytic, %.0f points: worst mag %.3f%%, worst "
           "phase %.3f deg",
           double(c.measured), 100.0 * c.worst_mag, c.worst_phase_deg) +
           fmt(" in %.1f s (need <= 0.5%%, <= 0.5 deg, < 120 s)", elapsed_s));
}

// A-5: the closed-form converter impedance agrees with a scan of the
// simulated control law within 10% / 10 degrees across 10..200 Hz.
void a5() {
  try {
    plant::SystemSpec sys;
    wcsim::FaultSpec fault;
    scan::ScannerSettings st;
    const auto op = plant::nominal_operating_point(sys.conv, sys.bases);
    const auto z_c = plant::converter_impedance(sys.conv, op,
                                                Sequence::Positive,
                                                sys.omega1_rad_s);
    double worst_mag = 0.0, worst_phase = 0.0;
    int measured = 0;
    std::string first_error;
    // integer bins spanning the band, none within 5 Hz of the fundamental
    // or its harmonics (the background owns those and their skirts)
    for (double f : {10.0, 16.0, 27.0, 41.0, 64.0, 97.0, 128.0, 190.0}) {
      const auto row = scan::inject_and_measure(
          sys, fault, scan::Variant::ConverterRig, scan::Port::WppTerminal,
          Sequence::Positive, f, st);
      if (!row.ok) {
        if (first_error.empty())
          first_error = fmt("%.0f Hz: ", f) + row.error;
        continue;
      }
      ++measured;
      const Complex want = at_f(z_c, row.f_hz) / row.z_base_ohm;
      worst_mag = std::max(
          worst_mag, std::abs(std::abs(row.z_pu) / std::abs(want) - 1.0));
      worst_phase = std::max(
          worst_phase, std::abs(std::arg(row.z_pu / want)) * 180.0 / M_PI);
    }
    const bool pass = measured == 8 && worst_mag <= 0.10 &&
                      worst_phase <= 10.0;
    std::string detail =
        fmt("rig scan vs closed form at %.0f points 10..190 Hz: worst mag "
            "%.2f%%, worst phase %.2f deg (need <= 10%%, <= 10 deg)",
            double(measured), 100.0 * worst_mag, worst_phase);
    if (!first_error.empty()) detail += "; failed row " + first_error;
    line("A-5", pass, detail);
  } catch (const std::exception& e) {
    fail_threw("A-5", e);
  }
}

// A-6: with the chain attached the grid impedance magnitude never exceeds
// the balanced one on 10..100 Hz; the phase deviation is reported, not
// bounded.
void a6() {
  try {
    plant::SystemSpec sys;
    wcsim::FaultSpec fault;
    const auto os = wcsim::fault_operating_point(sys, fault);
    const auto m = wcsim::build_composite(sys, os.op, fault);
    const auto zp = wcsim::zgpe(m);
    const auto balanced = series(m.z_g1, m.z_g2);
    double worst_ratio = 0.0, worst_phase = 0.0;
    for (double f : tfcore::FrequencyGrid::log_spaced(10.0, 100.0, 120).f_hz) {
      const Complex s{0.0, 2.0 * M_PI * f};
      const Complex a = zp.eval(s);
      const Complex b = balanced.eval(s);
      worst_ratio = std::max(worst_ratio, std::abs(a) / std::abs(b));
      worst_phase =
          std::max(worst_phase, std::abs(std::arg(a / b)) * 180.0 / M_PI);
    }
    line("A-6", worst_ratio <= 1.0,
         fmt("|z_gpe| <= |z_g1 + z_g2| on 10..100 Hz: max ratio %.4f (need "
             "<= 1); max phase deviation %.2f deg (reported only)",
             worst_ratio, worst_phase));
  } catch (const std::exception& e) {
    fail_threw("A-6", e);
  }
}

// A-7: the winding number matches the polynomial root oracle on every
// synthetic loop gain, at least one of them complex-coefficient.
void a7() {
  try {
    int complex_cases = 0, agree = 0, total = 0;
    std::string first_miss;
    const auto grid = tfcore::FrequencyGrid::log_spaced(1e-4, 1e4, 600, true);
    for (const auto& rc : loop_cases::table()) {
      ++total;
      const auto l = tfcore::FreqExpr::rational(rc.num, rc.den, rc.name);
      if (l.has_complex_coeff()) ++complex_cases;
      const int p_open = oracles::rhp_count(rc.den);
      const int z_closed =
          oracles::rhp_count(oracles::poly_sum(rc.den, rc.num));
      const auto w = stability::encirclements(stability::loop_gain(l, grid));
      if (w.clockwise == z_closed - p_open) {
        ++agree;
      } else if (first_miss.empty()) {
        first_miss = std::string(rc.name) +
                     fmt(": winding %.0f vs oracle %.0f", double(w.clockwise),
                         double(z_closed - p_open));
      }
    }
    const bool pass = total >= 5 && agree == total && complex_cases >= 1;
    std::string detail = fmt(
        "winding vs root oracle on %.0f loop gains (%.0f complex): %.0f agree",
        double(total), double(complex_cases), double(agree));
    if (!first_miss.empty()) detail += "; first miss " + first_miss;
    line("A-7", pass, detail);
  } catch (const std::exception& e) {
    fail_threw("A-7", e);
  }
}

// A-8: at the documented operating point the verdict pair flips, the
// balanced loop encircling (-1, j0) and the chained loop not.
void a8() {
  try {
    const auto sys = a8_system();
    const auto fault = a8_fault();
    const auto os = wcsim::fault_operating_point(sys, fault);
    const auto ngrid = tfcore::FrequencyGrid::log_spaced(0.01, 1e6, 321, true);
    const auto tgrid = tfcore::FrequencyGrid::log_spaced(0.1, 1000.0, 200);
    const auto cmp =
        stability::compare_sssi(sys, os.op, fault, ngrid, tgrid, 0);
    const bool pass =
        cmp.without_chain.winding != 0 && cmp.with_chain.winding == 0;
    line("A-8", pass,
         fmt("verdict flip at i_ar 375 A, alpha 0.30: winding without chain "
             "%.0f (need nonzero), with chain %.0f (need 0)",
             double(cmp.without_chain.winding),
             double(cmp.with_chain.winding)));
  } catch (const std::exception& e) {
    fail_threw("A-8", e);
  }
}

// A-9: the time-domain replication at the same point: matched-depth sag
// oscillates, the actual fault decays, terminal voltages equal to 1%.
void a9() {
  try {
    const auto t0 = Clock::now();
    const auto out = scan::replicate_sag_vs_fault(a8_system(), a8_fault(),
                                                  scan::SagFaultSettings{});
    const double dt = seconds_since(t0);
    const double mismatch =
        std::abs(out.vp_sag_pu - out.vp_fault_pu) /
        std::max(out.vp_fault_pu, 1e-12);
    const bool pass = out.case_sag.kind == scan::Oscillation::Oscillating &&
                      out.case_fault.kind == scan::Oscillation::Damped &&
                      mismatch <= 0.01 && dt < 300.0;
    line("A-9", pass,
         std::string("sag ") + scan::to_string(out.case_sag.kind) +
             " (need oscillating), fault " +
             scan::to_string(out.case_fault.kind) + " (need damped)" +
             fmt(", vp mismatch %.2f%% (need <= 1%%) in %.0f s", 100.0 * mismatch,
                 dt));
  } catch (const std::exception& e) {
    fail_threw("A-9", e);
  }
}

// A-10: the scan is deterministic run to run, and halving its step moves
// the measured impedances by less than 0.2%.
void a10(const ScanCheck& first) {
  try {
    scan::ScannerSettings st;
    const auto again = passive_scan_vs_analytic(st);
    const bool identical = io::scan_csv(first.result) ==
                           io::scan_csv(again.result);

    scan::ScannerSettings half = st;
    half.dt_s = st.dt_s / 2.0;
    const auto fine = passive_scan_vs_analytic(half);
    double worst = 0.0;
    bool comparable = fine.result.rows.size() == first.result.rows.size();
    if (comparable) {
      for (std::size_t i = 0; i < fine.result.rows.size(); ++i) {
        const auto& a = first.result.rows[i];
        const auto& b = fine.result.rows[i];
        if (a.ok != b.ok || a.f_hz != b.f_hz) {
          comparable = false;
          break;
        }
        if (a.ok)
          worst = std::max(worst, std::abs(b.z_pu - a.z_pu) / std::abs(a.z_pu));
      }
    }
    line("A-10", identical && comparable && worst < 0.002,
         std::string("rerun byte-identical: ") + (identical ? "yes" : "no") +
             fmt("; half-step impedance shift max %.3f%% (need < 0.2%%)",
                 100.0 * worst));
  } catch (const std::exception& e) {
    fail_threw("A-10", e);
  }
}

}  // namespace

int main() {
  a1();
  a2();
  a3();

  ScanCheck c4;
  bool c4_ok = false;
  {
    const auto t0 = Clock::now();
    try {
      c4 = passive_scan_vs_analytic(scan::ScannerSettings{});
      c4_ok = true;
      a4(c4, seconds_since(t0));
    } catch (const std::exception& e) {
      fail_threw("A-4", e);
    }
  }

  a5();
  a6();
  a7();
  a8();
  a9();

  if (c4_ok) {
    a10(c4);
  } else {
    line("A-10", false, "skipped: the scan underlying it already threw");
  }

  if (g_failures == 0) {
    std::printf("all criteria pass\n");
    return 0;
  }
  std::printf("%d criteria failing\n", g_failures);
  return 1;
}
