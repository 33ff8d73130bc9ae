#include "seqgrid/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqgrid::stability {

using tfcore::PoleError;

namespace {

constexpr double kMaxStepRad = 10.0 * M_PI / 180.0;
// The sweep ends (at -omega_max and +omega_max) must nearly coincide before
// the contour can be closed: their gap, relative to the distance from the
// critical point, bounds the angle the closing chord can subtend.
constexpr double kEndGapFraction = 0.25;

double wrap_deg(double d) {
  while (d > 180.0) d -= 360.0;
  while (d <= -180.0) d += 360.0;
  return d;
}

LoopGainSamples sample(std::function<Complex(double)> fn,
                       const FrequencyGrid& grid) {
  if (!grid.symmetric)
    throw std::invalid_argument("Nyquist sweeps need a symmetric grid");
  LoopGainSamples lg;
  lg.sampler = std::move(fn);
  for (double w : grid.signed_omegas()) {
    try {
      const Complex v = lg.sampler(w);
      lg.omega.push_back(w);
      lg.value.push_back(v);
    } catch (const PoleError&) {
      lg.skipped_omega.push_back(w);
    }
  }
  if (lg.omega.size() < 4)
    throw std::runtime_error("loop gain is singular almost everywhere on the grid");
  return lg;
}

}  // namespace

LoopGainSamples loop_gain(const FreqExpr& z_grid, const FreqExpr& z_wpp,
                          const FrequencyGrid& grid) {
  return loop_gain(divide(z_grid, z_wpp).labeled("loop_gain"), grid);
}

LoopGainSamples loop_gain(const FreqExpr& l, const FrequencyGrid& grid) {
  return sample([l](double w) { return l.eval(Complex{0.0, w}); }, grid);
}

namespace {

// Angle subtended at `about` between consecutive contour points, refined
// until each step is small. Returns the accumulated angle; counts added
// midpoints. depth guards contours that pass through `about`.
double refine_segment(const LoopGainSamples& lg, Complex about, double w0,
                      Complex v0, double w1, Complex v1, int depth,
                      std::size_t& refined) {
  const Complex r0 = v0 - about;
  const Complex r1 = v1 - about;
  if (std::abs(r0) == 0.0 || std::abs(r1) == 0.0)
    throw std::runtime_error("Nyquist contour passes through the critical point");
  const double step = std::arg(r1 / r0);
  if (std::abs(step) <= kMaxStepRad) return step;
  if (depth <= 0)
    throw std::runtime_error(
        "Nyquist refinement stalled near the critical point; the margin "
        "is below numerical resolution");
  const double wm = 0.5 * (w0 + w1);
  Complex vm;
  try {
    vm = lg.sampler(wm);
  } catch (const PoleError&) {
    throw std::runtime_error("loop gain has a pole inside a refined segment");
  }
  ++refined;
  return refine_segment(lg, about, w0, v0, wm, vm, depth - 1, refined) +
         refine_segment(lg, about, wm, vm, w1, v1, depth - 1, refined);
}

}  // namespace

WindingResult encirclements(const LoopGainSamples& lg, Complex about) {
  if (lg.omega.size() != lg.value.size() || lg.omega.size() < 4)
    throw std::invalid_argument("need at least 4 loop-gain samples");
  if (!lg.sampler)
    throw std::invalid_argument("loop-gain samples carry no sampler");

  // A rational loop gain maps the arc at infinity to the single point
  // L(inf), so once the two sweep ends are close to each other (relative
  // to their distance from the critical point) the straight chord between
  // them closes the contour without ambiguity. This covers both gains that
  // roll off (ends near zero) and gains that level out at a finite value,
  // like a ratio of impedances that are each ultimately inductive.
  const Complex end_neg = lg.value.front();
  const Complex end_pos = lg.value.back();
  const double gap = std::abs(end_pos - end_neg);
  const double clearance =
      std::min(std::abs(end_pos - about), std::abs(end_neg - about));
  if (!(gap <= kEndGapFraction * clearance))
    throw std::runtime_error(
        "the sweep ends do not meet (gap " + std::to_string(gap) +
        " vs clearance " + std::to_string(clearance) +
        " from the critical point); widen the frequency grid until the "
        "loop gain reaches its asymptote");

  WindingResult out;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < lg.omega.size(); ++i) {
    total += refine_segment(lg, about, lg.omega[i], lg.value[i],
                            lg.omega[i + 1], lg.value[i + 1], 48, out.refined);
  }
  total += std::arg((end_neg - about) / (end_pos - about));
  const double turns = total / (2.0 * M_PI);
  const double nearest = std::round(turns);
  out.residual = std::abs(turns - nearest);
  if (out.residual > 0.25)
    throw std::runtime_error(
        "winding number did not converge to an integer; the sweep likely "
        "misses contour structure");
  // Counter-clockwise accumulation, clockwise encirclements reported.
  out.clockwise = -int(nearest);
  return out;
}

namespace {

std::vector<GainCrossing> gain_crossings(const LoopGainSamples& lg) {
  std::vector<GainCrossing> out;
  for (std::size_t i = 0; i + 1 < lg.omega.size(); ++i) {
    const double g0 = std::abs(lg.value[i]) - 1.0;
    const double g1 = std::abs(lg.value[i + 1]) - 1.0;
    if (g0 == 0.0) {
      out.push_back({lg.omega[i],
                     wrap_deg(180.0 + std::arg(lg.value[i]) * 180.0 / M_PI)});
      continue;
    }
    if (g0 * g1 >= 0.0) continue;
    double a = lg.omega[i], b = lg.omega[i + 1];
    double ga = g0;
    Complex vm{};
    for (int it = 0; it < 80 && (b - a) > 1e-12 * (1.0 + std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      vm = lg.sampler(m);
      const double gm = std::abs(vm) - 1.0;
      if ((gm < 0.0) == (ga < 0.0)) {
        a = m;
        ga = gm;
      } else {
        b = m;
      }
    }
    const double wc = 0.5 * (a + b);
    const Complex vc = lg.sampler(wc);
    out.push_back({wc, wrap_deg(180.0 + std::arg(vc) * 180.0 / M_PI)});
  }
  return out;
}

}  // namespace

StabilityVerdict assess(const LoopGainSamples& lg, int declared_rhp_poles) {
  if (declared_rhp_poles < 0)
    throw std::invalid_argument("declared pole count cannot be negative");
  StabilityVerdict v;
  v.detail = encirclements(lg);
  v.winding = v.detail.clockwise;
  v.declared_rhp_poles = declared_rhp_poles;
  v.closed_loop_rhp = v.winding + declared_rhp_poles;
  v.stable = v.closed_loop_rhp == 0;
  v.crossings = gain_crossings(lg);
  return v;
}

std::vector<BodeRow> bode_table(const FreqExpr& e, const FrequencyGrid& grid) {
  std::vector<BodeRow> rows;
  rows.reserve(grid.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double prev_phase = 0.0;
  bool have_prev = false;
  for (double f : grid.f_hz) {
    BodeRow r;
    r.f_hz = f;
    try {
      r.value = e.eval(Complex{0.0, 2.0 * M_PI * f});
      r.ok = true;
      r.mag = std::abs(r.value);
      r.mag_db = 20.0 * std::log10(r.mag);
      double ph = std::arg(r.value) * 180.0 / M_PI;
      if (have_prev) ph += 360.0 * std::round((prev_phase - ph) / 360.0);
      r.phase_deg = ph;
      prev_phase = ph;
      have_prev = true;
    } catch (const PoleError&) {
      r.ok = false;
      r.value = Complex{nan, nan};
      r.mag = r.mag_db = r.phase_deg = nan;
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<Intersection> intersections(const FreqExpr& a, const FreqExpr& b,
                                        const FrequencyGrid& grid) {
  auto gap = [&](double f) -> double {
    const Complex s{0.0, 2.0 * M_PI * f};
    return std::abs(a.eval(s)) - std::abs(b.eval(s));
  };
  std::vector<Intersection> out;
  for (std::size_t i = 0; i + 1 < grid.f_hz.size(); ++i) {
    double g0, g1;
    try {
      g0 = gap(grid.f_hz[i]);
      g1 = gap(grid.f_hz[i + 1]);
    } catch (const PoleError&) {
      continue;
    }
    if (g0 == 0.0 || g0 * g1 >= 0.0) continue;
    double lo = grid.f_hz[i], hi = grid.f_hz[i + 1];
    double glo = g0;
    for (int it = 0; it < 80 && (hi - lo) > 1e-9 * hi; ++it) {
      const double m = 0.5 * (lo + hi);
      const double gm = gap(m);
      if ((gm < 0.0) == (glo < 0.0)) {
        lo = m;
        glo = gm;
      } else {
        hi = m;
      }
    }
    const double fc = 0.5 * (lo + hi);
    const Complex s{0.0, 2.0 * M_PI * fc};
    const Complex va = a.eval(s);
    const Complex vb = b.eval(s);
    Intersection x;
    x.f_hz = fc;
    x.mag = 0.5 * (std::abs(va) + std::abs(vb));
    x.delta_phase_deg = wrap_deg((std::arg(va) - std::arg(vb)) * 180.0 / M_PI);
    x.margin_deg = 180.0 - std::abs(x.delta_phase_deg);
    out.push_back(x);
  }
  return out;
}

SssiComparison compare_sssi(const plant::SystemSpec& sys,
                            const plant::OperatingPoint& op,
                            const wcsim::FaultSpec& fault,
                            const FrequencyGrid& nyquist_grid,
                            const FrequencyGrid& table_grid,
                            int declared_rhp_poles) {
  const wcsim::CompositeModel m = wcsim::build_composite(sys, op, fault);
  const FreqExpr z_with = wcsim::zgpe(m);
  const FreqExpr z_without = series(m.z_g1, m.z_g2).labeled("z_g_balanced");

  SssiComparison cmp;
  cmp.with_chain =
      assess(loop_gain(z_with, m.z_wp, nyquist_grid), declared_rhp_poles);
  cmp.without_chain =
      assess(loop_gain(z_without, m.z_wp, nyquist_grid), declared_rhp_poles);
  cmp.z_grid_with = bode_table(z_with, table_grid);
  cmp.z_grid_without = bode_table(z_without, table_grid);
  cmp.z_wpp = bode_table(m.z_wp, table_grid);
  cmp.crossings_with = intersections(z_with, m.z_wp, table_grid);
  cmp.crossings_without = intersections(z_without, m.z_wp, table_grid);

  for (std::size_t i = 0; i < table_grid.size(); ++i) {
    const BodeRow& w = cmp.z_grid_with[i];
    const BodeRow& wo = cmp.z_grid_without[i];
    if (!w.ok || !wo.ok) continue;
    cmp.max_mag_ratio = std::max(cmp.max_mag_ratio, w.mag / wo.mag);
    const double dev =
        std::abs(wrap_deg(std::arg(w.value) * 180.0 / M_PI -
                          std::arg(wo.value) * 180.0 / M_PI));
    cmp.max_phase_dev_deg = std::max(cmp.max_phase_dev_deg, dev);
  }
  return cmp;
}

}  // namespace seqgrid::stability
