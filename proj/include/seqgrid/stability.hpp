#pragma once

#include <functional>
#include <vector>

#include "seqgrid/wcsim.hpp"

namespace seqgrid::stability {

using tfcore::FreqExpr;
using tfcore::FrequencyGrid;

/// Loop gain sampled along the imaginary axis. omega is the full signed
/// sweep in ascending order; sampler re-evaluates L(j omega) so the winding
/// computation can refine between samples. Points where the loop gain is
/// singular are dropped and recorded.
struct LoopGainSamples {
  std::vector<double> omega;
  std::vector<Complex> value;
  std::function<Complex(double)> sampler;
  std::vector<double> skipped_omega;
};

/// L = z_grid / z_wpp over the signed grid (the grid must be symmetric).
LoopGainSamples loop_gain(const FreqExpr& z_grid, const FreqExpr& z_wpp,
                          const FrequencyGrid& grid);
/// Any explicit loop-gain expression.
LoopGainSamples loop_gain(const FreqExpr& l, const FrequencyGrid& grid);

struct WindingResult {
  int clockwise = 0;    // encirclements of the reference point
  double residual = 0;  // |total angle / 2 pi - nearest integer|
  std::size_t refined = 0;
};

/// Winding number of the sampled contour about `about` (the critical point),
/// counted clockwise. Midpoints are inserted until every step subtends less
/// than 10 degrees. The contour is closed with the chord between the two
/// sweep ends, which must nearly coincide (a rational loop gain maps the arc
/// at infinity to the single point L(inf), zero or not). Throws when
/// refinement stalls (contour passes through the critical point) or the
/// ends are too far apart (grid must be widened).
WindingResult encirclements(const LoopGainSamples& lg,
                            Complex about = Complex{-1.0, 0.0});

/// Unity-gain crossing of |L| with its phase margin. Negative omega
/// crossings are real for complex-coefficient loop gains.
struct GainCrossing {
  double omega = 0.0;
  double phase_margin_deg = 0.0;
};

struct StabilityVerdict {
  int winding = 0;             // clockwise encirclements of -1
  int declared_rhp_poles = 0;  // open-loop right-half-plane poles, declared
  int closed_loop_rhp = 0;     // winding + declared poles
  bool stable = false;
  std::vector<GainCrossing> crossings;
  WindingResult detail;
};

/// Nyquist criterion with declared open-loop pole count: the closed loop is
/// stable iff clockwise encirclements of -1 plus declared RHP poles is zero.
StabilityVerdict assess(const LoopGainSamples& lg, int declared_rhp_poles = 0);

/// One magnitude/phase table row; phase is unwrapped along the grid.
/// Singular points keep ok == false and NaN values.
struct BodeRow {
  double f_hz = 0.0;
  bool ok = false;
  Complex value{};
  double mag = 0.0;
  double mag_db = 0.0;
  double phase_deg = 0.0;
};

std::vector<BodeRow> bode_table(const FreqExpr& e, const FrequencyGrid& grid);

/// |a| == |b| crossing, refined by bisection between grid points.
struct Intersection {
  double f_hz = 0.0;
  double mag = 0.0;              // common magnitude at the crossing
  double delta_phase_deg = 0.0;  // arg(a) - arg(b), wrapped to (-180, 180]
  double margin_deg = 0.0;       // 180 - |delta_phase|
};

std::vector<Intersection> intersections(const FreqExpr& a, const FreqExpr& b,
                                        const FrequencyGrid& grid);

/// The central comparison: the same WPP branch against the grid impedance
/// with and without the fault chain folded in. Both cases share one
/// operating point (the faulted one, by convention of the caller).
struct SssiComparison {
  StabilityVerdict with_chain;
  StabilityVerdict without_chain;
  std::vector<BodeRow> z_grid_with;
  std::vector<BodeRow> z_grid_without;
  std::vector<BodeRow> z_wpp;
  std::vector<Intersection> crossings_with;
  std::vector<Intersection> crossings_without;
  // Effect of the chain on the positive-sequence grid impedance over the
  // table grid: largest |z_with|/|z_without| and largest phase deviation.
  double max_mag_ratio = 0.0;
  double max_phase_dev_deg = 0.0;
};

SssiComparison compare_sssi(const plant::SystemSpec& sys,
                            const plant::OperatingPoint& op,
                            const wcsim::FaultSpec& fault,
                            const FrequencyGrid& nyquist_grid,
                            const FrequencyGrid& table_grid,
                            int declared_rhp_poles = 0);

}  // namespace seqgrid::stability
