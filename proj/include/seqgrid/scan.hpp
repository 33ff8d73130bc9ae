#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seqgrid/plant.hpp"
#include "seqgrid/sim.hpp"
#include "seqgrid/wcsim.hpp"

namespace seqgrid::scan {

using plant::Sequence;

/// Which network the scenario builds.
///   Full        converter (aggregated), filter, both transformers, lines,
///               ideal grid source; optional fault switch and sag schedule
///   PassiveWpp  converter branch removed, filter and everything else kept
///   ConverterRig one unit behind an ideal source at its terminal, with a
///               series injection slot
enum class Variant { Full, PassiveWpp, ConverterRig };

/// Injection port: shunt current at the fault node (grid-looking, per-unit
/// on the HV zone base) or series voltage at the converter terminal
/// (WPP-looking, per-unit on the unit base).
enum class Port { GridFaultNode, WppTerminal };

struct ScannerSettings {
  double dt_s = 20e-6;
  double amplitude_frac = 0.02;  // of the port's nominal amplitude
  double settle_tol = 1e-3;      // cycle-RMS relative spread across 5 cycles
  int settle_cycles = 5;
  // The current loop rings at a few hertz with a ~0.4 s envelope, so a
  // cold start needs roughly three seconds to pass the spread test.
  double settle_max_s = 4.0;
  // Injection onset: a half-cosine amplitude ramp over ramp_s keeps the
  // step from shocking the current-loop ring mode, and skip_s then lets
  // what remains decay before the window opens. The defaults leave the
  // ring envelope below the leakage budget; skip_s must cover ramp_s.
  double ramp_s = 0.1;
  double skip_s = 1.5;       // injection transient discard
  double window_s = 1.0;     // DFT window; 1 s gives integer-Hz bins
  double leakage_max = 0.02;
  bool fault_closed = false;  // engage the fault before scanning
};

/// Scan frequencies live on the DFT bin grid of the measurement window.
double snap_to_bin(double f_hz, double window_s);
/// Fundamental and its low harmonics are reserved for the background.
bool excluded_frequency(double f_hz, double f1_hz);

struct PhasorTriple {
  double f_hz = 0.0;
  Complex a{}, b{}, c{};
  double leakage = 0.0;  // adjacent-bin energy relative to the main bin
};

/// Single-bin DFT of channels <base>_a/_b/_c over [t0, t1], which must span
/// an integer number of periods of f (within one sample). Phase is
/// referenced to t0. |phasor| equals the waveform peak. Leakage is the
/// energy in the two adjacent bins relative to the main one; sidebands
/// landing on a frequency in skip_sideband_hz (the steady background) are
/// left out of it.
PhasorTriple extract_phasor(const sim::Waveform& w, const std::string& base,
                            double f_hz, double t0, double t1,
                            const std::vector<double>& skip_sideband_hz = {});

struct SeqPhasors {
  Complex pos{}, neg{}, zero{};
};

SeqPhasors fortescue(const PhasorTriple& p);
PhasorTriple fortescue_inverse(const SeqPhasors& s, double f_hz);

struct ScanRow {
  double f_hz = 0.0;  // snapped frequency actually injected
  Sequence seq = Sequence::Positive;
  bool ok = false;
  std::string error;
  Complex z_pu{};           // on the port zone base
  double z_base_ohm = 0.0;  // multiply to recover SI ohms
  double amplitude_frac = 0.0;
  double settle_s = 0.0;
  double leakage = 0.0;
};

struct ScanResult {
  Variant variant = Variant::PassiveWpp;
  Port port = Port::GridFaultNode;
  std::vector<ScanRow> rows;
};

/// One settle-inject-measure run at a single frequency.
ScanRow inject_and_measure(const plant::SystemSpec& sys,
                           const wcsim::FaultSpec& fault, Variant variant,
                           Port port, Sequence seq, double f_hz,
                           const ScannerSettings& st);

/// One run per grid frequency; failures are recorded per row and the scan
/// continues. Runs are independent; parallel fan-out gives results
/// identical to the sequential reference.
ScanResult run_scan(const plant::SystemSpec& sys,
                    const wcsim::FaultSpec& fault, Variant variant, Port port,
                    Sequence seq, const tfcore::FrequencyGrid& grid,
                    const ScannerSettings& st, bool parallel = true);

enum class Oscillation { Damped, Marginal, Oscillating, Diverged };

const char* to_string(Oscillation o);

struct OscillationVerdict {
  Oscillation kind = Oscillation::Marginal;
  double growth_ratio = 0.0;  // late / early envelope of the residual
  double early_env = 0.0;
  double late_env = 0.0;
};

struct SagFaultSettings {
  double dt_s = 20e-6;
  double t_event_s = 0.6;
  double t_hold_s = 3.0;        // post-event horizon for the verdict
  double vp_window_s = 0.3;     // early window for the V_p match
  double vp_delay_s = 0.06;     // gap between event and V_p window
  double match_tol = 0.005;     // bisection stop, relative V_p mismatch
  int max_bisection = 24;
};

/// Two cases: a single-phase source sag (no fault, no sequence coupling)
/// against an actual single-line-to-ground fault, with
/// the sag depth bisected until both leave the same positive-sequence PCC
/// voltage. Verdicts come from the growth of the non-fundamental residual
/// envelope of the PCC voltage between an early and a late window.
struct SagFaultOutcome {
  OscillationVerdict case_sag, case_fault;
  double vp_sag_pu = 0.0, vp_fault_pu = 0.0;
  double sag_depth = 0.0;
  int bisection_runs = 0;
  sim::Waveform wave_sag, wave_fault;  // PCC and converter-terminal probes
};

SagFaultOutcome replicate_sag_vs_fault(const plant::SystemSpec& sys,
                                       const wcsim::FaultSpec& fault,
                                       const SagFaultSettings& st);

/// Steady single-unit rig run without injection, for control checks:
/// filtered q-axis voltage, PLL angle deviation from the source angle and
/// relative current magnitude error against the reference, all once settled.
struct RigSteadyProbe {
  double v_q_filtered_v = 0.0;
  double theta_dev_rad = 0.0;
  double current_err = 0.0;
  double settle_s = 0.0;
};

RigSteadyProbe rig_steady_probe(const plant::SystemSpec& sys, double dt_s);

/// RMS PLL angle ripple under a negative-sequence terminal perturbation at
/// f_hz, with the notch active and bypassed. The notch parks its zeros on
/// the double-fundamental beat, so the active value should be far smaller.
struct NotchRipple {
  double with_notch_rad = 0.0;
  double bypassed_rad = 0.0;
};

NotchRipple pll_notch_ripple(const plant::SystemSpec& sys, double f_hz,
                             double amp_frac, double dt_s);

}  // namespace seqgrid::scan
