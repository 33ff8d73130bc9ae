#pragma once

#include "seqgrid/tfcore.hpp"

namespace seqgrid::plant {

using tfcore::FreqExpr;

enum class Sequence { Positive, Negative, Zero };

/// Per-unit system: one apparent-power base for the whole plant, one
/// line-to-line RMS voltage base per zone. Impedance base per zone is
/// V_ll^2 / S. Phasor amplitudes are peak (amplitude-invariant transforms),
/// so the phase voltage base is sqrt(2/3) * V_ll and the current base is
/// 2 S / (3 V_pk).
struct BaseSet {
  double s_base_va = 300e6;
  double v_hv_v = 220e3;  // grid zone
  double v_mv_v = 35e3;   // collector zone
  double v_lv_v = 690.0;  // converter zone

  double z_base_hv() const { return v_hv_v * v_hv_v / s_base_va; }
  double z_base_mv() const { return v_mv_v * v_mv_v / s_base_va; }
  double z_base_lv() const { return v_lv_v * v_lv_v / s_base_va; }
};

double phase_peak_voltage(double v_ll_rms);
/// Peak phase current that carries s_va at v_ll_rms.
double peak_current_base(double s_va, double v_ll_rms);

/// Series line, fundamental-frequency per-unit data. The zero-sequence
/// impedance is a fixed multiple of the positive one (no shunt charging).
struct LineParams {
  double r_pu = 0.0;
  double x_pu = 0.0;
  double zero_seq_multiplier = 3.0;
};

/// Two-winding transformer reduced to its leakage reactance. Connection is
/// grounded star on the HV side, delta on the LV side, so zero-sequence
/// current entering from HV circulates in the delta and sees the leakage,
/// while the LV side presents no zero-sequence path at all.
struct TransformerParams {
  double x_pu = 0.0;
};

/// One 2 MVA grid-following converter, SI quantities at unit scale.
/// The control law: PLL with a notch filter on the q-axis voltage ahead of
/// its PI, current PI in the PLL frame, cross-coupling compensation
/// j*k_f*v_dc*i and terminal-voltage feedforward k_d*v_dc*v added to the
/// bridge voltage command.
struct ConverterParams {
  double s_unit_va = 2e6;
  double k_pc = 0.015;  // current PI, V/A
  double k_ic = 3.0;    // V/(A s)
  double k_pp = 0.48;   // PLL PI, rad/(V s)
  double k_ip = 43.0;   // rad/(V s^2)
  double omega_n_rad_s = 200.0 * M_PI;
  double zeta_n = 1.0;
  double l_f_h = 3e-3;
  double c_f_f = 50e-6;
  double r_cf_ohm = 1.5;
  double i_ar_a = 2368.0;  // d-axis current reference, peak
  double i_qr_a = 0.0;
  double k_f = 0.00157;    // ohm/V
  double k_d = 0.001667;   // 1/V
  double v_dc_v = 690.0;
};

/// Small-signal linearization point of one converter, SI unit scale.
/// v1_pk is the peak positive-sequence phase voltage at the converter
/// terminal; the current components are in the PLL frame (d aligned with
/// the terminal voltage).
struct OperatingPoint {
  double v1_pk = 0.0;
  double i_d0_a = 0.0;
  double i_q0_a = 0.0;
};

OperatingPoint nominal_operating_point(const ConverterParams& c,
                                       const BaseSet& b);

/// Whole plant: grid, collector and converter data plus the fundamental
/// frequency everything is referenced to. Line 1 runs from the WPP
/// transformer to the step-up transformer T2, line 2 from T2 to the grid
/// source; the fault sits partway along line 2. T1 reactance is given on
/// the unit base, T2 on the system base.
struct SystemSpec {
  BaseSet bases;
  double omega1_rad_s = 100.0 * M_PI;
  LineParams line1{0.0058, 0.058, 3.0};
  LineParams line2{0.041, 0.41, 3.0};
  TransformerParams t1{0.01};
  TransformerParams t2{0.03};
  ConverterParams conv;
  int n_units = 150;
  /// Keep the step-up transformer leakage in the zero-sequence path on the
  /// fault side (its grounded star terminates zero current there).
  bool include_t2_in_zero = true;
};

/// R + sX/omega1 in per unit; zero sequence applies the multiplier.
FreqExpr line_impedance(const LineParams& p, Sequence seq, double omega1);

/// Leakage reactance as a series per-unit branch.
FreqExpr transformer_series(const TransformerParams& p, double omega1);

/// Zero-sequence termination seen from the HV side; open when disabled.
FreqExpr transformer_zero_path(const TransformerParams& p, double omega1,
                               bool include);

/// Current controller kp + ki/s.
FreqExpr current_pi(const ConverterParams& c);

/// Closed PLL transfer T(s) = V1 H(s) / (1 + V1 H(s)) with
/// H(s) = notch(s) (k_pp + k_ip/s) / s, in the rotating-frame variable.
/// T is the dimensionless angle response: dtheta = T * dv_q / V1.
FreqExpr pll_closed_loop(const ConverterParams& c, double v1_pk);

/// Sequence impedance of the bridge + L_f branch under the control law,
/// SI ohms at unit scale, load sign convention (current into the bridge).
/// Zero sequence is an open branch: the converter is three-wire.
///
/// Positive sequence:
///   Z(s) = (s L_f + H_i(s-jw1) - j k_f v_dc)
///        / ((1 - k_d v_dc) - T(s-jw1) B(s-jw1) / (2 V1))
///   B(p) = V1 (1 - k_d v_dc) + I0 (H_i(p) + j (w1 L_f - k_f v_dc))
/// with I0 = i_d0 + j i_q0. Negative sequence mirrors the shift to s+jw1,
/// conjugates I0 and flips the signs of the j terms. The shifted PLL makes
/// both expressions complex-coefficient: they are not conjugate-symmetric
/// in s.
FreqExpr converter_impedance(const ConverterParams& c, const OperatingPoint& op,
                             Sequence seq, double omega1);

/// R_cf + 1/(s C_f), SI ohms.
FreqExpr filter_shunt(const ConverterParams& c);

/// Converter branch in parallel with its filter, SI ohms at unit scale.
FreqExpr unit_impedance(const ConverterParams& c, const OperatingPoint& op,
                        Sequence seq, double omega1);

/// Aggregated WPP branch impedance seen from the HV side of T1, per unit
/// on the system base: n identical units in parallel, plus the aggregated
/// T1 leakage. Aggregation divides the SI unit impedance by n and the
/// result by the LV-zone impedance base. Zero sequence is open (delta LV
/// winding of T1).
FreqExpr wpp_branch(const SystemSpec& sys, const OperatingPoint& op,
                    Sequence seq);

}  // namespace seqgrid::plant
