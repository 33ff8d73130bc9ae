#include "seqgrid/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace seqgrid::plant {

using tfcore::FreqExpr;

double phase_peak_voltage(double v_ll_rms) {
  return v_ll_rms * std::sqrt(2.0 / 3.0);
}

double peak_current_base(double s_va, double v_ll_rms) {
  return 2.0 * s_va / (3.0 * phase_peak_voltage(v_ll_rms));
}

OperatingPoint nominal_operating_point(const ConverterParams& c,
                                       const BaseSet& b) {
  OperatingPoint op;
  op.v1_pk = phase_peak_voltage(b.v_lv_v);
  op.i_d0_a = c.i_ar_a;
  op.i_q0_a = c.i_qr_a;
  return op;
}

FreqExpr line_impedance(const LineParams& p, Sequence seq, double omega1) {
  if (seq == Sequence::Zero && !(p.zero_seq_multiplier > 0.0))
    throw std::invalid_argument("zero-sequence multiplier must be positive");
  const double k = seq == Sequence::Zero ? p.zero_seq_multiplier : 1.0;
  const FreqExpr r = FreqExpr::resistor(k * p.r_pu);
  const FreqExpr l = FreqExpr::inductor(k * p.x_pu / omega1);
  return series(r, l).labeled(seq == Sequence::Zero ? "line_zero" : "line");
}

FreqExpr transformer_series(const TransformerParams& p, double omega1) {
  return FreqExpr::inductor(p.x_pu / omega1).labeled("xfmr_leakage");
}

FreqExpr transformer_zero_path(const TransformerParams& p, double omega1,
                               bool include) {
  if (!include) return FreqExpr::open_branch();
  return transformer_series(p, omega1).labeled("xfmr_zero_path");
}

FreqExpr current_pi(const ConverterParams& c) {
  return tfcore::pi_controller(c.k_pc, c.k_ic).labeled("current_pi");
}

FreqExpr pll_closed_loop(const ConverterParams& c, double v1_pk) {
  if (!(v1_pk > 0.0))
    throw std::invalid_argument("PLL linearization needs a positive V1");
  // (k_pp + k_ip/s)/s as one rational block, then the notch in cascade.
  const FreqExpr pi_over_s = FreqExpr::rational(
      {Complex{c.k_ip, 0.0}, Complex{c.k_pp, 0.0}},
      {Complex{0.0, 0.0}, Complex{0.0, 0.0}, Complex{1.0, 0.0}},
      "pll_pi_over_s");
  const FreqExpr h_open =
      scale(multiply(tfcore::notch(c.omega_n_rad_s, c.zeta_n), pi_over_s),
            Complex{v1_pk, 0.0});
  const FreqExpr one = FreqExpr::constant({1.0, 0.0}, "one");
  return divide(h_open, series(one, h_open)).labeled("pll_closed_loop");
}

namespace {

// dq-frame numerator/denominator assembled in the rotating variable and
// shifted onto the stationary sequence axis. sign = +1 positive sequence,
// -1 negative sequence.
FreqExpr converter_sequence(const ConverterParams& c, const OperatingPoint& op,
                            double omega1, double sign) {
  const Complex j{0.0, 1.0};
  const double kd_vdc = c.k_d * c.v_dc_v;
  const double kf_vdc = c.k_f * c.v_dc_v;
  const Complex i0 = sign > 0 ? Complex{op.i_d0_a, op.i_q0_a}
                              : std::conj(Complex{op.i_d0_a, op.i_q0_a});

  const FreqExpr h_i = current_pi(c);
  const FreqExpr t_pll = pll_closed_loop(c, op.v1_pk);

  // B(p) = V1 (1 - kd vdc) + I0 (H_i(p) + sign * j (w1 Lf - kf vdc))
  const FreqExpr b = series(
      FreqExpr::constant(Complex{op.v1_pk * (1.0 - kd_vdc), 0.0} +
                             i0 * (sign * j) * (omega1 * c.l_f_h - kf_vdc),
                         "op_coupling"),
      scale(h_i, i0));

  // Denominator in the rotating variable: (1 - kd vdc) - T B / (2 V1).
  const FreqExpr den_dq =
      series(FreqExpr::constant(Complex{1.0 - kd_vdc, 0.0}, "ff_margin"),
             scale(multiply(t_pll, b), Complex{-1.0 / (2.0 * op.v1_pk), 0.0}));

  // Stationary axis: rotating p = s -/+ j w1, i.e. shift by +/- j w1.
  const Complex delta = sign * j * omega1;
  const FreqExpr num = series(
      series(FreqExpr::inductor(c.l_f_h), shift(h_i, delta)),
      FreqExpr::constant(-(sign * j) * kf_vdc, "decoupling"));
  return divide(num, shift(den_dq, delta))
      .labeled(sign > 0 ? "converter_pos" : "converter_neg");
}

}  // namespace

FreqExpr converter_impedance(const ConverterParams& c, const OperatingPoint& op,
                             Sequence seq, double omega1) {
  switch (seq) {
    case Sequence::Positive:
      return converter_sequence(c, op, omega1, +1.0);
    case Sequence::Negative:
      return converter_sequence(c, op, omega1, -1.0);
    case Sequence::Zero:
      return FreqExpr::open_branch();
  }
  throw std::logic_error("bad sequence");
}

FreqExpr filter_shunt(const ConverterParams& c) {
  return series(FreqExpr::resistor(c.r_cf_ohm), FreqExpr::capacitor(c.c_f_f))
      .labeled("filter_shunt");
}

FreqExpr unit_impedance(const ConverterParams& c, const OperatingPoint& op,
                        Sequence seq, double omega1) {
  if (seq == Sequence::Zero) return FreqExpr::open_branch();
  return parallel(converter_impedance(c, op, seq, omega1), filter_shunt(c))
      .labeled("unit");
}

FreqExpr wpp_branch(const SystemSpec& sys, const OperatingPoint& op,
                    Sequence seq) {
  if (seq == Sequence::Zero) return FreqExpr::open_branch();
  if (sys.n_units < 1) throw std::invalid_argument("need at least one unit");
  const FreqExpr unit = unit_impedance(sys.conv, op, seq, sys.omega1_rad_s);
  // n units in parallel, then ohms -> per unit on the LV zone base.
  const double to_pu = 1.0 / (double(sys.n_units) * sys.bases.z_base_lv());
  const FreqExpr agg = scale(unit, Complex{to_pu, 0.0});
  // T1 leakage aggregates from the unit base to the same per-unit value
  // scaled by S_base / (n S_unit).
  const double x_t1_sys =
      sys.t1.x_pu * sys.bases.s_base_va /
      (double(sys.n_units) * sys.conv.s_unit_va);
  const FreqExpr t1 = FreqExpr::inductor(x_t1_sys / sys.omega1_rad_s);
  return series(agg, t1).labeled(seq == Sequence::Positive ? "z_wp" : "z_wn");
}

}  // namespace seqgrid::plant
