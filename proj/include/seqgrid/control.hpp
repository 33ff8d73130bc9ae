#pragma once

#include <array>

#include "seqgrid/plant.hpp"

namespace seqgrid::control {

/// Discrete realization of the converter control law, one instance per
/// simulated converter. The same law the analytic sequence impedances
/// linearize:
///   amplitude-invariant Park transform at the PLL angle;
///   PLL integrating omega1 + PI(k_pp, k_ip) on notch-filtered v_q;
///   current PI on (i_ref - i_dq);
///   bridge command e = PI + j k_f v_dc i_dq + k_d v_dc v_dq.
/// Integrators are trapezoidal, the notch is a Tustin biquad, and the
/// realization is delay-free apart from the one-step measurement lag the
/// caller introduces by feeding previous-step signals.
///
/// current_scale folds aggregation in: measured currents are divided by it
/// so gains and references stay at unit scale (n parallel units behave as
/// one with n-fold current).
class ConverterControl {
 public:
  ConverterControl(const plant::ConverterParams& p, double omega1_rad_s,
                   double dt_s, double current_scale = 1.0);

  /// Seed the internal state with the fundamental steady state at the given
  /// terminal voltage and angle so runs start near equilibrium.
  void warm_start(double v1_pk, double theta0_rad);

  /// Disable the notch (pass v_q through) for notch-effect comparisons.
  void bypass_notch(bool on) { bypass_notch_ = on; }

  /// Advance one step from measured terminal voltages and converter branch
  /// currents; returns the three bridge EMFs for the step being computed.
  std::array<double, 3> step(const std::array<double, 3>& v_abc,
                             const std::array<double, 3>& i_abc);

  double theta() const { return theta_; }
  double v_q_filtered() const { return vqn_prev_; }

 private:
  plant::ConverterParams p_;
  double omega1_, dt_, scale_;
  bool bypass_notch_ = false;

  double theta_ = 0.0;
  double domega_prev_ = 0.0;
  double pll_integ_ = 0.0;
  double vqn_prev_ = 0.0;
  double id_integ_ = 0.0, iq_integ_ = 0.0;
  double ed_err_prev_ = 0.0, eq_err_prev_ = 0.0;
  // notch biquad, direct form II transposed
  double nb0_ = 1.0, nb1_ = 0.0, nb2_ = 0.0, na1_ = 0.0, na2_ = 0.0;
  double nz1_ = 0.0, nz2_ = 0.0;
};

}  // namespace seqgrid::control
