#include "seqgrid/control.hpp"

#include <cmath>
#include <stdexcept>

namespace seqgrid::control {

namespace {
constexpr double kTwoThirdsPi = 2.0 * M_PI / 3.0;
}

ConverterControl::ConverterControl(const plant::ConverterParams& p,
                                   double omega1_rad_s, double dt_s,
                                   double current_scale)
    : p_(p), omega1_(omega1_rad_s), dt_(dt_s), scale_(current_scale) {
  if (!(dt_ > 0.0) || !(omega1_ > 0.0) || !(scale_ > 0.0))
    throw std::invalid_argument("control needs positive dt, omega1, scale");
  // Tustin discretization of (s^2 + wn^2) / (s^2 + 2 zn wn s + wn^2).
  const double k = 2.0 / dt_;
  const double wn = p_.omega_n_rad_s;
  const double a0 = k * k + 2.0 * p_.zeta_n * wn * k + wn * wn;
  nb0_ = (k * k + wn * wn) / a0;
  nb1_ = 2.0 * (wn * wn - k * k) / a0;
  nb2_ = nb0_;
  na1_ = nb1_;
  na2_ = (k * k - 2.0 * p_.zeta_n * wn * k + wn * wn) / a0;
}

void ConverterControl::warm_start(double v1_pk, double theta0_rad) {
  if (!(v1_pk > 0.0)) throw std::invalid_argument("warm start needs V1 > 0");
  theta_ = theta0_rad;
  pll_integ_ = 0.0;
  domega_prev_ = 0.0;
  vqn_prev_ = 0.0;
  nz1_ = nz2_ = 0.0;
  const double kd_vdc = p_.k_d * p_.v_dc_v;
  const double kf_vdc = p_.k_f * p_.v_dc_v;
  // Steady bridge voltage: E0 = V1 + j w1 Lf I0. The PI integrators hold
  // E0 minus the feedforward terms.
  const double e_d = v1_pk - omega1_ * p_.l_f_h * p_.i_qr_a;
  const double e_q = omega1_ * p_.l_f_h * p_.i_ar_a;
  id_integ_ = (e_d + kf_vdc * p_.i_qr_a - kd_vdc * v1_pk) / p_.k_ic;
  iq_integ_ = (e_q - kf_vdc * p_.i_ar_a) / p_.k_ic;
  ed_err_prev_ = eq_err_prev_ = 0.0;
}

std::array<double, 3> ConverterControl::step(
    const std::array<double, 3>& v_abc, const std::array<double, 3>& i_abc) {
  const double c0 = std::cos(theta_);
  const double c1 = std::cos(theta_ - kTwoThirdsPi);
  const double c2 = std::cos(theta_ + kTwoThirdsPi);
  const double s0 = std::sin(theta_);
  const double s1 = std::sin(theta_ - kTwoThirdsPi);
  const double s2 = std::sin(theta_ + kTwoThirdsPi);

  const double vd = (2.0 / 3.0) * (v_abc[0] * c0 + v_abc[1] * c1 + v_abc[2] * c2);
  const double vq = -(2.0 / 3.0) * (v_abc[0] * s0 + v_abc[1] * s1 + v_abc[2] * s2);
  const double id =
      (2.0 / 3.0) * (i_abc[0] * c0 + i_abc[1] * c1 + i_abc[2] * c2) / scale_;
  const double iq =
      -(2.0 / 3.0) * (i_abc[0] * s0 + i_abc[1] * s1 + i_abc[2] * s2) / scale_;

  // Notch on v_q ahead of the PLL PI.
  double vqn = vq;
  if (!bypass_notch_) {
    const double y = nb0_ * vq + nz1_;
    nz1_ = nb1_ * vq - na1_ * y + nz2_;
    nz2_ = nb2_ * vq - na2_ * y;
    vqn = y;
  }

  pll_integ_ += 0.5 * dt_ * (vqn + vqn_prev_);
  vqn_prev_ = vqn;
  const double domega = p_.k_pp * vqn + p_.k_ip * pll_integ_;
  theta_ += dt_ * (omega1_ + 0.5 * (domega + domega_prev_));
  domega_prev_ = domega;
  if (theta_ > 2.0 * M_PI) theta_ -= 2.0 * M_PI;

  const double ed_err = p_.i_ar_a - id;
  const double eq_err = p_.i_qr_a - iq;
  id_integ_ += 0.5 * dt_ * (ed_err + ed_err_prev_);
  iq_integ_ += 0.5 * dt_ * (eq_err + eq_err_prev_);
  ed_err_prev_ = ed_err;
  eq_err_prev_ = eq_err;

  const double kd_vdc = p_.k_d * p_.v_dc_v;
  const double kf_vdc = p_.k_f * p_.v_dc_v;
  const double e_d =
      p_.k_pc * ed_err + p_.k_ic * id_integ_ - kf_vdc * iq + kd_vdc * vd;
  const double e_q =
      p_.k_pc * eq_err + p_.k_ic * iq_integ_ + kf_vdc * id + kd_vdc * vq;

  // Inverse Park at the updated angle. Voltage commands are scale-free.
  const double cc0 = std::cos(theta_);
  const double cc1 = std::cos(theta_ - kTwoThirdsPi);
  const double cc2 = std::cos(theta_ + kTwoThirdsPi);
  const double ss0 = std::sin(theta_);
  const double ss1 = std::sin(theta_ - kTwoThirdsPi);
  const double ss2 = std::sin(theta_ + kTwoThirdsPi);
  return {e_d * cc0 - e_q * ss0, e_d * cc1 - e_q * ss1, e_d * cc2 - e_q * ss2};
}

}  // namespace seqgrid::control
