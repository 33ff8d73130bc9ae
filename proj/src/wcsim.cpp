#include "seqgrid/wcsim.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace seqgrid::wcsim {

using plant::Sequence;
using tfcore::FreqExpr;

namespace {

void validate(const FaultSpec& f) {
  if (!(f.alpha > 0.0) || !(f.alpha < 1.0))
    throw std::invalid_argument("fault position must lie strictly inside line 2");
  if (!(f.r_f_pu > 0.0) || !std::isfinite(f.r_f_pu))
    throw std::invalid_argument("fault resistance must be positive and finite");
}

}  // namespace

CompositeModel build_composite(const SystemSpec& sys, const OperatingPoint& op,
                               const FaultSpec& fault) {
  validate(fault);
  const double w1 = sys.omega1_rad_s;

  const FreqExpr l1 = plant::line_impedance(sys.line1, Sequence::Positive, w1);
  const FreqExpr l2 = plant::line_impedance(sys.line2, Sequence::Positive, w1);
  const FreqExpr l2_zero =
      plant::line_impedance(sys.line2, Sequence::Zero, w1);
  const FreqExpr t2 = plant::transformer_series(sys.t2, w1);

  CompositeModel m{
      .z_wp = plant::wpp_branch(sys, op, Sequence::Positive),
      .z_wn = plant::wpp_branch(sys, op, Sequence::Negative),
      .z_g1 = series(series(l1, t2), scale(l2, {fault.alpha, 0.0}))
                  .labeled("z_g1"),
      .z_g2 = scale(l2, {1.0 - fault.alpha, 0.0}).labeled("z_g2"),
      .z_01 = FreqExpr::open_branch(),
      .z_02 = scale(l2_zero, {1.0 - fault.alpha, 0.0}).labeled("z_02"),
      .z_f = FreqExpr::resistor(fault.r_f_pu).labeled("z_f"),
  };

  // Fault-side zero path: the faulted line 2 section back to T2, where the
  // grounded star terminates it (configurable off for an ungrounded T2).
  const FreqExpr z01_line = scale(l2_zero, {fault.alpha, 0.0});
  const FreqExpr t2_zero =
      plant::transformer_zero_path(sys.t2, w1, sys.include_t2_in_zero);
  m.z_01 = (t2_zero.is_open() ? z01_line : series(z01_line, t2_zero))
               .labeled("z_01");
  return m;
}

FreqExpr z0e(const CompositeModel& m) {
  if (m.z_01.is_open() && m.z_02.is_open())
    throw std::invalid_argument("no zero-sequence path: both branches open");
  return parallel(m.z_01, m.z_02).labeled("z_0e");
}

FreqExpr zne(const CompositeModel& m) {
  if (m.z_wn.is_open() || m.z_g1.is_open()) return m.z_g2.labeled("z_ne");
  const FreqExpr wpp_path = series(m.z_wn, m.z_g1);
  return parallel(wpp_path, m.z_g2).labeled("z_ne");
}

namespace {

// zgpe and zgne share their shape: own-side series branch plus the far
// branch in parallel with the fault chain through the other two networks.
FreqExpr grid_port(const FreqExpr& other_net, const CompositeModel& m,
                   const char* name) {
  FreqExpr chain = FreqExpr::open_branch();
  if (!other_net.is_open() && !m.z_f.is_open() &&
      !(m.z_01.is_open() && m.z_02.is_open())) {
    chain = series(series(other_net, scale(m.z_f, {3.0, 0.0})),
                   parallel(m.z_01, m.z_02));
  }
  return series(m.z_g1, parallel(m.z_g2, chain)).labeled(name);
}

}  // namespace

FreqExpr zgpe(const CompositeModel& m) { return grid_port(zne(m), m, "z_gpe"); }

FreqExpr zgne(const CompositeModel& m) {
  // Positive network seen from the chain: WPP branch + z_g1 against z_g2.
  FreqExpr z_pe = m.z_g2;
  if (!m.z_wp.is_open() && !m.z_g1.is_open())
    z_pe = parallel(series(m.z_wp, m.z_g1), m.z_g2);
  return grid_port(z_pe.labeled("z_pe"), m, "z_gne");
}

namespace {

struct PhasorNet {
  // Nodes: 0 converter terminal, 1 WPP HV bus, 2 fault node.
  Complex v_c, v_w, v_f;
};

// Positive-sequence fundamental solve. chain_z: impedance hanging at the
// fault node (3 z_f + z_ne + z_0e) or infinity when absent. e_src: source
// voltage behind z_g2.
PhasorNet solve_fundamental(const SystemSpec& sys, const FaultSpec* fault,
                            Complex chain_z, Complex e_src, Complex i_conv_pu) {
  const double w1 = sys.omega1_rad_s;
  const Complex s1{0.0, w1};

  const double alpha = fault ? fault->alpha : 0.0;
  const FreqExpr l1 = plant::line_impedance(sys.line1, Sequence::Positive, w1);
  const FreqExpr l2 = plant::line_impedance(sys.line2, Sequence::Positive, w1);
  const Complex z_l1 = l1.eval(s1);
  const Complex z_l2 = l2.eval(s1);
  const Complex z_t2{0.0, sys.t2.x_pu};
  const Complex z_g1 = z_l1 + z_t2 + alpha * z_l2;
  const Complex z_g2 = (1.0 - alpha) * z_l2;

  const double x_t1_sys = sys.t1.x_pu * sys.bases.s_base_va /
                          (double(sys.n_units) * sys.conv.s_unit_va);
  const Complex z_t1{0.0, x_t1_sys};

  const Complex z_fil_si = plant::filter_shunt(sys.conv).eval(s1);
  const Complex z_fil =
      z_fil_si / (double(sys.n_units) * sys.bases.z_base_lv());

  Eigen::Matrix3cd y = Eigen::Matrix3cd::Zero();
  Eigen::Vector3cd rhs = Eigen::Vector3cd::Zero();
  const Complex y_t1 = 1.0 / z_t1;
  const Complex y_g1 = 1.0 / z_g1;
  const Complex y_g2 = 1.0 / z_g2;
  y(0, 0) = y_t1 + 1.0 / z_fil;
  y(0, 1) = -y_t1;
  y(1, 0) = -y_t1;
  y(1, 1) = y_t1 + y_g1;
  y(1, 2) = -y_g1;
  y(2, 1) = -y_g1;
  y(2, 2) = y_g1 + y_g2;
  if (std::isfinite(chain_z.real())) y(2, 2) += 1.0 / chain_z;

  rhs(0) = i_conv_pu;
  rhs(2) = e_src * y_g2;

  const Eigen::Vector3cd v = y.partialPivLu().solve(rhs);
  return PhasorNet{v(0), v(1), v(2)};
}

OperatingSolve solve_operating_point(const SystemSpec& sys,
                                     const FaultSpec* fault, Complex e_src) {
  const double i_base =
      plant::peak_current_base(sys.conv.s_unit_va, sys.bases.v_lv_v);
  const double v_base_pk = plant::phase_peak_voltage(sys.bases.v_lv_v);
  const Complex i_ref_pu =
      Complex{sys.conv.i_ar_a, sys.conv.i_qr_a} / i_base;

  OperatingPoint op = plant::nominal_operating_point(sys.conv, sys.bases);
  Complex v_c{1.0, 0.0};
  PhasorNet net{};
  int iterations = 0;
  for (int k = 0; k < 50; ++k) {
    ++iterations;
    Complex chain{std::numeric_limits<double>::infinity(), 0.0};
    if (fault) {
      CompositeModel m = build_composite(sys, op, *fault);
      const Complex s1{0.0, sys.omega1_rad_s};
      chain = 3.0 * m.z_f.eval(s1) + zne(m).eval(s1) + z0e(m).eval(s1);
    }
    // Converter current rides on the local voltage angle.
    const Complex angle =
        std::abs(v_c) > 0.0 ? v_c / std::abs(v_c) : Complex{1.0, 0.0};
    const PhasorNet next =
        solve_fundamental(sys, fault, chain, e_src, i_ref_pu * angle);
    const double delta = std::abs(next.v_c - v_c);
    net = next;
    v_c = next.v_c;
    op.v1_pk = std::abs(v_c) * v_base_pk;
    if (!(op.v1_pk > 0.0))
      throw std::runtime_error("operating point collapsed to zero voltage");
    if (delta < 1e-12) break;
  }

  OperatingSolve out;
  out.op = op;
  out.op.i_d0_a = sys.conv.i_ar_a;
  out.op.i_q0_a = sys.conv.i_qr_a;
  out.v_c_pu = net.v_c;
  out.v_w_pu = net.v_w;
  out.v_f_pu = net.v_f;
  out.v1_pu = std::abs(net.v_c);
  out.iterations = iterations;
  return out;
}

}  // namespace

OperatingSolve fault_operating_point(const SystemSpec& sys,
                                     const FaultSpec& fault) {
  validate(fault);
  return solve_operating_point(sys, &fault, Complex{1.0, 0.0});
}

OperatingSolve sag_operating_point(const SystemSpec& sys, double depth) {
  if (!(depth >= 0.0) || !(depth <= 1.0))
    throw std::invalid_argument("sag depth must lie in [0, 1]");
  return solve_operating_point(sys, nullptr, Complex{1.0 - depth / 3.0, 0.0});
}

}  // namespace seqgrid::wcsim
