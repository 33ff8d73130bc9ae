#include "seqgrid/nodal.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>

namespace seqgrid::nodal {

using tfcore::FreqExpr;

namespace {

// Node map after tying the three networks into the fault loop. Ground (0)
// is the positive-sequence rail, which the loop wire also ties to the
// negative-sequence fault node. The zero-sequence fault node and the
// negative rail share node 4.
//
//   0  ground: positive rail and negative fault node
//   1  positive WPP bus
//   2  positive fault node
//   3  negative WPP bus
//   4  negative rail / zero fault node
//   5  zero rail
//
// Branches: z_wp 1-0, z_g1 1-2, z_g2 2-0 (positive)
//           z_wn 3-4, z_g1 3-0, z_g2 4-0 (negative)
//           z_01 4-5, z_02 4-5 (zero)
//           3 z_f 2-5 (fault interconnection)
constexpr int kNodes = 5;  // unknowns, ground excluded

struct Branch {
  const FreqExpr* z;
  int a, b;  // 0 means ground
  double mult;
};

}  // namespace

SequenceSolution solve(const wcsim::CompositeModel& m, Complex s, Port port,
                       Complex injection) {
  if (injection == Complex{0.0, 0.0})
    throw std::invalid_argument("injection current must be nonzero");

  std::array<Branch, 9> all{{
      {&m.z_wp, 1, 0, 1.0},
      {&m.z_g1, 1, 2, 1.0},
      {&m.z_g2, 2, 0, 1.0},
      {&m.z_wn, 3, 4, 1.0},
      {&m.z_g1, 3, 0, 1.0},
      {&m.z_g2, 4, 0, 1.0},
      {&m.z_01, 4, 5, 1.0},
      {&m.z_02, 4, 5, 1.0},
      {&m.z_f, 2, 5, 3.0},
  }};

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(kNodes, kNodes);
  std::array<Complex, 9> admittance{};
  std::array<bool, 9> present{};
  for (std::size_t k = 0; k < all.size(); ++k) {
    const Branch& br = all[k];
    if (br.z->is_open()) continue;
    if (port == Port::PositiveWpp && br.z == &m.z_wp) continue;
    if (port == Port::NegativeWpp && br.z == &m.z_wn) continue;
    const Complex z = br.mult * br.z->eval(s);
    if (z == Complex{0.0, 0.0})
      throw std::runtime_error("zero-impedance branch '" + br.z->label() +
                               "' cannot be stamped");
    const Complex g = 1.0 / z;
    present[k] = true;
    admittance[k] = g;
    if (br.a > 0) y(br.a - 1, br.a - 1) += g;
    if (br.b > 0) y(br.b - 1, br.b - 1) += g;
    if (br.a > 0 && br.b > 0) {
      y(br.a - 1, br.b - 1) -= g;
      y(br.b - 1, br.a - 1) -= g;
    }
  }

  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(kNodes);
  int probe_hi = 0, probe_lo = 0;
  switch (port) {
    case Port::PositiveWpp:
      probe_hi = 1;
      break;
    case Port::NegativeWpp:
      probe_hi = 3;
      probe_lo = 4;
      break;
    case Port::FaultNode:
      probe_hi = 2;
      break;
  }
  rhs(probe_hi - 1) += injection;
  if (probe_lo > 0) rhs(probe_lo - 1) -= injection;

  if (y(probe_hi - 1, probe_hi - 1) == Complex{0.0, 0.0})
    throw std::runtime_error("injection into an open port");

  // Nodes with no attached branch float; pin them to zero volts.
  for (int i = 0; i < kNodes; ++i)
    if (y(i, i) == Complex{0.0, 0.0}) y(i, i) = 1.0;

  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(y);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15))
    throw std::runtime_error("nodal matrix is numerically singular");
  const Eigen::VectorXcd v = lu.solve(rhs);

  auto node = [&](int n) { return n == 0 ? Complex{0.0, 0.0} : v(n - 1); };

  SequenceSolution sol;
  sol.rcond = rcond;
  switch (port) {
    case Port::PositiveWpp:
      sol.driving_point_z = node(1) / injection;
      break;
    case Port::NegativeWpp:
      sol.driving_point_z = (node(3) - node(4)) / injection;
      break;
    case Port::FaultNode:
      sol.driving_point_z = node(2) / injection;
      break;
  }

  // Fault-port bookkeeping: each port current summed from its own network's
  // branches so the series-chain property is a real check, not an echo of
  // one branch equation.
  sol.chain_active = present[8];
  if (sol.chain_active) {
    sol.u_fp = node(2);
    sol.u_fn = Complex{0.0, 0.0} - node(4);
    sol.u_f0 = node(4) - node(5);
    sol.i_fp = (node(1) - node(2)) * admittance[1] +
               (Complex{0.0, 0.0} - node(2)) * admittance[2];
    if (port == Port::FaultNode) sol.i_fp += injection;
    sol.i_fn = (node(3) - Complex{0.0, 0.0}) * admittance[4] +
               (node(4) - Complex{0.0, 0.0}) * admittance[5];
    sol.i_f0 = (node(5) - node(4)) * (admittance[6] + admittance[7]);
    sol.i_fa = sol.i_fp + sol.i_fn + sol.i_f0;
  }
  return sol;
}

BoundaryResidual boundary_residual(const SequenceSolution& sol,
                                   Complex z_f_at_s, double normalization) {
  if (!sol.chain_active)
    throw std::invalid_argument("no fault chain in this solution");
  if (!(normalization > 0.0))
    throw std::invalid_argument("normalization must be positive");
  BoundaryResidual r;
  r.voltage_law =
      std::abs(sol.u_fp + sol.u_fn + sol.u_f0 - z_f_at_s * sol.i_fa) /
      normalization;
  const Complex third = sol.i_fa / 3.0;
  r.current_law = std::max({std::abs(sol.i_fp - third),
                            std::abs(sol.i_fn - third),
                            std::abs(sol.i_f0 - third)}) /
                  normalization;
  return r;
}

}  // namespace seqgrid::nodal
