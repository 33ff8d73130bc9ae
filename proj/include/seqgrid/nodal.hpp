#pragma once

#include "seqgrid/wcsim.hpp"

namespace seqgrid::nodal {

/// Where the probing current is injected.
enum class Port {
  PositiveWpp,  // positive-sequence WPP bus, z_wp removed
  NegativeWpp,  // negative-sequence WPP bus, z_wn removed
  FaultNode,    // positive-sequence fault node, everything in place
};

/// One frequency point of the interconnected sequence networks, solved by
/// nodal analysis on the explicit branch graph. This deliberately shares no
/// code with the closed-form compositions in wcsim: it exists to check them.
struct SequenceSolution {
  Complex driving_point_z;

  // Fault-port quantities, valid when the chain carries current.
  bool chain_active = false;
  Complex u_fp, u_fn, u_f0;  // sequence voltages across the three ports
  Complex i_fp, i_fn, i_f0;  // port currents, each i_fa / 3 in theory
  Complex i_fa;              // phase-A fault current, i_fp + i_fn + i_f0

  double rcond = 0.0;  // reciprocal condition estimate of the nodal matrix
};

/// Solve at complex frequency s with a unit (or given) current injected at
/// the chosen port. Throws tfcore::PoleError if a branch is singular at s,
/// std::runtime_error on an ill-conditioned or open-port solve.
SequenceSolution solve(const wcsim::CompositeModel& m, Complex s, Port port,
                       Complex injection = Complex{1.0, 0.0});

/// How well a solution satisfies the single-line-to-ground boundary
/// conditions, normalized by the injection amplitude:
///   voltage_law: |u_fp + u_fn + u_f0 - z_f i_fa|
///   current_law: max_k |i_fk - i_fa / 3|
struct BoundaryResidual {
  double voltage_law = 0.0;
  double current_law = 0.0;
};

BoundaryResidual boundary_residual(const SequenceSolution& sol,
                                   Complex z_f_at_s, double normalization);

}  // namespace seqgrid::nodal
