#pragma once

#include "seqgrid/plant.hpp"
#include "seqgrid/tfcore.hpp"

namespace seqgrid::wcsim {

using plant::OperatingPoint;
using plant::SystemSpec;
using tfcore::FreqExpr;

/// Single-line-to-ground fault on phase A, partway along line 2.
struct FaultSpec {
  double alpha = 0.1;    // fault position as a fraction of line 2, in (0,1)
  double r_f_pu = 0.02;  // fault resistance
};

/// The three sequence networks reduced to the branches that matter at the
/// fault node. All per unit on the system base.
///
///   z_wp, z_wn  aggregated WPP branch (converter + filter + T1), per
///               sequence; open when the WPP side is absent
///   z_g1        WPP bus to fault: line 1 + T2 + alpha * line 2
///   z_g2        fault to grid source: (1 - alpha) * line 2
///   z_01, z_02  zero-sequence branches either side of the fault
///   z_f         fault resistance
///
/// The fault ties the networks in series through 3 z_f: positive and
/// negative via their fault nodes, zero via its own, matching the
/// single-line-to-ground boundary conditions
///   u_fp + u_fn + u_f0 = z_f * i_fa,  i_fp = i_fn = i_f0 = i_fa / 3.
struct CompositeModel {
  FreqExpr z_wp, z_wn;
  FreqExpr z_g1, z_g2;
  FreqExpr z_01, z_02;
  FreqExpr z_f;
};

CompositeModel build_composite(const SystemSpec& sys, const OperatingPoint& op,
                               const FaultSpec& fault);

/// Zero-sequence impedance at the fault node: z_01 in parallel with z_02.
/// Throws when both branches are open (no zero path exists).
FreqExpr z0e(const CompositeModel& m);

/// Negative-sequence impedance at the fault node:
/// (z_wn + z_g1) in parallel with z_g2. An open WPP branch leaves z_g2.
FreqExpr zne(const CompositeModel& m);

/// Positive-sequence grid impedance seen from the WPP bus with the fault
/// chain attached:
///   z_g1 + z_g2 || (zne + 3 z_f + z0e).
/// Open chain elements degrade gracefully: an open chain leaves the
/// balanced z_g1 + z_g2.
FreqExpr zgpe(const CompositeModel& m);

/// Negative-sequence mirror of zgpe: the chain closes through the positive
/// network loaded by z_wp instead.
FreqExpr zgne(const CompositeModel& m);

/// Fundamental-frequency operating point solved on the positive-sequence
/// phasor network. The converter acts as a current source of the reference
/// magnitude aligned to its local terminal voltage; the solve iterates that
/// alignment together with the weak dependence of the fault chain on the
/// resulting voltage.
struct OperatingSolve {
  OperatingPoint op;    // SI, unit scale, for the small-signal builders
  Complex v_c_pu;       // converter terminal voltage
  Complex v_w_pu;       // WPP HV bus voltage
  Complex v_f_pu;       // fault node voltage
  double v1_pu = 0.0;   // |v_c_pu|
  int iterations = 0;
};

/// Operating point during the bolted-through-r_f single-line-to-ground
/// fault at full source voltage.
OperatingSolve fault_operating_point(const SystemSpec& sys,
                                     const FaultSpec& fault);

/// Operating point during a single-phase voltage sag of the given depth at
/// the source (phase A scaled by 1 - depth, no fault branch). Only the
/// positive-sequence source component 1 - depth/3 matters for the solve.
OperatingSolve sag_operating_point(const SystemSpec& sys, double depth);

}  // namespace seqgrid::wcsim
