#pragma once

#include <vector>

#include "seqgrid/nodal.hpp"
#include "seqgrid/tfcore.hpp"
#include "seqgrid/wcsim.hpp"

namespace seqgrid::sweep {

/// Batch evaluation over many frequency points. The parallel kernels fan
/// the points out across threads; the serial ones are the reference the
/// tests hold them against. Both produce identical tables: every point is
/// independent and writes only its own slot.
struct GridEval {
  std::vector<Complex> value;  // failed points hold NaN
  std::vector<char> ok;

  std::size_t size() const { return value.size(); }
};

std::vector<Complex> jomega(const std::vector<double>& omega_rad_s);

/// Expression evaluation; a pole or non-finite result marks the point
/// instead of aborting the sweep.
GridEval eval_serial(const tfcore::FreqExpr& e, const std::vector<Complex>& s);
GridEval eval_parallel(const tfcore::FreqExpr& e,
                       const std::vector<Complex>& s);

/// Driving-point impedance of the composite sequence network, one nodal
/// solve per frequency.
GridEval nodal_serial(const wcsim::CompositeModel& m, nodal::Port port,
                      const std::vector<double>& omega_rad_s);
GridEval nodal_parallel(const wcsim::CompositeModel& m, nodal::Port port,
                        const std::vector<double>& omega_rad_s);

}  // namespace seqgrid::sweep
