#include "seqgrid/sweep.hpp"

#include <cmath>
#include <limits>

namespace seqgrid::sweep {

namespace {

const Complex kNan{std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN()};

template <typename F>
void fill_point(GridEval& out, std::size_t i, F&& f) {
  try {
    out.value[i] = f();
    out.ok[i] = 1;
  } catch (const std::exception&) {
    out.value[i] = kNan;
    out.ok[i] = 0;
  }
}

}  // namespace

std::vector<Complex> jomega(const std::vector<double>& omega_rad_s) {
  std::vector<Complex> s;
  s.reserve(omega_rad_s.size());
  for (double w : omega_rad_s) s.emplace_back(0.0, w);
  return s;
}

GridEval eval_serial(const tfcore::FreqExpr& e, const std::vector<Complex>& s) {
  GridEval out;
  out.value.assign(s.size(), kNan);
  out.ok.assign(s.size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i)
    fill_point(out, i, [&] { return e.eval(s[i]); });
  return out;
}

GridEval eval_parallel(const tfcore::FreqExpr& e,
                       const std::vector<Complex>& s) {
  GridEval out;
  out.value.assign(s.size(), kNan);
  out.ok.assign(s.size(), 0);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < long(s.size()); ++i)
    fill_point(out, std::size_t(i), [&] { return e.eval(s[std::size_t(i)]); });
  return out;
}

GridEval nodal_serial(const wcsim::CompositeModel& m, nodal::Port port,
                      const std::vector<double>& omega_rad_s) {
  GridEval out;
  out.value.assign(omega_rad_s.size(), kNan);
  out.ok.assign(omega_rad_s.size(), 0);
  for (std::size_t i = 0; i < omega_rad_s.size(); ++i)
    fill_point(out, i, [&] {
      return nodal::solve(m, Complex{0.0, omega_rad_s[i]}, port)
          .driving_point_z;
    });
  return out;
}

GridEval nodal_parallel(const wcsim::CompositeModel& m, nodal::Port port,
                        const std::vector<double>& omega_rad_s) {
  GridEval out;
  out.value.assign(omega_rad_s.size(), kNan);
  out.ok.assign(omega_rad_s.size(), 0);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < long(omega_rad_s.size()); ++i)
    fill_point(out, std::size_t(i), [&] {
      return nodal::solve(m, Complex{0.0, omega_rad_s[std::size_t(i)]}, port)
          .driving_point_z;
    });
  return out;
}

}  // namespace seqgrid::sweep
