#include "seqgrid/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace seqgrid::sim {

int Waveform::channel(const std::string& name) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i] == name) return int(i);
  return -1;
}

namespace {

void require_node(int n, int count) {
  if (n < 0 || n >= count) throw std::invalid_argument("unknown node id");
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be positive");
}

}  // namespace

int Circuit::add_node(const std::string& name) {
  for (const std::string& n : names_)
    if (n == name) throw std::invalid_argument("duplicate node name " + name);
  names_.push_back(name);
  return int(names_.size()) - 1;
}

int Circuit::node(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return int(i);
  throw std::invalid_argument("unknown node " + name);
}

int Circuit::add_series(int a, int b, double r, double l, double c) {
  require_node(a, node_count());
  require_node(b, node_count());
  if (a == b) throw std::invalid_argument("branch endpoints coincide");
  if (r < 0.0 || l < 0.0 || c < 0.0)
    throw std::invalid_argument("negative element value");
  if (r == 0.0 && l == 0.0 && c == 0.0)
    throw std::invalid_argument("empty branch");
  series_.push_back(Series{a, b, r, l, c, 0, 0, 0, 0});
  return int(series_.size()) - 1;
}

int Circuit::add_coupled3(const std::array<int, 3>& a,
                          const std::array<int, 3>& b, double r_s, double l_s,
                          double r_m, double l_m) {
  for (int k = 0; k < 3; ++k) {
    require_node(a[k], node_count());
    require_node(b[k], node_count());
  }
  require_positive(l_s, "self inductance");
  Coupled cp;
  cp.a = a;
  cp.b = b;
  cp.r = Eigen::Matrix3d::Constant(r_m);
  cp.l = Eigen::Matrix3d::Constant(l_m);
  for (int k = 0; k < 3; ++k) {
    cp.r(k, k) = r_s;
    cp.l(k, k) = l_s;
  }
  coupled_.push_back(cp);
  return int(coupled_.size()) - 1;
}

int Circuit::add_voltage_source(int a, int b) {
  require_node(a, node_count());
  require_node(b, node_count());
  vsrc_.push_back(VSource{a, b, -1, 0.0});
  return int(vsrc_.size()) - 1;
}

int Circuit::add_current_source(int a, int b) {
  require_node(a, node_count());
  require_node(b, node_count());
  csrc_.push_back(CSource{a, b, 0.0});
  return int(csrc_.size()) - 1;
}

int Circuit::add_ideal_transformer(int p_pos, int p_neg, int s_pos, int s_neg,
                                   double ratio) {
  require_node(p_pos, node_count());
  require_node(p_neg, node_count());
  require_node(s_pos, node_count());
  require_node(s_neg, node_count());
  require_positive(std::abs(ratio), "transformer ratio");
  xfmr_.push_back(Xfmr{p_pos, p_neg, s_pos, s_neg, ratio, -1});
  return int(xfmr_.size()) - 1;
}

int Circuit::add_switch(int a, int b, double r_closed) {
  require_node(a, node_count());
  require_node(b, node_count());
  require_positive(r_closed, "switch resistance");
  switch_.push_back(Switch{a, b, r_closed, false, 0.0});
  return int(switch_.size()) - 1;
}

Simulator::Simulator(Circuit circuit, double dt) : c_(std::move(circuit)), dt_(dt) {
  require_positive(dt, "time step");
  // Companion conductances are topology-independent; compute once.
  for (Circuit::Series& s : c_.series_) {
    double r_eff = s.r + 2.0 * s.l / dt_;
    if (s.c > 0.0) r_eff += dt_ / (2.0 * s.c);
    s.g = 1.0 / r_eff;
  }
  for (Circuit::Coupled& cp : c_.coupled_) {
    const Eigen::Matrix3d a = cp.r + (2.0 / dt_) * cp.l;
    cp.g = a.inverse();
  }
  assemble();
}

void Simulator::assemble() {
  const int nv = c_.node_count() - 1;
  int extra = int(c_.vsrc_.size()) + int(c_.xfmr_.size());
  n_ = nv + extra;
  if (n_ == 0) throw std::invalid_argument("empty circuit");

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  auto row = [](int node) { return node - 1; };  // ground dropped

  auto stamp_g = [&](int p, int q, double g) {
    if (p > 0) a(row(p), row(p)) += g;
    if (q > 0) a(row(q), row(q)) += g;
    if (p > 0 && q > 0) {
      a(row(p), row(q)) -= g;
      a(row(q), row(p)) -= g;
    }
  };

  for (const Circuit::Series& s : c_.series_) stamp_g(s.a, s.b, s.g);
  for (const Circuit::Switch& sw : c_.switch_)
    if (sw.closed) stamp_g(sw.a, sw.b, 1.0 / sw.r);
  for (const Circuit::Coupled& cp : c_.coupled_) {
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) {
        const double g = cp.g(p, q);
        if (cp.a[p] > 0 && cp.a[q] > 0) a(row(cp.a[p]), row(cp.a[q])) += g;
        if (cp.a[p] > 0 && cp.b[q] > 0) a(row(cp.a[p]), row(cp.b[q])) -= g;
        if (cp.b[p] > 0 && cp.a[q] > 0) a(row(cp.b[p]), row(cp.a[q])) -= g;
        if (cp.b[p] > 0 && cp.b[q] > 0) a(row(cp.b[p]), row(cp.b[q])) += g;
      }
    }
  }

  int var = nv;
  for (Circuit::VSource& v : c_.vsrc_) {
    v.var = var++;
    // Current flows a -> b through the source; constraint v_a - v_b = value.
    if (v.a > 0) {
      a(row(v.a), v.var) += 1.0;
      a(v.var, row(v.a)) += 1.0;
    }
    if (v.b > 0) {
      a(row(v.b), v.var) -= 1.0;
      a(v.var, row(v.b)) -= 1.0;
    }
  }
  for (Circuit::Xfmr& x : c_.xfmr_) {
    x.var = var++;
    // Secondary winding pushes its current out of s_pos; the
    // primary draws it scaled by 1/ratio. Constraint: v_p = ratio * v_s.
    if (x.sp > 0) a(row(x.sp), x.var) -= 1.0;
    if (x.sn > 0) a(row(x.sn), x.var) += 1.0;
    if (x.pp > 0) a(row(x.pp), x.var) += 1.0 / x.ratio;
    if (x.pn > 0) a(row(x.pn), x.var) -= 1.0 / x.ratio;
    if (x.pp > 0) a(x.var, row(x.pp)) += 1.0;
    if (x.pn > 0) a(x.var, row(x.pn)) -= 1.0;
    if (x.sp > 0) a(x.var, row(x.sp)) -= x.ratio;
    if (x.sn > 0) a(x.var, row(x.sn)) += x.ratio;
  }

  lu_.compute(a);
  if (!(lu_.rcond() > 1e-14))
    throw std::runtime_error("circuit matrix is numerically singular");
  x_ = Eigen::VectorXd::Zero(n_);
}

void Simulator::set_voltage(int id, double volts) {
  c_.vsrc_.at(id).value = volts;
}

void Simulator::set_current(int id, double amps) {
  c_.csrc_.at(id).value = amps;
}

void Simulator::close_switch(int id) {
  Circuit::Switch& sw = c_.switch_.at(id);
  if (sw.closed) return;
  sw.closed = true;
  assemble();
}

bool Simulator::switch_closed(int id) const {
  return c_.switch_.at(id).closed;
}

void Simulator::check_finite(const Eigen::VectorXd& x) {
  bool bad = !x.allFinite() || x.cwiseAbs().maxCoeff() > 1e12;
  if (!bad) return;
  diverged_ = true;
  if (!tolerate_divergence_)
    throw std::runtime_error("simulation diverged at t = " +
                             std::to_string(t_) + " s");
}

void Simulator::step() {
  if (diverged_) {
    t_ += dt_;
    return;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_);
  auto row = [](int node) { return node - 1; };

  for (const Circuit::Series& s : c_.series_) {
    double e_hist = -(2.0 * s.l / dt_) * s.i - s.v_l + s.v_c;
    if (s.c > 0.0) e_hist += (dt_ / (2.0 * s.c)) * s.i;
    const double j = s.g * e_hist;
    if (s.a > 0) rhs(row(s.a)) += j;
    if (s.b > 0) rhs(row(s.b)) -= j;
  }
  for (const Circuit::Coupled& cp : c_.coupled_) {
    const Eigen::Vector3d e_hist = -(2.0 / dt_) * (cp.l * cp.i) - cp.v_l;
    const Eigen::Vector3d j = cp.g * e_hist;
    for (int p = 0; p < 3; ++p) {
      if (cp.a[p] > 0) rhs(row(cp.a[p])) += j(p);
      if (cp.b[p] > 0) rhs(row(cp.b[p])) -= j(p);
    }
  }
  for (const Circuit::CSource& cs : c_.csrc_) {
    if (cs.a > 0) rhs(row(cs.a)) += cs.value;
    if (cs.b > 0) rhs(row(cs.b)) -= cs.value;
  }
  for (const Circuit::VSource& vs : c_.vsrc_) rhs(vs.var) = vs.value;

  const Eigen::VectorXd x = lu_.solve(rhs);
  check_finite(x);
  if (diverged_) {
    t_ += dt_;
    return;
  }
  x_ = x;

  auto volt = [&](int node) { return node == 0 ? 0.0 : x_(node - 1); };

  for (Circuit::Series& s : c_.series_) {
    double e_hist = -(2.0 * s.l / dt_) * s.i - s.v_l + s.v_c;
    if (s.c > 0.0) e_hist += (dt_ / (2.0 * s.c)) * s.i;
    const double vb = volt(s.a) - volt(s.b);
    const double i_new = s.g * (vb - e_hist);
    if (s.c > 0.0) s.v_c += (dt_ / (2.0 * s.c)) * (i_new + s.i);
    s.i = i_new;
    s.v_l = vb - s.r * i_new - s.v_c;
  }
  for (Circuit::Coupled& cp : c_.coupled_) {
    const Eigen::Vector3d e_hist = -(2.0 / dt_) * (cp.l * cp.i) - cp.v_l;
    Eigen::Vector3d vb;
    for (int p = 0; p < 3; ++p) vb(p) = volt(cp.a[p]) - volt(cp.b[p]);
    cp.i = cp.g * (vb - e_hist);
    cp.v_l = vb - cp.r * cp.i;
  }
  for (Circuit::Switch& sw : c_.switch_) {
    sw.i = sw.closed ? (volt(sw.a) - volt(sw.b)) / sw.r : 0.0;
  }

  t_ += dt_;
}

double Simulator::node_voltage(int node) const {
  if (node == 0) return 0.0;
  require_node(node, c_.node_count());
  return x_(node - 1);
}

double Simulator::branch_current(int id) const { return c_.series_.at(id).i; }

double Simulator::coupled_current(int id, int phase) const {
  return c_.coupled_.at(id).i(phase);
}

double Simulator::switch_current(int id) const { return c_.switch_.at(id).i; }

double Simulator::stored_energy() const {
  double e = 0.0;
  for (const Circuit::Series& s : c_.series_) {
    e += 0.5 * s.l * s.i * s.i;
    if (s.c > 0.0) e += 0.5 * s.c * s.v_c * s.v_c;
  }
  for (const Circuit::Coupled& cp : c_.coupled_)
    e += 0.5 * cp.i.dot(cp.l * cp.i);
  return e;
}

}  // namespace seqgrid::sim
