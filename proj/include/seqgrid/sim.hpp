#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace seqgrid::sim {

/// Uniform-dt multichannel recording.
struct Waveform {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<std::string> channels;
  std::vector<std::vector<double>> data;  // data[channel][sample]

  int channel(const std::string& name) const;
  std::size_t samples() const { return data.empty() ? 0 : data[0].size(); }
};

/// Static circuit description. Nodes are created by name (ground is node 0
/// and always exists); elements reference node ids. Each add_* returns an
/// id scoped to that element kind, used for probing and source updates on
/// the running simulator.
class Circuit {
 public:
  int add_node(const std::string& name);
  int node(const std::string& name) const;  // throws if unknown

  /// Series R, R-L, R-C or R-L-C branch (l or c may be zero to drop them).
  int add_series(int a, int b, double r, double l, double c);
  /// Three-phase series branch with symmetric coupling: diagonal r_s/l_s,
  /// off-diagonal r_m/l_m. Realizes z_zero = z_self + 2 z_mutual.
  int add_coupled3(const std::array<int, 3>& a, const std::array<int, 3>& b,
                   double r_s, double l_s, double r_m, double l_m);
  /// Ideal voltage source from a to b (v_a - v_b = value), value set per step.
  int add_voltage_source(int a, int b);
  /// Ideal current source pushing its value into node a (out of b).
  int add_current_source(int a, int b);
  /// Ideal transformer, ratio = v_primary / v_secondary.
  int add_ideal_transformer(int p_pos, int p_neg, int s_pos, int s_neg,
                            double ratio);
  /// Resistive switch, initially open.
  int add_switch(int a, int b, double r_closed);

  int node_count() const { return int(names_.size()); }

 private:
  friend class Simulator;

  struct Series {
    int a, b;
    double r, l, c;
    double g = 0.0;       // companion conductance
    double i = 0.0;       // branch current, a -> b
    double v_l = 0.0;     // inductor voltage
    double v_c = 0.0;     // capacitor voltage
  };
  struct Coupled {
    std::array<int, 3> a, b;
    Eigen::Matrix3d r, l;
    Eigen::Matrix3d g;    // (r + 2l/dt)^-1
    Eigen::Vector3d i{0, 0, 0};
    Eigen::Vector3d v_l{0, 0, 0};
  };
  struct VSource {
    int a, b;
    int var = -1;
    double value = 0.0;
  };
  struct CSource {
    int a, b;
    double value = 0.0;
  };
  struct Xfmr {
    int pp, pn, sp, sn;
    double ratio;
    int var = -1;
  };
  struct Switch {
    int a, b;
    double r;
    bool closed = false;
    double i = 0.0;
  };

  std::vector<std::string> names_{"gnd"};
  std::vector<Series> series_;
  std::vector<Coupled> coupled_;
  std::vector<VSource> vsrc_;
  std::vector<CSource> csrc_;
  std::vector<Xfmr> xfmr_;
  std::vector<Switch> switch_;
};

/// Fixed-step trapezoidal (companion-model) time-domain solver. The nodal
/// matrix is factorized once per topology; closing a switch refactorizes.
/// The state update is a pure recurrence: identical inputs give identical
/// trajectories bit for bit.
class Simulator {
 public:
  Simulator(Circuit circuit, double dt);

  double dt() const { return dt_; }
  double time() const { return t_; }

  void set_voltage(int vsource_id, double volts);
  void set_current(int csource_id, double amps);
  void close_switch(int switch_id);
  bool switch_closed(int switch_id) const;

  /// Advance one step. Throws std::runtime_error if the solution stops
  /// being finite unless divergence tolerance was requested, in which case
  /// diverged() latches instead and further steps are no-ops.
  void step();
  void tolerate_divergence(bool on) { tolerate_divergence_ = on; }
  bool diverged() const { return diverged_; }

  double node_voltage(int node) const;
  double branch_current(int series_id) const;
  double coupled_current(int coupled_id, int phase) const;
  double switch_current(int switch_id) const;
  /// Sum of 1/2 L i^2 + 1/2 C v^2 over all storage elements.
  double stored_energy() const;

 private:
  void assemble();
  void check_finite(const Eigen::VectorXd& x);

  Circuit c_;
  double dt_;
  double t_ = 0.0;
  int n_ = 0;  // unknowns: node voltages (minus ground) + source/xfmr currents
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::VectorXd x_;
  bool tolerate_divergence_ = false;
  bool diverged_ = false;
};

}  // namespace seqgrid::sim
