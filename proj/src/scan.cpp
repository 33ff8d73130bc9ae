#include "seqgrid/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "seqgrid/control.hpp"

namespace seqgrid::scan {

namespace {

constexpr double kTau = 2.0 * M_PI;

double wrap_pi(double a) {
  a = std::fmod(a + M_PI, kTau);
  if (a < 0.0) a += kTau;
  return a - M_PI;
}

Complex pick_sequence(const SeqPhasors& s, Sequence seq) {
  switch (seq) {
    case Sequence::Positive: return s.pos;
    case Sequence::Negative: return s.neg;
    case Sequence::Zero: return s.zero;
  }
  return {};
}

// Injection phase offsets per phase for each sequence.
std::array<double, 3> sequence_phases(Sequence seq) {
  switch (seq) {
    case Sequence::Positive: return {0.0, -kTau / 3.0, kTau / 3.0};
    case Sequence::Negative: return {0.0, kTau / 3.0, -kTau / 3.0};
    case Sequence::Zero: return {0.0, 0.0, 0.0};
  }
  return {};
}

// SI element values for the scenario builders, all derived from the
// per-unit plant data. Lines become coupled three-phase branches whose
// zero-sequence impedance is z_self + 2 z_mutual; transformer leakage sits
// on the grounded-star side.
struct SiValues {
  double w1 = 0.0;
  double z_hv = 0.0, z_mv = 0.0, z_lv = 0.0;
  double v_hv_pk = 0.0, v_mv_pk = 0.0, v_lv_pk = 0.0;
  double n1 = 0.0, n2 = 0.0;  // star phase volts per delta winding volt
  double l_t1 = 0.0, l_t2 = 0.0;
  double r1_s = 0.0, l1_s = 0.0, r1_m = 0.0, l1_m = 0.0;
  double r2_s = 0.0, l2_s = 0.0, r2_m = 0.0, l2_m = 0.0;  // full line 2
  double r_fault = 0.0;
  double lf = 0.0, cf = 0.0, rcf = 0.0;  // converter branch at build scale
};

SiValues derive_si(const plant::SystemSpec& sys, const wcsim::FaultSpec& fault,
                   bool aggregated) {
  SiValues v;
  const auto& b = sys.bases;
  v.w1 = sys.omega1_rad_s;
  v.z_hv = b.z_base_hv();
  v.z_mv = b.z_base_mv();
  v.z_lv = b.z_base_lv();
  v.v_hv_pk = plant::phase_peak_voltage(b.v_hv_v);
  v.v_mv_pk = plant::phase_peak_voltage(b.v_mv_v);
  v.v_lv_pk = plant::phase_peak_voltage(b.v_lv_v);
  v.n1 = (b.v_mv_v / std::sqrt(3.0)) / b.v_lv_v;
  v.n2 = (b.v_hv_v / std::sqrt(3.0)) / b.v_mv_v;

  const double n = double(sys.n_units);
  const double x_t1_sys =
      sys.t1.x_pu * b.s_base_va / (n * sys.conv.s_unit_va);
  v.l_t1 = x_t1_sys * v.z_mv / v.w1;
  v.l_t2 = sys.t2.x_pu * v.z_hv / v.w1;

  auto coupled = [&](const plant::LineParams& p, double z_base, double& r_s,
                     double& l_s, double& r_m, double& l_m) {
    const double m = p.zero_seq_multiplier;
    const double r1 = p.r_pu * z_base;
    const double l1 = p.x_pu * z_base / v.w1;
    r_s = r1 * (m + 2.0) / 3.0;
    l_s = l1 * (m + 2.0) / 3.0;
    r_m = r1 * (m - 1.0) / 3.0;
    l_m = l1 * (m - 1.0) / 3.0;
  };
  coupled(sys.line1, v.z_mv, v.r1_s, v.l1_s, v.r1_m, v.l1_m);
  coupled(sys.line2, v.z_hv, v.r2_s, v.l2_s, v.r2_m, v.l2_m);

  v.r_fault = fault.r_f_pu * v.z_hv;

  const double scale = aggregated ? n : 1.0;
  v.lf = sys.conv.l_f_h / scale;
  v.cf = sys.conv.c_f_f * scale;
  v.rcf = sys.conv.r_cf_ohm / scale;
  return v;
}

// One scenario instance: circuit, optional controller, source and injection
// schedules and a recorder. Each instance is deterministic; two instances
// built the same way follow identical trajectories.
class Session {
 public:
  Session(const plant::SystemSpec& sys, const wcsim::FaultSpec& fault,
          Variant variant, double dt)
      : sys_(&sys), variant_(variant), dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
    si_ = derive_si(sys, fault, variant != Variant::ConverterRig);
    alpha_ = fault.alpha;
    if (!(alpha_ > 0.0 && alpha_ < 1.0))
      throw std::invalid_argument("fault position must lie inside line 2");
    if (variant == Variant::ConverterRig)
      build_rig();
    else
      build_network(variant == Variant::Full);
    sim_->tolerate_divergence(true);
  }

  // Recording is off until asked for. Moving the start resets the buffer:
  // the waveform must stay contiguous, and a later start would otherwise
  // leave a hole between the old samples and the new ones.
  void set_record_from(double t) {
    record_from_ = t;
    rec_.t0 = 0.0;
    for (auto& ch : rec_.data) ch.clear();
  }

  void set_sag(double depth, double t_from) {
    if (variant_ == Variant::ConverterRig)
      throw std::logic_error("no sag schedule on the rig");
    sag_depth_ = depth;
    sag_from_ = t_from;
  }

  void request_fault(double t_from) {
    if (sw_fault_ < 0) throw std::logic_error("no fault switch in this variant");
    fault_request_ = t_from;
  }

  void close_fault_now() {
    if (sw_fault_ < 0) throw std::logic_error("no fault switch in this variant");
    sim_->close_switch(sw_fault_);
  }

  void set_injection(Port port, Sequence seq, double f_hz, double amp_si,
                     double t_from, double ramp_s = 0.0) {
    if (port == Port::GridFaultNode && variant_ == Variant::ConverterRig)
      throw std::logic_error("the rig has no fault node");
    if (port == Port::WppTerminal && variant_ != Variant::ConverterRig)
      throw std::logic_error("series injection exists only on the rig");
    inj_port_ = port;
    inj_phase_ = sequence_phases(seq);
    inj_f_ = f_hz;
    inj_amp_ = amp_si;
    inj_from_ = t_from;
    inj_ramp_ = ramp_s;
    inj_on_ = true;
  }

  void bypass_notch(bool on) {
    if (ctrl_) ctrl_->bypass_notch(on);
  }

  const control::ConverterControl* controller() const {
    return ctrl_ ? &*ctrl_ : nullptr;
  }

  double time() const { return sim_->time(); }
  bool diverged() const { return sim_->diverged(); }
  const sim::Waveform& record() const { return rec_; }
  double theta_ref(double t) const { return si_.w1 * t + theta_warm_; }

  void run_to(double t_stop) {
    while (sim_->time() < t_stop - 0.5 * dt_) {
      if (sim_->diverged()) return;
      step_once();
    }
  }

  // Advances whole fundamental cycles until the cycle RMS of the probe
  // signal stays within tol (relative spread) across `cycles` consecutive
  // cycles. Returns the settle time, or -1 when t_max ran out first.
  double run_until_settled(double tol, int cycles, double t_max) {
    const double f1 = si_.w1 / kTau;
    const long per_cycle = std::lround(1.0 / (f1 * dt_));
    if (per_cycle < 8) throw std::invalid_argument("step size too coarse");
    std::vector<double> hist;
    while (sim_->time() < t_max) {
      double acc = 0.0;
      for (long i = 0; i < per_cycle; ++i) {
        if (sim_->diverged()) return -1.0;
        step_once();
        const double x = settle_probe();
        acc += x * x;
      }
      hist.push_back(std::sqrt(acc / double(per_cycle)));
      if (int(hist.size()) >= cycles) {
        const auto tail = hist.end() - cycles;
        const double mx = *std::max_element(tail, hist.end());
        const double mn = *std::min_element(tail, hist.end());
        double mean = 0.0;
        for (auto it = tail; it != hist.end(); ++it) mean += *it;
        mean /= double(cycles);
        if (mean > 0.0 && (mx - mn) / mean < tol) return sim_->time();
      }
    }
    return -1.0;
  }

 private:
  std::array<int, 3> tri(sim::Circuit& c, const std::string& base) {
    static const char* suf[3] = {"_a", "_b", "_c"};
    std::array<int, 3> n{};
    for (int k = 0; k < 3; ++k) n[k] = c.add_node(base + suf[k]);
    return n;
  }

  // Delta winding of phase k spans lv[k] to lv[k+1]; its grounded-star
  // partner is the phase-k winding on the other side. With this pattern the
  // low side lags the high side by 30 degrees in positive sequence.
  void add_dy_transformer(sim::Circuit& c, const std::array<int, 3>& star_top,
                          const std::array<int, 3>& lv, double ratio,
                          double l_leak, const std::array<int, 3>& bus) {
    for (int k = 0; k < 3; ++k)
      c.add_ideal_transformer(star_top[k], 0, lv[k], lv[(k + 1) % 3], ratio);
    for (int k = 0; k < 3; ++k)
      c.add_series(bus[k], star_top[k], 0.0, l_leak, 0.0);
  }

  void build_network(bool with_converter) {
    sim::Circuit c;
    n_ct_ = tri(c, "ct");
    n_pcc_ = tri(c, "w35");
    auto n_w35i = tri(c, "w35i");
    auto n_m = tri(c, "m");
    auto n_ghi = tri(c, "ghi");
    auto n_gh = tri(c, "gh220");
    n_f_ = tri(c, "f");
    auto n_gs = tri(c, "gs");

    if (with_converter) {
      auto n_ec = tri(c, "ec");
      for (int k = 0; k < 3; ++k) {
        v_emf_[k] = c.add_voltage_source(n_ec[k], 0);
        b_lf_[k] = c.add_series(n_ec[k], n_ct_[k], 0.0, si_.lf, 0.0);
      }
    }
    for (int k = 0; k < 3; ++k)
      c.add_series(n_ct_[k], 0, si_.rcf, 0.0, si_.cf);

    add_dy_transformer(c, n_w35i, n_ct_, si_.n1, si_.l_t1, n_pcc_);
    c.add_coupled3(n_pcc_, n_m, si_.r1_s, si_.l1_s, si_.r1_m, si_.l1_m);
    add_dy_transformer(c, n_ghi, n_m, si_.n2, si_.l_t2, n_gh);
    c.add_coupled3(n_gh, n_f_, alpha_ * si_.r2_s, alpha_ * si_.l2_s,
                   alpha_ * si_.r2_m, alpha_ * si_.l2_m);
    c.add_coupled3(n_f_, n_gs, (1.0 - alpha_) * si_.r2_s,
                   (1.0 - alpha_) * si_.l2_s, (1.0 - alpha_) * si_.r2_m,
                   (1.0 - alpha_) * si_.l2_m);
    for (int k = 0; k < 3; ++k) v_src_[k] = c.add_voltage_source(n_gs[k], 0);
    sw_fault_ = c.add_switch(n_f_[0], 0, si_.r_fault);
    for (int k = 0; k < 3; ++k) i_inj_[k] = c.add_current_source(n_f_[k], 0);

    v_src_pk_ = si_.v_hv_pk;
    sim_.emplace(std::move(c), dt_);

    if (with_converter) {
      // Start the controller at the solved fundamental so the run begins
      // near equilibrium. Each grounded-star/delta stage shifts the
      // converter side back 30 degrees relative to the source.
      auto solve = wcsim::sag_operating_point(*sys_, 0.0);
      v1_warm_ = solve.v1_pu * si_.v_lv_pk;
      theta_warm_ = std::arg(solve.v_c_pu) - M_PI / 3.0;
      ctrl_.emplace(sys_->conv, si_.w1, dt_, double(sys_->n_units));
      ctrl_->warm_start(v1_warm_, theta_warm_);
    }

    rec_.channels = {"v_pcc_a", "v_pcc_b", "v_pcc_c", "v_ct_a", "v_ct_b",
                     "v_ct_c",  "v_f_a",   "v_f_b",   "v_f_c"};
    if (with_converter) {
      rec_.channels.insert(rec_.channels.end(),
                           {"i_lf_a", "i_lf_b", "i_lf_c"});
    }
    rec_.channels.insert(rec_.channels.end(),
                         {"i_inj_a", "i_inj_b", "i_inj_c"});
    if (with_converter) rec_.channels.push_back("pll_dev");
    rec_.data.assign(rec_.channels.size(), {});
    rec_.dt = dt_;
  }

  void build_rig() {
    sim::Circuit c;
    auto n_s = tri(c, "s");
    n_ct_ = tri(c, "ct");
    auto n_ec = tri(c, "ec");
    for (int k = 0; k < 3; ++k) {
      v_src_[k] = c.add_voltage_source(n_s[k], 0);
      v_inj_[k] = c.add_voltage_source(n_s[k], n_ct_[k]);
      v_emf_[k] = c.add_voltage_source(n_ec[k], 0);
      b_lf_[k] = c.add_series(n_ec[k], n_ct_[k], 0.0, si_.lf, 0.0);
    }
    for (int k = 0; k < 3; ++k)
      c.add_series(n_ct_[k], 0, si_.rcf, 0.0, si_.cf);

    v_src_pk_ = si_.v_lv_pk;
    sim_.emplace(std::move(c), dt_);

    v1_warm_ = si_.v_lv_pk;
    theta_warm_ = 0.0;
    ctrl_.emplace(sys_->conv, si_.w1, dt_, 1.0);
    ctrl_->warm_start(v1_warm_, theta_warm_);

    rec_.channels = {"v_ct_a",  "v_ct_b",  "v_ct_c",  "i_lf_a", "i_lf_b",
                     "i_lf_c",  "v_inj_a", "v_inj_b", "v_inj_c", "pll_dev"};
    rec_.data.assign(rec_.channels.size(), {});
    rec_.dt = dt_;
  }

  double settle_probe() const {
    if (variant_ == Variant::PassiveWpp)
      return sim_->node_voltage(n_ct_[0]);
    return sim_->branch_current(b_lf_[0]);
  }

  double source_value(int k, double t) const {
    double amp = v_src_pk_;
    if (k == 0 && sag_depth_ > 0.0 && t >= sag_from_)
      amp *= 1.0 - sag_depth_;
    return amp * std::cos(si_.w1 * t - double(k) * kTau / 3.0);
  }

  double injection_value(int k, double t) const {
    if (!inj_on_ || t < inj_from_) return 0.0;
    double amp = inj_amp_;
    if (inj_ramp_ > 0.0 && t < inj_from_ + inj_ramp_)
      amp *= 0.5 * (1.0 - std::cos(M_PI * (t - inj_from_) / inj_ramp_));
    return amp * std::cos(kTau * inj_f_ * (t - inj_from_) + inj_phase_[k]);
  }

  void step_once() {
    const double t_next = sim_->time() + dt_;

    if (sw_fault_ >= 0 && fault_request_ >= 0.0 &&
        !sim_->switch_closed(sw_fault_) && sim_->time() >= fault_request_) {
      const double v = sim_->node_voltage(n_f_[0]);
      if (fault_armed_ && ((v >= 0.0) != (prev_vf_ >= 0.0)))
        sim_->close_switch(sw_fault_);
      prev_vf_ = v;
      fault_armed_ = true;
    }

    if (ctrl_) {
      const std::array<double, 3> v{sim_->node_voltage(n_ct_[0]),
                                    sim_->node_voltage(n_ct_[1]),
                                    sim_->node_voltage(n_ct_[2])};
      const std::array<double, 3> i{sim_->branch_current(b_lf_[0]),
                                    sim_->branch_current(b_lf_[1]),
                                    sim_->branch_current(b_lf_[2])};
      const auto e = ctrl_->step(v, i);
      for (int k = 0; k < 3; ++k) sim_->set_voltage(v_emf_[k], e[k]);
    }
    for (int k = 0; k < 3; ++k)
      sim_->set_voltage(v_src_[k], source_value(k, t_next));
    if (inj_on_) {
      for (int k = 0; k < 3; ++k) {
        const double u = injection_value(k, t_next);
        if (inj_port_ == Port::GridFaultNode)
          sim_->set_current(i_inj_[k], u);
        else
          sim_->set_voltage(v_inj_[k], u);
      }
    }

    sim_->step();

    if (t_next >= record_from_ - 0.5 * dt_) append_record(t_next);
  }

  void append_record(double t) {
    if (rec_.samples() == 0) rec_.t0 = t;
    std::size_t ch = 0;
    auto push = [&](double x) { rec_.data[ch++].push_back(x); };
    if (variant_ != Variant::ConverterRig) {
      for (int k = 0; k < 3; ++k) push(sim_->node_voltage(n_pcc_[k]));
      for (int k = 0; k < 3; ++k) push(sim_->node_voltage(n_ct_[k]));
      for (int k = 0; k < 3; ++k) push(sim_->node_voltage(n_f_[k]));
      if (ctrl_)
        for (int k = 0; k < 3; ++k) push(sim_->branch_current(b_lf_[k]));
      for (int k = 0; k < 3; ++k) push(injection_value(k, t));
      if (ctrl_) push(wrap_pi(ctrl_->theta() - theta_ref(t)));
    } else {
      for (int k = 0; k < 3; ++k) push(sim_->node_voltage(n_ct_[k]));
      for (int k = 0; k < 3; ++k) push(sim_->branch_current(b_lf_[k]));
      for (int k = 0; k < 3; ++k) push(injection_value(k, t));
      push(wrap_pi(ctrl_->theta() - theta_ref(t)));
    }
  }

  const plant::SystemSpec* sys_;
  Variant variant_;
  double dt_;
  SiValues si_;
  double alpha_ = 0.0;

  std::optional<sim::Simulator> sim_;
  std::optional<control::ConverterControl> ctrl_;

  std::array<int, 3> n_ct_{}, n_pcc_{}, n_f_{};
  std::array<int, 3> v_emf_{-1, -1, -1}, v_src_{-1, -1, -1};
  std::array<int, 3> v_inj_{-1, -1, -1}, i_inj_{-1, -1, -1};
  std::array<int, 3> b_lf_{-1, -1, -1};
  int sw_fault_ = -1;

  double v_src_pk_ = 0.0;
  double v1_warm_ = 0.0, theta_warm_ = 0.0;

  double sag_depth_ = 0.0, sag_from_ = 0.0;
  double fault_request_ = -1.0;
  bool fault_armed_ = false;
  double prev_vf_ = 0.0;

  bool inj_on_ = false;
  Port inj_port_ = Port::GridFaultNode;
  std::array<double, 3> inj_phase_{};
  double inj_f_ = 0.0, inj_amp_ = 0.0, inj_from_ = 0.0, inj_ramp_ = 0.0;

  double record_from_ = std::numeric_limits<double>::infinity();
  sim::Waveform rec_;
};

// Mean per-cycle residual RMS over [t0, t1]: each full fundamental cycle is
// stripped of its DC and first three harmonics (single-cycle DFT, exact
// bins) and the leftover RMS is averaged over cycles and phases.
double residual_envelope(const sim::Waveform& w, double f1, double t0,
                         double t1) {
  static const char* kPhases[3] = {"v_pcc_a", "v_pcc_b", "v_pcc_c"};
  const double dt = w.dt;
  const long per_cycle = std::lround(1.0 / (f1 * dt));
  const long total = long(w.samples());
  long k0 = std::lround((t0 - w.t0) / dt);
  long k1 = std::lround((t1 - w.t0) / dt);
  k0 = std::max(k0, 0L);
  k1 = std::min(k1, total);
  const long n_cyc = (k1 - k0) / per_cycle;
  if (n_cyc < 1) return 0.0;

  double acc = 0.0;
  long terms = 0;
  for (int p = 0; p < 3; ++p) {
    const int ch = w.channel(kPhases[p]);
    if (ch < 0) continue;
    const auto& x = w.data[ch];
    for (long c = 0; c < n_cyc; ++c) {
      const long base = k0 + c * per_cycle;
      double dc = 0.0;
      Complex h[3] = {};
      for (long m = 0; m < per_cycle; ++m) {
        const double v = x[base + m];
        dc += v;
        const double ang = kTau * double(m) / double(per_cycle);
        for (int q = 0; q < 3; ++q)
          h[q] += v * std::polar(1.0, -ang * double(q + 1));
      }
      dc /= double(per_cycle);
      for (auto& hq : h) hq *= 2.0 / double(per_cycle);
      double ss = 0.0;
      for (long m = 0; m < per_cycle; ++m) {
        double recon = dc;
        const double ang = kTau * double(m) / double(per_cycle);
        for (int q = 0; q < 3; ++q)
          recon += (h[q] * std::polar(1.0, ang * double(q + 1))).real();
        const double r = x[base + m] - recon;
        ss += r * r;
      }
      acc += std::sqrt(ss / double(per_cycle));
      ++terms;
    }
  }
  return terms > 0 ? acc / double(terms) : 0.0;
}

OscillationVerdict judge_oscillation(const sim::Waveform& w, double f1,
                                     double e0, double e1, double l0,
                                     double l1, double nominal,
                                     bool diverged) {
  OscillationVerdict v;
  v.early_env = residual_envelope(w, f1, e0, e1);
  v.late_env = residual_envelope(w, f1, l0, l1);
  const double floor = 1e-12 * nominal;
  v.growth_ratio = v.late_env / std::max(v.early_env, floor);
  if (diverged) {
    v.kind = Oscillation::Diverged;
  } else if (v.late_env < 1e-4 * nominal) {
    v.kind = Oscillation::Damped;
  } else if (v.growth_ratio > 1.05) {
    v.kind = Oscillation::Oscillating;
  } else if (v.growth_ratio < 0.95) {
    v.kind = Oscillation::Damped;
  } else {
    v.kind = Oscillation::Marginal;
  }
  return v;
}

sim::Waveform decimate_pcc_ct(const sim::Waveform& w, long stride) {
  sim::Waveform out;
  out.t0 = w.t0;
  out.dt = w.dt * double(stride);
  static const char* kKeep[6] = {"v_pcc_a", "v_pcc_b", "v_pcc_c",
                                 "v_ct_a",  "v_ct_b",  "v_ct_c"};
  for (const char* name : kKeep) {
    const int ch = w.channel(name);
    if (ch < 0) continue;
    out.channels.push_back(name);
    std::vector<double> col;
    col.reserve(w.samples() / std::size_t(stride) + 1);
    for (std::size_t m = 0; m < w.samples(); m += std::size_t(stride))
      col.push_back(w.data[ch][m]);
    out.data.push_back(std::move(col));
  }
  return out;
}

}  // namespace

double snap_to_bin(double f_hz, double window_s) {
  if (!(window_s > 0.0))
    throw std::invalid_argument("window length must be positive");
  return std::round(f_hz * window_s) / window_s;
}

bool excluded_frequency(double f_hz, double f1_hz) {
  const double tol = 1e-6 * std::max(1.0, f1_hz);
  for (int k = 1; k <= 3; ++k)
    if (std::abs(f_hz - double(k) * f1_hz) < tol) return true;
  return false;
}

PhasorTriple extract_phasor(const sim::Waveform& w, const std::string& base,
                            double f_hz, double t0, double t1,
                            const std::vector<double>& skip_sideband_hz) {
  if (!(f_hz > 0.0)) throw std::invalid_argument("frequency must be positive");
  if (!(w.dt > 0.0) || w.samples() == 0)
    throw std::invalid_argument("empty waveform");
  const double dt = w.dt;
  const long k0 = std::lround((t0 - w.t0) / dt);
  const long n = std::lround((t1 - t0) / dt);
  if (n < 2) throw std::invalid_argument("window too short");
  if (k0 < 0 || k0 + n > long(w.samples()))
    throw std::out_of_range("window outside the recording");
  const double cycles = f_hz * double(n) * dt;
  if (std::abs(cycles - std::round(cycles)) > f_hz * dt + 1e-9)
    throw std::invalid_argument(
        "window does not span an integer number of periods");

  int ch[3];
  static const char* suf[3] = {"_a", "_b", "_c"};
  for (int p = 0; p < 3; ++p) {
    ch[p] = w.channel(base + suf[p]);
    if (ch[p] < 0) throw std::invalid_argument("unknown channel " + base + suf[p]);
  }

  const double df = 1.0 / (double(n) * dt);
  auto skipped = [&](double f) {
    if (f <= 0.0) return true;
    for (double s : skip_sideband_hz)
      if (std::abs(f - s) < 0.5 * df) return true;
    return false;
  };
  const bool use_lo = !skipped(f_hz - df);
  const bool use_hi = !skipped(f_hz + df);

  auto bin = [&](const std::vector<double>& x, double f) {
    Complex acc = 0.0;
    const Complex rot = std::polar(1.0, -kTau * f * dt);
    Complex r = 1.0;
    for (long m = 0; m < n; ++m) {
      acc += x[k0 + m] * r;
      r *= rot;
      if ((m & 0xfff) == 0xfff) r /= std::abs(r);
    }
    return acc * (2.0 / double(n));
  };

  PhasorTriple out;
  out.f_hz = f_hz;
  Complex main[3];
  double worst = 0.0;
  for (int p = 0; p < 3; ++p) {
    const auto& x = w.data[ch[p]];
    main[p] = bin(x, f_hz);
  }
  const double ref =
      std::max({std::abs(main[0]), std::abs(main[1]), std::abs(main[2])});
  for (int p = 0; p < 3; ++p) {
    if (std::abs(main[p]) < 1e-9 * ref) continue;
    double side = 0.0;
    const auto& x = w.data[ch[p]];
    if (use_lo) side += std::norm(bin(x, f_hz - df));
    if (use_hi) side += std::norm(bin(x, f_hz + df));
    worst = std::max(worst, side / std::norm(main[p]));
  }
  out.a = main[0];
  out.b = main[1];
  out.c = main[2];
  out.leakage = std::sqrt(worst);
  return out;
}

SeqPhasors fortescue(const PhasorTriple& p) {
  const Complex a = std::polar(1.0, kTau / 3.0);
  const Complex a2 = std::polar(1.0, -kTau / 3.0);
  SeqPhasors s;
  s.pos = (p.a + a * p.b + a2 * p.c) / 3.0;
  s.neg = (p.a + a2 * p.b + a * p.c) / 3.0;
  s.zero = (p.a + p.b + p.c) / 3.0;
  return s;
}

PhasorTriple fortescue_inverse(const SeqPhasors& s, double f_hz) {
  const Complex a = std::polar(1.0, kTau / 3.0);
  const Complex a2 = std::polar(1.0, -kTau / 3.0);
  PhasorTriple p;
  p.f_hz = f_hz;
  p.a = s.pos + s.neg + s.zero;
  p.b = a2 * s.pos + a * s.neg + s.zero;
  p.c = a * s.pos + a2 * s.neg + s.zero;
  return p;
}

const char* to_string(Oscillation o) {
  switch (o) {
    case Oscillation::Damped: return "damped";
    case Oscillation::Marginal: return "marginal";
    case Oscillation::Oscillating: return "oscillating";
    case Oscillation::Diverged: return "oscillating (diverged)";
  }
  return "?";
}

ScanRow inject_and_measure(const plant::SystemSpec& sys,
                           const wcsim::FaultSpec& fault, Variant variant,
                           Port port, Sequence seq, double f_hz,
                           const ScannerSettings& st) {
  ScanRow row;
  row.seq = seq;
  row.amplitude_frac = st.amplitude_frac;
  auto fail = [&](const std::string& msg) {
    row.ok = false;
    row.error = msg;
    return row;
  };

  try {
    if (!(st.window_s > 0.0) || !(st.dt_s > 0.0) || st.skip_s < 0.0 ||
        st.ramp_s < 0.0 || st.skip_s < st.ramp_s)
      return fail("invalid scanner settings");
    row.f_hz = snap_to_bin(f_hz, st.window_s);
    const double f = row.f_hz;
    const double f1 = sys.omega1_rad_s / kTau;
    if (f <= 0.0) return fail("frequency snaps to zero");
    if (excluded_frequency(f, f1))
      return fail("reserved for the fundamental background");
    if (st.amplitude_frac < 0.005 || st.amplitude_frac > 0.05)
      return fail("amplitude outside the small-signal window");
    if (f * st.dt_s > 0.1)
      return fail("step size too coarse for this frequency");
    if (port == Port::GridFaultNode && variant == Variant::ConverterRig)
      return fail("the rig has no fault node");
    if (port == Port::WppTerminal && variant != Variant::ConverterRig)
      return fail("series injection exists only on the rig");
    if (port == Port::WppTerminal && seq == Sequence::Zero)
      return fail("zero sequence is open at the converter");
    if (st.fault_closed && variant == Variant::ConverterRig)
      return fail("the rig has no fault switch");

    Session ses(sys, fault, variant, st.dt_s);
    if (st.fault_closed) ses.close_fault_now();

    const double ts =
        ses.run_until_settled(st.settle_tol, st.settle_cycles, st.settle_max_s);
    if (ses.diverged()) return fail("diverged while settling");
    if (ts < 0.0) return fail("did not settle");
    row.settle_s = ts;

    const auto& b = sys.bases;
    double amp = 0.0;
    if (port == Port::GridFaultNode) {
      amp = st.amplitude_frac * plant::peak_current_base(b.s_base_va, b.v_hv_v);
      row.z_base_ohm = b.z_base_hv();
    } else {
      amp = st.amplitude_frac * plant::phase_peak_voltage(b.v_lv_v);
      row.z_base_ohm = b.v_lv_v * b.v_lv_v / sys.conv.s_unit_va;
    }

    const double t_on = ses.time();
    const double t0w = t_on + st.skip_s;
    const double t1w = t0w + st.window_s;
    ses.set_injection(port, seq, f, amp, t_on, st.ramp_s);
    ses.set_record_from(t0w - 2.0 * st.dt_s);
    ses.run_to(t1w + 2.0 * st.dt_s);
    if (ses.diverged()) return fail("diverged under injection");

    const std::vector<double> skip{0.0, f1, 2.0 * f1, 3.0 * f1};
    const sim::Waveform& w = ses.record();
    PhasorTriple vt, it;
    if (port == Port::GridFaultNode) {
      vt = extract_phasor(w, "v_f", f, t0w, t1w, skip);
      it = extract_phasor(w, "i_inj", f, t0w, t1w, skip);
    } else {
      vt = extract_phasor(w, "v_ct", f, t0w, t1w, skip);
      it = extract_phasor(w, "i_lf", f, t0w, t1w, skip);
    }
    Complex vs = pick_sequence(fortescue(vt), seq);
    Complex is = pick_sequence(fortescue(it), seq);
    if (port == Port::WppTerminal) is = -is;  // current into the converter
    row.leakage = std::max(vt.leakage, it.leakage);
    if (std::abs(is) < 1e-9 * amp) return fail("no measurable current response");
    row.z_pu = vs / is / row.z_base_ohm;
    if (row.leakage > st.leakage_max) {
      std::ostringstream os;
      os << "leakage " << row.leakage << " above " << st.leakage_max;
      return fail(os.str());
    }
    row.ok = true;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return row;
}

ScanResult run_scan(const plant::SystemSpec& sys, const wcsim::FaultSpec& fault,
                    Variant variant, Port port, Sequence seq,
                    const tfcore::FrequencyGrid& grid,
                    const ScannerSettings& st, bool parallel) {
  ScanResult out;
  out.variant = variant;
  out.port = port;
  const std::vector<double>& fs = grid.f_hz;
  out.rows.resize(fs.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < long(fs.size()); ++i)
      out.rows[i] =
          inject_and_measure(sys, fault, variant, port, seq, fs[i], st);
  } else {
    for (std::size_t i = 0; i < fs.size(); ++i)
      out.rows[i] =
          inject_and_measure(sys, fault, variant, port, seq, fs[i], st);
  }
  return out;
}

SagFaultOutcome replicate_sag_vs_fault(const plant::SystemSpec& sys,
                                       const wcsim::FaultSpec& fault,
                                       const SagFaultSettings& st) {
  if (!(st.dt_s > 0.0) || !(st.t_hold_s > 0.0))
    throw std::invalid_argument("invalid replication settings");
  SagFaultOutcome out;
  const double f1 = sys.omega1_rad_s / kTau;
  const double v_nom = plant::phase_peak_voltage(sys.bases.v_mv_v);

  // Integer fundamental cycles keep the phasor window exact.
  const double vp_window =
      std::max(1.0, std::round(st.vp_window_s * f1)) / f1;

  // One probe run fixes the event time; every run repeats the same
  // pre-event trajectory, so the settle time found here holds for all.
  double t_ev = st.t_event_s;
  {
    Session probe(sys, fault, Variant::Full, st.dt_s);
    probe.set_record_from(std::numeric_limits<double>::infinity());
    const double horizon = std::max(st.t_event_s, 4.0);
    const double ts = probe.run_until_settled(1e-3, 5, horizon);
    t_ev = std::max(st.t_event_s, (ts >= 0.0 ? ts : horizon) + 0.1);
  }

  const double meas0 = t_ev + st.vp_delay_s;
  const double meas1 = meas0 + vp_window;

  // Positive-sequence PCC voltage in the early window, from a run with the
  // given disturbance. Shrinks to the cycles actually recorded if the run
  // collapses early.
  auto measure_vp = [&](const sim::Waveform& w) {
    const double t_end = w.t0 + double(w.samples() ? w.samples() - 1 : 0) * w.dt;
    double t1 = std::min(meas1, t_end);
    const long cyc = long(std::floor((t1 - meas0) * f1 + 1e-9));
    if (cyc < 1) return 0.0;
    t1 = meas0 + double(cyc) / f1;
    auto ph = extract_phasor(w, "v_pcc", f1, meas0, t1);
    return std::abs(fortescue(ph).pos) / v_nom;
  };

  auto short_run = [&](double depth, bool do_fault) {
    Session s(sys, fault, Variant::Full, st.dt_s);
    s.set_record_from(meas0 - 2.0 * st.dt_s);
    if (do_fault)
      s.request_fault(t_ev);
    else if (depth > 0.0)
      s.set_sag(depth, t_ev);
    s.run_to(meas1 + 2.0 * st.dt_s);
    return measure_vp(s.record());
  };

  struct FullRun {
    sim::Waveform wave;
    OscillationVerdict verdict;
    double vp = 0.0;
  };
  const double t_end = t_ev + st.t_hold_s;
  const double span = std::min(0.5, st.t_hold_s / 4.0);
  const double e0 = t_ev + std::min(0.3, st.t_hold_s / 4.0);
  auto full_run = [&](double depth, bool do_fault) {
    Session s(sys, fault, Variant::Full, st.dt_s);
    s.set_record_from(std::max(0.0, t_ev - 0.2));
    if (do_fault)
      s.request_fault(t_ev);
    else if (depth > 0.0)
      s.set_sag(depth, t_ev);
    s.run_to(t_end + 2.0 * st.dt_s);
    FullRun r;
    r.vp = measure_vp(s.record());
    r.verdict = judge_oscillation(s.record(), f1, e0, e0 + span,
                                  t_end - span, t_end, v_nom, s.diverged());
    r.wave = decimate_pcc_ct(s.record(), 16);
    return r;
  };

  FullRun fr = full_run(0.0, true);
  out.case_fault = fr.verdict;
  out.vp_fault_pu = fr.vp;
  out.wave_fault = std::move(fr.wave);

  // The sag depth is bisected on the early-window positive-sequence PCC
  // voltage, which falls monotonically with depth.
  double lo = 0.0, hi = 1.0;
  double vp_lo = short_run(lo, false);
  ++out.bisection_runs;
  double vp_hi = short_run(hi, false);
  ++out.bisection_runs;
  double depth;
  const double target = out.vp_fault_pu;
  if (target >= vp_lo) {
    depth = lo;
  } else if (target <= vp_hi) {
    depth = hi;
  } else {
    depth = 0.5;
    for (int it = 0; it < st.max_bisection; ++it) {
      depth = 0.5 * (lo + hi);
      const double vm = short_run(depth, false);
      ++out.bisection_runs;
      if (std::abs(vm - target) <= st.match_tol * std::max(target, 1e-9))
        break;
      if (vm > target)
        lo = depth;
      else
        hi = depth;
    }
  }
  out.sag_depth = depth;

  FullRun sr = full_run(depth, false);
  out.case_sag = sr.verdict;
  out.vp_sag_pu = sr.vp;
  out.wave_sag = std::move(sr.wave);
  return out;
}

RigSteadyProbe rig_steady_probe(const plant::SystemSpec& sys, double dt_s) {
  RigSteadyProbe out;
  wcsim::FaultSpec fault;
  Session ses(sys, fault, Variant::ConverterRig, dt_s);
  ses.set_record_from(std::numeric_limits<double>::infinity());
  const double ts = ses.run_until_settled(1e-3, 5, 6.0);
  out.settle_s = ts >= 0.0 ? ts : 6.0;

  // One more fundamental cycle with recording on for the phasor checks.
  const double f1 = sys.omega1_rad_s / kTau;
  const double t0 = ses.time();
  const double t1 = t0 + 5.0 / f1;
  ses.set_record_from(t0 + 0.5 * dt_s);
  ses.run_to(t1 + 2.0 * dt_s);

  const auto* ctrl = ses.controller();
  out.v_q_filtered_v = ctrl->v_q_filtered();
  out.theta_dev_rad = wrap_pi(ctrl->theta() - ses.theta_ref(ses.time()));

  auto ph = extract_phasor(ses.record(), "i_lf", f1, t0 + 1.0 / f1,
                           t0 + 4.0 / f1);
  const double i_meas = std::abs(fortescue(ph).pos);
  const double i_ref =
      std::hypot(sys.conv.i_ar_a, sys.conv.i_qr_a);
  out.current_err = std::abs(i_meas - i_ref) / i_ref;
  return out;
}

NotchRipple pll_notch_ripple(const plant::SystemSpec& sys, double f_hz,
                             double amp_frac, double dt_s) {
  NotchRipple out;
  wcsim::FaultSpec fault;
  auto ripple = [&](bool bypass) {
    Session ses(sys, fault, Variant::ConverterRig, dt_s);
    ses.bypass_notch(bypass);
    ses.set_record_from(std::numeric_limits<double>::infinity());
    ses.run_until_settled(1e-4, 5, 6.0);
    const double t_on = ses.time();
    const double amp = amp_frac * plant::phase_peak_voltage(sys.bases.v_lv_v);
    ses.set_injection(Port::WppTerminal, Sequence::Negative, f_hz, amp, t_on,
                      0.1);
    const double t0 = t_on + 0.5;
    const double t1 = t0 + 0.5;
    ses.set_record_from(t0 - 2.0 * dt_s);
    ses.run_to(t1 + 2.0 * dt_s);

    const sim::Waveform& w = ses.record();
    const int ch = w.channel("pll_dev");
    const long k0 = std::lround((t0 - w.t0) / w.dt);
    const long k1 = std::lround((t1 - w.t0) / w.dt);
    double mean = 0.0;
    for (long m = k0; m < k1; ++m) mean += w.data[ch][m];
    mean /= double(k1 - k0);
    double ss = 0.0;
    for (long m = k0; m < k1; ++m) {
      const double d = w.data[ch][m] - mean;
      ss += d * d;
    }
    return std::sqrt(ss / double(k1 - k0));
  };
  out.with_notch_rad = ripple(false);
  out.bypassed_rad = ripple(true);
  return out;
}

}  // namespace seqgrid::scan
