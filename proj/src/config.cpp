#include "seqgrid/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace seqgrid::config {

namespace {

double canon(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct Handler {
  std::function<void(Config&, const std::string&)> set;
};

using Section = std::map<std::string, Handler>;

[[noreturn]] void bad_value(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty())
    bad_value(key, "not a number: '" + v + "'");
  if (!std::isfinite(x)) bad_value(key, "not finite");
  return canon(x);
}

int parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty())
    bad_value(key, "not an integer: '" + v + "'");
  return int(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, "expected true or false, got '" + v + "'");
}

// Handler table. Each entry validates its own range so the error names the
// violated invariant.
const std::map<std::string, Section>& handler_tree() {
  static const std::map<std::string, Section> tree = [] {
    std::map<std::string, Section> t;

    auto positive = [](double x) { return x > 0.0; };
    auto non_negative = [](double x) { return x >= 0.0; };

    auto dkey = [&](Section& s, const std::string& key,
                    std::function<double&(Config&)> ref,
                    std::string invariant, std::function<bool(double)> okp) {
      s[key] = Handler{[=](Config& c, const std::string& v) {
        const double x = parse_double(key, v);
        if (!okp(x)) bad_value(key, invariant);
        ref(c) = x;
      }};
    };
    auto ikey = [&](Section& s, const std::string& key,
                    std::function<int&(Config&)> ref, std::string invariant,
                    std::function<bool(int)> okp) {
      s[key] = Handler{[=](Config& c, const std::string& v) {
        const int x = parse_int(key, v);
        if (!okp(x)) bad_value(key, invariant);
        ref(c) = x;
      }};
    };
    auto bkey = [&](Section& s, const std::string& key,
                    std::function<bool&(Config&)> ref) {
      s[key] = Handler{[=](Config& c, const std::string& v) {
        ref(c) = parse_bool(key, v);
      }};
    };

    {
      Section& s = t["system"];
      s["f1_hz"] = Handler{[](Config& c, const std::string& v) {
        const double f = parse_double("f1_hz", v);
        if (!(f > 0.0)) bad_value("f1_hz", "fundamental must be positive");
        c.sys.omega1_rad_s = 2.0 * M_PI * f;
      }};
    }
    {
      Section& s = t["bases"];
      dkey(s, "s_base_va", [](Config& c) -> double& { return c.sys.bases.s_base_va; },
           "power base must be positive", positive);
      dkey(s, "v_hv_v", [](Config& c) -> double& { return c.sys.bases.v_hv_v; },
           "voltage base must be positive", positive);
      dkey(s, "v_mv_v", [](Config& c) -> double& { return c.sys.bases.v_mv_v; },
           "voltage base must be positive", positive);
      dkey(s, "v_lv_v", [](Config& c) -> double& { return c.sys.bases.v_lv_v; },
           "voltage base must be positive", positive);
    }
    {
      Section& s = t["lines"];
      dkey(s, "r_l1_pu", [](Config& c) -> double& { return c.sys.line1.r_pu; },
           "line resistance must be non-negative", non_negative);
      dkey(s, "x_l1_pu", [](Config& c) -> double& { return c.sys.line1.x_pu; },
           "line reactance must be non-negative", non_negative);
      dkey(s, "zero_mult_l1",
           [](Config& c) -> double& { return c.sys.line1.zero_seq_multiplier; },
           "zero-sequence multiplier must be non-negative", non_negative);
      dkey(s, "r_l2_pu", [](Config& c) -> double& { return c.sys.line2.r_pu; },
           "line resistance must be non-negative", non_negative);
      dkey(s, "x_l2_pu", [](Config& c) -> double& { return c.sys.line2.x_pu; },
           "line reactance must be non-negative", non_negative);
      dkey(s, "zero_mult_l2",
           [](Config& c) -> double& { return c.sys.line2.zero_seq_multiplier; },
           "zero-sequence multiplier must be non-negative", non_negative);
    }
    {
      Section& s = t["transformers"];
      dkey(s, "x_t1_pu", [](Config& c) -> double& { return c.sys.t1.x_pu; },
           "leakage reactance must be non-negative", non_negative);
      dkey(s, "x_t2_pu", [](Config& c) -> double& { return c.sys.t2.x_pu; },
           "leakage reactance must be non-negative", non_negative);
    }
    {
      Section& s = t["converter"];
      auto cv = [](Config& c) -> plant::ConverterParams& { return c.sys.conv; };
      dkey(s, "s_unit_va", [cv](Config& c) -> double& { return cv(c).s_unit_va; },
           "unit power must be positive", positive);
      dkey(s, "k_pc", [cv](Config& c) -> double& { return cv(c).k_pc; },
           "gain must be non-negative", non_negative);
      dkey(s, "k_ic", [cv](Config& c) -> double& { return cv(c).k_ic; },
           "gain must be non-negative", non_negative);
      dkey(s, "k_pp", [cv](Config& c) -> double& { return cv(c).k_pp; },
           "gain must be non-negative", non_negative);
      dkey(s, "k_ip", [cv](Config& c) -> double& { return cv(c).k_ip; },
           "gain must be non-negative", non_negative);
      s["f_notch_hz"] = Handler{[](Config& c, const std::string& v) {
        const double f = parse_double("f_notch_hz", v);
        if (!(f > 0.0)) bad_value("f_notch_hz", "notch frequency must be positive");
        c.sys.conv.omega_n_rad_s = 2.0 * M_PI * f;
      }};
      dkey(s, "zeta_n", [cv](Config& c) -> double& { return cv(c).zeta_n; },
           "notch damping must be positive", positive);
      dkey(s, "l_f_h", [cv](Config& c) -> double& { return cv(c).l_f_h; },
           "filter inductance must be positive", positive);
      dkey(s, "c_f_f", [cv](Config& c) -> double& { return cv(c).c_f_f; },
           "filter capacitance must be positive", positive);
      dkey(s, "r_cf_ohm", [cv](Config& c) -> double& { return cv(c).r_cf_ohm; },
           "filter resistance must be non-negative", non_negative);
      dkey(s, "i_ar_a", [cv](Config& c) -> double& { return cv(c).i_ar_a; },
           "current reference must be finite",
           [](double) { return true; });
      dkey(s, "i_qr_a", [cv](Config& c) -> double& { return cv(c).i_qr_a; },
           "current reference must be finite",
           [](double) { return true; });
      dkey(s, "k_f", [cv](Config& c) -> double& { return cv(c).k_f; },
           "coupling gain must be finite", [](double) { return true; });
      dkey(s, "k_d", [cv](Config& c) -> double& { return cv(c).k_d; },
           "feedforward gain must be finite", [](double) { return true; });
      dkey(s, "v_dc_v", [cv](Config& c) -> double& { return cv(c).v_dc_v; },
           "DC-link voltage must be positive", positive);
    }
    {
      Section& s = t["wpp"];
      ikey(s, "n_units", [](Config& c) -> int& { return c.sys.n_units; },
           "unit count must be at least 1", [](int n) { return n >= 1; });
    }
    {
      Section& s = t["fault"];
      dkey(s, "alpha", [](Config& c) -> double& { return c.fault.alpha; },
           "FaultSpec: alpha must lie in (0, 1)",
           [](double a) { return a > 0.0 && a < 1.0; });
      dkey(s, "r_f_pu", [](Config& c) -> double& { return c.fault.r_f_pu; },
           "FaultSpec: r_f_pu must be positive", positive);
    }
    {
      Section& s = t["grid"];
      dkey(s, "f_min_hz", [](Config& c) -> double& { return c.grid.f_min_hz; },
           "grid frequencies must be positive", positive);
      dkey(s, "f_max_hz", [](Config& c) -> double& { return c.grid.f_max_hz; },
           "grid frequencies must be positive", positive);
      ikey(s, "n_points", [](Config& c) -> int& { return c.grid.n_points; },
           "grid needs at least 2 points", [](int n) { return n >= 2; });
      s["spacing"] = Handler{[](Config& c, const std::string& v) {
        if (v == "log")
          c.grid.log_spacing = true;
        else if (v == "linear")
          c.grid.log_spacing = false;
        else
          bad_value("spacing", "expected log or linear, got '" + v + "'");
      }};
    }
    {
      Section& s = t["scanner"];
      auto sc = [](Config& c) -> scan::ScannerSettings& { return c.scanner; };
      dkey(s, "dt_s", [sc](Config& c) -> double& { return sc(c).dt_s; },
           "step size must be positive", positive);
      dkey(s, "amplitude_frac",
           [sc](Config& c) -> double& { return sc(c).amplitude_frac; },
           "amplitude must lie in [0.005, 0.05]",
           [](double a) { return a >= 0.005 && a <= 0.05; });
      dkey(s, "settle_tol", [sc](Config& c) -> double& { return sc(c).settle_tol; },
           "settle tolerance must be positive", positive);
      ikey(s, "settle_cycles",
           [sc](Config& c) -> int& { return sc(c).settle_cycles; },
           "settle window needs at least 2 cycles",
           [](int n) { return n >= 2; });
      dkey(s, "settle_max_s",
           [sc](Config& c) -> double& { return sc(c).settle_max_s; },
           "settle horizon must be positive", positive);
      dkey(s, "ramp_s", [sc](Config& c) -> double& { return sc(c).ramp_s; },
           "injection ramp must be non-negative", non_negative);
      dkey(s, "skip_s", [sc](Config& c) -> double& { return sc(c).skip_s; },
           "transient skip must be non-negative", non_negative);
      dkey(s, "window_s", [sc](Config& c) -> double& { return sc(c).window_s; },
           "window length must be positive", positive);
      dkey(s, "leakage_max",
           [sc](Config& c) -> double& { return sc(c).leakage_max; },
           "leakage bound must be positive", positive);
      bkey(s, "fault_closed",
           [](Config& c) -> bool& { return c.scanner.fault_closed; });
    }
    {
      Section& s = t["replication"];
      auto rp = [](Config& c) -> scan::SagFaultSettings& { return c.replication; };
      dkey(s, "dt_s", [rp](Config& c) -> double& { return rp(c).dt_s; },
           "step size must be positive", positive);
      dkey(s, "t_event_s", [rp](Config& c) -> double& { return rp(c).t_event_s; },
           "event time must be positive", positive);
      dkey(s, "t_hold_s", [rp](Config& c) -> double& { return rp(c).t_hold_s; },
           "hold time must be positive", positive);
      dkey(s, "vp_window_s",
           [rp](Config& c) -> double& { return rp(c).vp_window_s; },
           "window length must be positive", positive);
      dkey(s, "vp_delay_s", [rp](Config& c) -> double& { return rp(c).vp_delay_s; },
           "delay must be non-negative", non_negative);
      dkey(s, "match_tol", [rp](Config& c) -> double& { return rp(c).match_tol; },
           "match tolerance must be positive", positive);
      ikey(s, "max_bisection",
           [rp](Config& c) -> int& { return rp(c).max_bisection; },
           "needs at least one bisection step", [](int n) { return n >= 1; });
    }
    {
      Section& s = t["variants"];
      bkey(s, "include_t2_in_zero",
           [](Config& c) -> bool& { return c.sys.include_t2_in_zero; });
      bkey(s, "sssi", [](Config& c) -> bool& { return c.sssi_enabled; });
    }
    {
      Section& s = t["stability"];
      ikey(s, "declared_rhp_poles",
           [](Config& c) -> int& { return c.declared_rhp_poles; },
           "pole count must be non-negative", [](int n) { return n >= 0; });
    }
    return t;
  }();
  return tree;
}

// Unknown keys whose stem matches a known key hint at a unit mix-up.
std::string unknown_key_message(const Section& sec, const std::string& section,
                                const std::string& key) {
  const auto stem = [](const std::string& k) {
    const auto pos = k.rfind('_');
    return pos == std::string::npos ? k : k.substr(0, pos);
  };
  for (const auto& [known, h] : sec) {
    (void)h;
    if (known != key && stem(known) == stem(key))
      return "unit-suffix mismatch in [" + section + "]: got '" + key +
             "', expected '" + known + "'";
  }
  return "unknown key '" + key + "' in [" + section + "]";
}

}  // namespace

tfcore::FrequencyGrid GridRequest::build(bool symmetric) const {
  if (log_spacing)
    return tfcore::FrequencyGrid::log_spaced(f_min_hz, f_max_hz, n_points,
                                             symmetric);
  return tfcore::FrequencyGrid::linear(f_min_hz, f_max_hz, n_points, symmetric);
}

Config defaults() { return Config{}; }

Config parse_string(const std::string& text) {
  Config c = defaults();
  const auto& tree = handler_tree();
  const Section* current = nullptr;
  std::string current_name;
  std::set<std::string> seen;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    auto fail = [&](const std::string& msg) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + msg);
    };

    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header: " + raw);
      const std::string name = trim(line.substr(1, line.size() - 2));
      const auto it = tree.find(name);
      if (it == tree.end()) fail("unknown section [" + name + "]");
      current = &it->second;
      current_name = name;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value: " + raw);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (!current) fail("key '" + key + "' appears before any [section]");

    const auto it = current->find(key);
    if (it == current->end())
      fail(unknown_key_message(*current, current_name, key));
    const std::string qualified = current_name + "." + key;
    if (!seen.insert(qualified).second)
      fail("duplicate key '" + key + "' in [" + current_name + "]");
    try {
      it->second.set(c, value);
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }

  if (!(c.grid.f_min_hz < c.grid.f_max_hz))
    throw ConfigError("grid: f_min_hz must be below f_max_hz");
  return c;
}

Config parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

std::string echo(const Config& c) {
  std::ostringstream o;
  const auto b = [](bool v) { return v ? "true" : "false"; };
  o << "[system]\n";
  o << "f1_hz = " << fmt12(c.sys.omega1_rad_s / (2.0 * M_PI)) << "\n";
  o << "\n[bases]\n";
  o << "s_base_va = " << fmt12(c.sys.bases.s_base_va) << "\n";
  o << "v_hv_v = " << fmt12(c.sys.bases.v_hv_v) << "\n";
  o << "v_mv_v = " << fmt12(c.sys.bases.v_mv_v) << "\n";
  o << "v_lv_v = " << fmt12(c.sys.bases.v_lv_v) << "\n";
  o << "\n[lines]\n";
  o << "r_l1_pu = " << fmt12(c.sys.line1.r_pu) << "\n";
  o << "x_l1_pu = " << fmt12(c.sys.line1.x_pu) << "\n";
  o << "zero_mult_l1 = " << fmt12(c.sys.line1.zero_seq_multiplier) << "\n";
  o << "r_l2_pu = " << fmt12(c.sys.line2.r_pu) << "\n";
  o << "x_l2_pu = " << fmt12(c.sys.line2.x_pu) << "\n";
  o << "zero_mult_l2 = " << fmt12(c.sys.line2.zero_seq_multiplier) << "\n";
  o << "\n[transformers]\n";
  o << "x_t1_pu = " << fmt12(c.sys.t1.x_pu) << "\n";
  o << "x_t2_pu = " << fmt12(c.sys.t2.x_pu) << "\n";
  o << "\n[converter]\n";
  o << "s_unit_va = " << fmt12(c.sys.conv.s_unit_va) << "\n";
  o << "k_pc = " << fmt12(c.sys.conv.k_pc) << "\n";
  o << "k_ic = " << fmt12(c.sys.conv.k_ic) << "\n";
  o << "k_pp = " << fmt12(c.sys.conv.k_pp) << "\n";
  o << "k_ip = " << fmt12(c.sys.conv.k_ip) << "\n";
  o << "f_notch_hz = " << fmt12(c.sys.conv.omega_n_rad_s / (2.0 * M_PI))
    << "\n";
  o << "zeta_n = " << fmt12(c.sys.conv.zeta_n) << "\n";
  o << "l_f_h = " << fmt12(c.sys.conv.l_f_h) << "\n";
  o << "c_f_f = " << fmt12(c.sys.conv.c_f_f) << "\n";
  o << "r_cf_ohm = " << fmt12(c.sys.conv.r_cf_ohm) << "\n";
  o << "i_ar_a = " << fmt12(c.sys.conv.i_ar_a) << "\n";
  o << "i_qr_a = " << fmt12(c.sys.conv.i_qr_a) << "\n";
  o << "k_f = " << fmt12(c.sys.conv.k_f) << "\n";
  o << "k_d = " << fmt12(c.sys.conv.k_d) << "\n";
  o << "v_dc_v = " << fmt12(c.sys.conv.v_dc_v) << "\n";
  o << "\n[wpp]\n";
  o << "n_units = " << c.sys.n_units << "\n";
  o << "\n[fault]\n";
  o << "alpha = " << fmt12(c.fault.alpha) << "\n";
  o << "r_f_pu = " << fmt12(c.fault.r_f_pu) << "\n";
  o << "\n[grid]\n";
  o << "f_min_hz = " << fmt12(c.grid.f_min_hz) << "\n";
  o << "f_max_hz = " << fmt12(c.grid.f_max_hz) << "\n";
  o << "n_points = " << c.grid.n_points << "\n";
  o << "spacing = " << (c.grid.log_spacing ? "log" : "linear") << "\n";
  o << "\n[scanner]\n";
  o << "dt_s = " << fmt12(c.scanner.dt_s) << "\n";
  o << "amplitude_frac = " << fmt12(c.scanner.amplitude_frac) << "\n";
  o << "settle_tol = " << fmt12(c.scanner.settle_tol) << "\n";
  o << "settle_cycles = " << c.scanner.settle_cycles << "\n";
  o << "settle_max_s = " << fmt12(c.scanner.settle_max_s) << "\n";
  o << "ramp_s = " << fmt12(c.scanner.ramp_s) << "\n";
  o << "skip_s = " << fmt12(c.scanner.skip_s) << "\n";
  o << "window_s = " << fmt12(c.scanner.window_s) << "\n";
  o << "leakage_max = " << fmt12(c.scanner.leakage_max) << "\n";
  o << "fault_closed = " << b(c.scanner.fault_closed) << "\n";
  o << "\n[replication]\n";
  o << "dt_s = " << fmt12(c.replication.dt_s) << "\n";
  o << "t_event_s = " << fmt12(c.replication.t_event_s) << "\n";
  o << "t_hold_s = " << fmt12(c.replication.t_hold_s) << "\n";
  o << "vp_window_s = " << fmt12(c.replication.vp_window_s) << "\n";
  o << "vp_delay_s = " << fmt12(c.replication.vp_delay_s) << "\n";
  o << "match_tol = " << fmt12(c.replication.match_tol) << "\n";
  o << "max_bisection = " << c.replication.max_bisection << "\n";
  o << "\n[variants]\n";
  o << "include_t2_in_zero = " << b(c.sys.include_t2_in_zero) << "\n";
  o << "sssi = " << b(c.sssi_enabled) << "\n";
  o << "\n[stability]\n";
  o << "declared_rhp_poles = " << c.declared_rhp_poles << "\n";
  return o.str();
}

}  // namespace seqgrid::config
