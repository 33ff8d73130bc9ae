// Batch front end: reads one config, runs one command, writes CSV/JSON/SVG
// artifacts into an output directory. Exit codes: 0 ok, 1 config error,
// 2 numerical failure, 3 unstable verdict under --fail-on-unstable.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "seqgrid/config.hpp"
#include "seqgrid/io.hpp"
#include "seqgrid/plant.hpp"
#include "seqgrid/scan.hpp"
#include "seqgrid/stability.hpp"
#include "seqgrid/wcsim.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace seqgrid {
namespace {

constexpr const char* kVersion = "1.0.0";

// Every number that lands in a data file is rounded to the same 12
// significant digits the CSV writers use, so reruns are byte-identical.
double q12(double x) {
  return std::strtod(io::fmt(x).c_str(), nullptr);
}

ordered_json cx_json(Complex z) {
  return ordered_json{{"re", q12(z.real())}, {"im", q12(z.imag())}};
}

struct Opts {
  std::string config_path;
  std::string out_dir;
  std::string grid_spec;
  std::optional<double> alpha;
  bool no_sssi = false;
  bool fail_on_unstable = false;
  bool fault_closed = false;
  std::string variant = "full";
  std::string port;  // inferred from the variant when empty
  std::string seq = "pos";
};

config::GridRequest parse_grid_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : spec) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  if (parts.size() != 3 && parts.size() != 4)
    throw config::ConfigError("--grid expects MIN_HZ:MAX_HZ:N[:log|lin]");
  config::GridRequest g;
  try {
    g.f_min_hz = std::stod(parts[0]);
    g.f_max_hz = std::stod(parts[1]);
    g.n_points = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw config::ConfigError("--grid: could not parse '" + spec + "'");
  }
  if (parts.size() == 4) {
    if (parts[3] == "log")
      g.log_spacing = true;
    else if (parts[3] == "lin")
      g.log_spacing = false;
    else
      throw config::ConfigError("--grid spacing must be 'log' or 'lin'");
  }
  if (!(g.f_min_hz > 0.0) || !(g.f_max_hz > g.f_min_hz) || g.n_points < 2)
    throw config::ConfigError("--grid: need 0 < MIN < MAX and N >= 2");
  return g;
}

config::Config load_config(const Opts& o) {
  config::Config cfg = o.config_path.empty() ? config::defaults()
                                             : config::parse_file(o.config_path);
  if (o.alpha) {
    if (!(*o.alpha > 0.0 && *o.alpha < 1.0))
      throw config::ConfigError("--alpha: FaultSpec: alpha must lie in (0, 1)");
    cfg.fault.alpha = *o.alpha;
  }
  if (!o.grid_spec.empty()) cfg.grid = parse_grid_spec(o.grid_spec);
  if (o.no_sssi) cfg.sssi_enabled = false;
  if (o.fault_closed) cfg.scanner.fault_closed = true;
  return cfg;
}

fs::path resolve_out_dir(const Opts& o) {
  std::string dir = o.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("SEQGRID_OUT");
    dir = env && *env ? env : ".";
  }
  fs::path p{dir};
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec && !fs::is_directory(p))
    throw config::ConfigError("cannot create output directory " + p.string());
  return p;
}

struct Emitter {
  explicit Emitter(fs::path d) : dir(std::move(d)) {}

  fs::path dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& content) {
    io::write_file((dir / name).string(), content);
    files.push_back(name);
  }
};

ordered_json base_summary(const char* command) {
  ordered_json s;
  s["schema"] = "seqgrid/summary/1";
  s["tool"] = "seqgrid";
  s["version"] = kVersion;
  s["command"] = command;
  return s;
}

ordered_json grid_json(const tfcore::FrequencyGrid& g) {
  ordered_json j;
  j["f_min_hz"] = q12(g.f_hz.front());
  j["f_max_hz"] = q12(g.f_hz.back());
  j["n_points"] = g.f_hz.size();
  return j;
}

ordered_json verdict_json(const stability::StabilityVerdict& v) {
  ordered_json j;
  j["winding"] = v.winding;
  j["declared_rhp_poles"] = v.declared_rhp_poles;
  j["closed_loop_rhp"] = v.closed_loop_rhp;
  j["stable"] = v.stable;
  j["winding_residual"] = q12(v.detail.residual);
  j["refined_points"] = v.detail.refined;
  ordered_json cr = ordered_json::array();
  for (const auto& c : v.crossings) {
    ordered_json e;
    e["omega_rad_s"] = q12(c.omega);
    e["f_hz"] = q12(c.omega / (2.0 * M_PI));
    e["phase_margin_deg"] = q12(c.phase_margin_deg);
    cr.push_back(e);
  }
  j["gain_crossings"] = cr;
  return j;
}

ordered_json intersections_json(const std::vector<stability::Intersection>& xs) {
  ordered_json a = ordered_json::array();
  for (const auto& x : xs) {
    ordered_json e;
    e["f_hz"] = q12(x.f_hz);
    e["mag_pu"] = q12(x.mag);
    e["delta_phase_deg"] = q12(x.delta_phase_deg);
    e["margin_deg"] = q12(x.margin_deg);
    a.push_back(e);
  }
  return a;
}

void finish(Emitter& em, ordered_json& s, const std::string& echo_text) {
  em.write("config-echo.conf", echo_text);
  s["files"] = em.files;
  s["config_fnv1a"] = io::hex64(io::fnv1a(echo_text));
  s["config_echo"] = echo_text;
  io::write_file((em.dir / "summary.json").string(), s.dump(2) + "\n");
}

void report(const Emitter& em) {
  std::cout << "wrote " << em.files.size() + 1 << " files to " << em.dir.string()
            << "\n";
}

// The analysis grid tops out around 1 kHz, where this loop gain is nowhere
// near its asymptote: both impedances stay inductance-dominated far beyond
// that, and the winding count needs the contour closed at the asymptote.
// Extend the sweep instead of failing, at a density refinement can work with.
tfcore::FrequencyGrid nyquist_grid(const config::GridRequest& req) {
  const double lo = std::min(req.f_min_hz, 0.01);
  const double hi = std::max(req.f_max_hz, 1e6);
  const std::size_t per_decade = 40;
  const std::size_t n = std::max<std::size_t>(
      std::size_t(req.n_points),
      std::size_t(per_decade * std::log10(hi / lo)) + 1);
  return tfcore::FrequencyGrid::log_spaced(lo, hi, n, true);
}

struct LoopSetup {
  wcsim::OperatingSolve solve;
  wcsim::CompositeModel model;
  tfcore::FreqExpr z_grid;
};

LoopSetup make_loop(const config::Config& cfg, bool sssi) {
  wcsim::OperatingSolve solve = wcsim::fault_operating_point(cfg.sys, cfg.fault);
  wcsim::CompositeModel model =
      wcsim::build_composite(cfg.sys, solve.op, cfg.fault);
  tfcore::FreqExpr z_grid =
      sssi ? wcsim::zgpe(model)
           : tfcore::series(model.z_g1, model.z_g2).labeled("z_g_balanced");
  return LoopSetup{std::move(solve), std::move(model), std::move(z_grid)};
}

ordered_json solve_json(const wcsim::OperatingSolve& os) {
  ordered_json j;
  j["v1_pu"] = q12(os.v1_pu);
  j["v_c_pu"] = cx_json(os.v_c_pu);
  j["v_w_pu"] = cx_json(os.v_w_pu);
  j["v_f_pu"] = cx_json(os.v_f_pu);
  j["iterations"] = os.iterations;
  return j;
}

int cmd_impedance(const Opts& o) {
  config::Config cfg = load_config(o);
  Emitter em(resolve_out_dir(o));
  const std::string echo_text = config::echo(cfg);
  const tfcore::FrequencyGrid grid = cfg.grid.build();

  const plant::OperatingPoint op =
      plant::nominal_operating_point(cfg.sys.conv, cfg.sys.bases);
  const double w1 = cfg.sys.omega1_rad_s;

  struct Item {
    const char* file;
    tfcore::FreqExpr expr;
  };
  const std::vector<Item> items = {
      {"impedance-converter-pos.csv",
       plant::converter_impedance(cfg.sys.conv, op, plant::Sequence::Positive,
                                  w1)},
      {"impedance-converter-neg.csv",
       plant::converter_impedance(cfg.sys.conv, op, plant::Sequence::Negative,
                                  w1)},
      {"impedance-wpp-pos.csv",
       plant::wpp_branch(cfg.sys, op, plant::Sequence::Positive)},
      {"impedance-wpp-neg.csv",
       plant::wpp_branch(cfg.sys, op, plant::Sequence::Negative)},
  };
  for (const auto& it : items)
    em.write(it.file, io::bode_csv(stability::bode_table(it.expr, grid)));

  ordered_json s = base_summary("impedance");
  s["grid"] = grid_json(grid);
  ordered_json opj;
  opj["v1_pk_v"] = q12(op.v1_pk);
  opj["i_d0_a"] = q12(op.i_d0_a);
  opj["i_q0_a"] = q12(op.i_q0_a);
  s["operating_point"] = opj;
  s["units"] = ordered_json{{"converter", "ohm, single unit"},
                            {"wpp", "pu on the system base"}};
  finish(em, s, echo_text);
  report(em);
  return 0;
}

int cmd_compose(const Opts& o) {
  config::Config cfg = load_config(o);
  Emitter em(resolve_out_dir(o));
  const std::string echo_text = config::echo(cfg);
  const tfcore::FrequencyGrid grid = cfg.grid.build();

  LoopSetup ls = make_loop(cfg, true);
  const wcsim::CompositeModel& m = ls.model;

  struct Item {
    const char* file;
    tfcore::FreqExpr expr;
  };
  const std::vector<Item> items = {
      {"compose-zgpe.csv", wcsim::zgpe(m)},
      {"compose-zgne.csv", wcsim::zgne(m)},
      {"compose-zg-balanced.csv",
       tfcore::series(m.z_g1, m.z_g2).labeled("z_g_balanced")},
      {"compose-zne.csv", wcsim::zne(m)},
      {"compose-z0e.csv", wcsim::z0e(m)},
  };
  for (const auto& it : items)
    em.write(it.file, io::bode_csv(stability::bode_table(it.expr, grid)));

  ordered_json s = base_summary("compose");
  s["grid"] = grid_json(grid);
  s["alpha"] = q12(cfg.fault.alpha);
  s["r_f_pu"] = q12(cfg.fault.r_f_pu);
  s["operating_solve"] = solve_json(ls.solve);
  finish(em, s, echo_text);
  report(em);
  return 0;
}

int cmd_bode(const Opts& o) {
  config::Config cfg = load_config(o);
  Emitter em(resolve_out_dir(o));
  const std::string echo_text = config::echo(cfg);
  const tfcore::FrequencyGrid grid = cfg.grid.build();

  LoopSetup ls = make_loop(cfg, true);
  const wcsim::CompositeModel& m = ls.model;
  const tfcore::FreqExpr balanced =
      tfcore::series(m.z_g1, m.z_g2).labeled("z_g_balanced");

  const auto rows_with = stability::bode_table(ls.z_grid, grid);
  const auto rows_without = stability::bode_table(balanced, grid);
  const auto rows_wpp = stability::bode_table(m.z_wp, grid);

  em.write("bode-zgpe.csv", io::bode_csv(rows_with));
  em.write("bode-zgpe.svg", io::svg_bode(rows_with, "Z_gpe"));
  em.write("bode-zg-balanced.csv", io::bode_csv(rows_without));
  em.write("bode-zg-balanced.svg", io::svg_bode(rows_without, "Z_g1 + Z_g2"));
  em.write("bode-zwpp.csv", io::bode_csv(rows_wpp));
  em.write("bode-zwpp.svg", io::svg_bode(rows_wpp, "Z_wp"));

  ordered_json s = base_summary("bode");
  s["grid"] = grid_json(grid);
  s["alpha"] = q12(cfg.fault.alpha);
  s["crossings_with_chain"] =
      intersections_json(stability::intersections(ls.z_grid, m.z_wp, grid));
  s["crossings_without_chain"] =
      intersections_json(stability::intersections(balanced, m.z_wp, grid));
  s["operating_solve"] = solve_json(ls.solve);
  finish(em, s, echo_text);
  report(em);
  return 0;
}

int cmd_nyquist(const Opts& o) {
  config::Config cfg = load_config(o);
  Emitter em(resolve_out_dir(o));
  const std::string echo_text = config::echo(cfg);

  LoopSetup ls = make_loop(cfg, cfg.sssi_enabled);
  const tfcore::FrequencyGrid ngrid = nyquist_grid(cfg.grid);
  const stability::LoopGainSamples lg =
      stability::loop_gain(ls.z_grid, ls.model.z_wp, ngrid);
  const stability::StabilityVerdict v =
      stability::assess(lg, cfg.declared_rhp_poles);

  const char* title =
      cfg.sssi_enabled ? "Z_gpe / Z_wp" : "(Z_g1 + Z_g2) / Z_wp";
  em.write("nyquist-loop-gain.csv", io::nyquist_csv(lg));
  em.write("nyquist-loop-gain.svg", io::svg_nyquist(lg, title));

  ordered_json s = base_summary("nyquist");
  s["sssi"] = cfg.sssi_enabled;
  s["alpha"] = q12(cfg.fault.alpha);
  s["nyquist_grid"] = grid_json(ngrid);
  s["verdict"] = verdict_json(v);
  s["operating_solve"] = solve_json(ls.solve);
  finish(em, s, echo_text);

  std::cout << (v.stable ? "stable" : "unstable") << " (winding " << v.winding
            << ")\n";
  report(em);
  if (o.fail_on_unstable && !v.stable) return 3;
  return 0;
}

int cmd_compare_sssi(const Opts& o) {
  config::Config cfg = load_config(o);
  Emitter em(resolve_out_dir(o));
  const std::string echo_text = config::echo(cfg);

  const wcsim::OperatingSolve os =
      wcsim::fault_operating_point(cfg.sys, cfg.fault);
  const tfcore::FrequencyGrid ngrid = nyquist_grid(cfg.grid);
  const tfcore::FrequencyGrid tgrid = cfg.grid.build();

  const stability::SssiComparison cmp = stability::compare_sssi(
      cfg.sys, os.op, cfg.fault, ngrid, tgrid, cfg.declared_rhp_poles);

  // Re-sample the two loop gains for the curve files; compare_sssi keeps
  // only the verdicts.
  const wcsim::CompositeModel m =
      wcsim::build_composite(cfg.sys, os.op, cfg.fault);
  const tfcore::FreqExpr balanced =
      tfcore::series(m.z_g1, m.z_g2).labeled("z_g_balanced");
  const auto lg_with = stability::loop_gain(wcsim::zgpe(m), m.z_wp, ngrid);
  const auto lg_without = stability::loop_gain(balanced, m.z_wp, ngrid);

  em.write("sssi-zgpe.csv", io::bode_csv(cmp.z_grid_with));
  em.write("sssi-zg-balanced.csv", io::bode_csv(cmp.z_grid_without));
  em.write("sssi-zwpp.csv", io::bode_csv(cmp.z_wpp));
  em.write("sssi-nyquist-with.csv", io::nyquist_csv(lg_with));
  em.write("sssi-nyquist-with.svg",
           io::svg_nyquist(lg_with, "Z_gpe / Z_wp"));
  em.write("sssi-nyquist-without.csv", io::nyquist_csv(lg_without));
  em.write("sssi-nyquist-without.svg",
           io::svg_nyquist(lg_without, "(Z_g1 + Z_g2) / Z_wp"));

  ordered_json s = base_summary("compare-sssi");
  s["alpha"] = q12(cfg.fault.alpha);
  s["nyquist_grid"] = grid_json(ngrid);
  s["table_grid"] = grid_json(tgrid);
  s["with_chain"] = verdict_json(cmp.with_chain);
  s["without_chain"] = verdict_json(cmp.without_chain);
  s["winding_pair"] =
      ordered_json::array({cmp.without_chain.winding, cmp.with_chain.winding});
  s["max_mag_ratio"] = q12(cmp.max_mag_ratio);
  s["max_phase_dev_deg"] = q12(cmp.max_phase_dev_deg);
  s["crossings_with_chain"] = intersections_json(cmp.crossings_with);
  s["crossings_without_chain"] = intersections_json(cmp.crossings_without);
  s["operating_solve"] = solve_json(os);
  finish(em, s, echo_text);

  std::cout << "without chain: winding " << cmp.without_chain.winding
            << ", with chain: winding " << cmp.with_chain.winding << "\n";
  report(em);
  if (o.fail_on_unstable && !cmp.with_chain.stable) return 3;
  return 0;
}

int cmd_scan(const Opts& o) {
  config::Config cfg = load_config(o);
  Emitter em(resolve_out_dir(o));
  const std::string echo_text = config::echo(cfg);

  scan::Variant variant;
  if (o.variant == "full")
    variant = scan::Variant::Full;
  else if (o.variant == "passive")
    variant = scan::Variant::PassiveWpp;
  else if (o.variant == "rig")
    variant = scan::Variant::ConverterRig;
  else
    throw config::ConfigError("--variant must be full, passive or rig");

  plant::Sequence seq;
  if (o.seq == "pos")
    seq = plant::Sequence::Positive;
  else if (o.seq == "neg")
    seq = plant::Sequence::Negative;
  else if (o.seq == "zero")
    seq = plant::Sequence::Zero;
  else
    throw config::ConfigError("--seq must be pos, neg or zero");

  scan::Port port;
  if (o.port.empty())
    port = variant == scan::Variant::ConverterRig ? scan::Port::WppTerminal
                                                  : scan::Port::GridFaultNode;
  else if (o.port == "fault")
    port = scan::Port::GridFaultNode;
  else if (o.port == "wpp")
    port = scan::Port::WppTerminal;
  else
    throw config::ConfigError("--port must be fault or wpp");

  if (port == scan::Port::GridFaultNode &&
      variant == scan::Variant::ConverterRig)
    throw config::ConfigError("the rig has no fault node; use --port wpp");
  if (port == scan::Port::WppTerminal &&
      variant != scan::Variant::ConverterRig)
    throw config::ConfigError("series injection exists only on the rig variant");
  if (port == scan::Port::WppTerminal && seq == plant::Sequence::Zero)
    throw config::ConfigError("zero sequence is open at the converter");
  if (cfg.scanner.fault_closed && variant == scan::Variant::ConverterRig)
    throw config::ConfigError("the rig has no fault switch");

  // The config [grid] section drives the analytic sweeps; a time-domain
  // scan point costs seconds, and sub-bin frequencies snap to zero, so the
  // scan defaults to a coarser band unless --grid says otherwise.
  const config::GridRequest req = o.grid_spec.empty()
                                      ? config::GridRequest{5.0, 500.0, 20, true}
                                      : cfg.grid;
  const tfcore::FrequencyGrid raw = req.build();

  const double f1 = cfg.sys.omega1_rad_s / (2.0 * M_PI);
  std::vector<double> fs;
  ordered_json dropped = ordered_json::array();
  for (double f : raw.f_hz) {
    const double fsn = scan::snap_to_bin(f, cfg.scanner.window_s);
    if (fsn <= 0.0 || scan::excluded_frequency(fsn, f1)) {
      dropped.push_back(q12(f));
      continue;
    }
    if (!fs.empty() && fsn == fs.back()) continue;
    fs.push_back(fsn);
  }
  const tfcore::FrequencyGrid grid = tfcore::FrequencyGrid::explicit_points(fs);

  const scan::ScanResult res = scan::run_scan(cfg.sys, cfg.fault, variant, port,
                                              seq, grid, cfg.scanner, true);

  std::ostringstream name;
  name << "scan-" << io::variant_name(variant) << "-" << io::port_name(port)
       << "-" << io::sequence_name(seq) << ".csv";
  em.write(name.str(), io::scan_csv(res));

  std::size_t failed = 0;
  ordered_json failures = ordered_json::array();
  for (const auto& r : res.rows) {
    if (r.ok) continue;
    ++failed;
    failures.push_back(ordered_json{{"f_hz", q12(r.f_hz)}, {"error", r.error}});
  }

  ordered_json s = base_summary("scan");
  s["variant"] = io::variant_name(variant);
  s["port"] = io::port_name(port);
  s["seq"] = io::sequence_name(seq);
  s["fault_closed"] = cfg.scanner.fault_closed;
  s["n_points"] = res.rows.size();
  s["n_failed"] = failed;
  s["dropped_frequencies_hz"] = dropped;
  s["failures"] = failures;
  finish(em, s, echo_text);

  std::cout << res.rows.size() - failed << "/" << res.rows.size()
            << " points measured\n";
  report(em);
  if (!res.rows.empty() && failed == res.rows.size()) {
    std::cerr << "numerical failure: every scan point failed; first: f_hz="
              << io::fmt(res.rows.front().f_hz) << " "
              << res.rows.front().error << "\n";
    return 2;
  }
  return 0;
}

int cmd_sag_vs_fault(const Opts& o) {
  config::Config cfg = load_config(o);
  Emitter em(resolve_out_dir(o));
  const std::string echo_text = config::echo(cfg);

  const scan::SagFaultOutcome out =
      scan::replicate_sag_vs_fault(cfg.sys, cfg.fault, cfg.replication);

  const std::string tag = io::hex64(io::fnv1a(echo_text + "|sag-vs-fault"));
  em.write("sagfault-wave-sag.csv", io::waveform_csv(out.wave_sag));
  em.write("sagfault-wave-sag.meta",
           io::waveform_meta(out.wave_sag, tag + ":sag"));
  em.write("sagfault-wave-fault.csv", io::waveform_csv(out.wave_fault));
  em.write("sagfault-wave-fault.meta",
           io::waveform_meta(out.wave_fault, tag + ":fault"));

  auto verdict = [](const scan::OscillationVerdict& v) {
    ordered_json j;
    j["verdict"] = scan::to_string(v.kind);
    j["growth_ratio"] = q12(v.growth_ratio);
    j["early_env"] = q12(v.early_env);
    j["late_env"] = q12(v.late_env);
    return j;
  };

  ordered_json s = base_summary("sag-vs-fault");
  s["case_sag"] = verdict(out.case_sag);
  s["case_fault"] = verdict(out.case_fault);
  s["vp_sag_pu"] = q12(out.vp_sag_pu);
  s["vp_fault_pu"] = q12(out.vp_fault_pu);
  const double ref = std::max(out.vp_fault_pu, 1e-12);
  s["vp_mismatch_rel"] = q12(std::abs(out.vp_sag_pu - out.vp_fault_pu) / ref);
  s["sag_depth"] = q12(out.sag_depth);
  s["bisection_runs"] = out.bisection_runs;
  finish(em, s, echo_text);

  std::cout << "sag: " << scan::to_string(out.case_sag.kind)
            << ", fault: " << scan::to_string(out.case_fault.kind)
            << " (depth " << io::fmt(out.sag_depth) << ")\n";
  report(em);
  return 0;
}

}  // namespace
}  // namespace seqgrid

int main(int argc, char** argv) {
  using namespace seqgrid;

  CLI::App app{"sequence-impedance toolkit for faulted power-electronic grids"};
  app.require_subcommand(1);
  Opts o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", o.config_path, "configuration file")
        ->check(CLI::ExistingFile);
    c->add_option("--out", o.out_dir,
                  "output directory (default $SEQGRID_OUT, else .)");
    c->add_option("--grid", o.grid_spec,
                  "frequency grid MIN_HZ:MAX_HZ:N[:log|lin]");
    return c;
  };
  auto add_alpha = [&](CLI::App* c) {
    c->add_option("--alpha", o.alpha, "fault position along line 2, in (0,1)");
  };

  CLI::App* imp = add_common(app.add_subcommand(
      "impedance", "analytic converter and plant branch impedances"));
  CLI::App* cmp = add_common(app.add_subcommand(
      "compose", "composite grid-side sequence impedances under the fault"));
  add_alpha(cmp);
  CLI::App* bod = add_common(app.add_subcommand(
      "bode", "grid-side and plant-side impedance magnitude/phase tables"));
  add_alpha(bod);
  CLI::App* nyq = add_common(app.add_subcommand(
      "nyquist", "loop-gain contour and winding-number verdict"));
  add_alpha(nyq);
  nyq->add_flag("--no-sssi", o.no_sssi,
                "use the balanced grid impedance, ignoring the fault chain");
  nyq->add_flag("--fail-on-unstable", o.fail_on_unstable,
                "exit 3 when the verdict is unstable");
  CLI::App* cps = add_common(app.add_subcommand(
      "compare-sssi", "stability verdicts with and without the fault chain"));
  add_alpha(cps);
  cps->add_flag("--fail-on-unstable", o.fail_on_unstable,
                "exit 3 when the with-chain verdict is unstable");
  CLI::App* scn = add_common(app.add_subcommand(
      "scan", "time-domain frequency scan of a simulated variant"));
  add_alpha(scn);
  scn->add_option("--variant", o.variant, "full, passive or rig")
      ->check(CLI::IsMember({"full", "passive", "rig"}));
  scn->add_option("--port", o.port, "injection port: fault or wpp")
      ->check(CLI::IsMember({"fault", "wpp"}));
  scn->add_option("--seq", o.seq, "sequence: pos, neg or zero")
      ->check(CLI::IsMember({"pos", "neg", "zero"}));
  scn->add_flag("--fault-closed", o.fault_closed,
                "scan with the fault switch closed");
  CLI::App* sgf = add_common(app.add_subcommand(
      "sag-vs-fault", "matched-depth sag against the actual fault"));
  add_alpha(sgf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (imp->parsed()) return cmd_impedance(o);
    if (cmp->parsed()) return cmd_compose(o);
    if (bod->parsed()) return cmd_bode(o);
    if (nyq->parsed()) return cmd_nyquist(o);
    if (cps->parsed()) return cmd_compare_sssi(o);
    if (scn->parsed()) return cmd_scan(o);
    if (sgf->parsed()) return cmd_sag_vs_fault(o);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const tfcore::PoleError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
