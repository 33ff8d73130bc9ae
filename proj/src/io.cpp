#include "seqgrid/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seqgrid::io {

namespace {

// Shorter form for SVG coordinates; data files use fmt().
std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct Bounds {
  double lo = 0.0, hi = 1.0;
  void grow(double x) {
    if (!std::isfinite(x)) return;
    if (empty) {
      lo = hi = x;
      empty = false;
    } else {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  void pad(double frac) {
    const double w = hi - lo;
    const double p = w > 0.0 ? w * frac : std::max(1.0, std::abs(hi)) * frac;
    lo -= p;
    hi += p;
  }
  bool empty = true;
};

std::string svg_open(int w, int h, const std::string& title) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
    << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  o << "<rect width=\"" << w << "\" height=\"" << h
    << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"14\">"
    << title << "</text>\n";
  return o.str();
}

// Polyline with pen-up at non-finite points.
void emit_polylines(std::ostringstream& o,
                    const std::vector<std::pair<double, double>>& pts,
                    const char* color) {
  bool open = false;
  for (const auto& [x, y] : pts) {
    const bool finite = std::isfinite(x) && std::isfinite(y);
    if (finite && !open) {
      o << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
      open = true;
    }
    if (finite) o << fmt6(x) << "," << fmt6(y) << " ";
    if (!finite && open) {
      o << "\"/>\n";
      open = false;
    }
  }
  if (open) o << "\"/>\n";
}

}  // namespace

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + tmp + " -> " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* sequence_name(plant::Sequence seq) {
  switch (seq) {
    case plant::Sequence::Positive: return "pos";
    case plant::Sequence::Negative: return "neg";
    case plant::Sequence::Zero: return "zero";
  }
  return "?";
}

const char* variant_name(scan::Variant v) {
  switch (v) {
    case scan::Variant::Full: return "full";
    case scan::Variant::PassiveWpp: return "passive";
    case scan::Variant::ConverterRig: return "rig";
  }
  return "?";
}

const char* port_name(scan::Port p) {
  switch (p) {
    case scan::Port::GridFaultNode: return "fault";
    case scan::Port::WppTerminal: return "wpp";
  }
  return "?";
}

std::string bode_csv(const std::vector<stability::BodeRow>& rows) {
  std::ostringstream o;
  o << "# schema=seqgrid/bode/1\n";
  o << "f_hz,re,im,mag,mag_db,phase_deg\n";
  for (const auto& r : rows) {
    if (!r.ok) {
      o << "# singular f_hz=" << fmt(r.f_hz) << "\n";
      continue;
    }
    o << fmt(r.f_hz) << "," << fmt(r.value.real()) << ","
      << fmt(r.value.imag()) << "," << fmt(r.mag) << "," << fmt(r.mag_db)
      << "," << fmt(r.phase_deg) << "\n";
  }
  return o.str();
}

std::string nyquist_csv(const stability::LoopGainSamples& lg) {
  std::ostringstream o;
  o << "# schema=seqgrid/nyquist/1\n";
  o << "omega_rad_s,re_l,im_l\n";
  for (double w : lg.skipped_omega)
    o << "# singular omega_rad_s=" << fmt(w) << "\n";
  for (std::size_t i = 0; i < lg.omega.size(); ++i)
    o << fmt(lg.omega[i]) << "," << fmt(lg.value[i].real()) << ","
      << fmt(lg.value[i].imag()) << "\n";
  return o.str();
}

std::string scan_csv(const scan::ScanResult& r) {
  std::ostringstream o;
  o << "# schema=seqgrid/scan/1\n";
  o << "# variant=" << variant_name(r.variant) << " port=" << port_name(r.port)
    << "\n";
  o << "f_hz,seq,re_z,im_z,mag,phase_deg,amplitude,leakage\n";
  for (const auto& row : r.rows) {
    if (!row.ok) {
      o << "# failed f_hz=" << fmt(row.f_hz) << " seq="
        << sequence_name(row.seq) << " reason=" << row.error << "\n";
      continue;
    }
    const double mag = std::abs(row.z_pu);
    const double ph = std::arg(row.z_pu) * 180.0 / M_PI;
    o << fmt(row.f_hz) << "," << sequence_name(row.seq) << ","
      << fmt(row.z_pu.real()) << "," << fmt(row.z_pu.imag()) << "," << fmt(mag)
      << "," << fmt(ph) << "," << fmt(row.amplitude_frac) << ","
      << fmt(row.leakage) << "\n";
  }
  return o.str();
}

std::string waveform_csv(const sim::Waveform& w) {
  std::ostringstream o;
  o << "# schema=seqgrid/wave/1\n";
  o << "t_s";
  for (const auto& ch : w.channels) o << "," << ch;
  o << "\n";
  for (std::size_t m = 0; m < w.samples(); ++m) {
    o << fmt(w.t0 + double(m) * w.dt);
    for (const auto& col : w.data) o << "," << fmt(col[m]);
    o << "\n";
  }
  return o.str();
}

std::string waveform_meta(const sim::Waveform& w,
                          const std::string& scenario_hash) {
  std::ostringstream o;
  o << "# schema=seqgrid/wavemeta/1\n";
  o << "t0_s = " << fmt(w.t0) << "\n";
  o << "dt_s = " << fmt(w.dt) << "\n";
  o << "samples = " << w.samples() << "\n";
  o << "channels = ";
  for (std::size_t i = 0; i < w.channels.size(); ++i)
    o << (i ? "," : "") << w.channels[i];
  o << "\n";
  o << "scenario = " << scenario_hash << "\n";
  return o.str();
}

std::string svg_nyquist(const stability::LoopGainSamples& lg,
                        const std::string& title) {
  const int W = 640, H = 640;
  Bounds bx, by;
  bx.grow(-1.0);
  by.grow(0.0);
  for (const Complex& v : lg.value) {
    bx.grow(v.real());
    by.grow(v.imag());
  }
  bx.pad(0.08);
  by.pad(0.08);
  const double x0 = 50, x1 = W - 20, y0 = H - 40, y1 = 40;
  auto X = [&](double x) {
    return x0 + (x - bx.lo) / (bx.hi - bx.lo) * (x1 - x0);
  };
  auto Y = [&](double y) {
    return y0 + (y - by.lo) / (by.hi - by.lo) * (y1 - y0);
  };

  std::ostringstream o;
  o << svg_open(W, H, title);
  if (bx.lo < 0.0 && bx.hi > 0.0)
    o << "<line x1=\"" << fmt6(X(0)) << "\" y1=\"" << fmt6(y0) << "\" x2=\""
      << fmt6(X(0)) << "\" y2=\"" << fmt6(y1)
      << "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
  if (by.lo < 0.0 && by.hi > 0.0)
    o << "<line x1=\"" << fmt6(x0) << "\" y1=\"" << fmt6(Y(0)) << "\" x2=\""
      << fmt6(x1) << "\" y2=\"" << fmt6(Y(0))
      << "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";

  std::vector<std::pair<double, double>> pts;
  pts.reserve(lg.value.size());
  for (std::size_t i = 0; i < lg.value.size(); ++i)
    pts.emplace_back(X(lg.value[i].real()), Y(lg.value[i].imag()));
  emit_polylines(o, pts, "#1f77b4");

  o << "<circle cx=\"" << fmt6(X(-1.0)) << "\" cy=\"" << fmt6(Y(0.0))
    << "\" r=\"4\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  o << "<text x=\"" << fmt6(X(-1.0) + 7) << "\" y=\"" << fmt6(Y(0.0) - 7)
    << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">-1"
       "</text>\n";
  o << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 10)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"12\">Re L, "
    << fmt6(bx.lo) << " to " << fmt6(bx.hi) << "</text>\n";
  o << "<text x=\"15\" y=\"" << (H / 2)
    << "\" transform=\"rotate(-90 15 " << (H / 2)
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"12\">Im L, "
    << fmt6(by.lo) << " to " << fmt6(by.hi) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string svg_bode(const std::vector<stability::BodeRow>& rows,
                     const std::string& title) {
  const int W = 800, H = 600;
  Bounds bf, bm, bp;
  for (const auto& r : rows) {
    if (!r.ok || !(r.f_hz > 0.0)) continue;
    bf.grow(std::log10(r.f_hz));
    bm.grow(r.mag_db);
    bp.grow(r.phase_deg);
  }
  bf.pad(0.03);
  bm.pad(0.08);
  bp.pad(0.08);

  const double x0 = 60, x1 = W - 20;
  const double ym0 = H / 2.0 - 30, ym1 = 40;            // magnitude panel
  const double yp0 = H - 40.0, yp1 = H / 2.0 + 20;      // phase panel
  auto X = [&](double lf) {
    return x0 + (lf - bf.lo) / (bf.hi - bf.lo) * (x1 - x0);
  };
  auto Ym = [&](double m) {
    return ym0 + (m - bm.lo) / (bm.hi - bm.lo) * (ym1 - ym0);
  };
  auto Yp = [&](double p) {
    return yp0 + (p - bp.lo) / (bp.hi - bp.lo) * (yp1 - yp0);
  };

  std::ostringstream o;
  o << svg_open(W, H, title);
  for (auto [lo, hi, label] :
       {std::tuple{ym1, ym0, "dB"}, std::tuple{yp1, yp0, "deg"}}) {
    o << "<rect x=\"" << fmt6(x0) << "\" y=\"" << fmt6(lo) << "\" width=\""
      << fmt6(x1 - x0) << "\" height=\"" << fmt6(hi - lo)
      << "\" fill=\"none\" stroke=\"#888888\"/>\n";
    o << "<text x=\"" << fmt6(x0 - 35) << "\" y=\"" << fmt6((lo + hi) / 2)
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << label
      << "</text>\n";
  }

  std::vector<std::pair<double, double>> mpts, ppts;
  for (const auto& r : rows) {
    if (!r.ok || !(r.f_hz > 0.0)) {
      mpts.emplace_back(NAN, NAN);
      ppts.emplace_back(NAN, NAN);
      continue;
    }
    mpts.emplace_back(X(std::log10(r.f_hz)), Ym(r.mag_db));
    ppts.emplace_back(X(std::log10(r.f_hz)), Yp(r.phase_deg));
  }
  emit_polylines(o, mpts, "#1f77b4");
  emit_polylines(o, ppts, "#2ca02c");

  o << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 8)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"12\">log10 f, "
    << fmt6(bf.lo) << " to " << fmt6(bf.hi) << " (f in Hz); magnitude "
    << fmt6(bm.lo) << " to " << fmt6(bm.hi) << " dB; phase " << fmt6(bp.lo)
    << " to " << fmt6(bp.hi) << " deg</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace seqgrid::io
