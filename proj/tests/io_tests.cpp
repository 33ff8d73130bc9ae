#include "doctest.h"

#include <cstdio>
#include <string>

#include "seqgrid/io.hpp"

using namespace seqgrid;

TEST_CASE("number formatting is fixed at twelve significant digits") {
  CHECK(io::fmt(0.1) == "0.1");
  CHECK(io::fmt(-4.0) == "-4");
  CHECK(io::fmt(300e6) == "300000000");
  CHECK(io::fmt(1.0 / 3.0) == "0.333333333333");
  CHECK(io::fmt(2e-5) == "2e-05");
  // idempotent through a parse: the text reads back to the same double
  CHECK(std::stod(io::fmt(M_PI)) == std::stod(io::fmt(std::stod(io::fmt(M_PI)))));
}

TEST_CASE("fnv1a matches its published test vectors") {
  CHECK(io::fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(io::fnv1a("foobar") == 0x85944171f73967e8ull);
  CHECK(io::hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("names for enums") {
  CHECK(std::string(io::sequence_name(plant::Sequence::Positive)) == "pos");
  CHECK(std::string(io::sequence_name(plant::Sequence::Negative)) == "neg");
  CHECK(std::string(io::sequence_name(plant::Sequence::Zero)) == "zero");
  CHECK(std::string(io::variant_name(scan::Variant::Full)) == "full");
  CHECK(std::string(io::variant_name(scan::Variant::PassiveWpp)) == "passive");
  CHECK(std::string(io::variant_name(scan::Variant::ConverterRig)) == "rig");
  CHECK(std::string(io::port_name(scan::Port::GridFaultNode)) == "fault");
  CHECK(std::string(io::port_name(scan::Port::WppTerminal)) == "wpp");
}

TEST_CASE("file write is read back verbatim") {
  const std::string path = "io_test_roundtrip.tmp";
  const std::string body = "line1\nline2 0.333333333333\n";
  io::write_file(path, body);
  CHECK(io::read_file(path) == body);
  std::remove(path.c_str());
}

TEST_CASE("csv schemas are versioned and keep failed rows visible") {
  scan::ScanResult r;
  r.variant = scan::Variant::PassiveWpp;
  r.port = scan::Port::GridFaultNode;
  scan::ScanRow ok;
  ok.f_hz = 37.0;
  ok.ok = true;
  ok.z_pu = Complex{0.25, 0.5};
  ok.z_base_ohm = 161.0;
  scan::ScanRow bad;
  bad.f_hz = 50.0;
  bad.error = "reserved for the fundamental background";
  r.rows = {ok, bad};

  const std::string csv = io::scan_csv(r);
  CHECK(csv.rfind("# schema=seqgrid/scan/1\n", 0) == 0);
  CHECK(csv.find("variant=passive") != std::string::npos);
  CHECK(csv.find("37,") != std::string::npos);
  // the failed row stays in place as a comment naming the cause
  CHECK(csv.find("# failed f_hz=50") != std::string::npos);
  CHECK(csv.find("reserved for the fundamental") != std::string::npos);
}

TEST_CASE("waveform csv and sidecar metadata") {
  sim::Waveform w;
  w.t0 = 0.5;
  w.dt = 0.25;
  w.channels = {"v_a", "v_b"};
  w.data = {{1.0, 2.0}, {3.0, 4.0}};

  const std::string csv = io::waveform_csv(w);
  CHECK(csv.rfind("# schema=seqgrid/wave/1\n", 0) == 0);
  CHECK(csv.find("t_s,v_a,v_b") != std::string::npos);
  CHECK(csv.find("0.5,1,3") != std::string::npos);
  CHECK(csv.find("0.75,2,4") != std::string::npos);

  const std::string meta = io::waveform_meta(w, "deadbeef00000000");
  CHECK(meta.rfind("# schema=seqgrid/wavemeta/1\n", 0) == 0);
  CHECK(meta.find("deadbeef00000000") != std::string::npos);
  CHECK(meta.find("samples = 2") != std::string::npos);
}

TEST_CASE("svg plots are self-contained") {
  stability::LoopGainSamples lg;
  lg.omega = {-2.0, -1.0, 1.0, 2.0};
  lg.value = {Complex{0.1, -0.4}, Complex{0.3, -0.8}, Complex{0.3, 0.8},
              Complex{0.1, 0.4}};
  const std::string svg = io::svg_nyquist(lg, "loop gain");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  // critical point marker
  CHECK(svg.find("-1") != std::string::npos);
  // no scripting, no external fetches
  CHECK(svg.find("<script") == std::string::npos);
  CHECK(svg.find("href") == std::string::npos);

  std::vector<stability::BodeRow> rows;
  for (double f : {1.0, 10.0, 100.0}) {
    stability::BodeRow r;
    r.f_hz = f;
    r.ok = true;
    r.mag = 1.0 / f;
    r.mag_db = -20.0 * std::log10(f);
    r.phase_deg = -45.0;
    rows.push_back(r);
  }
  const std::string bode = io::svg_bode(rows, "impedance");
  CHECK(bode.find("<svg") != std::string::npos);
  CHECK(bode.find("</svg>") != std::string::npos);
}
