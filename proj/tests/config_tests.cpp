#include "doctest.h"

#include <string>

#include "seqgrid/config.hpp"

using namespace seqgrid;
using config::Config;
using config::ConfigError;

namespace {

std::string message_of(const std::string& text) {
  try {
    config::parse_string(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("empty input yields the documented defaults") {
  const Config c = config::parse_string("");
  CHECK(c.sys.line2.r_pu == 0.041);
  CHECK(c.sys.n_units == 150);
  CHECK(c.fault.alpha == 0.1);
  CHECK(c.grid.n_points == 200);
  CHECK(c.scanner.skip_s == 1.5);
  CHECK(c.sssi_enabled);
  CHECK(c.declared_rhp_poles == 0);
}

TEST_CASE("echo round-trips to the identical text") {
  const Config base = config::defaults();
  const std::string once = config::echo(base);
  const Config reparsed = config::parse_string(once);
  CHECK(config::echo(reparsed) == once);

  // a sparse override file echoes to the same canonical form
  const Config sparse = config::parse_string(
      "[fault]\nalpha = 0.25\n[wpp]\nn_units = 60\n");
  CHECK(sparse.fault.alpha == 0.25);
  CHECK(sparse.sys.n_units == 60);
  const std::string echoed = config::echo(sparse);
  CHECK(config::echo(config::parse_string(echoed)) == echoed);
  CHECK(echoed.find("alpha = 0.25") != std::string::npos);
}

TEST_CASE("comments, blank lines and spacing are tolerated") {
  const Config c = config::parse_string(
      "# leading comment\n\n[fault]\n  alpha=0.3   # trailing note\n\n"
      "[scanner]\nramp_s = 0.05\nskip_s = 0.5\n");
  CHECK(c.fault.alpha == 0.3);
  CHECK(c.scanner.ramp_s == 0.05);
  CHECK(c.scanner.skip_s == 0.5);
}

TEST_CASE("unknown sections and keys are hard errors naming the offender") {
  CHECK(message_of("[nonsense]\nx = 1\n").find("unknown section [nonsense]") !=
        std::string::npos);
  CHECK(message_of("[fault]\ndepth = 1\n").find("unknown key 'depth' in [fault]") !=
        std::string::npos);
  // same quantity, wrong unit suffix: the message says which suffix belongs
  const std::string m = message_of("[converter]\nl_f_mh = 3\n");
  CHECK(m.find("unit-suffix mismatch in [converter]") != std::string::npos);
  CHECK(m.find("'l_f_mh'") != std::string::npos);
  CHECK(m.find("'l_f_h'") != std::string::npos);
}

TEST_CASE("duplicate keys are rejected") {
  CHECK(message_of("[fault]\nalpha = 0.1\nalpha = 0.2\n")
            .find("duplicate key 'alpha' in [fault]") != std::string::npos);
}

TEST_CASE("range violations name the invariant") {
  CHECK(message_of("[fault]\nalpha = 1.5\n").find("alpha") != std::string::npos);
  CHECK_THROWS_AS(config::parse_string("[fault]\nr_f_pu = -1\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_string("[grid]\nf_min_hz = 10\nf_max_hz = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(config::parse_string("[scanner]\nramp_s = -0.1\n"),
                  ConfigError);
  CHECK_THROWS_AS(config::parse_string("[wpp]\nn_units = 0\n"), ConfigError);
}

TEST_CASE("malformed lines carry their line number") {
  const std::string m = message_of("[fault]\nalpha 0.1\n");
  CHECK(m.find("line 2") != std::string::npos);
}

TEST_CASE("values are canonicalized to twelve significant digits") {
  // more digits than the canonical form keeps: parse, echo, reparse agree
  const Config c = config::parse_string("[fault]\nalpha = 0.10000000000001234\n");
  const std::string e = config::echo(c);
  CHECK(config::echo(config::parse_string(e)) == e);
  CHECK(e.find("alpha = 0.1\n") != std::string::npos);
}
