#pragma once

#include <stdexcept>
#include <string>

#include "seqgrid/plant.hpp"
#include "seqgrid/scan.hpp"
#include "seqgrid/wcsim.hpp"

namespace seqgrid::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Frequency-grid request, realized through tfcore::FrequencyGrid.
struct GridRequest {
  double f_min_hz = 0.1;
  double f_max_hz = 1000.0;
  int n_points = 200;
  bool log_spacing = true;

  tfcore::FrequencyGrid build(bool symmetric = false) const;
};

struct Config {
  plant::SystemSpec sys;
  wcsim::FaultSpec fault;
  GridRequest grid;
  scan::ScannerSettings scanner;
  scan::SagFaultSettings replication;
  bool sssi_enabled = true;
  int declared_rhp_poles = 0;
};

/// Everything at its defaults: the appendix tables plus the documented
/// scanner and replication choices.
Config defaults();

/// Strict line-oriented parser: [section] headers, key = value pairs and
/// '#' comments. Unknown sections or keys, unit-suffix drift, duplicate
/// keys and out-of-range values are hard errors naming the offender; every
/// omitted key keeps its default. Doubles are canonicalized to 12
/// significant digits so a file and its echo configure identically.
Config parse_string(const std::string& text);
Config parse_file(const std::string& path);

/// Canonical serialization of the fully resolved configuration. Parsing it
/// back reproduces the configuration and the identical echo.
std::string echo(const Config& c);

}  // namespace seqgrid::config
