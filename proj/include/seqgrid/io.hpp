#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqgrid/scan.hpp"
#include "seqgrid/sim.hpp"
#include "seqgrid/stability.hpp"

namespace seqgrid::io {

/// Fixed 12-significant-digit formatting. Byte-identical output depends on
/// every writer funneling numbers through here.
std::string fmt(double x);

/// Write to a sibling temp file, then rename, so a reader never sees a
/// half-written file.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// FNV-1a 64-bit hash, used as the scenario identity in sidecar metadata.
std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t h);

const char* sequence_name(plant::Sequence seq);
const char* variant_name(scan::Variant v);
const char* port_name(scan::Port p);

/// CSV emitters. Schemas are versioned in the first header line; rows that
/// carry no value (poles, failed scan points) appear as '#' comment lines
/// in their original position.
std::string bode_csv(const std::vector<stability::BodeRow>& rows);
std::string nyquist_csv(const stability::LoopGainSamples& lg);
std::string scan_csv(const scan::ScanResult& r);
std::string waveform_csv(const sim::Waveform& w);
std::string waveform_meta(const sim::Waveform& w,
                          const std::string& scenario_hash);

/// Self-contained SVG polyline plots: static curve artifacts, no scripting.
/// The Nyquist plot marks the critical point at -1.
std::string svg_nyquist(const stability::LoopGainSamples& lg,
                        const std::string& title);
std::string svg_bode(const std::vector<stability::BodeRow>& rows,
                     const std::string& title);

}  // namespace seqgrid::io
