#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "billiards/spectral.hpp"
#include "billiards/topology.hpp"

namespace billiards {

using Json = nlohmann::json;

/// FNV-1a 64-bit digest, hex encoded; used to stamp every output file
/// with the configuration that produced it.
std::string digest64(const std::string& text);

Json orbit_to_json(const CriticalOrbit& orbit);
CriticalOrbit orbit_from_json(const ConvexBody& body, const Json& j);

Json iteration_report_to_json(const IterationReport& report);

void write_orbits_json(const std::string& path, const std::string& digest,
                       const ConvexBody& body,
                       const std::vector<CriticalOrbit>& orbits);
std::vector<CriticalOrbit> read_orbits_json(const ConvexBody& body,
                                            const std::string& path);

struct CsvTable {
  std::vector<std::string> metadata;  // emitted as '#'-prefixed lines
  std::string header;
  std::vector<std::string> rows;
};

void write_csv(const std::string& path, const CsvTable& table);

/// One index-table row: (m, z_re, z_im, ind, coind, nul, source).
std::string index_row(int m, Cplx z, const IndexTriple& t,
                      const std::string& source);

}  // namespace billiards
