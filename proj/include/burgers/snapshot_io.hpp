#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "burgers/field.hpp"

namespace burgers {

/// BRG1 snapshot: "BRG1", u32 N, f64 time, f64 nu, then N f64 samples, all
/// little-endian regardless of host byte order.
struct Snapshot {
  double time = 0.0;
  double nu = 0.0;
  std::vector<double> samples;
};

void write_snapshot(std::ostream& out, const Snapshot& snap);
Snapshot read_snapshot(std::istream& in);

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot read_snapshot(const std::filesystem::path& path);

inline Snapshot make_snapshot(const Field& field, double time, double nu) {
  return {time, nu, {field.samples().begin(), field.samples().end()}};
}

}  // namespace burgers
