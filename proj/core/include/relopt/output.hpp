#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace relopt {

// Fixed shortest-roundtrip formatting: every numeric output file goes
// through this, so re-runs are byte-identical.
std::string fmt17(double value);

uint64_t fnv1a64(const std::string& text);
std::string hash_hex(uint64_t value);

// Delimited text table stamped with the run's manifest hash.
class TableWriter {
 public:
  TableWriter(const std::filesystem::path& path, const std::string& manifest_hash,
              const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& cells);

 private:
  std::ofstream out_;
  size_t columns_ = 0;
};

}  // namespace relopt
