#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "csmac/griddata.hpp"

namespace csmac {

// CSV output with provenance comments; every file carries the resolved
// configuration hash so reruns are byte-comparable.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::uint64_t config_hash);

  void comment(const std::string& text);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);

 private:
  std::ofstream out_;
};

std::string format_number(double v);

void write_field_csv(const std::string& path, const DataField& field, std::uint64_t seed,
                     std::uint64_t config_hash);
DataField read_field_csv(const std::string& path);

}  // namespace csmac
