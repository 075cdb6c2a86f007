#include "csmac/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace csmac {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::uint64_t config_hash) : out_(path) {
  if (!out_) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash));
  out_ << "# config_hash=" << buf << "\n";
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void CsvWriter::header(const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) out_ << (i ? "," : "") << names[i];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    out_ << (i ? "," : "") << format_number(values[i]);
  out_ << "\n";
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << "\n"; }

void write_field_csv(const std::string& path, const DataField& field, std::uint64_t seed,
                     std::uint64_t config_hash) {
  CsvWriter w(path, config_hash);
  std::ostringstream meta;
  meta << "n_s=" << field.values.rows() << " n_t=" << field.values.cols()
       << " ri_minutes=" << format_number(field.ri_minutes) << " seed=" << seed;
  w.comment(meta.str());
  for (Eigen::Index i = 0; i < field.values.rows(); ++i) {
    std::ostringstream line;
    for (Eigen::Index j = 0; j < field.values.cols(); ++j)
      line << (j ? "," : "") << format_number(field.values(i, j));
    w.raw_row(line.str());
  }
}

DataField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  DataField f;
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("ri_minutes=");
      if (pos != std::string::npos) f.ri_minutes = std::stod(line.substr(pos + 11));
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("csv: ragged rows in '" + path + "'");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("csv: no data rows in '" + path + "'");
  f.values.resize(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) f.values(i, j) = rows[i][j];
  return f;
}

}  // namespace csmac
