#include "relopt/output.hpp"

#include <cstdio>
#include <stdexcept>

namespace relopt {

std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

TableWriter::TableWriter(const std::filesystem::path& path,
                         const std::string& manifest_hash,
                         const std::vector<std::string>& columns)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out_ << "# manifest " << manifest_hash << "\n";
  for (size_t i = 0; i < columns.size(); ++i)
    out_ << (i ? "\t" : "") << columns[i];
  out_ << "\n";
}

void TableWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw std::invalid_argument("table row width mismatch");
  for (size_t i = 0; i < cells.size(); ++i)
    out_ << (i ? "\t" : "") << cells[i];
  out_ << "\n";
}

void TableWriter::row(const std::vector<double>& cells) {
  std::vector<std::string> text;
  text.reserve(cells.size());
  for (double v : cells) text.push_back(fmt17(v));
  row(text);
}

}  // namespace relopt
