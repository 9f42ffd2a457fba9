#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tessera {

/// Shortest text that reads back to the same double ("%.17g" style, but
/// without trailing noise when fewer digits round-trip).
std::string format_number(double value);

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or -1.
  int column(const std::string& name) const;
};

/// Reads a comma-separated file with a header row. Quoted fields are not
/// supported. Throws ConfigError when the file cannot be read.
CsvTable read_csv(const std::filesystem::path& path);

/// Writes rows as CSV; fields are written verbatim.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Sum in a fixed pairwise order, independent of how the inputs were produced.
double pairwise_sum(std::span<const double> values);

} // namespace tessera
