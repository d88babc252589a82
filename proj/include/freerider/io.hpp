#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace freerider {

// Shortest round-trip decimal form; deterministic for a given double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);

// Complete-or-absent write: content goes to a temp file in the target
// directory which is then renamed over the destination.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a required column; throws with the column name if absent.
  std::size_t column(const std::string& name) const;
};

// Minimal CSV: comma separated, no quoting (none of the schemas need it).
// Throws on empty input or ragged rows.
CsvTable parse_csv(std::string_view text);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

}  // namespace freerider
