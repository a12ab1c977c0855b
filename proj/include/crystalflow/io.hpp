#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "crystalflow/grid.hpp"

/// On-disk artifacts. Every file is written to a temporary sibling and
/// renamed into place, so readers never see a partial file.
namespace crystalflow::io {

namespace fs = std::filesystem;

/// Writes `bytes` to `path` via `path.tmp` + rename. Creates parent
/// directories. Throws IoError.
void write_atomic(const fs::path& path, std::string_view bytes);
std::string read_file(const fs::path& path);

/// Shortest round-trip decimal form of a double ("%.17g").
std::string format_double(double v);

/// CSV with a header row; numeric cells use format_double.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<double>& cells);
  void row_text(const std::vector<std::string>& cells);
  const std::string& text() const noexcept { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

/// Float64 little-endian samples of a field plus a JSON sidecar
/// {"N_g": n, "t": t}. `stem` gets ".bin" and ".json" appended.
void write_snapshot(const fs::path& stem, const GridField& field, double t);

struct Snapshot {
  GridField field;
  double t = 0.0;
};
Snapshot read_snapshot(const fs::path& stem);

/// All snapshots in `dir` (sidecars *.json with a matching *.bin), sorted by t.
std::vector<Snapshot> read_trajectory(const fs::path& dir);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t v);

}  // namespace crystalflow::io
