#include "crystalflow/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "crystalflow/errors.hpp"

namespace crystalflow::io {

void write_atomic(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) { row_text(header); }

void CsvWriter::row(const std::vector<double>& cells) {
  std::vector<std::string> text;
  text.reserve(cells.size());
  for (double c : cells) text.push_back(format_double(c));
  row_text(text);
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error("CsvWriter: row width differs from header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

namespace {

fs::path with_ext(const fs::path& stem, const char* ext) {
  fs::path p = stem;
  p += ext;
  return p;
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
  return r;
}

}  // namespace

void write_snapshot(const fs::path& stem, const GridField& field, double t) {
  std::string bytes(field.size() * 8, '\0');
  for (std::size_t j = 0; j < field.size(); ++j) {
    const std::uint64_t w = to_le(std::bit_cast<std::uint64_t>(field[j]));
    std::memcpy(bytes.data() + 8 * j, &w, 8);
  }
  write_atomic(with_ext(stem, ".bin"), bytes);
  nlohmann::ordered_json side;
  side["N_g"] = field.size();
  side["t"] = t;
  write_atomic(with_ext(stem, ".json"), side.dump() + "\n");
}

Snapshot read_snapshot(const fs::path& stem) {
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(read_file(with_ext(stem, ".json")));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad sidecar " + with_ext(stem, ".json").string() + ": " + e.what());
  }
  if (!side.contains("N_g") || !side.contains("t")) throw IoError("sidecar lacks N_g or t: " + stem.string());
  const auto n = side["N_g"].get<std::size_t>();
  const std::string bytes = read_file(with_ext(stem, ".bin"));
  if (bytes.size() != 8 * n) throw IoError("snapshot size does not match N_g: " + stem.string());
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::uint64_t w;
    std::memcpy(&w, bytes.data() + 8 * j, 8);
    v[j] = std::bit_cast<double>(to_le(w));
  }
  return {GridField::on_torus(std::move(v)), side["t"].get<double>()};
}

std::vector<Snapshot> read_trajectory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<Snapshot> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    fs::path stem = entry.path();
    stem.replace_extension();
    if (!fs::exists(with_ext(stem, ".bin"))) continue;
    out.push_back(read_snapshot(stem));
  }
  if (out.empty()) throw IoError("no snapshots found in " + dir.string());
  std::stable_sort(out.begin(), out.end(), [](const Snapshot& a, const Snapshot& b) { return a.t < b.t; });
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace crystalflow::io
