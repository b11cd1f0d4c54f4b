#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ils/model.hpp"
#include "ils/tangent.hpp"

namespace ils {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Everything needed to continue a run: the ensemble, the tangent if one is
/// being evolved, and the number of steps taken since t0.
struct Snapshot {
  EnsembleState state;
  std::optional<TangentState> tangent;
  long long steps = 0;
};

/// Raw little-endian doubles, so load(save(s)) is bit-identical. Written to
/// a temporary file and renamed into place.
void save_snapshot(const std::filesystem::path& path, const EnsembleState& state,
                   const TangentState* tangent = nullptr, long long steps = 0);

/// Throws SnapshotError on a bad magic, version mismatch, truncation, or
/// (when expected_n is given) an oscillator count that does not match.
Snapshot load_snapshot(const std::filesystem::path& path,
                       std::optional<std::size_t> expected_n = std::nullopt);

/// Writes `contents` next to `path` and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

/// Comma-separated table with a header row. Reals use the shortest
/// round-trip decimal.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(std::size_t v);
  CsvWriter& operator<<(std::string_view v);
  void end_row();

  std::size_t rows() const noexcept { return rows_; }
  const std::filesystem::path& path() const noexcept { return path_; }
  void close();

 private:
  void sep();

  std::filesystem::path path_;
  std::ofstream out_;
  std::string line_;
  bool first_ = true;
  std::size_t rows_ = 0;
};

}  // namespace ils
