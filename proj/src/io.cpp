#include "ils/io.hpp"

#include <array>
#include <bit>
#include <cstring>

#include "ils/config.hpp"

namespace ils {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes little endian");

constexpr std::array<char, 8> kMagic = {'I', 'L', 'S', 'S', 'N', 'A', 'P', '\0'};

template <typename T>
void put(std::string& buf, const T& v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

void put_vec(std::string& buf, const std::vector<double>& v) {
  buf.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::vector<double> get_vec(std::size_t n) {
    need(n * sizeof(double));
    std::vector<double> v(n);
    std::memcpy(v.data(), data_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t bytes) const {
    if (data_.size() - pos_ < bytes) throw SnapshotError("snapshot file is truncated");
  }

  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

void save_snapshot(const std::filesystem::path& path, const EnsembleState& state,
                   const TangentState* tangent, long long steps) {
  const std::uint64_t n = state.size();
  if (tangent && tangent->size() != n) throw DimensionError("snapshot: tangent size differs");
  std::string buf;
  buf.append(kMagic.data(), kMagic.size());
  put(buf, kSnapshotVersion);
  put(buf, n);
  put(buf, state.t);
  put_vec(buf, state.x);
  put_vec(buf, state.y);
  put_vec(buf, state.z);
  put(buf, static_cast<std::int64_t>(steps));
  put(buf, static_cast<std::uint8_t>(tangent ? 1 : 0));
  if (tangent) {
    put(buf, tangent->log_accum);
    put(buf, tangent->t0);
    put(buf, tangent->initial_full_norm);
    put_vec(buf, tangent->xi.x);
    put_vec(buf, tangent->xi.y);
    put_vec(buf, tangent->xi.z);
  }
  write_atomic(path, buf);
}

Snapshot load_snapshot(const std::filesystem::path& path, std::optional<std::size_t> expected_n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open snapshot '" + path.string() + "'");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(data));

  std::array<char, 8> magic{};
  for (auto& c : magic) c = r.get<char>();
  if (magic != kMagic) throw SnapshotError("not a snapshot file: '" + path.string() + "'");
  const auto version = r.get<std::uint32_t>();
  if (version != kSnapshotVersion) {
    throw SnapshotError("snapshot version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kSnapshotVersion) + ")");
  }
  const auto n = r.get<std::uint64_t>();
  if (expected_n && n != *expected_n) {
    throw SnapshotError("snapshot holds N=" + std::to_string(n) + " oscillators, expected N=" +
                        std::to_string(*expected_n));
  }
  if (n > (std::uint64_t{1} << 32)) throw SnapshotError("snapshot header is corrupt");

  Snapshot s;
  s.state.t = r.get<double>();
  s.state.x = r.get_vec(n);
  s.state.y = r.get_vec(n);
  s.state.z = r.get_vec(n);
  s.steps = r.get<std::int64_t>();
  const auto has_tangent = r.get<std::uint8_t>();
  if (has_tangent > 1) throw SnapshotError("snapshot header is corrupt");
  if (has_tangent) {
    TangentState ts;
    ts.log_accum = r.get<double>();
    ts.t0 = r.get<double>();
    ts.initial_full_norm = r.get<double>();
    ts.xi.x = r.get_vec(n);
    ts.xi.y = r.get_vec(n);
    ts.xi.z = r.get_vec(n);
    s.tangent = std::move(ts);
  }
  if (!r.done()) throw SnapshotError("snapshot has trailing bytes");
  return s;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header)
    : path_(path), out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
  for (auto h : header) *this << h;
  out_ << line_ << '\n';
  line_.clear();
  first_ = true;
}

void CsvWriter::sep() {
  if (!first_) line_ += ',';
  first_ = false;
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  line_ += format_real(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::size_t v) {
  sep();
  line_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view v) {
  sep();
  line_ += v;
  return *this;
}

void CsvWriter::end_row() {
  out_ << line_ << '\n';
  line_.clear();
  first_ = true;
  ++rows_;
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw std::runtime_error("write failed for '" + path_.string() + "'");
}

}  // namespace ils
