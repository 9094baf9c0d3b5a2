#include "osval/bundle.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "osval/error.hpp"

namespace osval {

namespace {

constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8;

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bytes_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
    }
  }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v)); }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }

  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  template <typename U>
  U le(const char* field) {
    need(sizeof(U), field);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return v;
  }
  std::uint8_t u8(const char* field) { return le<std::uint8_t>(field); }
  std::uint32_t u32(const char* field) { return le<std::uint32_t>(field); }
  std::uint64_t u64(const char* field) { return le<std::uint64_t>(field); }
  std::int64_t i64(const char* field) { return static_cast<std::int64_t>(le<std::uint64_t>(field)); }
  float f32(const char* field) { return std::bit_cast<float>(le<std::uint32_t>(field)); }
  double f64(const char* field) { return std::bit_cast<double>(le<std::uint64_t>(field)); }

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* field) const {
    if (remaining() < n) {
      throw Error(Errc::LengthMismatch, what_ + ": truncated at field '" + field + "'");
    }
  }

 private:
  const std::vector<unsigned char>& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + file.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

void spill(const std::filesystem::path& file, const std::vector<unsigned char>& bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + file.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, "short write to " + file.string());
}

std::string_view kind_token(SampleKind k) {
  return k == SampleKind::Genuine ? "genuine" : "skilled_forgery";
}

template <typename T>
T parse_int(std::string_view s, std::size_t row, const char* field) {
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw Error(Errc::ManifestMismatch, "row " + std::to_string(row) + ": field '" + field +
                                            "' is not an integer: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void write_bundle(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());

  ByteWriter w;
  w.raw("FBND", 4);
  w.u32(kBundleVersion);
  w.u64(ds.size());
  w.u64(ds.dim());
  for (float v : ds.matrix()) w.f32(v);
  spill(dir / kBundleMatrixFile, w.bytes());

  std::ostringstream manifest;
  for (const auto& rec : ds.records()) {
    if (rec.source.find_first_of("\t\r\n") != std::string::npos) {
      throw Error(Errc::InvalidArgument,
                  "source tag of sample " + std::to_string(rec.id) + " contains a tab or newline");
    }
    manifest << rec.id << '\t' << rec.user << '\t' << kind_token(rec.kind) << '\t' << rec.source
             << '\n';
  }
  const std::string text = manifest.str();
  spill(dir / kBundleManifestFile, std::vector<unsigned char>(text.begin(), text.end()));
}

Dataset read_bundle(const std::filesystem::path& dir) {
  const auto bytes = slurp(dir / kBundleMatrixFile);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "FBND", 4) != 0) {
    throw Error(Errc::BadMagic, (dir / kBundleMatrixFile).string() + ": magic is not 'FBND'");
  }
  ByteReader r(bytes, (dir / kBundleMatrixFile).string());
  r.u32("magic");
  const auto version = r.u32("version");
  if (version != kBundleVersion) {
    throw Error(Errc::VersionUnsupported, "bundle version " + std::to_string(version) +
                                              ", supported " + std::to_string(kBundleVersion));
  }
  const auto n = r.u64("n_samples");
  const auto dim = r.u64("dim");
  if (dim != 0 && n > (bytes.size() / 4) / dim + 1) {
    throw Error(Errc::LengthMismatch, "header n_samples=" + std::to_string(n) + ", dim=" +
                                          std::to_string(dim) + " exceeds file size " +
                                          std::to_string(bytes.size()));
  }
  const std::uint64_t expected = 4 * n * dim;
  if (r.remaining() != expected) {
    throw Error(Errc::LengthMismatch, "matrix: expected " + std::to_string(expected) +
                                          " bytes for n_samples=" + std::to_string(n) +
                                          ", dim=" + std::to_string(dim) + ", found " +
                                          std::to_string(r.remaining()));
  }
  std::vector<float> matrix(n * dim);
  for (auto& v : matrix) v = r.f32("matrix");

  const auto mbytes = slurp(dir / kBundleManifestFile);
  std::string_view text(reinterpret_cast<const char*>(mbytes.data()), mbytes.size());
  std::vector<SampleRecord> records;
  records.reserve(n);
  std::size_t row = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() && text.empty()) break;
    if (row >= n) {
      throw Error(Errc::ManifestMismatch, "row " + std::to_string(row) +
                                              ": manifest has more rows than n_samples=" +
                                              std::to_string(n));
    }
    std::array<std::string_view, 4> fields;
    std::size_t nf = 0;
    std::string_view rest = line;
    while (nf < 3) {
      const auto tab = rest.find('\t');
      if (tab == std::string_view::npos) break;
      fields[nf++] = rest.substr(0, tab);
      rest = rest.substr(tab + 1);
    }
    if (nf != 3) {
      throw Error(Errc::ManifestMismatch,
                  "row " + std::to_string(row) + ": expected 4 tab-separated fields");
    }
    fields[3] = rest;

    SampleRecord rec;
    rec.id = parse_int<SampleId>(fields[0], row, "sample_id");
    rec.user = parse_int<UserId>(fields[1], row, "user_id");
    if (fields[2] == "genuine") {
      rec.kind = SampleKind::Genuine;
    } else if (fields[2] == "skilled_forgery") {
      rec.kind = SampleKind::SkilledForgery;
    } else {
      throw Error(Errc::ManifestMismatch, "row " + std::to_string(row) + ": field 'kind' is '" +
                                              std::string(fields[2]) + "'");
    }
    rec.source = std::string(fields[3]);
    records.push_back(std::move(rec));
    ++row;
  }
  if (row != n) {
    throw Error(Errc::ManifestMismatch, "row " + std::to_string(row) + ": manifest ends after " +
                                            std::to_string(row) + " rows, n_samples=" +
                                            std::to_string(n));
  }
  return Dataset(std::move(records), std::move(matrix), dim);
}

void write_model(const SvmModel& m, const std::filesystem::path& file) {
  ByteWriter w;
  w.raw("SVMM", 4);
  w.u32(kModelVersion);
  w.u8(static_cast<std::uint8_t>(m.kernel.kind));
  w.f64(m.kernel.gamma);
  w.u64(m.dim);
  w.f64(m.bias);
  w.f64(m.c_pos);
  w.f64(m.c_neg);
  w.u64(m.support_ids.size());
  for (std::size_t i = 0; i < m.support_ids.size(); ++i) {
    w.i64(m.support_ids[i]);
    w.f64(m.dual_coeffs[i]);
    for (double v : m.support_vector(i)) w.f64(v);
  }
  w.u8(m.platt ? 1 : 0);
  if (m.platt) {
    w.f64(m.platt->a);
    w.f64(m.platt->b);
    w.u8(m.platt->degenerate ? 1 : 0);
  }
  w.u64(m.stats.iterations);
  w.u8(m.stats.converged ? 1 : 0);
  w.f64(m.stats.max_violation);
  w.f64(m.stats.dual_objective);
  spill(file, w.bytes());
}

SvmModel read_model(const std::filesystem::path& file) {
  const auto bytes = slurp(file);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "SVMM", 4) != 0) {
    throw Error(Errc::BadMagic, file.string() + ": magic is not 'SVMM'");
  }
  ByteReader r(bytes, file.string());
  r.u32("magic");
  const auto version = r.u32("version");
  if (version != kModelVersion) {
    throw Error(Errc::VersionUnsupported, "model version " + std::to_string(version));
  }
  SvmModel m;
  const auto kind = r.u8("kernel");
  if (kind > static_cast<std::uint8_t>(KernelKind::Rbf)) {
    throw Error(Errc::Parse, file.string() + ": unknown kernel kind " + std::to_string(kind));
  }
  m.kernel.kind = static_cast<KernelKind>(kind);
  m.kernel.gamma = r.f64("gamma");
  m.dim = r.u64("dim");
  m.bias = r.f64("bias");
  m.c_pos = r.f64("c_pos");
  m.c_neg = r.f64("c_neg");
  const auto n_sv = r.u64("n_support");
  r.need(n_sv * (16 + 8 * m.dim), "support");
  for (std::uint64_t i = 0; i < n_sv; ++i) {
    m.support_ids.push_back(r.i64("support_id"));
    m.dual_coeffs.push_back(r.f64("dual_coeff"));
    for (std::size_t k = 0; k < m.dim; ++k) m.support_vectors.push_back(r.f64("support_vector"));
  }
  if (r.u8("platt")) {
    PlattParams p;
    p.a = r.f64("platt_a");
    p.b = r.f64("platt_b");
    p.degenerate = r.u8("platt_degenerate") != 0;
    m.platt = p;
  }
  m.stats.iterations = r.u64("iterations");
  m.stats.converged = r.u8("converged") != 0;
  m.stats.max_violation = r.f64("max_violation");
  m.stats.dual_objective = r.f64("dual_objective");
  if (r.remaining() != 0) {
    throw Error(Errc::LengthMismatch, file.string() + ": " + std::to_string(r.remaining()) +
                                          " trailing bytes");
  }
  return m;
}

}  // namespace osval
