// SPDX-License-Identifier: Apache-2.0
#include "mimo_ae/fronthaul.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <zlib.h>

namespace mimo_ae {
namespace {

constexpr std::uint8_t kMagic[4] = {'M', 'A', 'E', 'F'};

void check_divisible(int M, int n_div, const char* who) {
  if (M < 1 || n_div < 1 || (2 * M) % n_div != 0) {
    std::ostringstream os;
    os << who << ": n_div=" << n_div << " must divide 2M=" << 2 * M;
    throw ConfigError(os.str());
  }
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
  return v;
}

void expect_kind(const WireFrame& f, FrameKind k) {
  if (f.kind != k)
    throw MalformedFrame(MalformedFrame::Reason::kBadKind,
                         "frame kind " + std::to_string(int(f.kind)) +
                             " where " + std::to_string(int(k)) + " expected");
}

std::uint32_t latent_size(const WireFrame& f) {
  if (f.M == 0 || f.n_div == 0 || (2 * f.M) % f.n_div != 0)
    throw MalformedFrame(MalformedFrame::Reason::kBadDims,
                         "inconsistent (M, n_div) in frame header");
  return 2 * f.M / f.n_div;
}

void expect_dims(const WireFrame& f, std::uint32_t rows, std::uint32_t cols) {
  if (f.rows != rows || f.cols != cols) {
    std::ostringstream os;
    os << "frame is " << f.rows << "x" << f.cols << ", expected " << rows
       << "x" << cols;
    throw MalformedFrame(MalformedFrame::Reason::kBadDims, os.str());
  }
}

}  // namespace

double BandwidthLedger::effective_factor() const {
  const auto t = transferred();
  return t == 0 ? 0.0
                : static_cast<double>(full_samples) / static_cast<double>(t);
}

BandwidthLedger& BandwidthLedger::operator+=(const BandwidthLedger& o) {
  full_samples += o.full_samples;
  latent_samples += o.latent_samples;
  overhead_samples += o.overhead_samples;
  return *this;
}

BandwidthLedger paper_sample_count(int M, int n_cbw, int n_slot, int n_div) {
  check_divisible(M, n_div, "paper_sample_count");
  const std::uint64_t d = 2ULL * static_cast<std::uint64_t>(M);
  BandwidthLedger l;
  l.mode = LedgerMode::kPaper;
  l.full_samples = d * n_cbw * n_slot;
  l.latent_samples = d * n_cbw * n_slot / n_div;
  l.overhead_samples = n_cbw * d / n_div;
  return l;
}

BandwidthLedger actual_sample_count(int M, int n_cbw, int n_slot, int n_div) {
  check_divisible(M, n_div, "actual_sample_count");
  const std::uint64_t d = 2ULL * static_cast<std::uint64_t>(M);
  const std::uint64_t latent = d / n_div;
  BandwidthLedger l;
  l.mode = LedgerMode::kActual;
  l.full_samples = d * n_cbw * n_slot;
  l.latent_samples = latent * n_cbw * n_slot;
  l.overhead_samples = d * latent + d + 2 * d;
  return l;
}

BandwidthLedger actual_sample_count(const AutoencoderModel& m, int n_cbw,
                                    int n_slot, int n_div) {
  require_dims(m.input_dim() % 2 == 0 && m.latent_dim() * n_div == m.input_dim(),
               "actual_sample_count: model shape does not match n_div");
  BandwidthLedger l = actual_sample_count(m.input_dim() / 2, n_cbw, n_slot, n_div);
  l.overhead_samples = static_cast<std::uint64_t>(
      m.w_dec.size() + m.b_dec.size() + m.feat_min.size() + m.feat_max.size());
  return l;
}

MalformedFrame::MalformedFrame(Reason r, const std::string& detail)
    : std::runtime_error("malformed frame (" + to_string(r) + "): " + detail),
      reason_(r) {}

std::string to_string(MalformedFrame::Reason r) {
  switch (r) {
    case MalformedFrame::Reason::kTruncated:
      return "truncated";
    case MalformedFrame::Reason::kBadMagic:
      return "bad magic";
    case MalformedFrame::Reason::kBadVersion:
      return "unsupported version";
    case MalformedFrame::Reason::kBadKind:
      return "bad kind";
    case MalformedFrame::Reason::kBadDims:
      return "bad dimensions";
    case MalformedFrame::Reason::kBadCrc:
      return "crc mismatch";
  }
  return "unknown";
}

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large payloads.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> serialize(const WireFrame& f) {
  if (f.payload.size() != static_cast<std::size_t>(f.rows) * f.cols)
    throw MalformedFrame(MalformedFrame::Reason::kBadDims,
                         "payload length does not equal rows * cols");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 4 * f.payload.size() + kCrcBytes);
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_le<std::uint16_t>(out, f.version);
  out.push_back(static_cast<std::uint8_t>(f.kind));
  put_le<std::uint64_t>(out, f.block_id);
  put_le<std::uint32_t>(out, f.rows);
  put_le<std::uint32_t>(out, f.cols);
  put_le<std::uint32_t>(out, f.M);
  put_le<std::uint32_t>(out, f.n_div);
  for (float v : f.payload) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  put_le<std::uint32_t>(out, crc32_ieee(out));
  return out;
}

WireFrame deserialize(std::span<const std::uint8_t> bytes,
                      std::size_t* consumed) {
  using R = MalformedFrame::Reason;
  if (bytes.size() < kHeaderBytes)
    throw MalformedFrame(R::kTruncated,
                         "header needs " + std::to_string(kHeaderBytes) +
                             " bytes, got " + std::to_string(bytes.size()));
  const std::uint8_t* p = bytes.data();
  if (std::memcmp(p, kMagic, 4) != 0)
    throw MalformedFrame(R::kBadMagic, "expected \"MAEF\"");
  WireFrame f;
  f.version = get_le<std::uint16_t>(p + 4);
  if (f.version != kWireVersion)
    throw MalformedFrame(R::kBadVersion, "version " + std::to_string(f.version));
  const std::uint8_t kind = p[6];
  if (kind < 1 || kind > 3)
    throw MalformedFrame(R::kBadKind, "kind " + std::to_string(kind));
  f.kind = static_cast<FrameKind>(kind);
  f.block_id = get_le<std::uint64_t>(p + 7);
  f.rows = get_le<std::uint32_t>(p + 15);
  f.cols = get_le<std::uint32_t>(p + 19);
  f.M = get_le<std::uint32_t>(p + 23);
  f.n_div = get_le<std::uint32_t>(p + 27);

  const std::uint64_t count = static_cast<std::uint64_t>(f.rows) * f.cols;
  const std::uint64_t total = kHeaderBytes + 4 * count + kCrcBytes;
  if (bytes.size() < total)
    throw MalformedFrame(R::kTruncated,
                         "frame needs " + std::to_string(total) +
                             " bytes, got " + std::to_string(bytes.size()));
  const std::size_t body = kHeaderBytes + 4 * count;
  const std::uint32_t stored = get_le<std::uint32_t>(p + body);
  const std::uint32_t actual = crc32_ieee(bytes.first(body));
  if (stored != actual) {
    std::ostringstream os;
    os << std::hex << "stored 0x" << stored << ", computed 0x" << actual;
    throw MalformedFrame(R::kBadCrc, os.str());
  }
  f.payload.resize(count);
  for (std::uint64_t i = 0; i < count; ++i)
    f.payload[i] =
        std::bit_cast<float>(get_le<std::uint32_t>(p + kHeaderBytes + 4 * i));
  if (consumed) *consumed = total;
  return f;
}

std::vector<WireFrame> deserialize_all(std::span<const std::uint8_t> bytes) {
  std::vector<WireFrame> frames;
  while (!bytes.empty()) {
    std::size_t used = 0;
    frames.push_back(deserialize(bytes, &used));
    bytes = bytes.subspan(used);
  }
  return frames;
}

void write_frames(const std::filesystem::path& path,
                  const std::vector<WireFrame>& frames) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  for (const auto& f : frames) {
    const auto bytes = serialize(f);
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  }
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<WireFrame> read_frames(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                        std::istreambuf_iterator<char>());
  return deserialize_all(bytes);
}

WireFrame to_frame(const LatentGrid& g, int M, int n_div) {
  check_divisible(M, n_div, "to_frame");
  require_dims(g.values.rows() == 2 * M / n_div,
               "to_frame: latent rows do not match 2M / n_div");
  WireFrame f;
  f.kind = FrameKind::kLatentGrid;
  f.block_id = g.block_id;
  f.rows = static_cast<std::uint32_t>(g.values.rows());
  f.cols = static_cast<std::uint32_t>(g.values.cols());
  f.M = static_cast<std::uint32_t>(M);
  f.n_div = static_cast<std::uint32_t>(n_div);
  f.payload.reserve(g.values.size());
  for (Eigen::Index i = 0; i < g.values.rows(); ++i)
    for (Eigen::Index j = 0; j < g.values.cols(); ++j)
      f.payload.push_back(static_cast<float>(g.values(i, j)));
  return f;
}

WireFrame to_frame(const DecoderPart& d, std::uint64_t block_id, int M,
                   int n_div) {
  check_divisible(M, n_div, "to_frame");
  const Eigen::Index in = 2 * M, lat = in / n_div;
  require_dims(d.w_dec.rows() == in && d.w_dec.cols() == lat &&
                   d.b_dec.size() == in && d.feat_min.size() == in &&
                   d.feat_max.size() == in,
               "to_frame: decoder part shape does not match (M, n_div)");
  WireFrame f;
  f.kind = FrameKind::kDecoderPart;
  f.block_id = block_id;
  f.rows = static_cast<std::uint32_t>(in);
  f.cols = static_cast<std::uint32_t>(lat + 3);
  f.M = static_cast<std::uint32_t>(M);
  f.n_div = static_cast<std::uint32_t>(n_div);
  f.payload.reserve(static_cast<std::size_t>(f.rows) * f.cols);
  for (Eigen::Index i = 0; i < in; ++i) {
    for (Eigen::Index j = 0; j < lat; ++j)
      f.payload.push_back(static_cast<float>(d.w_dec(i, j)));
    f.payload.push_back(static_cast<float>(d.b_dec(i)));
    f.payload.push_back(static_cast<float>(d.feat_min(i)));
    f.payload.push_back(static_cast<float>(d.feat_max(i)));
  }
  return f;
}

WireFrame to_frame(const EncoderPart& e, std::uint64_t block_id, int M,
                   int n_div) {
  check_divisible(M, n_div, "to_frame");
  const Eigen::Index in = 2 * M, lat = in / n_div;
  require_dims(e.w_enc.rows() == lat && e.w_enc.cols() == in &&
                   e.b_enc.size() == lat && e.feat_min.size() == in &&
                   e.feat_max.size() == in,
               "to_frame: encoder part shape does not match (M, n_div)");
  WireFrame f;
  f.kind = FrameKind::kEncoderPart;
  f.block_id = block_id;
  f.rows = static_cast<std::uint32_t>(lat + 2);
  f.cols = static_cast<std::uint32_t>(in + 1);
  f.M = static_cast<std::uint32_t>(M);
  f.n_div = static_cast<std::uint32_t>(n_div);
  f.payload.reserve(static_cast<std::size_t>(f.rows) * f.cols);
  for (Eigen::Index i = 0; i < lat; ++i) {
    for (Eigen::Index j = 0; j < in; ++j)
      f.payload.push_back(static_cast<float>(e.w_enc(i, j)));
    f.payload.push_back(static_cast<float>(e.b_enc(i)));
  }
  for (const RVector* v : {&e.feat_min, &e.feat_max}) {
    for (Eigen::Index j = 0; j < in; ++j)
      f.payload.push_back(static_cast<float>((*v)(j)));
    f.payload.push_back(0.0f);
  }
  return f;
}

LatentGrid latent_from_frame(const WireFrame& f) {
  expect_kind(f, FrameKind::kLatentGrid);
  if (f.rows != latent_size(f))
    throw MalformedFrame(MalformedFrame::Reason::kBadDims,
                         "latent rows do not equal 2M / n_div");
  LatentGrid g;
  g.block_id = f.block_id;
  g.values.resize(f.rows, f.cols);
  std::size_t k = 0;
  for (std::uint32_t i = 0; i < f.rows; ++i)
    for (std::uint32_t j = 0; j < f.cols; ++j) g.values(i, j) = f.payload[k++];
  return g;
}

DecoderPart decoder_from_frame(const WireFrame& f) {
  expect_kind(f, FrameKind::kDecoderPart);
  const std::uint32_t lat = latent_size(f), in = 2 * f.M;
  expect_dims(f, in, lat + 3);
  DecoderPart d;
  d.w_dec.resize(in, lat);
  d.b_dec.resize(in);
  d.feat_min.resize(in);
  d.feat_max.resize(in);
  std::size_t k = 0;
  for (std::uint32_t i = 0; i < in; ++i) {
    for (std::uint32_t j = 0; j < lat; ++j) d.w_dec(i, j) = f.payload[k++];
    d.b_dec(i) = f.payload[k++];
    d.feat_min(i) = f.payload[k++];
    d.feat_max(i) = f.payload[k++];
  }
  return d;
}

EncoderPart encoder_from_frame(const WireFrame& f) {
  expect_kind(f, FrameKind::kEncoderPart);
  const std::uint32_t lat = latent_size(f), in = 2 * f.M;
  expect_dims(f, lat + 2, in + 1);
  EncoderPart e;
  e.w_enc.resize(lat, in);
  e.b_enc.resize(lat);
  e.feat_min.resize(in);
  e.feat_max.resize(in);
  std::size_t k = 0;
  for (std::uint32_t i = 0; i < lat; ++i) {
    for (std::uint32_t j = 0; j < in; ++j) e.w_enc(i, j) = f.payload[k++];
    e.b_enc(i) = f.payload[k++];
  }
  for (RVector* v : {&e.feat_min, &e.feat_max}) {
    for (std::uint32_t j = 0; j < in; ++j) (*v)(j) = f.payload[k++];
    ++k;
  }
  return e;
}

Transferred transfer_block(const LatentGrid& latent, const DecoderPart& dec,
                           int M, int n_div, BandwidthLedger& ledger,
                           WirePrecision precision) {
  const WireFrame lf = to_frame(latent, M, n_div);
  const WireFrame df = to_frame(dec, latent.block_id, M, n_div);

  BandwidthLedger delta;
  delta.mode = LedgerMode::kActual;
  delta.full_samples = 2ULL * static_cast<std::uint64_t>(M) * lf.cols;
  delta.latent_samples = lf.payload.size();
  delta.overhead_samples = df.payload.size();

  Transferred out;
  if (precision == WirePrecision::kFloat32) {
    out.latent = latent_from_frame(deserialize(serialize(lf)));
    out.decoder = decoder_from_frame(deserialize(serialize(df)));
  } else {
    out.latent = latent;
    out.decoder = dec;
  }
  ledger += delta;
  return out;
}

}  // namespace mimo_ae
