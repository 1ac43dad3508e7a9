// SPDX-License-Identifier: Apache-2.0
//
// Radio-head to central-unit link model: the MAEF wire frame and the two
// bandwidth ledgers (closed-form sample arithmetic and actual parameter
// counts).
//
// Frame layout, all integers little-endian:
//   offset  size  field
//   0       4     magic "MAEF"
//   4       2     version (1)
//   6       1     kind (1 latent grid, 2 decoder part, 3 encoder part)
//   7       8     block_id
//   15      16    rows, cols, M, n_div (uint32 each)
//   31      4*rows*cols  payload, row-major IEEE-754 binary32
//   ...     4     CRC-32 (IEEE 802.3, as zlib crc32) over bytes [0, 31+payload)
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mimo_ae/autoencoder.hpp"
#include "mimo_ae/types.hpp"

namespace mimo_ae {

enum class LedgerMode { kPaper, kActual };

struct BandwidthLedger {
  std::uint64_t full_samples = 0;
  std::uint64_t latent_samples = 0;
  std::uint64_t overhead_samples = 0;
  LedgerMode mode = LedgerMode::kActual;

  std::uint64_t transferred() const { return latent_samples + overhead_samples; }
  /// full / (latent + overhead); 0 when nothing was transferred.
  double effective_factor() const;

  BandwidthLedger& operator+=(const BandwidthLedger& o);
  bool operator==(const BandwidthLedger&) const = default;
};

/// Closed-form count per coherence block: latent 2M n_cbw n_slot / n_div,
/// overhead n_cbw 2M / n_div. Throws ConfigError unless n_div divides 2M.
BandwidthLedger paper_sample_count(int M, int n_cbw, int n_slot, int n_div);

/// Per-block count with the decoder weights, biases and both scaling vectors
/// shipped as overhead.
BandwidthLedger actual_sample_count(int M, int n_cbw, int n_slot, int n_div);
BandwidthLedger actual_sample_count(const AutoencoderModel& m, int n_cbw,
                                    int n_slot, int n_div);

inline constexpr std::uint16_t kWireVersion = 1;
inline constexpr std::size_t kHeaderBytes = 31;
inline constexpr std::size_t kCrcBytes = 4;

enum class FrameKind : std::uint8_t {
  kLatentGrid = 1,
  kDecoderPart = 2,
  kEncoderPart = 3,
};

struct WireFrame {
  FrameKind kind = FrameKind::kLatentGrid;
  std::uint16_t version = kWireVersion;
  std::uint64_t block_id = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t M = 0;
  std::uint32_t n_div = 0;
  std::vector<float> payload;  // row-major, rows * cols

  bool operator==(const WireFrame&) const = default;
};

class MalformedFrame : public std::runtime_error {
 public:
  enum class Reason { kTruncated, kBadMagic, kBadVersion, kBadKind, kBadDims, kBadCrc };

  MalformedFrame(Reason r, const std::string& detail);
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

std::string to_string(MalformedFrame::Reason r);

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize(const WireFrame& f);
/// Parses one frame from the front of `bytes`; `consumed` receives its size.
WireFrame deserialize(std::span<const std::uint8_t> bytes,
                      std::size_t* consumed = nullptr);

/// Concatenated frames (.maef files).
std::vector<WireFrame> deserialize_all(std::span<const std::uint8_t> bytes);
void write_frames(const std::filesystem::path& path,
                  const std::vector<WireFrame>& frames);
std::vector<WireFrame> read_frames(const std::filesystem::path& path);

// Payload packing per kind (L = 2M / n_div latent size, D = 2M):
//   latent grid:  rows = L,     cols = n_re
//   decoder part: rows = D,     cols = L + 3   [w_dec row | b_dec | min | max]
//   encoder part: rows = L + 2, cols = D + 1   [w_enc row | b_enc] per latent
//                 unit, then [feat_min | 0] and [feat_max | 0]
WireFrame to_frame(const LatentGrid& g, int M, int n_div);
WireFrame to_frame(const DecoderPart& d, std::uint64_t block_id, int M,
                   int n_div);
WireFrame to_frame(const EncoderPart& e, std::uint64_t block_id, int M,
                   int n_div);
LatentGrid latent_from_frame(const WireFrame& f);
DecoderPart decoder_from_frame(const WireFrame& f);
EncoderPart encoder_from_frame(const WireFrame& f);

enum class WirePrecision { kFloat32, kFloat64 };

struct Transferred {
  LatentGrid latent;
  DecoderPart decoder;
};

/// Sends the latent grid and decoder part over the simulated link and adds
/// rows * cols of each payload to `ledger` (latent and overhead counts).
/// kFloat32 round-trips through the wire format; kFloat64 leaves values
/// untouched and only does the accounting.
Transferred transfer_block(const LatentGrid& latent, const DecoderPart& dec,
                           int M, int n_div, BandwidthLedger& ledger,
                           WirePrecision precision = WirePrecision::kFloat32);

}  // namespace mimo_ae
