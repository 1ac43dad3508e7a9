// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <numeric>

#include "frame_oracle.hpp"
#include "mimo_ae/fronthaul.hpp"
#include "test_util.hpp"

using namespace mimo_ae;

namespace {

AutoencoderModel random_model(int in, int lat, Rng& rng) {
  AutoencoderModel m = AutoencoderModel::zeros(in, lat);
  m.w_enc = testutil::random_real(lat, in, rng);
  m.b_enc = testutil::random_real(lat, 1, rng);
  m.w_dec = testutil::random_real(in, lat, rng);
  m.b_dec = testutil::random_real(in, 1, rng);
  m.feat_min = testutil::random_real(in, 1, rng, -2, -1);
  m.feat_max = testutil::random_real(in, 1, rng, 1, 2);
  return m;
}

RMatrix to_f32(const RMatrix& m) { return m.cast<float>().cast<double>(); }
RVector to_f32(const RVector& v) { return v.cast<float>().cast<double>(); }

}  // namespace

TEST_CASE("closed-form ledger") {
  const BandwidthLedger l = paper_sample_count(512, 12, 7, 8);
  CHECK(l.latent_samples == 10752);
  CHECK(l.overhead_samples == 1536);
  CHECK(l.transferred() == 12288);
  CHECK(l.full_samples == 86016);
  CHECK(l.effective_factor() == 7.0);
  CHECK(l.mode == LedgerMode::kPaper);

  CHECK(paper_sample_count(64, 12, 7, 1).effective_factor() ==
        doctest::Approx(0.875).epsilon(1e-15));
  CHECK(paper_sample_count(1024, 12, 7, 8).effective_factor() ==
        paper_sample_count(512, 12, 7, 8).effective_factor());
  for (int M : {8, 64, 512})
    for (int d : {1, 2, 4, 8, 16})
      for (int slot : {2, 7, 14})
        CHECK(paper_sample_count(M, 12, slot, d).effective_factor() ==
              doctest::Approx(static_cast<double>(slot) * d / (slot + 1)).epsilon(1e-14));
  CHECK_THROWS_AS(paper_sample_count(64, 12, 7, 3), ConfigError);
}

TEST_CASE("actual ledger") {
  const BandwidthLedger a = actual_sample_count(512, 12, 7, 8);
  CHECK(a.overhead_samples == 134144);
  CHECK(a.full_samples == 86016);
  CHECK(a.overhead_samples > a.full_samples);
  CHECK(a.latent_samples == paper_sample_count(512, 12, 7, 8).latent_samples);
  CHECK(actual_sample_count(64, 12, 7, 8).overhead_samples == 2432);
  auto rng = testutil::rng_for(40);
  CHECK(actual_sample_count(random_model(128, 16, rng), 12, 7, 8) ==
        actual_sample_count(64, 12, 7, 8));
}

TEST_CASE("ledger additivity and order independence") {
  std::vector<BandwidthLedger> parts;
  for (int d : {2, 4, 8, 16}) parts.push_back(actual_sample_count(64, 12, 7, d));
  BandwidthLedger fwd, rev;
  for (const auto& p : parts) fwd += p;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) rev += *it;
  CHECK(fwd == rev);
  std::uint64_t lat = 0;
  for (const auto& p : parts) lat += p.latent_samples;
  CHECK(fwd.latent_samples == lat);
}

TEST_CASE("frame round trip") {
  auto rng = testutil::rng_for(41);
  LatentGrid g{99, testutil::random_real(16, 84, rng, 0, 1)};
  const WireFrame f = to_frame(g, 64, 8);
  CHECK(f.rows == 16);
  CHECK(f.cols == 84);
  const auto bytes = serialize(f);
  CHECK(bytes.size() == kHeaderBytes + 4 * 16 * 84 + kCrcBytes);
  std::size_t used = 0;
  const WireFrame back = deserialize(bytes, &used);
  CHECK(used == bytes.size());
  CHECK(back == f);
  const LatentGrid g2 = latent_from_frame(back);
  CHECK(g2.block_id == 99);
  CHECK(g2.values == to_f32(g.values));
  CHECK(serialize(to_frame(g2, 64, 8)) == bytes);
}

TEST_CASE("model parts round trip") {
  auto rng = testutil::rng_for(42);
  const AutoencoderModel m = random_model(16, 4, rng);
  const auto [enc, dec] = split(m);
  const DecoderPart d2 = decoder_from_frame(deserialize(serialize(to_frame(dec, 5, 8, 4))));
  CHECK(d2.w_dec == to_f32(dec.w_dec));
  CHECK(d2.b_dec == to_f32(dec.b_dec));
  CHECK(d2.feat_min == to_f32(dec.feat_min));
  CHECK(d2.feat_max == to_f32(dec.feat_max));
  const EncoderPart e2 = encoder_from_frame(deserialize(serialize(to_frame(enc, 5, 8, 4))));
  CHECK(e2.w_enc == to_f32(enc.w_enc));
  CHECK(e2.b_enc == to_f32(enc.b_enc));
  CHECK(e2.feat_min == to_f32(enc.feat_min));
  CHECK(e2.feat_max == to_f32(enc.feat_max));
  CHECK_THROWS_AS(decoder_from_frame(to_frame(enc, 5, 8, 4)), MalformedFrame);
}

TEST_CASE("malformed frames") {
  WireFrame f;
  f.block_id = 3;
  f.rows = 2;
  f.cols = 3;
  f.M = 6;
  f.n_div = 6;
  f.payload = {1, 2, 3, 4, 5, 6};
  const auto good = serialize(f);
  auto reason = [](std::vector<std::uint8_t> b) {
    try {
      deserialize(b);
    } catch (const MalformedFrame& e) {
      return e.reason();
    }
    FAIL("no error");
    return MalformedFrame::Reason::kBadDims;
  };
  using R = MalformedFrame::Reason;
  auto flipped = good;
  flipped[kHeaderBytes + 2] ^= 0x40;
  CHECK(reason(flipped) == R::kBadCrc);
  CHECK(reason({good.begin(), good.begin() + 10}) == R::kTruncated);
  CHECK(reason({good.begin(), good.end() - 1}) == R::kTruncated);
  CHECK(reason({}) == R::kTruncated);
  auto magic = good;
  magic[0] = 'X';
  CHECK(reason(magic) == R::kBadMagic);
  auto ver = good;
  ver[4] = 2;
  CHECK(reason(ver) == R::kBadVersion);
  auto kind = good;
  kind[6] = 9;
  CHECK(reason(kind) == R::kBadKind);
}

TEST_CASE("layout matches an independent writer") {
  std::vector<float> payload(3 * 5);
  std::iota(payload.begin(), payload.end(), -7.25f);
  const auto ref = frame_oracle::write(2, 0x1122334455667788ULL, 3, 5, 64, 8, payload);
  WireFrame f;
  f.kind = FrameKind::kDecoderPart;
  f.block_id = 0x1122334455667788ULL;
  f.rows = 3;
  f.cols = 5;
  f.M = 64;
  f.n_div = 8;
  f.payload = payload;
  CHECK(serialize(f) == ref);
  CHECK(deserialize(ref) == f);
  // Header spot checks against the documented offsets.
  CHECK(std::memcmp(ref.data(), "MAEF", 4) == 0);
  CHECK(ref[4] == 1);
  CHECK(ref[5] == 0);
  CHECK(ref[6] == 2);
  CHECK(ref[7] == 0x88);
  CHECK(ref[14] == 0x11);
  CHECK(ref[15] == 3);
  CHECK(ref[19] == 5);
  CHECK(ref[23] == 64);
  CHECK(ref[27] == 8);
  const std::uint8_t check[] = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
  CHECK(crc32_ieee(check) == 0xcbf43926u);
  CHECK(frame_oracle::crc32_bitwise(check, 9) == 0xcbf43926u);
}

TEST_CASE("multi-frame files") {
  auto rng = testutil::rng_for(43);
  const AutoencoderModel m = random_model(8, 2, rng);
  const auto [enc, dec] = split(m);
  const std::vector<WireFrame> frames = {to_frame(enc, 1, 4, 4), to_frame(dec, 1, 4, 4)};
  const auto path = std::filesystem::temp_directory_path() / "mimo_ae_test_frames.maef";
  write_frames(path, frames);
  CHECK(read_frames(path) == frames);
  std::filesystem::remove(path);
  CHECK_THROWS(read_frames(path));
}

TEST_CASE("transfer_block") {
  auto rng = testutil::rng_for(44);
  const AutoencoderModel m = random_model(128, 16, rng);
  const auto [enc, dec] = split(m);
  LatentGrid g{7, testutil::random_real(16, 84, rng, 0, 1)};
  BandwidthLedger ledger;
  const Transferred t = transfer_block(g, dec, 64, 8, ledger);
  CHECK(t.latent.values == to_f32(g.values));
  CHECK(t.decoder.w_dec == to_f32(dec.w_dec));
  CHECK(ledger.latent_samples == 16 * 84);
  CHECK(ledger.overhead_samples == 128 * 19);
  CHECK(ledger.full_samples == 128 * 84);
  CHECK(ledger.latent_samples + ledger.overhead_samples ==
        actual_sample_count(64, 12, 7, 8).transferred());

  BandwidthLedger l64;
  const Transferred t64 = transfer_block(g, dec, 64, 8, l64, WirePrecision::kFloat64);
  CHECK(t64.latent.values == g.values);
  CHECK(l64 == ledger);
}
