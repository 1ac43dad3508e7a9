// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mimo_ae/detectors.hpp"
#include "mimo_ae/signal_model.hpp"
#include "test_util.hpp"

using namespace mimo_ae;
using testutil::random_complex;

TEST_CASE("matched filter") {
  auto rng = testutil::rng_for(30);
  const CMatrix Y = random_complex(4, 6, rng);
  CHECK(matched_filter(CMatrix::Identity(4, 4), Y) == Y);

  const CMatrix h = random_complex(5, 1, rng);
  CHECK(std::abs(matched_filter(h, h)(0, 0) - h.squaredNorm()) < 1e-12);

  const CMatrix H = random_complex(16, 4, rng);
  const CMatrix Y2 = random_complex(16, 7, rng);
  CHECK((matched_filter(H, Y2) - testutil::naive_adjoint_product(H, Y2))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("gram") {
  auto rng = testutil::rng_for(31);
  Eigen::HouseholderQR<CMatrix> qr(random_complex(8, 3, rng));
  const CMatrix Q = qr.householderQ() * CMatrix::Identity(8, 3);
  CHECK((gram(Q) - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

  const CMatrix h = random_complex(6, 1, rng);
  CHECK(std::abs(gram(h)(0, 0) - h.squaredNorm()) < 1e-12);

  const CMatrix H = random_complex(64, 8, rng);
  const CMatrix A = gram(H);
  CHECK((A - A.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((A - testutil::naive_adjoint_product(H, H)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("MRC") {
  auto rng = testutil::rng_for(32);
  SUBCASE("orthogonal columns") {
    CMatrix H = CMatrix::Zero(4, 2);
    H(0, 0) = 2.0;
    H(1, 0) = Complex(0, 1);
    H(2, 1) = 3.0;
    const CMatrix S = random_complex(2, 5, rng);
    CHECK((mrc_detect(H, H * S).s_hat - S).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("single user") {
    const CMatrix h = random_complex(8, 1, rng);
    const CMatrix S = random_complex(1, 3, rng);
    CHECK((mrc_detect(h, h * S).s_hat - S).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("two correlated users, closed form") {
    // h1 = [1, 0], h2 = [1, 1]: A = [[1, 1], [1, 2]], D = diag(1, 2).
    CMatrix H(2, 2);
    H << 1, 1, 0, 1;
    CMatrix S(2, 1);
    S << Complex(1, 0), Complex(0, 1);
    const CMatrix got = mrc_detect(H, H * S).s_hat;
    // s_hat = D^-1 A s = [s1 + s2, (s1 + 2 s2) / 2]
    CHECK(std::abs(got(0, 0) - Complex(1, 1)) < 1e-14);
    CHECK(std::abs(got(1, 0) - Complex(0.5, 1)) < 1e-14);
    CHECK((got - S).norm() > 0.5);
  }
}

TEST_CASE("exact zero forcing") {
  auto rng = testutil::rng_for(33);
  const CMatrix H = random_complex(64, 8, rng);
  const CMatrix S = random_complex(8, 10, rng);
  CHECK((zf_exact(H, H * S).s_hat - S).cwiseAbs().maxCoeff() < 1e-10);

  const CMatrix Y = random_complex(6, 4, rng);
  CHECK((zf_exact(CMatrix::Identity(6, 6), Y).s_hat - Y).cwiseAbs().maxCoeff() < 1e-14);

  for (int t = 0; t < 10; ++t) {
    const CMatrix Ht = random_complex(32, 6, rng);
    const CMatrix Yt = random_complex(32, 5, rng);
    CHECK((zf_exact(Ht, Yt).s_hat - testutil::ls_oracle(Ht, Yt))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }

  CMatrix rank1(4, 2);
  rank1.col(0) = random_complex(4, 1, rng);
  rank1.col(1) = rank1.col(0);
  CHECK_THROWS_AS(zf_exact(rank1, random_complex(4, 1, rng)), SingularityError);
}

TEST_CASE("Gauss-Seidel") {
  auto rng = testutil::rng_for(34);
  SUBCASE("diagonal Gram is exact after one sweep") {
    CMatrix H = CMatrix::Zero(6, 3);
    H(0, 0) = 2;
    H(2, 1) = Complex(1, 1);
    H(5, 2) = 0.5;
    const CMatrix Y = random_complex(6, 4, rng);
    CHECK((gs_detect(H, Y, 1).s_hat - zf_exact(H, Y).s_hat).cwiseAbs().maxCoeff() <
          1e-14);
  }
  SUBCASE("5 sweeps near ZF, median over 100 trials") {
    std::vector<double> errs;
    for (int t = 0; t < 100; ++t) {
      const CMatrix H = random_complex(64, 8, rng);
      const CMatrix Y = random_complex(64, 1, rng);
      const CMatrix zf = zf_exact(H, Y).s_hat;
      errs.push_back((gs_detect(H, Y, 5).s_hat - zf).norm() / zf.norm());
    }
    std::nth_element(errs.begin(), errs.begin() + 50, errs.end());
    CHECK(errs[50] < 1e-2);
  }
  SUBCASE("converges on diagonally dominant systems") {
    const CMatrix H = random_complex(128, 4, rng);
    const CMatrix Y = random_complex(128, 3, rng);
    CHECK((gs_detect(H, Y, 100).s_hat - zf_exact(H, Y).s_hat).cwiseAbs().maxCoeff() <
          1e-8);
  }
  SUBCASE("200 sweeps match ZF when the spectral radius is below one") {
    for (int t = 0; t < 10; ++t) {
      const CMatrix H = random_complex(64, 8, rng);
      const CMatrix Y = random_complex(64, 2, rng);
      if (gs_spectral_radius(gram(H)) >= 1.0) continue;
      const CMatrix zf = zf_exact(H, Y).s_hat;
      CHECK((gs_detect(H, Y, 200).s_hat - zf).norm() / zf.norm() < 1e-8);
    }
  }
  SUBCASE("spectral radius of a diagonal system is zero") {
    CHECK(gs_spectral_radius(CMatrix::Identity(3, 3)) == doctest::Approx(0.0));
  }
}

TEST_CASE("cluster partition") {
  auto rng = testutil::rng_for(35);
  const CMatrix H = random_complex(512, 8, rng);
  const CMatrix Y = random_complex(512, 3, rng);
  const ClusterPartition one = partition_clusters(H, Y, 1);
  REQUIRE(one.channels.size() == 1);
  CHECK(one.channels[0] == H);
  CHECK(one.received[0] == Y);

  const ClusterPartition four = partition_clusters(H, Y, 4);
  REQUIRE(four.channels.size() == 4);
  CMatrix restack(512, 8);
  CMatrix gsum = CMatrix::Zero(8, 8), mfsum = CMatrix::Zero(8, 3);
  for (int c = 0; c < 4; ++c) {
    CHECK(four.channels[c].rows() == 128);
    restack.middleRows(128 * c, 128) = four.channels[c];
    gsum += gram(four.channels[c]);
    mfsum += matched_filter(four.channels[c], four.received[c]);
  }
  CHECK(restack == H);
  CHECK((gsum - gram(H)).cwiseAbs().maxCoeff() < 1e-12 * gram(H).cwiseAbs().maxCoeff());
  CHECK((mfsum - matched_filter(H, Y)).cwiseAbs().maxCoeff() < 1e-11);
  CHECK_THROWS_AS(partition_clusters(H, Y, 3), ConfigError);
}

TEST_CASE("ADMM-GS") {
  auto rng = testutil::rng_for(36);
  SUBCASE("one cluster with rho = 0 is Gauss-Seidel") {
    for (int t = 0; t < 20; ++t) {
      const CMatrix H = random_complex(64, 8, rng);
      const CMatrix Y = random_complex(64, 4, rng);
      for (auto [outer, inner] : {std::pair{5, 1}, std::pair{1, 5}}) {
        const CMatrix a =
            admm_gs_detect(partition_clusters(H, Y, 1, 0.0, outer, inner)).s_hat;
        CHECK((a - gs_detect(H, Y, 5).s_hat).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
  SUBCASE("four clusters recover noiseless symbols") {
    for (int t = 0; t < 5; ++t) {
      const CMatrix H = random_complex(64, 8, rng);
      const CMatrix S = random_complex(8, 6, rng);
      const CMatrix got =
          admm_gs_detect(partition_clusters(H, H * S, 4, 1.0, 50, 1)).s_hat;
      CHECK((got - S).cwiseAbs().maxCoeff() < 1e-3);
    }
  }
  SUBCASE("consensus residual non-increasing after burn-in") {
    for (int t = 0; t < 20; ++t) {
      const CMatrix H = random_complex(64, 8, rng);
      const CMatrix Y = random_complex(64, 4, rng);
      AdmmTrace tr;
      admm_gs_detect(partition_clusters(H, Y, 4, 1.0, 20, 1), &tr);
      REQUIRE(tr.consensus_residual.size() == 20);
      for (std::size_t i = 4; i < tr.consensus_residual.size(); ++i)
        CHECK(tr.consensus_residual[i] <= tr.consensus_residual[i - 1] * (1 + 1e-12));
    }
  }
  SUBCASE("rho = 0 with several clusters is rejected") {
    const CMatrix H = random_complex(64, 8, rng);
    CHECK_THROWS_AS(admm_gs_detect(partition_clusters(H, H, 4, 0.0)), ConfigError);
  }
}

TEST_CASE("detectors act column by column") {
  auto rng = testutil::rng_for(37);
  const CMatrix H = random_complex(64, 8, rng);
  const CMatrix Y = random_complex(64, 12, rng);
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[2], perm[7]);
  CMatrix Yp(64, 12);
  for (int j = 0; j < 12; ++j) Yp.col(j) = Y.col(perm[j]);
  auto check = [&](const CMatrix& a, const CMatrix& b) {
    for (int j = 0; j < 12; ++j)
      CHECK((b.col(j) - a.col(perm[j])).cwiseAbs().maxCoeff() < 1e-13);
  };
  check(mrc_detect(H, Y).s_hat, mrc_detect(H, Yp).s_hat);
  check(zf_exact(H, Y).s_hat, zf_exact(H, Yp).s_hat);
  check(gs_detect(H, Y, 5).s_hat, gs_detect(H, Yp, 5).s_hat);
  check(admm_gs_detect(partition_clusters(H, Y, 4)).s_hat,
        admm_gs_detect(partition_clusters(H, Yp, 4)).s_hat);
}

TEST_CASE("EVM") {
  auto rng = testutil::rng_for(38);
  const CMatrix S = random_complex(4, 10, rng);
  CHECK(evm_percent(S, S) == 0.0);
  CHECK(evm_percent(CMatrix(2.0 * S), S) == doctest::Approx(100.0).epsilon(1e-14));
  CMatrix one(1, 1), est(1, 1);
  one << Complex(1, 0);
  est << Complex(1, 0.1);
  CHECK(evm_percent(est, one) == doctest::Approx(10.0).epsilon(1e-12));

  EvmAccumulator acc;
  acc.add(est, one);
  acc.add(one, one);
  CHECK(acc.percent() == doctest::Approx(100.0 * std::sqrt(0.01 / 2)).epsilon(1e-12));
  CHECK_THROWS(EvmAccumulator{}.percent());
}

TEST_CASE("EVM grows with noise") {
  SystemConfig cfg;
  const CoherenceBlock clean =
      build_coherence_block(cfg, std::numeric_limits<double>::infinity(), 0);
  const double e0 = evm_percent(gs_detect(clean.channel, clean.rx.entries, 5).s_hat,
                                clean.tx.entries);
  std::vector<double> noisy;
  auto rng = testutil::rng_for(39);
  for (int t = 0; t < 30; ++t) {
    const CMatrix n = random_complex(cfg.M, cfg.n_re(), rng) * std::sqrt(0.1);
    noisy.push_back(evm_percent(
        gs_detect(clean.channel, CMatrix(clean.rx.entries + n), 5).s_hat,
        clean.tx.entries));
  }
  std::nth_element(noisy.begin(), noisy.begin() + 15, noisy.end());
  CHECK(e0 <= noisy[15]);
}
