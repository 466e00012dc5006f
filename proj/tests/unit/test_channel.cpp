// Copyright 2026 The mimoadv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mimoadv/channel.hpp"
#include "mimoadv/errors.hpp"
#include "reference.hpp"

namespace mimoadv {
namespace {

struct Drop {
  NetworkConfig config;
  CellLayout layout;
  UePositions users;
  LargeScaleFading fading;
};

Drop make_drop(std::uint64_t index, NetworkConfig config = {}) {
  Drop d;
  d.config = config;
  d.layout = build_geometry(config);
  Rng rng = make_rng(21, StreamKind::kUserDrop, index);
  d.users = drop_users(config, d.layout, rng);
  d.fading = compute_fading(config, d.layout, d.users);
  return d;
}

TEST(Channel, PathlossHandValues) {
  NetworkConfig c;
  EXPECT_NEAR(pathloss_db(c, 100.0), -110.5, 1e-12);
  EXPECT_NEAR(pathloss_db(c, 1000.0), -148.1, 1e-12);
  EXPECT_NEAR(pathloss(c, 100.0), std::pow(10.0, -11.05), 1e-24);
  EXPECT_THROW(pathloss_db(c, 9.99), ValidationError);
  EXPECT_NO_THROW(pathloss_db(c, 10.0));
}

TEST(Channel, FadingMatchesPathlossOfEveryLink) {
  const Drop d = make_drop(0);
  for (int l = 0; l < 4; ++l)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 5; ++k) {
        const double dist = distance(d.layout.base_stations[static_cast<std::size_t>(l)], d.users.user(j, k, 5));
        EXPECT_DOUBLE_EQ(d.fading(l, j, k), pathloss(d.config, dist));
      }
}

TEST(Channel, ClosedFormMatchesTermByTermReference) {
  for (std::uint64_t n = 0; n < 5; ++n) {
    const Drop d = make_drop(n);
    const GainTable got = mr_gains_closed_form(d.fading, d.config);
    const GainTable ref = testing::reference_mr_gains(d.fading, d.config);
    for (std::size_t i = 0; i < got.a.size(); ++i) EXPECT_NEAR(got.a[i], ref.a[i], 1e-12 * ref.a[i]);
    for (std::size_t i = 0; i < got.b.size(); ++i) EXPECT_NEAR(got.b[i], ref.b[i], 1e-12 * ref.b[i]);
  }
}

TEST(Channel, PerfectCsiGivesArrayGainAndPlainInterference) {
  NetworkConfig c;
  c.csi = CsiModel::kPerfect;
  const Drop d = make_drop(1, c);
  const GainTable t = mr_gains_closed_form(d.fading, c);
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 5; ++k) {
      EXPECT_DOUBLE_EQ(t.a_at(j, k), c.antennas * d.fading(j, j, k));
      for (int l = 0; l < 4; ++l)
        for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(t.b_at(l, i, j, k), d.fading(l, j, k));
    }
}

TEST(Channel, MonteCarloAgreesWithClosedFormStatistically) {
  NetworkConfig c;
  c.users_per_cell = 2;
  c.grid_cols = 1;
  const Drop d = make_drop(2, c);
  MonteCarloOptions mc;
  mc.num_draws = 8000;
  mc.seed = 5;
  const GainTable est = monte_carlo_gains(d.fading, c, Precoder::kMr, mc);
  const GainTable exact = mr_gains_closed_form(d.fading, c);
  int beyond4 = 0;
  for (std::size_t i = 0; i < est.a.size(); ++i) {
    ASSERT_GT(est.a_std_error[i], 0.0);
    beyond4 += std::abs(est.a[i] - exact.a[i]) > 4.0 * est.a_std_error[i];
  }
  for (std::size_t i = 0; i < est.b.size(); ++i) {
    ASSERT_GT(est.b_std_error[i], 0.0);
    beyond4 += std::abs(est.b[i] - exact.b[i]) > 4.0 * est.b_std_error[i];
  }
  EXPECT_EQ(beyond4, 0);
}

TEST(Channel, MonteCarloIsThreadCountInvariant) {
  const Drop d = make_drop(3);
  MonteCarloOptions one;
  one.num_draws = 1000;
  one.block_size = 100;
  MonteCarloOptions many = one;
  many.threads = 3;
  for (Precoder p : {Precoder::kMr, Precoder::kMmmse}) {
    const GainTable a = monte_carlo_gains(d.fading, d.config, p, one);
    const GainTable b = monte_carlo_gains(d.fading, d.config, p, many);
    EXPECT_EQ(a.a, b.a);
    EXPECT_EQ(a.b, b.b);
    EXPECT_EQ(a.b_std_error, b.b_std_error);
  }
}

TEST(Channel, MonteCarloRequiresEnoughDraws) {
  const Drop d = make_drop(0);
  MonteCarloOptions mc;
  mc.num_draws = 999;
  EXPECT_THROW(monte_carlo_gains(d.fading, d.config, Precoder::kMr, mc), ValidationError);
}

TEST(Channel, MmmseGainsAreSane) {
  const Drop d = make_drop(4);
  MonteCarloOptions mc;
  mc.num_draws = 1000;
  const GainTable t = monte_carlo_gains(d.fading, d.config, Precoder::kMmmse, mc);
  EXPECT_EQ(t.precoder, Precoder::kMmmse);
  EXPECT_EQ(t.estimator, GainEstimator::kMonteCarlo);
  for (double v : t.a) EXPECT_GT(v, 0.0);
  for (double v : t.b) {
    EXPECT_GE(v, 0.0);
    EXPECT_TRUE(std::isfinite(v));
  }
  // Unit-norm precoders: the desired gain can never exceed the channel energy.
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 5; ++k) EXPECT_LE(t.a_at(j, k), d.config.antennas * d.fading(j, j, k) * 1.5);
}

TEST(Channel, GainTableRoundTripAndCorruption) {
  const Drop d = make_drop(5);
  const GainTable t = mr_gains_closed_form(d.fading, d.config);
  const auto dir = std::filesystem::temp_directory_path() / "mimoadv_test_channel";
  std::filesystem::create_directories(dir);
  const auto path = dir / "gains.bin";
  save_gain_table(t, 1234, path);
  std::uint64_t hash = 0;
  const GainTable back = load_gain_table(path, &hash);
  EXPECT_EQ(hash, 1234u);
  EXPECT_EQ(back.a, t.a);
  EXPECT_EQ(back.b, t.b);

  // Truncation is a format error.
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 5);
  EXPECT_THROW(load_gain_table(path), FormatError);

  // A foreign schema version is a version error.
  save_gain_table(t, 1234, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const char v = 9;
    f.write(&v, 1);
  }
  EXPECT_THROW(load_gain_table(path), VersionError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace mimoadv
