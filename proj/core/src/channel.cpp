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

#include "mimoadv/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "mimoadv/binary_io.hpp"
#include "mimoadv/errors.hpp"
#include "mimoadv/parallel.hpp"

namespace mimoadv {
namespace {

constexpr std::string_view kGainMagic = "MADVGAIN";
constexpr double kHalfSqrt = 0.70710678118654752440;
constexpr std::uint32_t kGainSchemaVersion = 1;

// Pilot bookkeeping shared by the closed form and the Monte-Carlo path.
// With pilot k reused by user k of every cell, BS l sees
//   y_k = sqrt(p tau) sum_j h_jk + n,  psi_k = p tau sum_j beta_jk + sigma^2,
// and the MMSE estimate of h_jk has per-antenna variance
//   gamma_jk = p tau beta_jk^2 / psi_k.
struct PilotStats {
  int L = 0;
  int K = 0;
  std::vector<double> psi;    // (l, k)
  std::vector<double> gamma;  // (l, j, k)

  double psi_at(int l, int k) const { return psi[static_cast<std::size_t>(l * K + k)]; }
  double gamma_at(int l, int j, int k) const {
    return gamma[static_cast<std::size_t>((l * L + j) * K + k)];
  }
};

PilotStats pilot_stats(const LargeScaleFading& f, const NetworkConfig& config) {
  PilotStats s;
  s.L = f.num_cells;
  s.K = f.users_per_cell;
  s.psi.assign(static_cast<std::size_t>(s.L * s.K), 0.0);
  s.gamma.assign(f.beta.size(), 0.0);
  const double p_tau = config.pilot_power_mw * s.K;
  const double noise = config.noise_mw();
  for (int l = 0; l < s.L; ++l) {
    for (int k = 0; k < s.K; ++k) {
      double sum = 0.0;
      for (int j = 0; j < s.L; ++j) sum += f(l, j, k);
      s.psi[static_cast<std::size_t>(l * s.K + k)] = p_tau * sum + noise;
    }
    for (int j = 0; j < s.L; ++j) {
      for (int k = 0; k < s.K; ++k) {
        const double beta = f(l, j, k);
        s.gamma[static_cast<std::size_t>((l * s.L + j) * s.K + k)] =
            config.csi == CsiModel::kPerfect ? beta : p_tau * beta * beta / s.psi_at(l, k);
      }
    }
  }
  return s;
}

// Running sums over draws. For every user (j,k) the desired-signal term
// z = w_jk^H h_jk^j is tracked through its real part x, imaginary part y and
// q = |z|^2 with all second moments, so the delta method can give standard
// errors for |E z|^2 and E|z|^2 - |E z|^2. Cross terms only need E|z|^2.
struct Accumulator {
  std::vector<double> x, y, q, xx, yy, xy, qq, qx, qy;
  std::vector<double> b1, b2;
  std::uint64_t draws = 0;
  std::uint64_t resampled = 0;

  Accumulator(std::size_t users, std::size_t cross)
      : x(users), y(users), q(users), xx(users), yy(users), xy(users), qq(users), qx(users),
        qy(users), b1(cross), b2(cross) {}

  void merge(const Accumulator& o) {
    auto add = [](std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    add(x, o.x); add(y, o.y); add(q, o.q); add(xx, o.xx); add(yy, o.yy); add(xy, o.xy);
    add(qq, o.qq); add(qx, o.qx); add(qy, o.qy); add(b1, o.b1); add(b2, o.b2);
    draws += o.draws;
    resampled += o.resampled;
  }
};

class DrawSimulator {
 public:
  DrawSimulator(const LargeScaleFading& f, const NetworkConfig& config, Precoder precoder)
      : f_(f), config_(config), precoder_(precoder), pilots_(pilot_stats(f, config)),
        L_(f.num_cells), K_(f.users_per_cell), M_(config.antennas) {
    const int LK = L_ * K_;
    h_.resize(L_);
    hhat_.resize(L_);
    for (int l = 0; l < L_; ++l) {
      h_[static_cast<std::size_t>(l)].resize(M_, LK);
      hhat_[static_cast<std::size_t>(l)].resize(M_, LK);
    }
    // Estimation error power summed over all users, per BS (M-MMSE regularizer).
    error_power_.assign(static_cast<std::size_t>(L_), 0.0);
    for (int l = 0; l < L_; ++l) {
      double e = 0.0;
      for (int j = 0; j < L_; ++j)
        for (int k = 0; k < K_; ++k) e += f(l, j, k) - pilots_.gamma_at(l, j, k);
      error_power_[static_cast<std::size_t>(l)] = e;
    }
    channel_scale_.resize(static_cast<std::size_t>(L_ * LK));
    for (int l = 0; l < L_; ++l)
      for (int j = 0; j < L_; ++j)
        for (int k = 0; k < K_; ++k)
          channel_scale_[static_cast<std::size_t>(l * LK + j * K_ + k)] = std::sqrt(f(l, j, k)) * kHalfSqrt;
    pilot_.resize(M_);
    w_.resize(M_, K_);
    inner_.assign(static_cast<std::size_t>(L_), Eigen::MatrixXcd(K_, LK));
  }

  // One channel realization. Returns false if an M-MMSE system was singular.
  bool draw(Rng& rng, Accumulator& acc) {
    const int LK = L_ * K_;
    const double p_tau = config_.pilot_power_mw * K_;
    const double sqrt_p_tau = std::sqrt(p_tau);
    const double noise_sd = std::sqrt(config_.noise_mw());
    boost::random::normal_distribution<double> normal;
    // CN(0, v) per entry: fill re/im with N(0, 1) in place, then scale by sqrt(v / 2).
    auto fill = [&](std::complex<double>* data, double scale) {
      double* d = reinterpret_cast<double*>(data);
      for (int m = 0; m < 2 * M_; ++m) d[m] = normal(rng);
      for (int m = 0; m < 2 * M_; ++m) d[m] *= scale;
    };
    for (int l = 0; l < L_; ++l) {
      Eigen::MatrixXcd& H = h_[static_cast<std::size_t>(l)];
      for (int jk = 0; jk < LK; ++jk) fill(H.col(jk).data(), channel_scale_[static_cast<std::size_t>(l * LK + jk)]);
      Eigen::MatrixXcd& Hhat = hhat_[static_cast<std::size_t>(l)];
      if (config_.csi == CsiModel::kPerfect) {
        Hhat = H;
      } else {
        for (int k = 0; k < K_; ++k) {
          fill(pilot_.data(), noise_sd * kHalfSqrt);
          for (int j = 0; j < L_; ++j) pilot_ += sqrt_p_tau * H.col(j * K_ + k);
          for (int j = 0; j < L_; ++j) {
            Hhat.col(j * K_ + k) = (sqrt_p_tau * f_(l, j, k) / pilots_.psi_at(l, k)) * pilot_;
          }
        }
      }
    }

    // Precoders of each BS's own users, then every inner product w_li^H h_jk^l.
    std::vector<Eigen::MatrixXcd>& inner = inner_;
    for (int l = 0; l < L_; ++l) {
      const Eigen::MatrixXcd& H = h_[static_cast<std::size_t>(l)];
      const Eigen::MatrixXcd& Hhat = hhat_[static_cast<std::size_t>(l)];
      Eigen::MatrixXcd& W = w_;
      if (precoder_ == Precoder::kMr) {
        for (int i = 0; i < K_; ++i) {
          const double norm = std::sqrt(static_cast<double>(M_) * pilots_.gamma_at(l, l, i));
          W.col(i) = Hhat.col(l * K_ + i) / norm;
        }
      } else {
        // (p Hhat Hhat^H + c I)^{-1} Hhat = Hhat (p G + c I)^{-1}, G = Hhat^H Hhat.
        const double c =
            config_.pilot_power_mw * error_power_[static_cast<std::size_t>(l)] + config_.noise_mw();
        Eigen::MatrixXcd G = (config_.pilot_power_mw / c) * (Hhat.adjoint() * Hhat);
        G.diagonal().array() += 1.0;
        Eigen::LLT<Eigen::MatrixXcd> llt(G);
        if (llt.info() != Eigen::Success) return false;
        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(LK, K_);
        for (int i = 0; i < K_; ++i) rhs(l * K_ + i, i) = 1.0;
        W = Hhat * llt.solve(rhs);
        for (int i = 0; i < K_; ++i) {
          const double n = W.col(i).norm();
          if (!(n > 0.0) || !std::isfinite(n)) return false;
          W.col(i) /= n;
        }
      }
      inner[static_cast<std::size_t>(l)].noalias() = W.adjoint() * H;  // K x LK
    }

    for (int l = 0; l < L_; ++l) {
      const Eigen::MatrixXcd& Z = inner[static_cast<std::size_t>(l)];
      for (int i = 0; i < K_; ++i) {
        for (int j = 0; j < L_; ++j) {
          for (int k = 0; k < K_; ++k) {
            const std::complex<double> z = Z(i, j * K_ + k);
            const double q = std::norm(z);
            const std::size_t bi =
                static_cast<std::size_t>(((l * K_ + i) * L_ + j) * K_ + k);
            acc.b1[bi] += q;
            acc.b2[bi] += q * q;
            if (l == j && i == k) {
              const std::size_t u = static_cast<std::size_t>(j * K_ + k);
              const double x = z.real();
              const double y = z.imag();
              acc.x[u] += x;
              acc.y[u] += y;
              acc.q[u] += q;
              acc.xx[u] += x * x;
              acc.yy[u] += y * y;
              acc.xy[u] += x * y;
              acc.qq[u] += q * q;
              acc.qx[u] += q * x;
              acc.qy[u] += q * y;
            }
          }
        }
      }
    }
    ++acc.draws;
    return true;
  }

 private:
  const LargeScaleFading& f_;
  const NetworkConfig& config_;
  Precoder precoder_;
  PilotStats pilots_;
  int L_, K_, M_;
  std::vector<Eigen::MatrixXcd> h_;
  std::vector<Eigen::MatrixXcd> hhat_;
  std::vector<double> error_power_;
  std::vector<double> channel_scale_;
  Eigen::VectorXcd pilot_;
  Eigen::MatrixXcd w_;
  std::vector<Eigen::MatrixXcd> inner_;
};

}  // namespace

std::string to_string(Precoder precoder) {
  return precoder == Precoder::kMr ? "mr" : "mmmse";
}

Precoder parse_precoder(const std::string& name) {
  if (name == "mr" || name == "MR") return Precoder::kMr;
  if (name == "mmmse" || name == "m-mmse" || name == "MMMSE" || name == "M-MMSE")
    return Precoder::kMmmse;
  throw ValidationError("unknown precoder '" + name + "' (expected mr or mmmse)");
}

double pathloss_db(const NetworkConfig& config, double distance_m) {
  if (!(distance_m >= config.min_distance_m)) {
    throw ValidationError("pathloss: distance " + std::to_string(distance_m) +
                          " m is below the minimum " + std::to_string(config.min_distance_m) + " m");
  }
  return config.pathloss_1km_db - config.pathloss_slope_db * std::log10(distance_m / 1000.0);
}

double pathloss(const NetworkConfig& config, double distance_m) {
  return db_to_linear(pathloss_db(config, distance_m));
}

LargeScaleFading compute_fading(const NetworkConfig& config, const CellLayout& layout,
                                const UePositions& users, Rng* shadowing) {
  const int L = config.num_cells();
  const int K = config.users_per_cell;
  if (users.coords.size() != static_cast<std::size_t>(2 * K * L)) {
    throw ValidationError("compute_fading: expected " + std::to_string(2 * K * L) +
                          " coordinates, got " + std::to_string(users.coords.size()));
  }
  if (config.shadowing_std_db > 0.0 && shadowing == nullptr) {
    throw ValidationError("compute_fading: shadowing enabled but no RNG supplied");
  }
  LargeScaleFading f;
  f.num_cells = L;
  f.users_per_cell = K;
  f.beta.assign(static_cast<std::size_t>(L * L * K), 0.0);
  for (int l = 0; l < L; ++l) {
    const Point bs = layout.base_stations[static_cast<std::size_t>(l)];
    for (int j = 0; j < L; ++j) {
      for (int k = 0; k < K; ++k) {
        // Users of other cells can be nearer than d_min to BS l only if the
        // cell is smaller than the exclusion disc; clamp rather than reject.
        const double d = std::max(distance(bs, users.user(j, k, K)), config.min_distance_m);
        double db = pathloss_db(config, d);
        if (config.shadowing_std_db > 0.0) db += config.shadowing_std_db * standard_normal(*shadowing);
        f(l, j, k) = db_to_linear(db);
      }
    }
  }
  return f;
}

GainTable::GainTable(int cells, int users)
    : num_cells(cells), users_per_cell(users),
      a(static_cast<std::size_t>(cells * users), 0.0),
      b(static_cast<std::size_t>(cells * users * cells * users), 0.0),
      a_std_error(a.size(), 0.0), b_std_error(b.size(), 0.0) {}

GainTable mr_gains_closed_form(const LargeScaleFading& f, const NetworkConfig& config) {
  const int L = f.num_cells;
  const int K = f.users_per_cell;
  const double M = config.antennas;
  const PilotStats pilots = pilot_stats(f, config);
  const bool contaminated = config.csi == CsiModel::kPilotMmse;
  GainTable t(L, K);
  t.precoder = Precoder::kMr;
  t.estimator = GainEstimator::kClosedForm;
  for (int j = 0; j < L; ++j) {
    for (int k = 0; k < K; ++k) {
      t.a_at(j, k) = M * pilots.gamma_at(j, j, k);
      for (int l = 0; l < L; ++l) {
        for (int i = 0; i < K; ++i) {
          double v = f(l, j, k);
          // Coherent pilot-contamination term from BS l's precoder of its
          // user i = k, which shares user (j,k)'s pilot.
          if (contaminated && i == k && l != j) v += M * pilots.gamma_at(l, j, k);
          t.b_at(l, i, j, k) = v;
        }
      }
    }
  }
  return t;
}

GainTable monte_carlo_gains(const LargeScaleFading& fading, const NetworkConfig& config,
                            Precoder precoder, const MonteCarloOptions& options) {
  if (options.num_draws < 1000) {
    throw ValidationError("monte_carlo_gains: num_draws must be >= 1000, got " +
                          std::to_string(options.num_draws));
  }
  if (options.block_size == 0) throw ValidationError("monte_carlo_gains: block_size must be > 0");
  const int L = fading.num_cells;
  const int K = fading.users_per_cell;
  const std::size_t users = static_cast<std::size_t>(L * K);
  const std::size_t cross = users * users;
  const std::uint32_t blocks = (options.num_draws + options.block_size - 1) / options.block_size;

  std::vector<Accumulator> partial(blocks, Accumulator(users, cross));
  parallel_for(blocks, options.threads, [&](std::size_t blk) {
    DrawSimulator sim(fading, config, precoder);
    Rng rng = make_rng(options.seed, StreamKind::kChannelDraws, blk);
    const std::uint32_t begin = static_cast<std::uint32_t>(blk) * options.block_size;
    const std::uint32_t count = std::min(options.block_size, options.num_draws - begin);
    Accumulator& acc = partial[blk];
    constexpr std::uint64_t kMaxResamples = 1000;
    while (acc.draws < count) {
      if (!sim.draw(rng, acc)) {
        if (++acc.resampled > kMaxResamples) {
          throw SamplingError("monte_carlo_gains: too many singular M-MMSE draws");
        }
      }
    }
  });
  Accumulator total(users, cross);
  for (const Accumulator& acc : partial) total.merge(acc);

  GainTable t(L, K);
  t.precoder = precoder;
  t.estimator = GainEstimator::kMonteCarlo;
  t.num_draws = options.num_draws;
  t.resampled_draws = static_cast<std::uint32_t>(total.resampled);
  const double n = static_cast<double>(total.draws);
  for (int j = 0; j < L; ++j) {
    for (int k = 0; k < K; ++k) {
      const std::size_t u = static_cast<std::size_t>(j * K + k);
      const double mx = total.x[u] / n;
      const double my = total.y[u] / n;
      const double mq = total.q[u] / n;
      const double vxx = total.xx[u] / n - mx * mx;
      const double vyy = total.yy[u] / n - my * my;
      const double vxy = total.xy[u] / n - mx * my;
      const double vqq = total.qq[u] / n - mq * mq;
      const double vqx = total.qx[u] / n - mq * mx;
      const double vqy = total.qy[u] / n - mq * my;
      const double a = mx * mx + my * my;
      t.a_at(j, k) = a;
      // Delta method with gradient (2x, 2y).
      const double var_a = 4.0 * (mx * mx * vxx + my * my * vyy + 2.0 * mx * my * vxy);
      t.a_std_error[u] = std::sqrt(std::max(var_a, 0.0) / n);

      for (int l = 0; l < L; ++l) {
        for (int i = 0; i < K; ++i) {
          const std::size_t bi = t.b_index(l, i, j, k);
          double value = 0.0;
          double var = 0.0;
          if (l == j && i == k) {
            value = mq - a;
            // Gradient of q - x^2 - y^2 is (1, -2x, -2y).
            const double gx = -2.0 * mx;
            const double gy = -2.0 * my;
            var = vqq + gx * gx * vxx + gy * gy * vyy + 2.0 * gx * vqx + 2.0 * gy * vqy +
                  2.0 * gx * gy * vxy;
          } else {
            const double m1 = total.b1[bi] / n;
            value = m1;
            var = total.b2[bi] / n - m1 * m1;
          }
          if (value < 0.0) {
            value = 0.0;
            ++t.clipped_entries;
          }
          t.b[bi] = value;
          t.b_std_error[bi] = std::sqrt(std::max(var, 0.0) / n);
        }
      }
    }
  }
  return t;
}

void save_gain_table(const GainTable& t, std::uint64_t config_hash, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  BinaryWriter w(out);
  w.magic(kGainMagic);
  w.u32(kGainSchemaVersion);
  w.u64(config_hash);
  w.u32(static_cast<std::uint32_t>(t.precoder));
  w.u32(static_cast<std::uint32_t>(t.estimator));
  w.u32(t.num_draws);
  w.u32(static_cast<std::uint32_t>(t.num_cells));
  w.u32(static_cast<std::uint32_t>(t.users_per_cell));
  w.u32(t.clipped_entries);
  w.u32(t.resampled_draws);
  w.f64s(t.a);
  w.f64s(t.b);
  w.f64s(t.a_std_error);
  w.f64s(t.b_std_error);
  if (!out) throw Error("write failed: " + path.string());
}

GainTable load_gain_table(const std::filesystem::path& path, std::uint64_t* config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  BinaryReader r(in, path.string());
  r.expect_magic(kGainMagic);
  const std::uint32_t version = r.u32();
  if (version != kGainSchemaVersion) {
    throw VersionError(path.string() + ": gain table schema " + std::to_string(version) +
                       " (expected " + std::to_string(kGainSchemaVersion) + ")");
  }
  const std::uint64_t hash = r.u64();
  if (config_hash) *config_hash = hash;
  const std::uint32_t precoder = r.u32();
  const std::uint32_t estimator = r.u32();
  if (precoder > 1 || estimator > 1) throw FormatError(path.string() + ": bad enum field");
  const std::uint32_t draws = r.u32();
  const std::uint32_t L = r.u32();
  const std::uint32_t K = r.u32();
  if (L == 0 || K == 0 || L > 1024 || K > 1024) throw FormatError(path.string() + ": bad dimensions");
  GainTable t(static_cast<int>(L), static_cast<int>(K));
  t.precoder = static_cast<Precoder>(precoder);
  t.estimator = static_cast<GainEstimator>(estimator);
  t.num_draws = draws;
  t.clipped_entries = r.u32();
  t.resampled_draws = r.u32();
  r.f64s(std::span<double>(t.a));
  r.f64s(std::span<double>(t.b));
  r.f64s(std::span<double>(t.a_std_error));
  r.f64s(std::span<double>(t.b_std_error));
  r.expect_end();
  return t;
}

void export_gain_table_csv(const GainTable& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << "kind,l,i,j,k,value,std_error\n";
  for (int j = 0; j < t.num_cells; ++j)
    for (int k = 0; k < t.users_per_cell; ++k)
      out << "a,," << "," << j << ',' << k << ',' << t.a_at(j, k) << ','
          << t.a_std_error[t.a_index(j, k)] << '\n';
  for (int l = 0; l < t.num_cells; ++l)
    for (int i = 0; i < t.users_per_cell; ++i)
      for (int j = 0; j < t.num_cells; ++j)
        for (int k = 0; k < t.users_per_cell; ++k)
          out << "b," << l << ',' << i << ',' << j << ',' << k << ',' << t.b_at(l, i, j, k) << ','
              << t.b_std_error[t.b_index(l, i, j, k)] << '\n';
}

}  // namespace mimoadv
