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

#include "mimoadv/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mimoadv/digest.hpp"
#include "mimoadv/errors.hpp"

namespace mimoadv {

std::string to_string(CsiModel csi) {
  switch (csi) {
    case CsiModel::kPilotMmse:
      return "pilot_mmse";
    case CsiModel::kPerfect:
      return "perfect";
  }
  return "unknown";
}

CsiModel parse_csi_model(const std::string& name) {
  if (name == "pilot_mmse") return CsiModel::kPilotMmse;
  if (name == "perfect") return CsiModel::kPerfect;
  throw ValidationError("unknown CSI model '" + name + "' (expected pilot_mmse or perfect)");
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double NetworkConfig::noise_mw() const { return dbm_to_mw(noise_dbm); }

void NetworkConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("network config: " + msg); };
  if (grid_rows < 1 || grid_cols < 1) fail("grid dimensions must be >= 1");
  if (users_per_cell < 1) fail("users_per_cell must be >= 1");
  if (antennas < 1) fail("antennas must be >= 1");
  if (!(p_max_mw > 0.0) || !std::isfinite(p_max_mw)) fail("p_max_mw must be > 0");
  if (!(cell_side_m > 0.0) || !std::isfinite(cell_side_m)) fail("cell_side_m must be > 0");
  if (!(min_distance_m > 0.0)) fail("min_distance_m must be > 0");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth_hz must be > 0");
  if (!(pilot_power_mw > 0.0)) fail("pilot_power_mw must be > 0");
  if (!std::isfinite(noise_dbm)) fail("noise_dbm must be finite");
  if (!(shadowing_std_db >= 0.0)) fail("shadowing_std_db must be >= 0");
}

std::string canonical_text(const NetworkConfig& c) {
  std::ostringstream os;
  auto num = [&](const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << key << " = " << buf << '\n';
  };
  os << "grid_rows = " << c.grid_rows << '\n';
  os << "grid_cols = " << c.grid_cols << '\n';
  os << "users_per_cell = " << c.users_per_cell << '\n';
  os << "antennas = " << c.antennas << '\n';
  num("p_max_mw", c.p_max_mw);
  num("noise_dbm", c.noise_dbm);
  num("cell_side_m", c.cell_side_m);
  num("min_distance_m", c.min_distance_m);
  num("bandwidth_hz", c.bandwidth_hz);
  num("pilot_power_mw", c.pilot_power_mw);
  num("pathloss_1km_db", c.pathloss_1km_db);
  num("pathloss_slope_db", c.pathloss_slope_db);
  num("shadowing_std_db", c.shadowing_std_db);
  os << "csi = " << to_string(c.csi) << '\n';
  return os.str();
}

std::uint64_t config_hash(const NetworkConfig& config) { return hash64(canonical_text(config)); }

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

CellLayout build_geometry(const NetworkConfig& config) {
  config.validate();
  CellLayout layout;
  const double side = config.cell_side_m;
  layout.width = side * config.grid_cols;
  layout.height = side * config.grid_rows;
  for (int j = 0; j < config.num_cells(); ++j) {
    const int row = j / config.grid_cols;
    const int col = j % config.grid_cols;
    CellRect rect{col * side, row * side, (col + 1) * side, (row + 1) * side};
    layout.cells.push_back(rect);
    layout.base_stations.push_back({rect.x_min + side / 2.0, rect.y_min + side / 2.0});
  }
  return layout;
}

UePositions drop_users(const NetworkConfig& config, const CellLayout& layout, Rng& rng,
                       int max_attempts) {
  const int L = config.num_cells();
  const int K = config.users_per_cell;
  UePositions out;
  out.coords.reserve(static_cast<std::size_t>(2 * K * L));
  for (int j = 0; j < L; ++j) {
    const CellRect& rect = layout.cells[static_cast<std::size_t>(j)];
    const Point bs = layout.base_stations[static_cast<std::size_t>(j)];
    for (int k = 0; k < K; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const Point p{rect.x_min + uniform01(rng) * (rect.x_max - rect.x_min),
                      rect.y_min + uniform01(rng) * (rect.y_max - rect.y_min)};
        if (distance(p, bs) >= config.min_distance_m) {
          out.coords.push_back(p.x);
          out.coords.push_back(p.y);
          placed = true;
          break;
        }
      }
      if (!placed) {
        throw SamplingError("drop_users: could not place a user at least " +
                            std::to_string(config.min_distance_m) + " m from BS " +
                            std::to_string(j) + " after " + std::to_string(max_attempts) +
                            " attempts");
      }
    }
  }
  return out;
}

}  // namespace mimoadv
