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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mimoadv/rng.hpp"

namespace mimoadv {

/// How base stations learn the channels they precode with.
enum class CsiModel {
  kPilotMmse,  ///< MMSE estimates from uplink pilots, pilot k reused in every cell
  kPerfect,    ///< estimates equal the true channels
};

std::string to_string(CsiModel csi);
CsiModel parse_csi_model(const std::string& name);

/// Static deployment parameters. Defaults describe a 2x2 grid of 250 m cells
/// with 5 users and 100 antennas per cell.
struct NetworkConfig {
  int grid_rows = 2;
  int grid_cols = 2;
  int users_per_cell = 5;
  int antennas = 100;
  double p_max_mw = 500.0;
  double noise_dbm = -94.0;
  double cell_side_m = 250.0;
  double min_distance_m = 10.0;
  double bandwidth_hz = 20e6;
  double pilot_power_mw = 100.0;
  // Log-distance pathloss: intercept (dB at 1 km) minus slope * log10(d / 1 km).
  double pathloss_1km_db = -148.1;
  double pathloss_slope_db = 37.6;
  double shadowing_std_db = 0.0;
  CsiModel csi = CsiModel::kPilotMmse;
  std::uint64_t rng_seed = 1;

  int num_cells() const { return grid_rows * grid_cols; }
  int input_dim() const { return 2 * users_per_cell * num_cells(); }
  double noise_mw() const;

  /// Throws ValidationError on any violated invariant.
  void validate() const;
};

/// Hash of every physical parameter (the seed is excluded). Two artifacts
/// are compatible iff their config hashes agree.
std::uint64_t config_hash(const NetworkConfig& config);

/// Canonical `key = value` text of a config, one entry per line.
std::string canonical_text(const NetworkConfig& config);

double dbm_to_mw(double dbm);
double db_to_linear(double db);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct CellRect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  double area() const { return (x_max - x_min) * (y_max - y_min); }
};

/// Cell j sits at grid row j / cols, column j % cols; its BS is at the center.
struct CellLayout {
  std::vector<Point> base_stations;
  std::vector<CellRect> cells;
  double width = 0.0;
  double height = 0.0;
};

CellLayout build_geometry(const NetworkConfig& config);

/// Flat vector of 2KL coordinates in metres, ordered cell-major, then user,
/// then (x, y). This is exactly the network input.
struct UePositions {
  std::vector<double> coords;

  Point user(int cell, int user, int users_per_cell) const {
    const auto i = static_cast<std::size_t>(2 * (cell * users_per_cell + user));
    return {coords[i], coords[i + 1]};
  }
};

/// Drops K users uniformly inside every cell, rejecting points closer than
/// min_distance_m to the cell's BS. Throws SamplingError when a user cannot be
/// placed within `max_attempts` tries.
UePositions drop_users(const NetworkConfig& config, const CellLayout& layout, Rng& rng,
                       int max_attempts = 10000);

}  // namespace mimoadv
