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

#include "mimoadv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mimoadv/errors.hpp"
#include "mimoadv/parallel.hpp"

namespace mimoadv {
namespace {

bool feasible_everywhere(const std::vector<std::vector<ForwardOnlyModel>>& judges,
                         const std::vector<double>& x) {
  for (const auto& set : judges) {
    for (const ForwardOnlyModel& m : set) {
      double sum = 0.0;
      for (double p : m.predict_powers(x)) sum += p;
      if (sum > m.p_max()) return false;
    }
  }
  return true;
}

std::size_t method_index(const ExperimentSpec& spec, AttackMethod m) {
  return static_cast<std::size_t>(std::find(spec.methods.begin(), spec.methods.end(), m) -
                                  spec.methods.begin());
}

std::size_t epsilon_index(const ExperimentSpec& spec, double eps) {
  return static_cast<std::size_t>(std::find(spec.epsilons.begin(), spec.epsilons.end(), eps) -
                                  spec.epsilons.begin());
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::vector<ForwardOnlyModel> ModelSet::forward_only() const {
  std::vector<ForwardOnlyModel> out;
  out.reserve(per_cell.size());
  for (const MlpModel& m : per_cell) out.emplace_back(m);
  return out;
}

void ExperimentSpec::validate() const {
  if (n_test < 1) throw ValidationError("experiment: n_test must be >= 1");
  if (methods.empty()) throw ValidationError("experiment: no attack methods");
  if (epsilons.empty()) throw ValidationError("experiment: empty epsilon grid");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] >= 0.0)) throw ValidationError("experiment: epsilon must be >= 0");
    if (i > 0 && !(epsilons[i] > epsilons[i - 1])) {
      throw ValidationError("experiment: epsilon grid must be strictly increasing");
    }
  }
  AttackConfig probe = attack;
  probe.epsilon = epsilons.front();
  probe.validate();
}

double RateEntry::std_error() const {
  if (trials == 0) return 0.0;
  const double p = rate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

const RateEntry& SuccessRateTable::at(int cell, AttackMethod method, double epsilon) const {
  for (const RateEntry& e : entries) {
    if (e.cell == cell && e.method == method && e.epsilon == epsilon) return e;
  }
  throw std::out_of_range("success rate table: no entry for cell " + std::to_string(cell) + ", " +
                          to_string(method) + ", eps " + format_double(epsilon));
}

std::vector<std::vector<double>> filter_clean_feasible(
    const std::vector<std::vector<ForwardOnlyModel>>& judges,
    const std::vector<std::vector<double>>& candidates) {
  std::vector<std::vector<double>> out;
  for (const auto& x : candidates)
    if (feasible_everywhere(judges, x)) out.push_back(x);
  return out;
}

CleanTestSet draw_clean_test_set(const NetworkConfig& config,
                                 const std::vector<std::vector<ForwardOnlyModel>>& judges,
                                 std::size_t n_test, std::uint64_t seed, std::size_t max_candidates,
                                 int threads) {
  const CellLayout layout = build_geometry(config);
  CleanTestSet set;
  constexpr std::size_t kBatch = 512;
  std::vector<std::vector<double>> batch(kBatch);
  std::vector<char> keep(kBatch);
  std::size_t next = 0;
  while (set.inputs.size() < n_test) {
    if (next >= max_candidates) {
      throw SamplingError("draw_clean_test_set: only " + std::to_string(set.inputs.size()) + " of " +
                          std::to_string(n_test) + " clean-feasible samples after " +
                          std::to_string(next) + " candidates");
    }
    const std::size_t count = std::min(kBatch, max_candidates - next);
    parallel_for(count, threads, [&](std::size_t i) {
      Rng rng = make_rng(seed, StreamKind::kTestDrop, next + i);
      batch[i] = drop_users(config, layout, rng).coords;
      keep[i] = feasible_everywhere(judges, batch[i]) ? 1 : 0;
    });
    // Candidates are consumed in index order, so the survivors do not depend
    // on the batch size or thread count.
    for (std::size_t i = 0; i < count && set.inputs.size() < n_test; ++i) {
      set.candidates_drawn = next + i + 1;
      if (keep[i]) set.inputs.push_back(std::move(batch[i]));
    }
    next += count;
  }
  return set;
}

AttackReport run_attacks(const ModelSet& gradient_models, const std::vector<ForwardOnlyModel>& judges,
                         const std::vector<std::vector<double>>& inputs, const ExperimentSpec& spec,
                         const CellLayout* layout) {
  spec.validate();
  const int L = gradient_models.num_cells();
  if (static_cast<int>(judges.size()) != L) {
    throw ValidationError("run_attacks: surrogate and judge model counts differ");
  }
  const std::size_t n = inputs.size();
  const std::size_t per_grid = static_cast<std::size_t>(L) * n;
  const std::size_t jobs = spec.epsilons.size() * spec.methods.size() * per_grid;
  AttackReport report;
  report.records.resize(jobs);
  parallel_for(jobs, spec.threads, [&](std::size_t job) {
    const std::size_t e = job / (spec.methods.size() * per_grid);
    const std::size_t m = (job / per_grid) % spec.methods.size();
    const int cell = static_cast<int>((job / n) % static_cast<std::size_t>(L));
    const std::size_t sample = job % n;

    AttackConfig cfg = spec.attack;
    cfg.method = spec.methods[m];
    cfg.epsilon = spec.epsilons[e];
    Rng rng = make_rng(spec.seed, StreamKind::kAttack, sample,
                       (e << 16) | static_cast<std::uint64_t>(cell));
    const std::vector<double>& x = inputs[sample];
    std::vector<double> adv = craft(gradient_models.per_cell[static_cast<std::size_t>(cell)], x, cfg, rng);
    if (cfg.clamp_to_cells && layout != nullptr) {
      clamp_to_layout(adv, *layout, users_of(gradient_models.per_cell.front()));
    }
    const AdversarialSample s = assess(judges[static_cast<std::size_t>(cell)], cell, x, std::move(adv));
    report.records[job] = {sample, cell, cfg.method, cfg.epsilon, s.clean_sum, s.adversarial_sum,
                           s.feasible, s.linf};
  });
  return report;
}

SuccessRateTable aggregate(const AttackReport& report, const ExperimentSpec& spec, int num_cells) {
  SuccessRateTable table;
  table.num_cells = num_cells;
  const std::size_t stride = static_cast<std::size_t>(num_cells + 1);
  table.entries.resize(spec.epsilons.size() * spec.methods.size() * stride);
  for (std::size_t e = 0; e < spec.epsilons.size(); ++e) {
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
      for (std::size_t c = 0; c < stride; ++c) {
        RateEntry& r = table.entries[(e * spec.methods.size() + m) * stride + c];
        r.cell = c == static_cast<std::size_t>(num_cells) ? -1 : static_cast<int>(c);
        r.method = spec.methods[m];
        r.epsilon = spec.epsilons[e];
      }
    }
  }
  for (const AttackRecord& rec : report.records) {
    const std::size_t e = epsilon_index(spec, rec.epsilon);
    const std::size_t m = method_index(spec, rec.method);
    if (e >= spec.epsilons.size() || m >= spec.methods.size()) {
      throw ValidationError("aggregate: record outside the experiment grid");
    }
    const std::size_t base = (e * spec.methods.size() + m) * stride;
    for (std::size_t c : {static_cast<std::size_t>(rec.cell), static_cast<std::size_t>(num_cells)}) {
      RateEntry& r = table.entries[base + c];
      ++r.trials;
      if (!rec.feasible) ++r.successes;
    }
  }
  return table;
}

SuccessRateTable run_whitebox(const ModelSet& models, const std::vector<std::vector<double>>& inputs,
                              const ExperimentSpec& spec, AttackReport* report) {
  return run_blackbox(models, models.forward_only(), inputs, spec, report);
}

SuccessRateTable run_blackbox(const ModelSet& surrogate, const std::vector<ForwardOnlyModel>& victim,
                              const std::vector<std::vector<double>>& inputs,
                              const ExperimentSpec& spec, AttackReport* report) {
  AttackReport local = run_attacks(surrogate, victim, inputs, spec);
  SuccessRateTable table = aggregate(local, spec, surrogate.num_cells());
  if (report) *report = std::move(local);
  return table;
}

void write_rates_csv(const SuccessRateTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "cell,method,epsilon,successes,trials,rate,std_error\n";
  for (const RateEntry& e : table.entries) {
    out << (e.cell < 0 ? std::string("all") : std::to_string(e.cell)) << ',' << to_string(e.method)
        << ',' << format_double(e.epsilon) << ',' << e.successes << ',' << e.trials << ','
        << format_double(e.rate()) << ',' << format_double(e.std_error()) << '\n';
  }
}

SuccessRateTable read_rates_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("cell,method,epsilon", 0) != 0) {
    throw FormatError(path.string() + ": missing rates header");
  }
  SuccessRateTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw FormatError(path.string() + ": malformed row '" + line + "'");
    RateEntry e;
    try {
      e.cell = f[0] == "all" ? -1 : std::stoi(f[0]);
      e.method = parse_attack_method(f[1]);
      e.epsilon = std::stod(f[2]);
      e.successes = std::stoull(f[3]);
      e.trials = std::stoull(f[4]);
    } catch (const std::logic_error&) {
      throw FormatError(path.string() + ": malformed row '" + line + "'");
    }
    table.num_cells = std::max(table.num_cells, e.cell + 1);
    table.entries.push_back(e);
  }
  return table;
}

void write_attack_report_csv(const AttackReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "sample,cell,method,epsilon,clean_sum_mw,adv_sum_mw,feasible,linf\n";
  for (const AttackRecord& r : report.records) {
    out << r.sample << ',' << r.cell << ',' << to_string(r.method) << ',' << format_double(r.epsilon)
        << ',' << format_double(r.clean_sum) << ',' << format_double(r.adversarial_sum) << ','
        << (r.feasible ? 1 : 0) << ',' << format_double(r.linf) << '\n';
  }
}

void write_plot_script(const std::vector<std::string>& rates_files, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "# gnuplot script: grouped success-rate bars per (epsilon, cell).\n"
         "# Usage: gnuplot plot_rates.script (run inside the run directory)\n"
         "set datafile separator ','\n"
         "set terminal pngcairo size 1000,520\n"
         "set style data histograms\n"
         "set style histogram clustered gap 1\n"
         "set style fill solid 0.85 border -1\n"
         "set yrange [0:100]\n"
         "set ylabel 'success rate (%)'\n"
         "set key outside right top\n"
         "set xtics rotate by -35\n"
         "methods = 'random fgsm mifgsm pgd'\n";
  for (const std::string& file : rates_files) {
    std::string stem = std::filesystem::path(file).stem().string();
    out << "\nset output '" << stem << ".png'\n"
        << "set title '" << stem << "'\n"
        << "plot for [m in methods] sprintf(\"< awk -F, 'NR>1 && $2==\\\"%s\\\" {print $3\\\"/\\\"$1\\\",\\\"100*$6}' "
        << file << "\", m) using 2:xtic(1) title m\n";
  }
}

std::string rates_to_json_text(const SuccessRateTable& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const RateEntry& e : table.entries) {
    rows.push_back({{"cell", e.cell < 0 ? nlohmann::ordered_json("all") : nlohmann::ordered_json(e.cell)},
                    {"method", to_string(e.method)},
                    {"epsilon", e.epsilon},
                    {"successes", e.successes},
                    {"trials", e.trials},
                    {"rate", e.rate()},
                    {"std_error", e.std_error()}});
  }
  return rows.dump(2);
}

}  // namespace mimoadv
