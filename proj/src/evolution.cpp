#include "meshmap/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "meshmap/errors.hpp"
#include "meshmap/heuristics.hpp"

namespace meshmap {

namespace {

// Stream tags for Rng::derive so every random draw has its own stream.
enum StreamTag : std::uint64_t {
  kInitStream = 0,
  kPartitionStream = 1,
  kPlacementStream = 2,
  kNoiseStream = 3,
  kSegmentStream = 4,
};

bool all_layers_feasible(const MappingProblem& p, const PartitioningGenotype& x) {
  for (std::size_t i = 0; i < p.layer_count(); ++i) {
    if (!is_feasible(p.workload.layers[i], p.min_cores[i] + x.extra[i], p.arch)) return false;
  }
  return true;
}

std::size_t used_cores(const MappingProblem& p, const PartitioningGenotype& x) {
  const auto sizes = layer_sizes(p, x);
  return static_cast<std::size_t>(std::accumulate(sizes.begin(), sizes.end(), 0));
}

// Index of the smallest latency; the lowest index wins ties.
std::size_t argmin(const std::vector<double>& values) {
  return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::single: return "single";
    case Strategy::global: return "global";
    case Strategy::chipwise: return "chipwise";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "single") return Strategy::single;
  if (s == "global") return Strategy::global;
  if (s == "chipwise" || s == "chip-wise") return Strategy::chipwise;
  throw ConfigError("unknown strategy '" + s + "' (single, global, chipwise)", "es.strategy");
}

std::string to_string(TraceLevel level) {
  switch (level) {
    case TraceLevel::init: return "init";
    case TraceLevel::partitioning: return "partitioning";
    case TraceLevel::placement: return "placement";
  }
  return "unknown";
}

void EsConfig::validate() const {
  if (lambda_part < 1) throw ConfigError("must be >= 1", "es.lambda_part");
  if (lambda_place < 1) throw ConfigError("must be >= 1", "es.lambda_place");
  if (budget < lambda_part + lambda_place) throw ConfigError("must be >= lambda_part + lambda_place", "es.budget");
  if (k_init < 0) throw ConfigError("must be >= 0", "es.k_init");
  if (max_resample < 1) throw ConfigError("must be >= 1", "es.max_resample");
  if (!(noise.sigma >= 0.0 && noise.sigma < 1.0 / 3.0)) throw ConfigError("must lie in [0, 1/3)", "model.noise.sigma");
  partition_ops.validate();
  placement_ops.validate();
}

NestedEvolution::NestedEvolution(const MappingProblem& problem, EsConfig config, TraceSink sink)
    : problem_(problem), config_(std::move(config)), sink_(std::move(sink)) {
  config_.validate();
}

std::vector<double> NestedEvolution::evaluate_batch(const std::vector<Individual>& candidates) {
  std::vector<double> latency(candidates.size(), 0.0);
  const auto rates = problem_.arch.rates();
  const auto base = next_eval_;
  auto eval_one = [&](std::size_t i) {
    const auto m = build_mapping(candidates[i].x, candidates[i].omega, problem_);
    const auto seed = Rng::derive(config_.seed, {kNoiseStream, static_cast<std::uint64_t>(base) + i});
    latency[i] = evaluate(problem_, m, rates, config_.noise, seed).latency_us;
  };
  const auto workers = std::min<std::size_t>(std::max(1u, config_.threads), candidates.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) eval_one(i);
    return latency;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < candidates.size(); i = next++) eval_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return latency;
}

void NestedEvolution::record(TraceLevel level, double latency, bool accepted, double best_so_far, bool charge) {
  TraceEvent e{next_eval_++, generation_, level, latency, accepted, best_so_far};
  if (charge) ++charged_;
  trace_.push_back(e);
  if (sink_) sink_(e);
}

void NestedEvolution::consider_best(const Individual& ind) {
  if (!best_ || ind.latency_us < best_->latency_us) best_ = ind;
}

const Individual& NestedEvolution::initialize() {
  if (initialized_) return parent_;
  int k = config_.k_init;
  if (problem_.c_min + k * static_cast<int>(problem_.layer_count()) > problem_.total_cores()) {
    const int fallback = max_feasible_k(problem_);
    warnings_.push_back("min+" + std::to_string(k) + " does not fit; using min+" + std::to_string(fallback));
    k = fallback;
  }
  const auto x0 = min_plus_k(problem_, k);

  std::vector<Individual> candidates;
  for (const auto& h : standard_heuristics()) candidates.push_back({x0, heuristic_placement(h, problem_.arch), 0.0});
  Rng rng(Rng::derive(config_.seed, kInitStream));
  candidates.push_back({x0, random_placement(problem_.arch, rng), 0.0});
  if (config_.charge_init_to_budget) {
    candidates.resize(std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(remaining())));
  }

  const auto latency = evaluate_batch(candidates);
  const auto chosen = argmin(latency);
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].latency_us = latency[i];
    consider_best(candidates[i]);
    running = std::min(running, latency[i]);
    record(TraceLevel::init, latency[i], i == chosen, running, config_.charge_init_to_budget);
  }
  parent_ = candidates[chosen];
  initialized_ = true;
  return parent_;
}

bool NestedEvolution::partitioning_step() {
  if (!initialized_) initialize();
  if (remaining() <= 0) return false;
  ++generation_;
  ++partitioning_generations_;

  const auto wanted = static_cast<std::size_t>(std::min<std::int64_t>(config_.lambda_part, remaining()));
  std::vector<Individual> offspring;
  for (std::size_t i = 0; i < wanted; ++i) {
    for (int attempt = 0; attempt < config_.max_resample; ++attempt) {
      Rng rng(Rng::derive(config_.seed, {kPartitionStream, static_cast<std::uint64_t>(generation_), i,
                                         static_cast<std::uint64_t>(attempt)}));
      auto x = mutate_partitioning(parent_.x, config_.partition_ops, rng);
      // Unchanged genotypes would only re-measure the parent.
      if (x == parent_.x || !all_layers_feasible(problem_, x)) continue;
      auto omega = config_.use_reordering ? reorder_placement(parent_.omega, parent_.x, x, problem_.min_cores)
                                          : parent_.omega;
      offspring.push_back({std::move(x), std::move(omega), 0.0});
      break;
    }
  }
  if (offspring.empty()) {
    ++stalled_;
    if (!config_.elitist_partitioning) {
      warnings_.push_back("generation " + std::to_string(generation_) + ": no admissible partitioning offspring");
    }
    return true;
  }

  const auto latency = evaluate_batch(offspring);
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    offspring[i].latency_us = latency[i];
    consider_best(offspring[i]);
  }
  const auto best = argmin(latency);
  const bool adopt = !config_.elitist_partitioning || latency[best] < parent_.latency_us;
  if (!(latency[best] < parent_.latency_us)) ++stalled_;

  double running = config_.elitist_partitioning ? parent_.latency_us : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    running = std::min(running, latency[i]);
    record(TraceLevel::partitioning, latency[i], adopt && i == best, running, true);
  }
  if (adopt) parent_ = offspring[best];
  return true;
}

bool NestedEvolution::placement_step() {
  if (!initialized_) initialize();
  if (remaining() <= 0) return false;
  const auto used = used_cores(problem_, parent_.x);
  const auto wanted = static_cast<std::size_t>(std::min<std::int64_t>(config_.lambda_place, remaining()));
  std::vector<Individual> offspring;
  for (std::size_t i = 0; i < wanted; ++i) {
    Rng rng(Rng::derive(config_.seed, {kPlacementStream, static_cast<std::uint64_t>(generation_), i}));
    offspring.push_back({parent_.x, mutate_placement(parent_.omega, used, config_.placement_ops, rng), 0.0});
  }
  const auto latency = evaluate_batch(offspring);
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    offspring[i].latency_us = latency[i];
    consider_best(offspring[i]);
  }
  const auto best = argmin(latency);
  const bool adopt = latency[best] < parent_.latency_us;
  double running = parent_.latency_us;
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    running = std::min(running, latency[i]);
    record(TraceLevel::placement, latency[i], adopt && i == best, running, true);
  }
  if (adopt) parent_ = offspring[best];
  return true;
}

RunResult NestedEvolution::run() {
  initialize();
  while (remaining() > 0) {
    partitioning_step();
    placement_step();
  }
  RunResult r;
  const auto& best = *best_;
  r.best_mapping = build_mapping(best.x, best.omega, problem_);
  r.best_report = evaluate(problem_, r.best_mapping, problem_.arch.rates());
  r.trace = trace_;
  r.config = config_;
  r.warnings = warnings_;
  r.partitioning_generations = partitioning_generations_;
  r.stalled_partitioning_generations = stalled_;
  return r;
}

RunResult evolve(const MappingProblem& problem, const EsConfig& config, TraceSink sink) {
  NestedEvolution es(problem, config, std::move(sink));
  return es.run();
}

std::vector<WorkloadSegment> segment_workload(const Workload& w, const Architecture& arch, int n_chips) {
  if (n_chips < 1) throw ConfigError("must be >= 1", "chips");
  if (n_chips > arch.chips()) throw ConfigError("more segments than chips", "chips");
  const auto layers = w.layers.size();
  if (layers < static_cast<std::size_t>(n_chips)) {
    throw InfeasibleError("cannot split " + std::to_string(layers) + " layers over " + std::to_string(n_chips) +
                          " chips");
  }
  const auto mins = minimum_partitioning(w, arch);

  // Enumerate every contiguous split (cut positions strictly increasing).
  std::vector<std::size_t> best_cuts;
  int best_max = std::numeric_limits<int>::max();
  double best_var = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> cuts{0};
  std::function<void(std::size_t)> search = [&](std::size_t segment) {
    if (segment + 1 == static_cast<std::size_t>(n_chips)) {
      cuts.push_back(layers);
      std::vector<int> seg_min;
      bool fits = true;
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const int c = std::accumulate(mins.begin() + static_cast<std::ptrdiff_t>(cuts[s]),
                                      mins.begin() + static_cast<std::ptrdiff_t>(cuts[s + 1]), 0);
        fits = fits && static_cast<std::size_t>(c) <= arch.usable_cores_on_chip(static_cast<int>(s));
        seg_min.push_back(c);
      }
      if (fits) {
        const int mx = *std::max_element(seg_min.begin(), seg_min.end());
        const double mean = std::accumulate(seg_min.begin(), seg_min.end(), 0.0) / static_cast<double>(seg_min.size());
        double var = 0.0;
        for (int c : seg_min) var += (c - mean) * (c - mean);
        if (mx < best_max || (mx == best_max && var < best_var)) {
          best_max = mx;
          best_var = var;
          best_cuts = cuts;
        }
      }
      cuts.pop_back();
      return;
    }
    const auto remaining_segments = static_cast<std::size_t>(n_chips) - segment - 1;
    for (std::size_t cut = cuts.back() + 1; cut + remaining_segments <= layers; ++cut) {
      cuts.push_back(cut);
      search(segment + 1);
      cuts.pop_back();
    }
  };
  search(0);
  if (best_cuts.empty()) throw InfeasibleError("no contiguous segmentation fits the chips");

  std::vector<WorkloadSegment> out;
  for (std::size_t s = 0; s + 1 < best_cuts.size(); ++s) {
    WorkloadSegment seg;
    seg.first_layer = best_cuts[s];
    seg.end_layer = best_cuts[s + 1];
    seg.chip = static_cast<int>(s);
    seg.c_min = std::accumulate(mins.begin() + static_cast<std::ptrdiff_t>(seg.first_layer),
                                mins.begin() + static_cast<std::ptrdiff_t>(seg.end_layer), 0);
    seg.workload.name = w.name + "/segment" + std::to_string(s);
    if (seg.first_layer == 0) {
      seg.workload.input_size = w.input_size;
      seg.workload.input_activity = w.input_activity;
    } else {
      const auto& prev = w.layers[seg.first_layer - 1];
      seg.workload.input_size = prev.neurons;
      seg.workload.input_activity = 1.0 - prev.activation_sparsity;
    }
    seg.workload.layers.assign(w.layers.begin() + static_cast<std::ptrdiff_t>(seg.first_layer),
                               w.layers.begin() + static_cast<std::ptrdiff_t>(seg.end_layer));
    out.push_back(std::move(seg));
  }
  return out;
}

Architecture chip_architecture(const Architecture& arch, int chip) {
  ArchitectureSpec spec = arch.spec();
  spec.chips = 1;
  spec.interchip_links.clear();
  spec.disabled_cores.clear();
  for (const auto& d : arch.spec().disabled_cores) {
    if (d.chip == chip) spec.disabled_cores.push_back({0, d.x, d.y, d.c});
  }
  return Architecture(spec);
}

RunResult evolve_chipwise(const MappingProblem& problem, const EsConfig& config, TraceSink sink) {
  config.validate();
  const int chips = problem.arch.chips();
  if (chips == 1) return evolve(problem, config, std::move(sink));

  const auto segments = segment_workload(problem.workload, problem.arch, chips);
  const int total_min = std::accumulate(segments.begin(), segments.end(), 0,
                                        [](int acc, const WorkloadSegment& s) { return acc + s.c_min; });
  std::vector<std::int64_t> budgets;
  std::int64_t assigned = 0;
  std::size_t largest = 0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    budgets.push_back(config.budget * segments[s].c_min / total_min);
    assigned += budgets.back();
    if (segments[s].c_min > segments[largest].c_min) largest = s;
  }
  budgets[largest] += config.budget - assigned;

  RunResult combined;
  combined.config = config;
  PartitioningGenotype x;
  std::vector<CoreId> order;
  std::vector<bool> taken(problem.arch.core_count(), false);
  std::int64_t offset = 0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    MappingProblem sub(seg.workload, chip_architecture(problem.arch, seg.chip));
    EsConfig cfg = config;
    cfg.budget = budgets[s];
    cfg.strategy = Strategy::single;
    cfg.seed = Rng::derive(config.seed, {kSegmentStream, s});
    TraceSink forward;
    if (sink) {
      forward = [&sink, offset](TraceEvent e) {
        e.eval_index += offset;
        sink(e);
      };
    }
    auto result = evolve(sub, cfg, forward);

    for (auto e : result.trace) {
      e.eval_index += offset;
      combined.trace.push_back(e);
    }
    offset += static_cast<std::int64_t>(result.trace.size());
    combined.segment_traces.push_back(std::move(result.trace));
    combined.partitioning_generations += result.partitioning_generations;
    combined.stalled_partitioning_generations += result.stalled_partitioning_generations;
    for (auto& w : result.warnings) combined.warnings.push_back("segment " + std::to_string(s) + ": " + w);

    x.extra.insert(x.extra.end(), result.best_mapping.partitioning.extra.begin(),
                   result.best_mapping.partitioning.extra.end());
    for (const auto& cores : result.best_mapping.layer_cores) {
      for (auto id : cores) {
        auto loc = sub.arch.core(id);
        loc.chip = seg.chip;
        const auto full = problem.arch.core_id(loc);
        order.push_back(full);
        taken[full] = true;
      }
    }
  }
  for (CoreId id = 0; id < problem.arch.core_count(); ++id)
    if (!taken[id]) order.push_back(id);
  x.unused = problem.spare_cores() - x.total_extra();

  combined.best_mapping = build_mapping(x, PlacementGenotype{order}, problem);
  combined.best_report = evaluate(problem, combined.best_mapping, problem.arch.rates());
  return combined;
}

RunResult run_strategy(const MappingProblem& problem, const EsConfig& config, TraceSink sink) {
  if (config.strategy == Strategy::chipwise) return evolve_chipwise(problem, config, std::move(sink));
  return evolve(problem, config, std::move(sink));
}

}  // namespace meshmap
