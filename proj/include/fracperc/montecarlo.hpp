#pragma once

// Batch estimation of expected Minkowski functionals and spanning
// probabilities. Replicates are cut into contiguous shards of sample indices;
// shards run on a worker pool and are merged in shard order, so a result
// depends on the seed and the shard plan but not on the number of workers.

#include "fracperc/analytic.hpp"
#include "fracperc/core.hpp"
#include "fracperc/geometry.hpp"
#include "fracperc/sampler.hpp"
#include "fracperc/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fracperc::montecarlo {

using geometry::Axis;

/// Upper bound on replicates per run.
inline constexpr std::uint64_t kMaxSamples = std::uint64_t{1} << 40;

/// Environment variable overriding the worker count.
inline constexpr const char* kWorkersEnv = "FRACPERC_WORKERS";

enum class Functional { V0, V1, V2, span_horizontal, span_vertical };

inline const char* to_string(Functional f) {
  switch (f) {
    case Functional::V0: return "V0";
    case Functional::V1: return "V1";
    case Functional::V2: return "V2";
    case Functional::span_horizontal: return "span_h";
    case Functional::span_vertical: return "span_v";
  }
  return "?";
}

inline Functional functional_from_string(const std::string& name) {
  for (auto f : {Functional::V0, Functional::V1, Functional::V2, Functional::span_horizontal,
                 Functional::span_vertical}) {
    if (name == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown functional '" + name + "'");
}

/// Index k of an intrinsic volume, or -1 for spanning indicators.
inline int intrinsic_index(Functional f) {
  switch (f) {
    case Functional::V0: return 0;
    case Functional::V1: return 1;
    case Functional::V2: return 2;
    default: return -1;
  }
}

struct ExperimentSpec {
  ModelParams params;
  int n = 0;
  std::uint64_t samples = 2000;
  std::uint64_t seed = 0;
  std::vector<Target> targets{Target::F, Target::C};
  std::vector<Functional> functionals{Functional::V0, Functional::V1, Functional::V2};
  int connectivity = 8;
  SampleOptions sample_options;
  /// Number of shards; 0 picks one per worker.
  std::uint64_t shards = 0;
  /// Worker threads; 0 uses the environment override or the hardware count.
  unsigned workers = 0;
};

struct EstimateRow {
  int M = 2;
  double p = 0.0;
  int n = 0;
  Functional functional = Functional::V0;
  Target target = Target::F;
  McEstimate estimate;
  /// r^{n(D-k)} * mean, when M^d p > 1 and the row is an intrinsic volume.
  std::optional<double> rescaled_mean;
};

struct ExperimentResult {
  std::vector<EstimateRow> rows;
  std::uint64_t shards = 0;
  unsigned workers = 0;
  double seconds = 0.0;

  [[nodiscard]] const EstimateRow& row(Functional f, Target t) const {
    for (const auto& r : rows) {
      if (r.functional == f && r.target == t) return r;
    }
    throw std::out_of_range(std::string("no row for ") + to_string(f) + " of " +
                            analytic::to_string(t));
  }
};

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<unsigned>(value);
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(std::string(kWorkersEnv) + " must be a positive integer, got '" +
                                env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

/// Adds the functionals of one realization to the accumulators, laid out as
/// targets x functionals.
inline void accumulate(const ExperimentSpec& spec, const GridRealization& realization,
                       std::vector<McEstimate>& acc) {
  const std::size_t nf = spec.functionals.size();
  for (std::size_t t = 0; t < spec.targets.size(); ++t) {
    const GridRealization view =
        spec.targets[t] == Target::F ? realization : complement(realization);
    std::optional<geometry::MinkowskiValues> values;
    std::optional<geometry::ClusterLabeling> labeling;
    for (std::size_t f = 0; f < nf; ++f) {
      const Functional functional = spec.functionals[f];
      double x = 0.0;
      switch (functional) {
        case Functional::V0:
        case Functional::V1:
        case Functional::V2:
          if (!values) values = geometry::minkowski(view);
          x = functional == Functional::V0   ? static_cast<double>(values->V0)
              : functional == Functional::V1 ? values->V1
                                             : values->V2;
          break;
        case Functional::span_horizontal:
        case Functional::span_vertical:
          if (!labeling) labeling = geometry::label(view.grid, spec.connectivity);
          x = labeling->spans[functional == Functional::span_horizontal ? 0 : 1] ? 1.0 : 0.0;
          break;
      }
      acc[t * nf + f].add(x);
    }
  }
}

}  // namespace detail

/// Splits [0, samples) into `shards` contiguous ranges; shard i gets
/// [begin(i), begin(i+1)).
inline std::uint64_t shard_begin(std::uint64_t samples, std::uint64_t shards, std::uint64_t i) {
  return samples / shards * i + std::min(i, samples % shards);
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.params.validate();
  if (spec.samples < 2) throw std::invalid_argument("run_experiment: samples must be >= 2");
  if (spec.samples > kMaxSamples) {
    throw std::invalid_argument("run_experiment: samples exceeds " + std::to_string(kMaxSamples));
  }
  if (spec.n < 0) throw std::invalid_argument("run_experiment: n must be >= 0");
  if (spec.connectivity != 4 && spec.connectivity != 8) {
    throw std::invalid_argument("run_experiment: connectivity must be 4 or 8");
  }
  if (spec.targets.empty() || spec.functionals.empty()) {
    throw std::invalid_argument("run_experiment: nothing to estimate");
  }
  // Fail fast on the resource guard before spawning workers.
  lattice_side(spec.params.M, spec.n, spec.params.d, spec.sample_options);

  const auto start = std::chrono::steady_clock::now();
  const unsigned workers = resolve_workers(spec.workers);
  const std::uint64_t shards = std::min<std::uint64_t>(
      spec.samples, spec.shards > 0 ? spec.shards : workers);
  const std::size_t columns = spec.targets.size() * spec.functionals.size();

  std::vector<std::vector<McEstimate>> partial(shards, std::vector<McEstimate>(columns));
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::uint64_t shard = next.fetch_add(1);
      if (shard >= shards) return;
      try {
        const std::uint64_t end = shard_begin(spec.samples, shards, shard + 1);
        for (std::uint64_t i = shard_begin(spec.samples, shards, shard); i < end; ++i) {
          const auto realization = sample(spec.params, spec.n, spec.seed, i, spec.sample_options);
          detail::accumulate(spec, realization, partial[shard]);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = shards;
        return;
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(workers, shards));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  result.shards = shards;
  result.workers = threads;
  const std::size_t nf = spec.functionals.size();
  for (std::size_t t = 0; t < spec.targets.size(); ++t) {
    for (std::size_t f = 0; f < nf; ++f) {
      EstimateRow row;
      row.M = spec.params.M;
      row.p = spec.params.p;
      row.n = spec.n;
      row.functional = spec.functionals[f];
      row.target = spec.targets[t];
      for (const auto& shard : partial) row.estimate.merge(shard[t * nf + f]);
      const int k = intrinsic_index(row.functional);
      if (k >= 0 && k <= spec.params.d && spec.params.non_empty_regime()) {
        row.rescaled_mean = analytic::rescale_factor(spec.params, spec.n, k) * row.estimate.mean();
      }
      result.rows.push_back(row);
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Fraction of replicates of F_n with a component touching both sides
/// perpendicular to `axis`.
inline McEstimate spanning_probability(const ModelParams& params, int n, std::uint64_t samples,
                                       std::uint64_t seed, int connectivity, Axis axis,
                                       unsigned workers = 0) {
  ExperimentSpec spec;
  spec.params = params;
  spec.n = n;
  spec.samples = samples;
  spec.seed = seed;
  spec.connectivity = connectivity;
  spec.workers = workers;
  spec.targets = {Target::F};
  spec.functionals = {axis == Axis::horizontal ? Functional::span_horizontal
                                               : Functional::span_vertical};
  return run_experiment(spec).rows.front().estimate;
}

/// Analytic E V_k of the target at level n, the reference for a row.
inline double analytic_expectation(const ModelParams& params, int n, int k, Target target) {
  if (params.d == 1) {
    return target == Target::F ? analytic::ev_Vk_1d(params, n, k)
                               : analytic::ev_Vk_complement_1d(params, n, k, false);
  }
  return target == Target::F ? analytic::ev_Vk_F_2d(params, n, k)
                             : analytic::ev_Vk_C_2d(params, n, k);
}

}  // namespace fracperc::montecarlo
