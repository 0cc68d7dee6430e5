#pragma once

// Generational evolutionary algorithm over integer lattices, following the
// classic eaSimple loop: tournament selection, pairwise two-point crossover,
// uniform-integer reset mutation, re-evaluation of changed individuals, and a
// hall of fame of the best individuals ever seen. Fitness is maximised.

#include <simherd/analysis/batch.hpp>
#include <simherd/engine/wolf_sheep.hpp>
#include <simherd/error.hpp>
#include <simherd/prng.hpp>

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace simherd::analysis {

struct GeneSpec {
  std::string name;
  long min = 0;
  long step = 1;
  long max = 0;

  long lattice_size() const { return (max - min) / step + 1; }
  bool on_lattice(long v) const { return v >= min && v <= max && (v - min) % step == 0; }
};

struct EAConfig {
  std::size_t population_size = 200;
  std::size_t generations = 100;
  double cxpb = 0.8;
  double mutpb = 0.2;
  double indpb = 0.1;
  std::size_t tournament_size = 3;
  std::size_t hall_of_fame_size = 1;
  std::vector<GeneSpec> genes;
  std::uint64_t seed = 1;
  // Reproduce the published listing literally: initial genes drawn from
  // [min, max) and mutation bounds taken from the step and max entries.
  bool strict_listing_bounds = false;

  void validate() const {
    if (population_size < 2) throw Error(ErrorKind::invalid_argument, "population_size must be at least 2");
    if (tournament_size < 1) throw Error(ErrorKind::invalid_argument, "tournament_size must be at least 1");
    if (hall_of_fame_size < 1) throw Error(ErrorKind::invalid_argument, "hall_of_fame_size must be at least 1");
    if (genes.empty()) throw Error(ErrorKind::invalid_argument, "no genes configured");
    for (double p : {cxpb, mutpb, indpb}) {
      if (!(p >= 0 && p <= 1)) throw Error(ErrorKind::invalid_argument, "probabilities must lie in [0, 1]");
    }
    for (const auto& g : genes) {
      if (g.step <= 0 || g.min > g.max) {
        throw Error(ErrorKind::invalid_argument, "gene " + g.name + " needs step > 0 and min <= max");
      }
      if (strict_listing_bounds && (g.min >= g.max || g.step > g.max)) {
        throw Error(ErrorKind::invalid_argument, "gene " + g.name + " has an empty range under the listing bounds");
      }
    }
  }
};

struct Individual {
  std::vector<long> genes;
  std::optional<double> fitness;
  friend bool operator==(const Individual&, const Individual&) = default;
};

struct GenerationStats {
  std::size_t gen = 0;
  std::size_t evaluations = 0;
  double max = 0;
  double mean = 0;
  double hall_of_fame_best = 0;
};

struct EAResult {
  std::vector<Individual> hall_of_fame;  // best first
  GenerationStats initial;               // the random starting population
  std::vector<GenerationStats> log;      // generations 1..G
  std::vector<Individual> population;
};

// Scores a batch of gene vectors, returning one fitness per vector in order.
using Evaluator = std::function<std::vector<double>(const std::vector<std::vector<long>>&)>;

namespace detail {

// Python-style randint: inclusive on both ends.
inline long randint(Prng& rng, long lo, long hi) {
  return lo + static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(hi - lo) + 1));
}

inline void cx_two_point(Prng& rng, std::vector<long>& a, std::vector<long>& b) {
  const long size = static_cast<long>(std::min(a.size(), b.size()));
  if (size < 2) return;
  long p1 = randint(rng, 1, size);
  long p2 = randint(rng, 1, size - 1);
  if (p2 >= p1) {
    ++p2;
  } else {
    std::swap(p1, p2);
  }
  for (long i = p1; i < p2; ++i) std::swap(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)]);
}

class HallOfFame {
 public:
  explicit HallOfFame(std::size_t size) : size_(size) {}

  void update(const std::vector<Individual>& population) {
    for (const auto& ind : population) {
      if (items_.size() == size_ && !(*ind.fitness > *items_.back().fitness)) continue;
      if (std::any_of(items_.begin(), items_.end(), [&](const auto& h) { return h.genes == ind.genes; })) continue;
      auto pos = std::find_if(items_.begin(), items_.end(), [&](const auto& h) { return *ind.fitness > *h.fitness; });
      items_.insert(pos, ind);
      if (items_.size() > size_) items_.pop_back();
    }
  }
  const std::vector<Individual>& items() const { return items_; }

 private:
  std::size_t size_;
  std::vector<Individual> items_;
};

inline GenerationStats stats_of(std::size_t gen, std::size_t evaluations, const std::vector<Individual>& pop) {
  GenerationStats s{gen, evaluations, *pop.front().fitness, 0, 0};
  for (const auto& ind : pop) {
    s.max = std::max(s.max, *ind.fitness);
    s.mean += *ind.fitness;
  }
  s.mean /= static_cast<double>(pop.size());
  return s;
}

}  // namespace detail

inline EAResult ea_calibrate(const EAConfig& config, const Evaluator& evaluate,
                             const std::function<void(const GenerationStats&)>& on_generation = {}) {
  config.validate();
  Prng rng(config.seed);
  const auto& genes = config.genes;

  auto random_gene = [&](const GeneSpec& g) {
    if (config.strict_listing_bounds) {
      // randrange(min, max, step): the max itself is never drawn.
      const long count = (g.max - g.min + g.step - 1) / g.step;
      return g.min + g.step * static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(count)));
    }
    return g.min + g.step * static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(g.lattice_size())));
  };
  auto mutate = [&](Individual& ind) {
    for (std::size_t i = 0; i < genes.size(); ++i) {
      if (rng.uniform01() < config.indpb) {
        ind.genes[i] = config.strict_listing_bounds ? detail::randint(rng, genes[i].step, genes[i].max)
                                                    : random_gene(genes[i]);
      }
    }
  };
  auto evaluate_invalid = [&](std::vector<Individual>& pop) {
    std::vector<std::vector<long>> pending;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!pop[i].fitness) {
        pending.push_back(pop[i].genes);
        where.push_back(i);
      }
    }
    if (pending.empty()) return std::size_t{0};
    const auto fitness = evaluate(pending);
    if (fitness.size() != pending.size()) {
      throw Error(ErrorKind::invalid_argument, "evaluator returned " + std::to_string(fitness.size()) +
                                                   " values for " + std::to_string(pending.size()) + " individuals");
    }
    for (std::size_t k = 0; k < where.size(); ++k) pop[where[k]].fitness = fitness[k];
    return pending.size();
  };

  std::vector<Individual> population(config.population_size);
  for (auto& ind : population) {
    for (const auto& g : genes) ind.genes.push_back(random_gene(g));
  }

  EAResult result;
  detail::HallOfFame hof(config.hall_of_fame_size);
  result.initial = detail::stats_of(0, evaluate_invalid(population), population);
  hof.update(population);
  result.initial.hall_of_fame_best = *hof.items().front().fitness;

  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    // Tournament selection with replacement; ties go to the first aspirant.
    std::vector<Individual> offspring;
    offspring.reserve(population.size());
    for (std::size_t k = 0; k < population.size(); ++k) {
      const Individual* best = nullptr;
      for (std::size_t t = 0; t < config.tournament_size; ++t) {
        const auto& candidate = population[rng.uniform_int(population.size())];
        if (!best || *candidate.fitness > *best->fitness) best = &candidate;
      }
      offspring.push_back(*best);
    }
    for (std::size_t i = 1; i < offspring.size(); i += 2) {
      if (rng.uniform01() < config.cxpb) {
        detail::cx_two_point(rng, offspring[i - 1].genes, offspring[i].genes);
        offspring[i - 1].fitness.reset();
        offspring[i].fitness.reset();
      }
    }
    for (auto& ind : offspring) {
      if (rng.uniform01() < config.mutpb) {
        mutate(ind);
        ind.fitness.reset();
      }
    }
    const auto evaluations = evaluate_invalid(offspring);
    hof.update(offspring);
    population = std::move(offspring);
    result.log.push_back(detail::stats_of(gen, evaluations, population));
    result.log.back().hall_of_fame_best = *hof.items().front().fitness;
    if (on_generation) on_generation(result.log.back());
  }
  result.hall_of_fame = hof.items();
  result.population = std::move(population);
  return result;
}

// The seven Wolf Sheep Predation sliders as calibration genes, in widget order.
inline std::vector<GeneSpec> wsp_genes() {
  std::vector<GeneSpec> out;
  const engine::WolfSheepModel model;
  for (const auto& spec : model.param_specs()) {
    if (spec.kind != engine::ParamKind::numeric) continue;
    out.push_back({spec.name, static_cast<long>(spec.min), static_cast<long>(spec.step), static_cast<long>(spec.max)});
  }
  return out;
}

// Fitness = stability score of a scheduled run of `ticks` ticks. `names`
// lists the slider behind each gene; sliders not named keep their defaults.
// Each evaluation draws its own seed from (seed, evaluation counter) so a
// calibration is reproducible whatever the worker count.
inline Evaluator wsp_evaluator(std::shared_ptr<client::ServerSession> session, std::vector<std::string> names,
                               std::size_t workers, long ticks, std::uint64_t seed) {
  auto counter = std::make_shared<std::uint64_t>(0);
  return [session, names, workers, ticks, seed, counter](const std::vector<std::vector<long>>& batch) {
    std::vector<RunSpec> runs;
    for (const auto& individual : batch) {
      RunSpec run;
      run.commands = wsp_gene_commands(names, individual, mix_seed(seed, (*counter)++));
      run.stop_at_tick = ticks;
      runs.push_back(std::move(run));
    }
    BatchOptions options;
    options.workers = workers;
    return stability_scores(run_batch(session, runs, options));
  };
}

struct ReplaySeries {
  std::vector<long> ticks;
  std::vector<long> sheep;
  std::vector<long> wolves;
  double score = 0;
};

// Headless replay of one gene vector: the population series over `ticks`
// ticks (fewer if the model stops) and its stability score.
inline ReplaySeries best_params_replay(const std::vector<long>& genes, std::uint64_t seed, long ticks = 500) {
  const auto specs = wsp_genes();
  if (genes.size() != specs.size()) {
    throw Error(ErrorKind::invalid_argument,
                "expected " + std::to_string(specs.size()) + " genes, got " + std::to_string(genes.size()));
  }
  engine::WolfSheepModel model;
  for (std::size_t i = 0; i < genes.size(); ++i) {
    if (!specs[i].on_lattice(genes[i])) {
      throw Error(ErrorKind::range, specs[i].name + " value " + std::to_string(genes[i]) + " is not on [" +
                                        std::to_string(specs[i].min) + ", " + std::to_string(specs[i].max) + "]");
    }
    model.set_param(specs[i].name, static_cast<double>(genes[i]));
  }
  model.reseed(seed);
  model.setup();
  ReplaySeries series;
  auto record = [&] {
    series.ticks.push_back(model.ticks());
    series.sheep.push_back(*model.count("sheep"));
    series.wolves.push_back(*model.count("wolves"));
  };
  record();
  while (model.ticks() < ticks && !model.should_stop()) {
    model.step();
    record();
  }
  if (series.ticks.size() >= 2) {
    series.score = stability_score(std::vector<double>(series.sheep.begin(), series.sheep.end()),
                                   std::vector<double>(series.wolves.begin(), series.wolves.end()));
  }
  return series;
}

}  // namespace simherd::analysis
