#include "ddi/hyperopt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ddi/csv.hpp"
#include "ddi/parallel.hpp"
#include "ddi/random.hpp"

namespace ddi::hyperopt {

namespace {

constexpr double kLog10LrLo = -5.0;
constexpr double kLog10LrHi = -3.0;

double lerp(double lo, double hi, double u) { return lo + (hi - lo) * u; }

std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

bool improved(double fitness, double best) { return fitness > best; }

// Counts iterations since the global best last rose by at least min_gain
// over the value recorded at the previous reset.
class Stagnation {
 public:
  Stagnation(double start, const Settings& s) : reference_(start), settings_(s) {}

  // Returns true when the phase should stop.
  bool update(double best) {
    if (best - reference_ >= settings_.min_gain) {
      reference_ = best;
      count_ = 0;
      return false;
    }
    return ++count_ >= settings_.stagnation_window;
  }

 private:
  double reference_;
  std::size_t count_ = 0;
  const Settings& settings_;
};

class Runner {
 public:
  Runner(const SearchSpace& space, const FitnessFn& fitness, const Settings& settings,
         const mlp::Config& base)
      : space_(space), fitness_(fitness), settings_(settings), base_(base) {}

  // Evaluates candidates (deduplicated through the cache), appends log rows
  // in agent order and returns the fitness of every candidate.
  std::vector<double> evaluate(Phase phase, std::size_t iteration,
                               std::span<const Candidate> candidates) {
    const std::size_t n = candidates.size();
    std::vector<nlohmann::json> configs(n);
    std::vector<std::string> keys(n);
    std::vector<std::size_t> fresh;
    std::map<std::string, std::size_t> first_in_batch;
    for (std::size_t i = 0; i < n; ++i) {
      configs[i] = space_.describe(candidates[i], base_);
      keys[i] = configs[i].dump();
      if (cache_.count(keys[i]) == 0 && first_in_batch.emplace(keys[i], i).second) {
        fresh.push_back(i);
      }
    }

    std::vector<double> fresh_fitness(fresh.size(), kNegInf);
    std::vector<double> fresh_seconds(fresh.size(), 0.0);
    std::vector<std::string> fresh_error(fresh.size());
    parallel_for(fresh.size(), settings_.workers, [&](std::size_t k) {
      const auto start = std::chrono::steady_clock::now();
      try {
        const double f = fitness_(candidates[fresh[k]], settings_.seed);
        if (std::isnan(f)) {
          fresh_error[k] = "fitness is NaN";
        } else {
          fresh_fitness[k] = f;
        }
      } catch (const std::exception& e) {
        fresh_error[k] = e.what();
      }
      fresh_seconds[k] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    std::vector<double> out(n);
    std::size_t next_fresh = 0;
    for (std::size_t i = 0; i < n; ++i) {
      LogEntry entry{phase, iteration, i, configs[i], kNegInf, 0.0, true};
      if (next_fresh < fresh.size() && fresh[next_fresh] == i) {
        const std::size_t k = next_fresh++;
        entry.fitness = fresh_fitness[k];
        entry.seconds = fresh_seconds[k];
        entry.cached = false;
        cache_[keys[i]] = entry.fitness;
        ++evaluated_;
        if (!fresh_error[k].empty()) {
          ++failures_;
          if (first_error_.empty()) first_error_ = fresh_error[k];
          spdlog::warn("{} iteration {} agent {}: evaluation failed: {}", to_string(phase),
                       iteration, i, fresh_error[k]);
        }
      } else {
        entry.fitness = cache_.at(keys[i]);
      }
      out[i] = entry.fitness;
      result_.log.push_back(std::move(entry));
    }
    check_failures();
    return out;
  }

  void offer(const Candidate& c, double fitness) {
    if (improved(fitness, result_.best_fitness)) {
      result_.best = c;
      result_.best_fitness = fitness;
    }
  }

  Result run() {
    settings_.validate();
    const auto sizes = space_.discrete_sizes();
    Rng rng(derive_seed(settings_.seed, 0x5eed));

    // Random seeding.
    const auto pool = rsmpl_sample(space_, settings_.rsmpl_configs, rng.next());
    const auto pool_fitness = evaluate(Phase::RSmpl, 0, pool);
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pool_fitness[a] > pool_fitness[b];
    });
    for (std::size_t i : order) offer(pool[i], pool_fitness[i]);
    for (std::size_t i = 0; i < pool.size(); ++i) record_heuristic(pool[i], pool_fitness[i]);

    Pheromones pheromones = Pheromones::uniform(sizes);
    const std::size_t top = std::min(settings_.rsmpl_top, order.size());
    for (std::size_t r = 0; r < top; ++r) {
      pheromones.deposit(pool[order[r]].choice, std::max(pool_fitness[order[r]], 0.0));
    }
    result_.best_trace.push_back(result_.best_fitness);

    run_aco(pheromones, rng, sizes);
    run_pso(rng);

    result_.best_config = space_.describe(result_.best, base_);
    result_.failures = failures_;
    return std::move(result_);
  }

 private:
  void run_aco(Pheromones& pheromones, Rng& rng, const std::vector<std::size_t>& sizes) {
    Stagnation stagnation(result_.best_fitness, settings_);
    for (std::size_t it = 1; it <= settings_.aco_iterations; ++it) {
      std::vector<std::vector<double>> probs(sizes.size());
      for (std::size_t j = 0; j < sizes.size(); ++j) {
        probs[j] = aco_transition_probabilities(pheromones.tau[j], eta(j, sizes[j]),
                                                settings_.alpha, settings_.beta);
      }
      std::vector<Candidate> ants(settings_.ants);
      for (auto& ant : ants) {
        for (std::size_t j = 0; j < sizes.size(); ++j) ant.choice.push_back(sample_categorical(probs[j], rng));
        for (double centre : result_.best.position) {
          ant.position.push_back(std::clamp(rng.normal(centre, settings_.aco_sigma), 0.0, 1.0));
        }
      }
      const auto fit = evaluate(Phase::ACO, it, ants);
      for (std::size_t a = 0; a < ants.size(); ++a) {
        offer(ants[a], fit[a]);
        record_heuristic(ants[a], fit[a]);
      }
      pheromones.evaporate(settings_.rho);
      pheromones.deposit(result_.best.choice, std::max(result_.best_fitness, 0.0));
      result_.best_trace.push_back(result_.best_fitness);
      result_.aco_iterations_run = it;
      if (stagnation.update(result_.best_fitness)) break;
    }
  }

  void run_pso(Rng& rng) {
    const std::size_t dims = space_.continuous_count();
    Swarm swarm;
    swarm.w = settings_.w;
    swarm.c1 = settings_.c1;
    swarm.c2 = settings_.c2;
    swarm.g_best = result_.best.position;
    swarm.g_best_fitness = result_.best_fitness;
    swarm.particles.resize(settings_.particles);
    for (auto& p : swarm.particles) {
      for (std::size_t d = 0; d < dims; ++d) p.x.push_back(rng.uniform());
      p.v.assign(dims, 0.0);
      p.p_best = p.x;
    }
    const auto frozen = result_.best.choice;

    Stagnation stagnation(result_.best_fitness, settings_);
    for (std::size_t it = 1; it <= settings_.pso_iterations; ++it) {
      std::vector<std::vector<double>> r1(swarm.particles.size()), r2(swarm.particles.size());
      for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
        for (std::size_t d = 0; d < dims; ++d) {
          r1[i].push_back(rng.uniform());
          r2[i].push_back(rng.uniform());
        }
      }
      pso_step(swarm, r1, r2);
      std::vector<Candidate> agents;
      agents.reserve(swarm.particles.size());
      for (const auto& p : swarm.particles) agents.push_back({frozen, p.x});
      const auto fit = evaluate(Phase::PSO, it, agents);
      pso_commit(swarm, fit);
      offer({frozen, swarm.g_best}, swarm.g_best_fitness);
      result_.best_trace.push_back(result_.best_fitness);
      result_.pso_iterations_run = it;
      if (stagnation.update(result_.best_fitness)) break;
    }
  }

  std::vector<double> eta(std::size_t dim, std::size_t size) const {
    if (settings_.heuristic == Heuristic::Uniform) return std::vector<double>(size, 1.0);
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& [key, stats] : option_stats_) {
      if (key.first == dim) {
        total += stats.first;
        count += stats.second;
      }
    }
    const double fallback = count > 0 ? total / static_cast<double>(count) : 1.0;
    std::vector<double> out(size);
    for (std::size_t v = 0; v < size; ++v) {
      auto it = option_stats_.find({dim, v});
      const double mean = it == option_stats_.end() ? fallback
                                                    : it->second.first / static_cast<double>(it->second.second);
      out[v] = std::max(mean, kPheromoneFloor);
    }
    return out;
  }

  void record_heuristic(const Candidate& c, double fitness) {
    if (!std::isfinite(fitness)) return;
    for (std::size_t j = 0; j < c.choice.size(); ++j) {
      auto& stats = option_stats_[{j, c.choice[j]}];
      stats.first += fitness;
      stats.second += 1;
    }
  }

  void check_failures() const {
    if (evaluated_ > 0 && static_cast<double>(failures_) >
                              settings_.max_failure_fraction * static_cast<double>(evaluated_)) {
      throw OptimizationError("optimizer aborted: " + std::to_string(failures_) + " of " +
                              std::to_string(evaluated_) +
                              " fitness evaluations failed; first error: " + first_error_);
    }
  }

  const SearchSpace& space_;
  const FitnessFn& fitness_;
  const Settings& settings_;
  mlp::Config base_;
  Result result_;
  std::map<std::string, double> cache_;
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> option_stats_;
  std::size_t evaluated_ = 0;
  std::size_t failures_ = 0;
  std::string first_error_;
};

}  // namespace

std::vector<std::size_t> SearchSpace::discrete_sizes() const {
  return {std::size(mlp::kHiddenLayerChoices), std::size(mlp::kNeuronChoices),
          std::size(mlp::kBatchChoices), 2};
}

void SearchSpace::check(const Candidate& c) const {
  const auto sizes = discrete_sizes();
  if (c.choice.size() != sizes.size() || c.position.size() != continuous_count()) {
    throw ValidationError("candidate does not match the search space dimensions");
  }
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (c.choice[j] >= sizes[j]) throw ValidationError("candidate option index out of range");
  }
  for (double u : c.position) {
    if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("candidate coordinate outside [0, 1]");
  }
}

mlp::Config SearchSpace::to_config(const Candidate& c, const mlp::Config& base) const {
  check(c);
  mlp::Config cfg = base;
  cfg.hidden_layers = mlp::kHiddenLayerChoices[c.choice[0]];
  cfg.neurons_per_layer = mlp::kNeuronChoices[c.choice[1]];
  cfg.batch_size = mlp::kBatchChoices[c.choice[2]];
  cfg.optimizer = c.choice[3] == 0 ? mlp::Optimizer::Adam : mlp::Optimizer::SGD;
  cfg.learning_rate = std::clamp(std::pow(10.0, lerp(kLog10LrLo, kLog10LrHi, c.position[0])),
                                 mlp::kMinLearningRate, mlp::kMaxLearningRate);
  cfg.dropout = lerp(mlp::kMinDropout, mlp::kMaxDropout, c.position[1]);
  return cfg;
}

std::optional<double> SearchSpace::lambda1(const Candidate& c) const {
  if (!search_lambda1) return std::nullopt;
  check(c);
  return c.position[2];
}

nlohmann::json SearchSpace::describe(const Candidate& c, const mlp::Config& base) const {
  nlohmann::json j = mlp::to_json(to_config(c, base));
  if (auto l = lambda1(c)) j["lambda1"] = *l;
  return j;
}

std::vector<double> SearchSpace::normalized(const Candidate& c) const {
  check(c);
  const auto sizes = discrete_sizes();
  std::vector<double> out(sizes.size() + c.position.size());
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    out[j] = static_cast<double>(c.choice[j]) / static_cast<double>(sizes[j] - 1);
  }
  std::copy(c.position.begin(), c.position.end(), out.begin() + static_cast<std::ptrdiff_t>(sizes.size()));
  return out;
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::RSmpl: return "rsmpl";
    case Phase::ACO: return "aco";
    case Phase::PSO: return "pso";
  }
  return "?";
}

Settings Settings::smoke() {
  Settings s;
  s.rsmpl_configs = 3;
  s.ants = 2;
  s.aco_iterations = 2;
  s.particles = 2;
  s.pso_iterations = 2;
  return s;
}

void Settings::validate() const {
  if (rsmpl_configs < 1) throw ValidationError("rsmpl_configs must be at least 1");
  if (ants < 1 || particles < 1) throw ValidationError("ants and particles must be at least 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in [0, 1]");
  if (alpha < 0.0 || beta < 0.0) throw ValidationError("alpha and beta must be non-negative");
  if (!(aco_sigma >= 0.0)) throw ValidationError("aco_sigma must be non-negative");
  if (stagnation_window < 1) throw ValidationError("stagnation_window must be at least 1");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
    throw ValidationError("max_failure_fraction must lie in [0, 1]");
  }
  if (workers < 1) throw ValidationError("workers must be at least 1");
}

std::vector<Candidate> rsmpl_sample(const SearchSpace& space, std::size_t n_configs,
                                    std::uint64_t seed) {
  if (n_configs < 1) throw ValidationError("rsmpl needs at least one configuration");
  Rng rng(seed);
  const auto sizes = space.discrete_sizes();
  std::vector<Candidate> out(n_configs);
  for (auto& c : out) {
    for (std::size_t n : sizes) c.choice.push_back(static_cast<std::size_t>(rng.below(n)));
    for (std::size_t d = 0; d < space.continuous_count(); ++d) c.position.push_back(rng.uniform());
  }
  return out;
}

std::vector<double> aco_transition_probabilities(std::span<const double> tau,
                                                 std::span<const double> eta, double alpha,
                                                 double beta) {
  if (tau.size() != eta.size() || tau.empty()) {
    throw ValidationError("tau and eta must be non-empty and of equal length");
  }
  std::vector<double> p(tau.size());
  double total = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!(tau[i] > 0.0 && eta[i] > 0.0)) throw ValidationError("tau and eta must be positive");
    p[i] = std::pow(tau[i], alpha) * std::pow(eta[i], beta);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

Pheromones Pheromones::uniform(std::span<const std::size_t> sizes, double value) {
  Pheromones p;
  for (std::size_t n : sizes) p.tau.emplace_back(n, std::max(value, kPheromoneFloor));
  return p;
}

void Pheromones::evaporate(double rho) {
  for (auto& dim : tau) {
    for (double& t : dim) t = std::max((1.0 - rho) * t, kPheromoneFloor);
  }
}

void Pheromones::deposit(std::span<const std::size_t> choice, double amount) {
  if (choice.size() != tau.size()) throw ValidationError("deposit: choice has the wrong length");
  for (std::size_t j = 0; j < tau.size(); ++j) {
    double& t = tau[j].at(choice[j]);
    t = std::max(t + amount, kPheromoneFloor);
  }
}

double Pheromones::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& dim : tau) {
    for (double t : dim) m = std::min(m, t);
  }
  return m;
}

void pso_step(Swarm& swarm, std::span<const std::vector<double>> r1,
              std::span<const std::vector<double>> r2) {
  if (r1.size() != swarm.particles.size() || r2.size() != swarm.particles.size()) {
    throw ValidationError("pso_step: one r1/r2 vector per particle required");
  }
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    Particle& p = swarm.particles[i];
    const std::size_t dims = p.x.size();
    if (r1[i].size() != dims || r2[i].size() != dims || p.v.size() != dims ||
        p.p_best.size() != dims || swarm.g_best.size() != dims) {
      throw ValidationError("pso_step: dimension mismatch");
    }
    for (std::size_t d = 0; d < dims; ++d) {
      const double v = swarm.w * p.v[d] + swarm.c1 * r1[i][d] * (p.p_best[d] - p.x[d]) +
                       swarm.c2 * r2[i][d] * (swarm.g_best[d] - p.x[d]);
      p.v[d] = std::clamp(v, -1.0, 1.0);
      p.x[d] = std::clamp(p.x[d] + p.v[d], 0.0, 1.0);
    }
  }
}

void pso_commit(Swarm& swarm, std::span<const double> fitness) {
  if (fitness.size() != swarm.particles.size()) {
    throw ValidationError("pso_commit: one fitness per particle required");
  }
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    Particle& p = swarm.particles[i];
    if (improved(fitness[i], p.p_best_fitness)) {
      p.p_best = p.x;
      p.p_best_fitness = fitness[i];
    }
    if (improved(fitness[i], swarm.g_best_fitness)) {
      swarm.g_best = p.x;
      swarm.g_best_fitness = fitness[i];
    }
  }
}

Result optimize(const SearchSpace& space, const FitnessFn& fitness, const Settings& settings,
                const mlp::Config& base) {
  return Runner(space, fitness, settings, base).run();
}

std::string log_csv(std::span<const LogEntry> log) {
  std::ostringstream out;
  out.precision(17);
  out << "phase,iteration,agent,config_json,fitness,seconds\n";
  for (const auto& e : log) {
    out << to_string(e.phase) << ',' << e.iteration << ',' << e.agent << ','
        << csv::escape(e.config.dump()) << ',';
    if (std::isfinite(e.fitness)) {
      out << e.fitness;
    } else {
      out << "-inf";
    }
    out << ',' << e.seconds << '\n';
  }
  return out.str();
}

}  // namespace ddi::hyperopt
