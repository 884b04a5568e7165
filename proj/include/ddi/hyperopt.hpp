#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddi/error.hpp"
#include "ddi/mlp.hpp"
#include "json.hpp"

namespace ddi::hyperopt {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPheromoneFloor = 1e-6;

// Raised when more than the tolerated fraction of fitness evaluations fail.
class OptimizationError : public Error {
 public:
  using Error::Error;
};

// A point of the search space: one option index per discrete dimension and a
// normalized coordinate in [0, 1] per continuous dimension.
struct Candidate {
  std::vector<std::size_t> choice;
  std::vector<double> position;
  bool operator==(const Candidate&) const = default;
};

// MLP hyperparameter space. Discrete dims, in order: hidden_layers, neurons,
// batch_size, optimizer. Continuous dims: log10(learning_rate) on [-5, -3],
// dropout on [0.1, 0.5], and lambda1 on [0, 1] when search_lambda1 is set.
struct SearchSpace {
  bool search_lambda1 = false;

  std::vector<std::size_t> discrete_sizes() const;
  std::size_t continuous_count() const { return search_lambda1 ? 3 : 2; }

  // Maps a candidate onto an MLP config; training knobs outside the space
  // (epochs, patience, seed) come from `base`. The result always validates.
  mlp::Config to_config(const Candidate& c, const mlp::Config& base = {}) const;
  std::optional<double> lambda1(const Candidate& c) const;
  // Config JSON plus "lambda1" when searched. Also the cache key.
  nlohmann::json describe(const Candidate& c, const mlp::Config& base = {}) const;

  // Discrete index i of n maps to i / (n - 1); used by distance-based fitness.
  std::vector<double> normalized(const Candidate& c) const;

  // Throws ValidationError when c does not fit this space.
  void check(const Candidate& c) const;
};

// Fitness to maximize (validation ROC-AUC in production). Must be
// deterministic given (candidate, seed). A throw or a NaN marks a failure.
using FitnessFn = std::function<double(const Candidate&, std::uint64_t seed)>;

enum class Phase { RSmpl, ACO, PSO };
std::string_view to_string(Phase phase);

enum class Heuristic {
  Uniform,      // eta == 1
  MeanFitness,  // eta = running mean fitness of the option
};

struct Settings {
  std::size_t rsmpl_configs = 30;
  std::size_t rsmpl_top = 5;

  std::size_t ants = 20;
  std::size_t aco_iterations = 25;
  double alpha = 1.0;
  double beta = 2.0;
  double rho = 0.2;
  double aco_sigma = 0.1;  // Gaussian step for continuous dims, normalized units
  Heuristic heuristic = Heuristic::Uniform;

  std::size_t particles = 20;
  std::size_t pso_iterations = 25;
  double w = 0.8;
  double c1 = 1.2;
  double c2 = 1.6;

  double min_gain = 0.002;
  std::size_t stagnation_window = 5;
  double max_failure_fraction = 0.5;

  std::uint64_t seed = 13;
  std::size_t workers = 1;

  static Settings full() { return {}; }
  // 3 random configs, 2 ants x 2 iterations, 2 particles x 2 iterations.
  static Settings smoke();
  // Upper bound on logged evaluations.
  std::size_t max_evaluations() const {
    return rsmpl_configs + ants * aco_iterations + particles * pso_iterations;
  }
  void validate() const;
};

inline constexpr std::uint64_t kDefaultSeeds[] = {13, 29, 47, 61, 83};

// Uniform draws per dimension (log-uniform learning rate, since that
// coordinate is log10). Same seed, same list.
std::vector<Candidate> rsmpl_sample(const SearchSpace& space, std::size_t n_configs,
                                    std::uint64_t seed);

// P_v = tau_v^alpha * eta_v^beta / sum_k tau_k^alpha * eta_k^beta.
std::vector<double> aco_transition_probabilities(std::span<const double> tau,
                                                 std::span<const double> eta, double alpha,
                                                 double beta);

// Pheromone trails: one vector per discrete dimension, all entries >= 1e-6.
struct Pheromones {
  std::vector<std::vector<double>> tau;

  static Pheromones uniform(std::span<const std::size_t> sizes, double value = 1.0);
  // tau <- (1 - rho) tau, floored.
  void evaporate(double rho);
  // tau[j][choice[j]] += amount for every dimension j, floored.
  void deposit(std::span<const std::size_t> choice, double amount);
  double min() const;
};

struct Particle {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> p_best;
  double p_best_fitness = kNegInf;
};

// Positions are normalized coordinates in [0, 1]; velocities stay in [-1, 1].
struct Swarm {
  std::vector<Particle> particles;
  std::vector<double> g_best;
  double g_best_fitness = kNegInf;
  double w = 0.8;
  double c1 = 1.2;
  double c2 = 1.6;
};

// Velocity and position update for every particle; r1[i], r2[i] hold one
// draw in [0, 1] per dimension of particle i. Bests are untouched.
void pso_step(Swarm& swarm, std::span<const std::vector<double>> r1,
              std::span<const std::vector<double>> r2);
// Records the fitness of each particle at its current position, updating
// personal and global bests (strict improvement, particle order).
void pso_commit(Swarm& swarm, std::span<const double> fitness);

struct LogEntry {
  Phase phase = Phase::RSmpl;
  std::size_t iteration = 0;
  std::size_t agent = 0;
  nlohmann::json config;
  double fitness = kNegInf;
  double seconds = 0.0;  // 0 for cache hits
  bool cached = false;
};

struct Result {
  Candidate best;
  double best_fitness = kNegInf;
  nlohmann::json best_config;
  std::vector<LogEntry> log;
  std::size_t aco_iterations_run = 0;
  std::size_t pso_iterations_run = 0;
  std::size_t failures = 0;
  // Global-best fitness after RSmpl and after every ACO/PSO iteration.
  std::vector<double> best_trace;
};

// Random seeding, then ACO over the discrete dims, then PSO over the
// continuous dims with the discrete dims frozen at the best found so far.
// Each phase stops early after `stagnation_window` consecutive iterations
// whose cumulative best-fitness gain stays below `min_gain`. Agents of one
// iteration are evaluated on `workers` threads and committed in agent order.
Result optimize(const SearchSpace& space, const FitnessFn& fitness, const Settings& settings,
                const mlp::Config& base = {});

// `phase,iteration,agent,config_json,fitness,seconds`
std::string log_csv(std::span<const LogEntry> log);

}  // namespace ddi::hyperopt
