#pragma once

// Q-learning with linear function approximation and accumulating eligibility
// traces, plus the tabular baselines.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "tperc/features.hpp"

namespace tperc {

struct AgentParams {
  double alpha = 0.2;            // learning rate
  double gamma = 0.1;            // discount
  double eta = 0.95;             // trace decay
  double epsilon0 = 0.3;         // initial exploration
  double epsilon_decay = 0.9995; // multiplicative decay per timestep
  bool epsilon_per_episode = false;
  bool shared_traces = false;    // one trace vector for all actions

  void validate() const;
};

// Row a holds the D weights of action a.
class QWeights {
 public:
  QWeights(std::size_t actions, std::size_t dim, double fill = 0.0);
  // Entries uniform in [0, 1].
  static QWeights random_uniform(std::size_t actions, std::size_t dim, std::mt19937_64& rng);

  std::size_t actions() const noexcept { return actions_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<double> row(std::size_t a) { return {w_.data() + a * dim_, dim_}; }
  std::span<const double> row(std::size_t a) const { return {w_.data() + a * dim_, dim_}; }
  const std::vector<double>& raw() const noexcept { return w_; }

 private:
  std::size_t actions_;
  std::size_t dim_;
  std::vector<double> w_;
};

// Per-action traces (shared mode keeps a single row that every action uses).
class EligibilityTraces {
 public:
  EligibilityTraces(std::size_t actions, std::size_t dim, bool shared = false);

  bool shared() const noexcept { return shared_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<double> row(std::size_t a) { return {e_.data() + index(a) * dim_, dim_}; }
  std::span<const double> row(std::size_t a) const { return {e_.data() + index(a) * dim_, dim_}; }
  void reset();

 private:
  std::size_t index(std::size_t a) const noexcept { return shared_ ? 0 : a; }
  bool shared_;
  std::size_t rows_;
  std::size_t dim_;
  std::vector<double> e_;
};

double q_value(const QWeights& w, std::span<const double> x, std::size_t action);
std::vector<double> q_values(const QWeights& w, std::span<const double> x);

// Greedy with probability 1 - epsilon (lowest index among maxima), uniform otherwise.
std::size_t select_action(std::span<const double> qs, double epsilon, std::mt19937_64& rng);
std::size_t argmax_first(std::span<const double> qs);

// r + gamma * q_next_max * [!terminal] - q_cur
double td_error(double reward, double gamma, double q_next_max, double q_cur, bool terminal);

// Decays all traces by gamma*eta, accumulates x into the taken action's trace,
// then moves every action's weights by alpha*delta*e.
void update(QWeights& w, EligibilityTraces& e, std::span<const double> x, std::size_t action,
            double delta, const AgentParams& params);

double decay_epsilon(double epsilon, const AgentParams& params);

class QTable {
 public:
  QTable(std::size_t states, std::size_t actions);

  std::size_t states() const noexcept { return states_; }
  std::size_t actions() const noexcept { return actions_; }
  double at(std::size_t s, std::size_t a) const;
  double& at(std::size_t s, std::size_t a);
  std::span<const double> row(std::size_t s) const;
  double max_row(std::size_t s) const;
  // Appends a zero row, returns its index.
  std::size_t add_state();

 private:
  std::size_t states_;
  std::size_t actions_;
  std::vector<double> q_;
};

// Q(s,a) += alpha * (r + gamma * max_b Q(s',b) * [!terminal] - Q(s,a)); returns the TD error.
double tabular_update(QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next,
                      bool terminal, const AgentParams& params);

}  // namespace tperc
