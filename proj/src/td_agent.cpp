#include "tperc/td_agent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tperc/errors.hpp"

namespace tperc {

void AgentParams::validate() const {
  auto in = [](double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; };
  if (!in(alpha, 0.0, 1.0) || alpha == 0.0) throw ContractError("agent alpha must be in (0, 1]");
  if (!in(gamma, 0.0, 1.0)) throw ContractError("agent gamma must be in [0, 1]");
  if (!in(eta, 0.0, 1.0)) throw ContractError("agent eta must be in [0, 1]");
  if (!in(epsilon0, 0.0, 1.0)) throw ContractError("agent epsilon0 must be in [0, 1]");
  if (!in(epsilon_decay, 0.0, 1.0) || epsilon_decay == 0.0)
    throw ContractError("agent epsilon_decay must be in (0, 1]");
}

QWeights::QWeights(std::size_t actions, std::size_t dim, double fill)
    : actions_(actions), dim_(dim), w_(actions * dim, fill) {
  if (actions == 0) throw ContractError("QWeights needs at least one action");
}

QWeights QWeights::random_uniform(std::size_t actions, std::size_t dim, std::mt19937_64& rng) {
  QWeights w(actions, dim);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : w.w_) v = u(rng);
  return w;
}

EligibilityTraces::EligibilityTraces(std::size_t actions, std::size_t dim, bool shared)
    : shared_(shared), rows_(shared ? 1 : actions), dim_(dim), e_(rows_ * dim, 0.0) {}

void EligibilityTraces::reset() { std::fill(e_.begin(), e_.end(), 0.0); }

namespace {

void check_dims(std::size_t expected, std::size_t got) {
  if (expected != got)
    throw ContractError("feature dimension " + std::to_string(got) + " does not match " +
                        std::to_string(expected));
}

}  // namespace

double q_value(const QWeights& w, std::span<const double> x, std::size_t action) {
  check_dims(w.dim(), x.size());
  if (action >= w.actions()) throw ContractError("action index out of range");
  const auto row = w.row(action);
  double q = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) q += row[j] * x[j];
  return q;
}

std::vector<double> q_values(const QWeights& w, std::span<const double> x) {
  std::vector<double> qs(w.actions());
  for (std::size_t a = 0; a < w.actions(); ++a) qs[a] = q_value(w, x, a);
  return qs;
}

std::size_t argmax_first(std::span<const double> qs) {
  if (qs.empty()) throw ContractError("argmax over an empty action set");
  std::size_t best = 0;
  for (std::size_t a = 1; a < qs.size(); ++a)
    if (qs[a] > qs[best]) best = a;
  return best;
}

std::size_t select_action(std::span<const double> qs, double epsilon, std::mt19937_64& rng) {
  if (qs.empty()) throw ContractError("select_action needs at least one action");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, qs.size() - 1);
    return pick(rng);
  }
  return argmax_first(qs);
}

double td_error(double reward, double gamma, double q_next_max, double q_cur, bool terminal) {
  return reward + (terminal ? 0.0 : gamma * q_next_max) - q_cur;
}

void update(QWeights& w, EligibilityTraces& e, std::span<const double> x, std::size_t action,
            double delta, const AgentParams& params) {
  check_dims(w.dim(), x.size());
  check_dims(w.dim(), e.dim());
  if (action >= w.actions()) throw ContractError("action index out of range");

  const double decay = params.gamma * params.eta;
  for (std::size_t r = 0; r < e.rows(); ++r)
    for (double& v : e.row(r)) v *= decay;
  auto taken = e.row(action);
  for (std::size_t j = 0; j < x.size(); ++j) taken[j] += x[j];

  const double step = params.alpha * delta;
  if (e.shared()) {
    auto wr = w.row(action);
    for (std::size_t j = 0; j < wr.size(); ++j) wr[j] += step * taken[j];
    return;
  }
  for (std::size_t b = 0; b < w.actions(); ++b) {
    auto wr = w.row(b);
    const auto er = e.row(b);
    for (std::size_t j = 0; j < wr.size(); ++j) wr[j] += step * er[j];
  }
}

double decay_epsilon(double epsilon, const AgentParams& params) { return params.epsilon_decay * epsilon; }

QTable::QTable(std::size_t states, std::size_t actions)
    : states_(states), actions_(actions), q_(states * actions, 0.0) {
  if (actions == 0) throw ContractError("QTable needs at least one action");
}

double QTable::at(std::size_t s, std::size_t a) const {
  if (s >= states_ || a >= actions_) throw ContractError("QTable index out of range");
  return q_[s * actions_ + a];
}

double& QTable::at(std::size_t s, std::size_t a) {
  if (s >= states_ || a >= actions_) throw ContractError("QTable index out of range");
  return q_[s * actions_ + a];
}

std::span<const double> QTable::row(std::size_t s) const {
  if (s >= states_) throw ContractError("QTable state out of range");
  return {q_.data() + s * actions_, actions_};
}

double QTable::max_row(std::size_t s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

std::size_t QTable::add_state() {
  q_.insert(q_.end(), actions_, 0.0);
  return states_++;
}

double tabular_update(QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next,
                      bool terminal, const AgentParams& params) {
  const double cur = q.at(s, a);
  const double next = terminal ? 0.0 : q.max_row(s_next);
  const double delta = td_error(r, params.gamma, next, cur, terminal);
  q.at(s, a) = cur + params.alpha * delta;
  return delta;
}

}  // namespace tperc
