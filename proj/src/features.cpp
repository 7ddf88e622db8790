#include "tperc/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tperc/errors.hpp"

namespace tperc {

void MicrostimuliConfig::validate() const {
  if (m < 1) throw ContractError("microstimuli m must be >= 1");
  if (!(beta > 0.0)) throw ContractError("microstimuli beta must be > 0");
  if (!(xi > 0.0 && xi < 1.0)) throw ContractError("microstimuli xi must be in (0, 1)");
  if (zeta < 1) throw ContractError("microstimuli zeta must be >= 1");
}

const TraceEvent* TraceState::find(int id) const {
  auto it = std::find_if(events.begin(), events.end(), [id](const TraceEvent& e) { return e.id == id; });
  return it == events.end() ? nullptr : &*it;
}

double trace_height(long age, double xi) {
  if (age < 0) throw ContractError("trace age must be non-negative");
  return std::exp(-(1.0 - xi) * static_cast<double>(age));
}

double basis(double h, double center, double beta) {
  const double d = h - center;
  return kInvSqrt2Pi * std::exp(-(d * d) / (2.0 * beta * beta));
}

namespace {

void check_slots(const TraceState& state, int zeta) {
  if (static_cast<int>(state.events.size()) > zeta)
    throw ContractError("more deployed events than event slots");
  for (const auto& e : state.events) {
    if (e.id < 1 || e.id > zeta) throw ContractError("event id " + std::to_string(e.id) + " out of range");
    if (e.age < 0) throw ContractError("event age must be non-negative");
  }
}

}  // namespace

FeatureVector microstimuli_features(const TraceState& state, const MicrostimuliConfig& cfg) {
  check_slots(state, cfg.zeta);
  FeatureVector x(static_cast<std::size_t>(cfg.dimension()), 0.0);
  for (const auto& e : state.events) {
    const double h = trace_height(e.age, cfg.xi);
    const auto offset = static_cast<std::size_t>((e.id - 1) * cfg.m);
    for (int j = 1; j <= cfg.m; ++j) {
      const double center = static_cast<double>(j) / cfg.m;
      x[offset + static_cast<std::size_t>(j - 1)] = h * basis(h, center, cfg.beta);
    }
  }
  return x;
}

TraceState deploy_event(TraceState state, int id, int capacity) {
  if (state.find(id)) throw ContractError("event " + std::to_string(id) + " already deployed");
  if (static_cast<int>(state.events.size()) >= capacity)
    throw ContractError("all " + std::to_string(capacity) + " event slots are in use");
  if (id < 1 || id > capacity) throw ContractError("event id " + std::to_string(id) + " out of range");
  state.events.push_back({id, 0});
  return state;
}

TraceState override_age(TraceState state, int id, long new_age) {
  if (new_age < 0) throw ContractError("event age must be non-negative");
  auto it = std::find_if(state.events.begin(), state.events.end(),
                         [id](const TraceEvent& e) { return e.id == id; });
  if (it == state.events.end()) throw ContractError("event " + std::to_string(id) + " is not deployed");
  it->age = new_age;
  return state;
}

TraceState tick(TraceState state) {
  ++state.clock;
  for (auto& e : state.events) ++e.age;
  return state;
}

FeatureVector csc_features(const TraceState& state, int horizon, int zeta) {
  if (horizon < 1) throw ContractError("CSC horizon must be >= 1");
  check_slots(state, zeta);
  FeatureVector x(static_cast<std::size_t>(horizon) * static_cast<std::size_t>(zeta), 0.0);
  for (const auto& e : state.events) {
    if (e.age < horizon)
      x[static_cast<std::size_t>((e.id - 1) * horizon + e.age)] = 1.0;
  }
  return x;
}

}  // namespace tperc
