#pragma once

// Temporal stimulus representations: microstimuli (default) and the complete
// serial compound baseline.

#include <cstddef>
#include <vector>

namespace tperc {

struct MicrostimuliConfig {
  int m = 6;          // microstimuli per event
  double beta = 0.1;  // basis width
  double xi = 0.9;    // trace decay parameter
  int zeta = 3;       // events per episode

  int dimension() const noexcept { return m * zeta; }
  void validate() const;
};

// Event ids are 1-based slots: 1 = first tone, 2 = second tone, 3 = reward.
struct TraceEvent {
  int id = 0;
  long age = 0;  // timesteps since onset
};

struct TraceState {
  std::vector<TraceEvent> events;
  long clock = 0;

  const TraceEvent* find(int id) const;
};

using FeatureVector = std::vector<double>;

inline constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

// exp(-(1 - xi) * age)
double trace_height(long age, double xi);
// Gaussian bump (1/sqrt(2 pi)) exp(-(h - center)^2 / (2 beta^2)).
double basis(double h, double center, double beta);

// x[(e-1)*m + j-1] = h * basis(h, j/m, beta) for deployed event e, j = 1..m.
FeatureVector microstimuli_features(const TraceState& state, const MicrostimuliConfig& cfg);

// Appends event `id` at age 0. `capacity` is the number of event slots (zeta).
TraceState deploy_event(TraceState state, int id, int capacity);
TraceState override_age(TraceState state, int id, long new_age);
// Advances the clock and every event age by one step.
TraceState tick(TraceState state);

// One-hot per event: slot (e-1)*horizon + age is 1 while age < horizon.
FeatureVector csc_features(const TraceState& state, int horizon, int zeta);

}  // namespace tperc
