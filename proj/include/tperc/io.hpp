#pragma once

// File formats: sensor CSV, run configuration, result CSV/JSON.
//
// Every number is written with 17 significant digits through std::to_chars, so
// output is locale-independent and reruns are byte-identical.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tperc/experiment.hpp"

namespace tperc::io {

std::string format_number(double v);

// Header `t,ch1,...,chM`; t strictly increasing with uniform spacing.
SensorBatch read_sensor_csv(const std::filesystem::path& path);
SensorBatch parse_sensor_csv(std::string_view text);
void write_sensor_csv(const SensorBatch& batch, const std::filesystem::path& path);

// `key = value` lines with dotted sections (agent.alpha, task.dt, ...); '#' starts a comment.
RunConfig read_config(const std::filesystem::path& path, RunConfig base = {});
RunConfig parse_config(std::string_view text, RunConfig base = {});
// Throws InputError for unknown keys or unparsable values.
void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
// Resolved configuration in a fixed key order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);
std::vector<std::string> config_keys();

OUHyperparams read_hyperparams_json(const std::filesystem::path& path);

// "start:step:stop" or a comma-separated list of candidates.
TauGrid parse_grid(std::string_view text);

// Minimal streaming JSON emitter using format_number for all reals.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);
  JsonWriter& value(double v);
  JsonWriter& value(long long v);
  JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null();
  const std::string& str() const { return out_; }

 private:
  void separate();
  void indent();
  std::string out_;
  std::vector<bool> first_;  // per open container: no element written yet
  bool after_key_ = false;
};

void write_text(const std::filesystem::path& path, std::string_view text);

std::string fit_json(const FitResult& fit);
std::string estimate_json(const TimeEstimate& est, const OUHyperparams& params);

std::string episodes_csv(const std::vector<EpisodeLog>& logs, const TaskConfig& task);
std::string psychometric_csv(const PsychometricCurve& curve);
std::string tderror_csv(const std::vector<std::pair<int, double>>& series);
std::string weights_csv(const QWeights& w);
// Tabular agents: state,Start,Wait,Short,Long
std::string qtable_csv(const QTable& q);
std::string summary_json(const RunSummary& s, const RunConfig& cfg);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct Manifest {
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
  std::string version;
  std::string started;
  std::string finished;
  std::vector<std::string> files;
};
std::string manifest_json(const Manifest& m);

// UTC ISO-8601. Honours SOURCE_DATE_EPOCH so reproducible runs stay byte-identical.
std::string timestamp_now();

// Runs the experiment and writes episodes.csv, psychometric.csv, tderror.csv,
// weights.csv, summary.json and manifest.json into `out_dir`. Returns the
// files written, manifest last.
std::vector<std::filesystem::path> write_training_outputs(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace tperc::io
