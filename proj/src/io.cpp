#include "tperc/io.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

#include "tperc/errors.hpp"

#ifndef TPERC_VERSION
#define TPERC_VERSION "0.0.0"
#endif

namespace tperc::io {

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), end);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

bool to_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

template <typename Int>
bool to_int(std::string_view s, Int& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Sensor CSV

SensorBatch parse_sensor_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw InputError("empty sensor CSV", 1);

  const auto header = split(lines[0], ',');
  if (header.size() < 2 || trim(header[0]) != "t")
    throw InputError("sensor CSV header must be t,ch1,...,chM", 1);
  for (std::size_t c = 1; c < header.size(); ++c)
    if (trim(header[c]) != "ch" + std::to_string(c))
      throw InputError("expected column ch" + std::to_string(c), 1);
  const std::size_t m = header.size() - 1;

  std::vector<double> times;
  std::vector<std::vector<double>> cols(m);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = split(lines[li], ',');
    if (fields.size() != m + 1)
      throw InputError("expected " + std::to_string(m + 1) + " fields, got " + std::to_string(fields.size()), li + 1);
    double t;
    if (!to_double(fields[0], t)) throw InputError("bad time value", li + 1);
    if (!times.empty() && !(t > times.back())) throw InputError("times must be strictly increasing", li + 1);
    if (times.size() >= 2) {
      const double d0 = times[1] - times[0];
      if (std::abs((t - times.back()) - d0) > 1e-6 * d0) throw InputError("times must be uniformly spaced", li + 1);
    }
    times.push_back(t);
    for (std::size_t c = 0; c < m; ++c) {
      double v;
      if (!to_double(fields[c + 1], v)) throw InputError("bad value in column ch" + std::to_string(c + 1), li + 1);
      cols[c].push_back(v);
    }
  }
  if (times.size() < 2) throw InputError("sensor CSV needs at least two rows", lines.size());

  SensorBatch batch{{}, SampleTimes(std::move(times))};
  batch.channels.reserve(m);
  for (auto& c : cols) batch.channels.emplace_back(Eigen::Map<const Eigen::VectorXd>(c.data(), c.size()));
  return batch;
}

SensorBatch read_sensor_csv(const std::filesystem::path& path) { return parse_sensor_csv(read_file(path)); }

void write_sensor_csv(const SensorBatch& batch, const std::filesystem::path& path) {
  batch.validate();
  std::string out = "t";
  for (std::size_t c = 1; c <= batch.channel_count(); ++c) out += ",ch" + std::to_string(c);
  out += '\n';
  for (std::size_t i = 0; i < batch.sample_count(); ++i) {
    out += format_number(batch.sample_times[i]);
    for (const auto& ch : batch.channels) {
      out += ',';
      out += format_number(ch(static_cast<Eigen::Index>(i)));
    }
    out += '\n';
  }
  write_text(path, out);
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

struct Field {
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw InputError("invalid value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
Field real(const char* key, T RunConfig::*group, double T::*member) {
  return {key,
          [=](RunConfig& c, std::string_view v) {
            double d;
            if (!to_double(v, d)) bad_value(key, v);
            (c.*group).*member = d;
          },
          [=](const RunConfig& c) { return format_number((c.*group).*member); }};
}

template <typename T>
Field integer(const char* key, T RunConfig::*group, int T::*member) {
  return {key,
          [=](RunConfig& c, std::string_view v) {
            int i;
            if (!to_int(v, i)) bad_value(key, v);
            (c.*group).*member = i;
          },
          [=](const RunConfig& c) { return std::to_string((c.*group).*member); }};
}

bool parse_bool(std::string_view v, bool& out) {
  v = trim(v);
  if (v == "true" || v == "1" || v == "yes") return out = true, true;
  if (v == "false" || v == "0" || v == "no") return out = false, true;
  return false;
}

template <typename T>
Field flag(const char* key, T RunConfig::*group, bool T::*member) {
  return {key,
          [=](RunConfig& c, std::string_view v) {
            bool b;
            if (!parse_bool(v, b)) bad_value(key, v);
            (c.*group).*member = b;
          },
          [=](const RunConfig& c) { return std::string((c.*group).*member ? "true" : "false"); }};
}

// Lets top-level RunConfig members go through the same helpers.
struct Self {};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"episodes",
                 [](RunConfig& c, std::string_view v) {
                   if (!to_int(v, c.episodes)) bad_value("episodes", v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.episodes); }});
    f.push_back({"seed",
                 [](RunConfig& c, std::string_view v) {
                   if (!to_int(v, c.master_seed)) bad_value("seed", v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.master_seed); }});
    f.push_back({"representation",
                 [](RunConfig& c, std::string_view v) {
                   auto r = parse_representation(trim(v));
                   if (!r) bad_value("representation", v);
                   c.representation = *r;
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.representation)); }});
    f.push_back({"oracle_tau",
                 [](RunConfig& c, std::string_view v) {
                   if (!parse_bool(v, c.oracle_tau)) bad_value("oracle_tau", v);
                 },
                 [](const RunConfig& c) { return std::string(c.oracle_tau ? "true" : "false"); }});

    f.push_back(real("agent.alpha", &RunConfig::agent, &AgentParams::alpha));
    f.push_back(real("agent.gamma", &RunConfig::agent, &AgentParams::gamma));
    f.push_back(real("agent.eta", &RunConfig::agent, &AgentParams::eta));
    f.push_back(real("agent.epsilon0", &RunConfig::agent, &AgentParams::epsilon0));
    f.push_back(real("agent.epsilon_decay", &RunConfig::agent, &AgentParams::epsilon_decay));
    f.push_back(flag("agent.epsilon_per_episode", &RunConfig::agent, &AgentParams::epsilon_per_episode));
    f.push_back(flag("agent.shared_traces", &RunConfig::agent, &AgentParams::shared_traces));

    f.push_back(integer("features.m", &RunConfig::features, &MicrostimuliConfig::m));
    f.push_back(real("features.beta", &RunConfig::features, &MicrostimuliConfig::beta));
    f.push_back(real("features.xi", &RunConfig::features, &MicrostimuliConfig::xi));
    f.push_back(integer("features.zeta", &RunConfig::features, &MicrostimuliConfig::zeta));
    f.push_back({"features.csc_horizon",
                 [](RunConfig& c, std::string_view v) {
                   if (!to_int(v, c.csc_horizon)) bad_value("features.csc_horizon", v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.csc_horizon); }});

    f.push_back(real("task.dt", &RunConfig::task, &TaskConfig::dt));
    f.push_back(integer("task.max_interval_steps", &RunConfig::task, &TaskConfig::max_interval_steps));
    f.push_back(integer("task.boundary_steps", &RunConfig::task, &TaskConfig::boundary_steps));
    f.push_back(real("task.reward_correct", &RunConfig::task, &TaskConfig::reward_correct));
    f.push_back(real("task.reward_wrong", &RunConfig::task, &TaskConfig::reward_wrong));
    f.push_back(integer("task.sensor_channels", &RunConfig::task, &TaskConfig::sensor_channels));
    f.push_back(integer("task.samples_per_step", &RunConfig::task, &TaskConfig::samples_per_step));
    f.push_back({"task.true_lambda",
                 [](RunConfig& c, std::string_view v) {
                   if (!to_double(v, c.task.true_ou_params.lambda)) bad_value("task.true_lambda", v);
                 },
                 [](const RunConfig& c) { return format_number(c.task.true_ou_params.lambda); }});
    f.push_back({"task.true_sigma",
                 [](RunConfig& c, std::string_view v) {
                   if (!to_double(v, c.task.true_ou_params.sigma)) bad_value("task.true_sigma", v);
                 },
                 [](const RunConfig& c) { return format_number(c.task.true_ou_params.sigma); }});
    f.push_back(integer("task.max_episode_steps", &RunConfig::task, &TaskConfig::max_episode_steps));

    f.push_back(real("fit.init_lambda", &RunConfig::fit, &FitConfig::init_lambda));
    f.push_back(real("fit.init_sigma", &RunConfig::fit, &FitConfig::init_sigma));
    f.push_back(integer("fit.max_iters", &RunConfig::fit, &FitConfig::max_iters));
    f.push_back(real("fit.step_tolerance", &RunConfig::fit, &FitConfig::step_tolerance));
    f.push_back(real("fit.learning_rate", &RunConfig::fit, &FitConfig::learning_rate));

    f.push_back(real("tau_grid.start", &RunConfig::tau_grid, &GridSpec::start));
    f.push_back(real("tau_grid.step", &RunConfig::tau_grid, &GridSpec::step));
    f.push_back(real("tau_grid.stop", &RunConfig::tau_grid, &GridSpec::stop));

    f.push_back({"calibration.duration",
                 [](RunConfig& c, std::string_view v) {
                   if (!to_double(v, c.calibration_duration)) bad_value("calibration.duration", v);
                 },
                 [](const RunConfig& c) { return format_number(c.calibration_duration); }});
    f.push_back({"calibration.dt",
                 [](RunConfig& c, std::string_view v) {
                   if (!to_double(v, c.calibration_dt)) bad_value("calibration.dt", v);
                 },
                 [](const RunConfig& c) { return format_number(c.calibration_dt); }});

    f.push_back(real("analysis.epsilon_threshold", &RunConfig::analysis, &AnalysisConfig::epsilon_threshold));
    f.push_back(integer("analysis.convergence_window", &RunConfig::analysis, &AnalysisConfig::convergence_window));
    f.push_back(real("analysis.convergence_points", &RunConfig::analysis, &AnalysisConfig::convergence_points));
    f.push_back(integer("analysis.tderror_window", &RunConfig::analysis, &AnalysisConfig::tderror_window));
    return f;
  }();
  return table;
}

}  // namespace

void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, value);
      return;
    }
  }
  throw InputError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError("expected key = value", i + 1);
    try {
      apply_config_value(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const InputError& e) {
      throw InputError(e.what(), i + 1);
    }
  }
  return base;
}

RunConfig read_config(const std::filesystem::path& path, RunConfig base) {
  return parse_config(read_file(path), std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

OUHyperparams read_hyperparams_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    const auto j = nlohmann::json::parse(text);
    OUHyperparams p{j.at("lambda").get<double>(), j.at("sigma").get<double>()};
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad hyperparameter JSON " + path.string() + ": " + e.what());
  } catch (const ParameterDomainError& e) {
    throw InputError("bad hyperparameter JSON " + path.string() + ": " + e.what());
  }
}

TauGrid parse_grid(std::string_view text) {
  text = trim(text);
  try {
    if (text.find(':') != std::string_view::npos) {
      const auto parts = split(text, ':');
      double a, b, c;
      if (parts.size() != 3 || !to_double(parts[0], a) || !to_double(parts[1], b) || !to_double(parts[2], c))
        throw InputError("grid must be start:step:stop");
      return TauGrid::range(a, b, c);
    }
    std::vector<double> vals;
    for (auto p : split(text, ',')) {
      double v;
      if (!to_double(p, v)) throw InputError("bad grid value '" + std::string(p) + "'");
      vals.push_back(v);
    }
    return TauGrid(std::move(vals));
  } catch (const ContractError& e) {
    throw InputError(std::string("bad grid: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// JSON

void JsonWriter::indent() { out_.append(2 * first_.size(), ' '); }

void JsonWriter::separate() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (first_.empty()) return;
  if (!first_.back()) out_ += ',';
  first_.back() = false;
  out_ += '\n';
  indent();
}

JsonWriter& JsonWriter::begin_object() {
  separate();
  out_ += '{';
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  const bool empty = first_.back();
  first_.pop_back();
  if (!empty) {
    out_ += '\n';
    indent();
  }
  out_ += '}';
  if (first_.empty()) out_ += '\n';
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separate();
  out_ += '[';
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  const bool empty = first_.back();
  first_.pop_back();
  if (!empty) {
    out_ += '\n';
    indent();
  }
  out_ += ']';
  if (first_.empty()) out_ += '\n';
  return *this;
}

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out + "\"";
}

}  // namespace

JsonWriter& JsonWriter::key(std::string_view k) {
  separate();
  out_ += quote(k);
  out_ += ": ";
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  separate();
  out_ += std::isfinite(v) ? format_number(v) : "null";
  return *this;
}

JsonWriter& JsonWriter::value(long long v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separate();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  separate();
  out_ += quote(v);
  return *this;
}

JsonWriter& JsonWriter::null() {
  separate();
  out_ += "null";
  return *this;
}

std::string fit_json(const FitResult& fit) {
  JsonWriter j;
  j.begin_object()
      .key("lambda").value(fit.params.lambda)
      .key("sigma").value(fit.params.sigma)
      .key("log_likelihood").value(fit.log_likelihood)
      .key("iterations").value(fit.iterations)
      .key("converged").value(fit.converged)
      .end_object();
  return j.str();
}

std::string estimate_json(const TimeEstimate& est, const OUHyperparams& params) {
  JsonWriter j;
  j.begin_object().key("tau_hat").value(est.tau_hat);
  j.key("lambda").value(params.lambda).key("sigma").value(params.sigma);
  j.key("profile").begin_array();
  for (const auto& [tau, ll] : est.profile)
    j.begin_object().key("tau").value(tau).key("log_likelihood").value(ll).end_object();
  j.end_array().end_object();
  return j.str();
}

// ---------------------------------------------------------------------------
// Training outputs

std::string episodes_csv(const std::vector<EpisodeLog>& logs, const TaskConfig& task) {
  std::string out =
      "episode,points,true_steps,true_seconds,estimated_tau,classification,correct,reward,delta_at_reward,epsilon_end\n";
  for (const auto& l : logs) {
    out += std::to_string(l.index) + ',' + std::to_string(l.points) + ',' + std::to_string(l.true_interval_steps) +
           ',' + format_number(task.seconds(l.true_interval_steps)) + ',' +
           (l.estimated_tau ? format_number(*l.estimated_tau) : std::string()) + ',' +
           (l.classification ? std::string(to_string(*l.classification)) : std::string()) + ',' +
           (l.correct ? "1" : "0") + ',' + format_number(l.total_reward) + ',' + format_number(l.delta_at_reward) +
           ',' + format_number(l.epsilon_end) + '\n';
  }
  return out;
}

std::string psychometric_csv(const PsychometricCurve& curve) {
  std::string out = "duration_s,p_long,count\n";
  for (const auto& b : curve)
    out += format_number(b.duration_s) + ',' + format_number(b.p_long) + ',' + std::to_string(b.count) + '\n';
  return out;
}

std::string tderror_csv(const std::vector<std::pair<int, double>>& series) {
  std::string out = "episode,mean_abs_delta\n";
  for (const auto& [ep, v] : series) out += std::to_string(ep) + ',' + format_number(v) + '\n';
  return out;
}

std::string weights_csv(const QWeights& w) {
  std::string out = "action";
  for (std::size_t j = 1; j <= w.dim(); ++j) out += ",w" + std::to_string(j);
  out += '\n';
  for (std::size_t a = 0; a < w.actions(); ++a) {
    out += a < kActionCount ? std::string(to_string(static_cast<Action>(a))) : std::to_string(a);
    for (double v : w.row(a)) out += ',' + format_number(v);
    out += '\n';
  }
  return out;
}

std::string qtable_csv(const QTable& q) {
  std::string out = "state";
  for (std::size_t a = 0; a < q.actions(); ++a)
    out += ',' + (a < kActionCount ? std::string(to_string(static_cast<Action>(a))) : std::to_string(a));
  out += '\n';
  for (std::size_t s = 0; s < q.states(); ++s) {
    out += std::to_string(s);
    for (double v : q.row(s)) out += ',' + format_number(v);
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "true_tau,mean_tau_hat,std_tau_hat,runs\n";
  for (const auto& r : rows)
    out += format_number(r.true_tau) + ',' + format_number(r.mean_tau_hat) + ',' + format_number(r.std_tau_hat) +
           ',' + std::to_string(r.estimates.size()) + '\n';
  return out;
}

namespace {

void optional_number(JsonWriter& j, std::string_view key, const std::optional<double>& v) {
  j.key(key);
  if (v) j.value(*v); else j.null();
}

}  // namespace

std::string summary_json(const RunSummary& s, const RunConfig& cfg) {
  JsonWriter j;
  j.begin_object();
  j.key("episodes").value(s.episodes);
  j.key("representation").value(to_string(cfg.representation));
  j.key("oracle_tau").value(cfg.oracle_tau);
  j.key("convergence_episode");
  if (s.convergence_episode) j.value(*s.convergence_episode); else j.null();
  j.key("convergence_rule").value("trailing " + std::to_string(cfg.analysis.convergence_window) +
                                  "-episode mean points >= " + format_number(cfg.analysis.convergence_points));
  j.key("analysis_window").begin_object()
      .key("first_episode").value(s.analysis_start + 1)
      .key("rule").value("epsilon < " + format_number(cfg.analysis.epsilon_threshold))
      .end_object();
  j.key("misclassified_total").value(s.misclassified_total);
  optional_number(j, "misclassified_mean_s", s.misclassified_mean_s);
  optional_number(j, "misclassified_median_s", s.misclassified_median_s);
  j.key("clamped_estimates").value(s.clamped_estimates);
  j.key("final_epsilon").value(s.final_epsilon);
  j.key("fitted_hyperparams");
  if (s.fit) {
    j.begin_object()
        .key("lambda").value(s.fit->params.lambda)
        .key("sigma").value(s.fit->params.sigma)
        .key("log_likelihood").value(s.fit->log_likelihood)
        .key("iterations").value(s.fit->iterations)
        .key("converged").value(s.fit->converged)
        .end_object();
  } else {
    j.null();
  }
  j.end_object();
  return j.str();
}

std::string manifest_json(const Manifest& m) {
  JsonWriter j;
  j.begin_object();
  j.key("artifact_version").value(m.version);
  j.key("seed").value(static_cast<long long>(m.seed));
  j.key("started").value(m.started);
  j.key("finished").value(m.finished);
  j.key("config").begin_object();
  for (const auto& [k, v] : m.config) j.key(k).value(v);
  j.end_object();
  j.key("files").begin_array();
  for (const auto& f : m.files) j.value(f);
  j.end_array();
  j.end_object();
  return j.str();
}

std::string timestamp_now() {
  std::time_t t;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
    long long v;
    if (!to_int(sde, v)) throw InputError("SOURCE_DATE_EPOCH is not an integer");
    t = static_cast<std::time_t>(v);
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::filesystem::path> write_training_outputs(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  Manifest manifest;
  manifest.started = timestamp_now();
  const RunResult res = run_experiment(cfg);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw InputError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  const std::size_t from = static_cast<std::size_t>(res.summary.analysis_start);
  const bool tabular =
      cfg.representation == Representation::Tabular || cfg.representation == Representation::TabularHistory;
  const std::vector<std::pair<std::string, std::string>> outputs = {
      {"episodes.csv", episodes_csv(res.logs, cfg.task)},
      {"psychometric.csv", psychometric_csv(psychometric(res.logs, cfg.task, from))},
      {"tderror.csv", tderror_csv(td_error_trajectory(res.logs, cfg.analysis.tderror_window))},
      {"weights.csv", tabular ? qtable_csv(res.agent.table) : weights_csv(res.agent.weights)},
      {"summary.json", summary_json(res.summary, cfg)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, text] : outputs) {
    write_text(out_dir / name, text);
    written.push_back(out_dir / name);
    manifest.files.push_back(name);
  }
  manifest.files.emplace_back("manifest.json");
  manifest.config = config_entries(cfg);
  manifest.seed = cfg.master_seed;
  manifest.version = TPERC_VERSION;
  manifest.finished = timestamp_now();
  write_text(out_dir / "manifest.json", manifest_json(manifest));
  written.push_back(out_dir / "manifest.json");
  return written;
}

}  // namespace tperc::io
