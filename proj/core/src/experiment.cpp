#include "polylab/experiment.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "polylab/analysis.hpp"
#include "polylab/csv.hpp"
#include "polylab/hermite.hpp"
#include "polylab/kernels.hpp"
#include "polylab/noise.hpp"
#include "polylab/polymer.hpp"

#ifndef POLYLAB_BUILD_ID
#define POLYLAB_BUILD_ID "unknown"
#endif

namespace polylab {
namespace {

using json = nlohmann::json;

constexpr std::array<std::pair<Command, std::string_view>, 9> kCommandNames{{
    {Command::kKernelTable, "kernel-table"},
    {Command::kBound, "bound"},
    {Command::kPhase, "phase"},
    {Command::kClt, "clt"},
    {Command::kMgf, "mgf"},
    {Command::kHermiteCheck, "hermite-check"},
    {Command::kYnDecay, "yn-decay"},
    {Command::kSecondMoment, "second-moment"},
    {Command::kCollision, "collision"},
}};

const std::set<std::string> kKnownKeys{
    "command", "d", "K", "h", "dt", "T", "T_list", "beta_frac", "beta_abs", "n_paths",
    "noise_seed", "n_noise_seeds", "path_seed_start", "chunk_size", "output_path", "n", "lambda",
    "n_pairs", "n_radii", "quad_points", "multiplier", "T_max", "oracle_paths"};

bool uses_horizons(Command c) {
  return c == Command::kPhase || c == Command::kClt || c == Command::kMgf ||
         c == Command::kYnDecay || c == Command::kSecondMoment || c == Command::kCollision;
}

bool uses_beta(Command c) {
  return c == Command::kBound || c == Command::kPhase || c == Command::kClt || c == Command::kMgf ||
         c == Command::kYnDecay || c == Command::kSecondMoment;
}

bool single_beta(Command c) {
  return c == Command::kClt || c == Command::kMgf || c == Command::kYnDecay ||
         c == Command::kSecondMoment;
}

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError(field, field.empty() ? message : field + ": " + message);
}

double read_number(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "expected a finite number");
  return x;
}

std::uint64_t read_unsigned(const json& value, const std::string& key) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer()) fail(key, "must be nonnegative");
  if (value.is_number_float()) {
    const double x = value.get<double>();
    if (x >= 0.0 && x < 0x1p63 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
  }
  fail(key, "expected a nonnegative integer");
}

std::vector<double> read_number_or_list(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  std::vector<double> out;
  const auto take = [&](const json& x) {
    if (!x.is_number()) fail(key, "expected a number or a list of numbers");
    out.push_back(x.get<double>());
  };
  if (v.is_array()) {
    for (const json& x : v) take(x);
  } else {
    take(v);
  }
  return out;
}

std::vector<double> unit_vector(int d) {
  std::vector<double> e(static_cast<std::size_t>(d), 0.0);
  e[0] = 1.0;
  return e;
}

void fill_defaults(ExperimentConfig& c, bool has_horizons, bool has_beta, bool has_n,
                   bool has_lambda) {
  if (!has_horizons) {
    switch (c.command) {
      case Command::kClt:
      case Command::kMgf:
      case Command::kYnDecay: c.horizons = {4.0, 16.0, 64.0}; break;
      case Command::kPhase: c.horizons = {32.0}; break;
      case Command::kSecondMoment: c.horizons = {8.0}; break;
      case Command::kCollision: c.horizons = {2.0, 4.0, 8.0, 16.0, 32.0}; break;
      default: break;
    }
  }
  if (!has_beta && uses_beta(c.command)) {
    c.beta_mode = BetaMode::kFraction;
    c.betas = c.command == Command::kPhase ? std::vector<double>{0.25, 5.0}
                                           : std::vector<double>{0.25};
  }
  if (!has_n && (c.command == Command::kHermiteCheck || c.command == Command::kYnDecay) && c.d >= 1) {
    c.n_index.assign(static_cast<std::size_t>(c.d), 0);
    c.n_index[0] = 1;
  }
  if (!has_lambda && c.command == Command::kMgf && c.d >= 1) c.lambdas = {unit_vector(c.d)};
}

void validate(const ExperimentConfig& c) {
  if (c.d < 1 || c.d > 16) fail("d", "must be between 1 and 16");
  if (!(c.K > 0.0)) fail("K", "must be positive");
  if (!(c.h > 0.0)) fail("h", "must be positive");
  if (c.h > 0.5 * c.K) fail("h", "must satisfy h <= K/2");
  if (!(c.dt > 0.0)) fail("dt", "must be positive");
  if (c.chunk_size < 2) fail("chunk_size", "must be at least 2");
  if (c.n_paths < 2) fail("n_paths", "must be at least 2");
  if (c.n_noise_seeds < 1) fail("n_noise_seeds", "must be at least 1");
  if (c.n_pairs < 1) fail("n_pairs", "must be positive");
  if (c.n_radii < 32) fail("n_radii", "must be at least 32");
  if (c.quad_points < 16) fail("quad_points", "must be at least 16");
  if (!(c.multiplier >= 1.0)) fail("multiplier", "must be at least 1");
  if (!(c.t_max > 0.0)) fail("T_max", "must be positive");
  if (c.oracle_paths < 2) fail("oracle_paths", "must be at least 2");

  if (uses_horizons(c.command) && c.horizons.empty()) fail("T_list", "must not be empty");
  for (double T : c.horizons) {
    if (!(T > 0.0) || !std::isfinite(T)) fail("T_list", "horizons must be positive");
    if (round_steps(T, c.dt).n_steps < 1) fail("T_list", "horizon shorter than one step dt");
    if (c.command == Command::kCollision && T < 2.0) fail("T_list", "collision needs T >= 2");
  }
  if (uses_beta(c.command) && c.betas.empty()) fail("beta_frac", "must not be empty");
  const char* beta_key = c.beta_mode == BetaMode::kFraction ? "beta_frac" : "beta_abs";
  for (double b : c.betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) fail(beta_key, "must be nonnegative");
  }
  if (single_beta(c.command) && c.betas.size() != 1) {
    fail(beta_key, "this command takes a single beta");
  }
  const bool needs_bound = (uses_beta(c.command) && c.beta_mode == BetaMode::kFraction) ||
                           c.command == Command::kBound;
  if (needs_bound && c.d < 3) fail("d", "the Green-function bound needs d >= 3");

  if (!c.n_index.empty()) {
    if (static_cast<int>(c.n_index.size()) != c.d) fail("n", "length must equal d");
    int order = 0;
    for (int v : c.n_index) {
      if (v < 0) fail("n", "entries must be nonnegative");
      order += v;
    }
    if (order > kMaxHermiteOrder) fail("n", "order exceeds " + std::to_string(kMaxHermiteOrder));
    if ((c.command == Command::kYnDecay) && order == 0) fail("n", "must be nonzero");
  }
  if ((c.command == Command::kHermiteCheck || c.command == Command::kYnDecay) && c.n_index.empty()) {
    fail("n", "required");
  }
  if (c.command == Command::kMgf && c.lambdas.empty()) fail("lambda", "must not be empty");
  for (const auto& l : c.lambdas) {
    if (static_cast<int>(l.size()) != c.d) fail("lambda", "every vector must have length d");
    for (double x : l) {
      if (!std::isfinite(x)) fail("lambda", "entries must be finite");
    }
  }
}

std::string format_horizon(double T) { return format_double(T); }

std::string join_index(std::span<const int> n) {
  std::string out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(n[i]);
  }
  return out;
}

std::string compact_config(const ExperimentConfig& config) {
  return json::parse(config_to_json(config)).dump();
}

std::vector<std::string> standard_comments(const ExperimentConfig& config) {
  std::vector<std::string> comments{"config: " + compact_config(config)};
  for (const auto& note : rounding_notes(config)) comments.push_back("note: " + note);
  return comments;
}

struct Setting {
  MollifierSpec spec;
  CovarianceTable table;
};

Setting make_setting(const ExperimentConfig& c) {
  Setting s;
  s.spec = make_mollifier(c.K, c.d, c.quad_points);
  s.table = covariance_build(s.spec, c.n_radii);
  return s;
}

struct ResolvedBetas {
  std::vector<double> absolute;
  std::optional<double> bound;
};

ResolvedBetas resolve_betas(const ExperimentConfig& c, const CovarianceTable& table) {
  ResolvedBetas r;
  if (c.beta_mode == BetaMode::kFraction || c.command == Command::kBound) {
    r.bound = bound_report(table, c.d).beta_lower_bound;
  }
  for (double b : c.betas) {
    r.absolute.push_back(c.beta_mode == BetaMode::kFraction ? b * *r.bound : b);
  }
  return r;
}

std::vector<long> checkpoints_for(const ExperimentConfig& c) {
  std::vector<long> steps;
  for (double T : c.horizons) steps.push_back(round_steps(T, c.dt).n_steps);
  return steps;
}

// The batch API wants increasing checkpoints; map each horizon to its slot.
struct Checkpoints {
  std::vector<long> sorted;
  std::vector<std::size_t> slot;  // per horizon in config order
};

Checkpoints plan_checkpoints(const ExperimentConfig& c) {
  Checkpoints cp;
  const auto steps = checkpoints_for(c);
  std::set<long> unique(steps.begin(), steps.end());
  cp.sorted.assign(unique.begin(), unique.end());
  for (long s : steps) {
    cp.slot.push_back(static_cast<std::size_t>(
        std::lower_bound(cp.sorted.begin(), cp.sorted.end(), s) - cp.sorted.begin()));
  }
  return cp;
}

VirtualNoiseField field_for(const ExperimentConfig& c, std::uint64_t seed) {
  return make_noise_field(seed, c.dt, c.h, c.d);
}

ExecPolicy policy_for(const ExperimentConfig& c, unsigned threads) {
  return ExecPolicy{std::max(1u, threads), c.chunk_size};
}

std::vector<MultiIndex> clt_indices(const ExperimentConfig& c) {
  if (!c.n_index.empty()) return {MultiIndex(c.n_index)};
  std::vector<MultiIndex> out;
  for (int p = 1; p <= 4; ++p) out.push_back(axis_index(c.d, 0, p));
  for (int a = 1; a < c.d; ++a) out.push_back(axis_index(c.d, a, 2));
  if (c.d >= 2) {
    std::vector<int> mixed(static_cast<std::size_t>(c.d), 0);
    mixed[0] = mixed[1] = 1;
    out.emplace_back(mixed);
  }
  return out;
}

ExperimentOutput csv_output(const CsvTable& table,
                            std::vector<std::pair<std::string, double>> summary) {
  return {render_csv(table), "csv", std::move(summary)};
}

ExperimentOutput run_kernel_table(const ExperimentConfig& c) {
  const Setting s = make_setting(c);
  CsvTable table;
  table.comments.push_back("K=" + format_double(c.K) + " d=" + std::to_string(c.d) +
                           " V0=" + format_double(s.table.v0));
  table.comments.push_back("config: " + compact_config(c));
  table.header = {"r", "V"};
  for (std::size_t i = 0; i < s.table.radii.size(); ++i) {
    table.rows.push_back({s.table.radii[i], s.table.values[i]});
  }
  return csv_output(table, {{"v0", s.table.v0}, {"norm_const", s.spec.norm_const}});
}

ExperimentOutput run_bound(const ExperimentConfig& c, unsigned threads) {
  const Setting s = make_setting(c);
  const BoundReport report = bound_report(s.table, c.d);
  const OccupationEstimate occ = occupation_oracle_mc(s.table, c.d, c.oracle_paths, c.dt, c.t_max,
                                                      c.path_seed_start, policy_for(c, threads));
  const double rel_diff = (occ.value - report.green_integral) / report.green_integral;
  const double combined_err = std::hypot(occ.std_err, occ.tail_bound);

  json out;
  out["config"] = json::parse(config_to_json(c));
  out["d"] = c.d;
  out["K"] = c.K;
  out["v0"] = s.table.v0;
  out["green_const"] = make_green_quadrature(c.d).green_const;
  out["g"] = report.green_integral;
  out["beta_lower_bound"] = report.beta_lower_bound;
  out["occupation_mc"] = {{"estimate", occ.value},
                          {"std_err", occ.std_err},
                          {"tail_bound", occ.tail_bound},
                          {"n_paths", c.oracle_paths},
                          {"T_max", c.t_max}};
  out["relative_difference"] = rel_diff;
  out["combined_error"] = combined_err;
  json entries = json::array();
  for (double b : c.betas) {
    const double beta = c.beta_mode == BetaMode::kFraction ? b * report.beta_lower_bound : b;
    const KhasminskiiEntry e = khasminskii_bound(report.green_integral, beta, c.multiplier);
    json row{{"beta", e.beta},
             {"beta_frac", e.beta / report.beta_lower_bound},
             {"multiplier", e.multiplier},
             {"eta", e.eta},
             {"diverges", e.diverges()}};
    row["l2_bound"] = e.l2_bound ? json(*e.l2_bound) : json(nullptr);
    entries.push_back(row);
  }
  out["entries"] = entries;
  const auto notes = rounding_notes(c);
  if (!notes.empty()) out["notes"] = notes;

  return {out.dump(2) + "\n",
          "json",
          {{"g", report.green_integral},
           {"beta_lower_bound", report.beta_lower_bound},
           {"occupation_mc", occ.value},
           {"relative_difference", rel_diff}}};
}

ExperimentOutput run_phase(const ExperimentConfig& c, unsigned threads) {
  const Setting s = make_setting(c);
  const ResolvedBetas betas = resolve_betas(c, s.table);
  const Checkpoints cp = plan_checkpoints(c);
  const auto seeds = seed_range(c.path_seed_start, c.n_paths);
  const ExecPolicy exec = policy_for(c, threads);

  CsvTable table;
  table.comments = standard_comments(c);
  table.header = {"beta", "T", "log_m_hat_over_T", "ess", "noise_seed"};
  std::vector<double> negative(betas.absolute.size(), 0.0);
  for (std::size_t k = 0; k < c.n_noise_seeds; ++k) {
    const std::uint64_t noise_seed = c.noise_seed + k;
    const PathBatch batch = simulate_batch(field_for(c, noise_seed), s.spec, seeds, cp.sorted, exec);
    for (std::size_t t = 0; t < c.horizons.size(); ++t) {
      const std::size_t slot = cp.slot[t];
      for (std::size_t b = 0; b < betas.absolute.size(); ++b) {
        const WeightedEnsemble ens =
            ensemble_from_batch(batch, slot, betas.absolute[b], noise_seed, c.chunk_size);
        const PartitionEstimate est = partition_from_log_weights(ens.log_weights, c.chunk_size);
        const double horizon = batch.horizon(slot);
        const double rate = est.log_m_hat / horizon;
        if (rate < 0.0) negative[b] += 1.0;
        table.rows.push_back({betas.absolute[b], horizon, rate, est.ess,
                              static_cast<std::int64_t>(noise_seed)});
      }
    }
  }
  std::vector<std::pair<std::string, double>> summary;
  const double total = static_cast<double>(c.n_noise_seeds * c.horizons.size());
  for (std::size_t b = 0; b < betas.absolute.size(); ++b) {
    summary.emplace_back("negative_fraction[beta=" + format_double(betas.absolute[b]) + "]",
                         negative[b] / total);
  }
  return csv_output(table, std::move(summary));
}

ExperimentOutput run_clt(const ExperimentConfig& c, unsigned threads) {
  const Setting s = make_setting(c);
  const double beta = resolve_betas(c, s.table).absolute.front();
  const Checkpoints cp = plan_checkpoints(c);
  const auto seeds = seed_range(c.path_seed_start, c.n_paths);
  const PathBatch batch =
      simulate_batch(field_for(c, c.noise_seed), s.spec, seeds, cp.sorted, policy_for(c, threads));
  const auto indices = clt_indices(c);

  CsvTable table;
  table.comments = standard_comments(c);
  table.header = {"T", "n_index", "moment", "std_err", "gaussian_target"};
  double worst = 0.0;
  for (std::size_t t = 0; t < c.horizons.size(); ++t) {
    const WeightedEnsemble ens =
        ensemble_from_batch(batch, cp.slot[t], beta, c.noise_seed, c.chunk_size);
    for (const MultiIndex& n : indices) {
      const Estimate m = quenched_moment_with_error(ens, n.span());
      const double target = gaussian_moment(n);
      if (m.std_err > 0.0) worst = std::max(worst, std::abs(m.value - target) / m.std_err);
      table.rows.push_back({ens.horizon, join_index(n.span()), m.value, m.std_err, target});
    }
  }
  return csv_output(table, {{"beta", beta}, {"max_abs_z", worst}});
}

ExperimentOutput run_mgf(const ExperimentConfig& c, unsigned threads) {
  const Setting s = make_setting(c);
  const double beta = resolve_betas(c, s.table).absolute.front();
  const Checkpoints cp = plan_checkpoints(c);
  const auto seeds = seed_range(c.path_seed_start, c.n_paths);
  const PathBatch batch =
      simulate_batch(field_for(c, c.noise_seed), s.spec, seeds, cp.sorted, policy_for(c, threads));

  CsvTable table;
  table.comments = standard_comments(c);
  table.header = {"T", "lambda_norm", "mgf", "std_err", "target"};
  for (std::size_t t = 0; t < c.horizons.size(); ++t) {
    const WeightedEnsemble ens =
        ensemble_from_batch(batch, cp.slot[t], beta, c.noise_seed, c.chunk_size);
    for (const auto& lambda : c.lambdas) {
      double norm2 = 0.0;
      for (double l : lambda) norm2 += l * l;
      const Estimate m = mgf_endpoint_with_error(ens, lambda);
      table.rows.push_back({ens.horizon, std::sqrt(norm2), m.value, m.std_err, std::exp(0.5 * norm2)});
    }
  }
  return csv_output(table, {{"beta", beta}});
}

ExperimentOutput run_hermite_check(const ExperimentConfig& c) {
  const HermiteCoefficients coeffs = hermite_coeffs(MultiIndex(c.n_index));
  CsvTable table;
  table.comments = standard_comments(c);
  for (int a = 1; a <= c.d; ++a) table.header.push_back("i" + std::to_string(a));
  table.header.push_back("j");
  table.header.push_back("coeff");
  for (const auto& [key, coeff] : coeffs.terms) {
    std::vector<CsvCell> row;
    for (int p : key.powers) row.emplace_back(static_cast<std::int64_t>(p));
    row.emplace_back(static_cast<std::int64_t>(key.t_power));
    row.emplace_back(coeff);
    table.rows.push_back(std::move(row));
  }
  return csv_output(table, {{"terms", static_cast<double>(coeffs.terms.size())},
                            {"gaussian_numerator",
                             static_cast<double>(gaussian_expectation_numerator(coeffs))}});
}

ExperimentOutput run_yn_decay(const ExperimentConfig& c, unsigned threads) {
  const Setting s = make_setting(c);
  const double beta = resolve_betas(c, s.table).absolute.front();
  const auto seeds = seed_range(c.path_seed_start, c.n_paths);
  const auto curve = y_n_decay_curve(field_for(c, c.noise_seed), s.spec, beta, c.dt, seeds,
                                     MultiIndex(c.n_index), c.horizons, policy_for(c, threads));
  CsvTable table;
  table.comments = standard_comments(c);
  table.header = {"T", "scaled_Yn", "std_err"};
  for (const DecayPoint& p : curve) table.rows.push_back({p.horizon, p.scaled, p.std_err});
  return csv_output(table, {{"beta", beta}});
}

ExperimentOutput run_second_moment(const ExperimentConfig& c, unsigned threads) {
  const Setting s = make_setting(c);
  const double beta = resolve_betas(c, s.table).absolute.front();
  CsvTable table;
  table.comments = standard_comments(c);
  table.header = {"T", "estimate", "std_err"};
  for (double T : c.horizons) {
    const double horizon = round_steps(T, c.dt).horizon;
    const McEstimate e = pair_second_moment_mc(s.table, c.d, beta, horizon, c.dt, c.n_pairs,
                                               c.path_seed_start, policy_for(c, threads));
    table.rows.push_back({horizon, e.value, e.std_err});
  }
  return csv_output(table, {{"beta", beta}});
}

ExperimentOutput run_collision(const ExperimentConfig& c, unsigned threads) {
  CsvTable table;
  table.comments = standard_comments(c);
  table.header = {"T", "estimate", "std_err"};
  std::vector<double> xs;
  std::vector<double> ys;
  for (double T : c.horizons) {
    const double horizon = round_steps(T, c.dt).horizon;
    const McEstimate e = collision_probability(c.K, c.d, horizon, c.dt, c.n_pairs,
                                               c.path_seed_start, policy_for(c, threads));
    table.rows.push_back({horizon, e.value, e.std_err});
    if (e.value > 0.0) {
      xs.push_back(horizon);
      ys.push_back(e.value);
    }
  }
  std::vector<std::pair<std::string, double>> summary;
  if (xs.size() >= 2) summary.emplace_back("loglog_slope", loglog_slope(xs, ys));
  return csv_output(table, std::move(summary));
}

}  // namespace

std::string_view command_name(Command command) {
  for (const auto& [c, name] : kCommandNames) {
    if (c == command) return name;
  }
  return "unknown";
}

std::optional<Command> parse_command_name(std::string_view name) {
  for (const auto& [c, n] : kCommandNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("", "JSON syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) fail("", "top level must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKnownKeys.contains(key)) fail(key, "unknown key");
  }

  ExperimentConfig c;
  if (!doc.contains("command")) fail("command", "required");
  if (!doc["command"].is_string()) fail("command", "expected a string");
  const auto command = parse_command_name(doc["command"].get<std::string>());
  if (!command) fail("command", "unknown command '" + doc["command"].get<std::string>() + "'");
  c.command = *command;

  const auto has = [&](const char* key) { return doc.contains(key); };
  const auto count = [&](const char* key, auto& target) {
    if (!has(key)) return;
    const std::uint64_t v = read_unsigned(doc[key], key);
    using T = std::remove_reference_t<decltype(target)>;
    if (v > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) fail(key, "out of range");
    target = static_cast<T>(v);
  };

  count("d", c.d);
  if (has("K")) c.K = read_number(doc, "K");
  if (has("h")) c.h = read_number(doc, "h");
  if (has("dt")) c.dt = read_number(doc, "dt");
  if (has("T") && has("T_list")) fail("T_list", "give either T or T_list, not both");
  if (has("T")) c.horizons = {read_number(doc, "T")};
  if (has("T_list")) c.horizons = read_number_or_list(doc, "T_list");
  if (has("beta_frac") && has("beta_abs")) fail("beta_abs", "give either beta_frac or beta_abs");
  if (has("beta_frac")) {
    c.beta_mode = BetaMode::kFraction;
    c.betas = read_number_or_list(doc, "beta_frac");
  }
  if (has("beta_abs")) {
    c.beta_mode = BetaMode::kAbsolute;
    c.betas = read_number_or_list(doc, "beta_abs");
  }
  count("n_paths", c.n_paths);
  count("noise_seed", c.noise_seed);
  count("n_noise_seeds", c.n_noise_seeds);
  count("path_seed_start", c.path_seed_start);
  count("chunk_size", c.chunk_size);
  if (has("output_path")) {
    if (!doc["output_path"].is_string()) fail("output_path", "expected a string");
    c.output_path = doc["output_path"].get<std::string>();
  }
  if (has("n")) {
    if (!doc["n"].is_array()) fail("n", "expected a list of integers");
    for (const json& v : doc["n"]) {
      const std::uint64_t x = read_unsigned(v, "n");
      if (x > static_cast<std::uint64_t>(kMaxHermiteOrder)) fail("n", "entry too large");
      c.n_index.push_back(static_cast<int>(x));
    }
  }
  if (has("lambda")) {
    const json& v = doc["lambda"];
    if (!v.is_array()) fail("lambda", "expected a vector or a list of vectors");
    const bool nested = !v.empty() && v.front().is_array();
    const auto vec = [&](const json& x) {
      std::vector<double> out;
      if (!x.is_array()) fail("lambda", "expected a vector or a list of vectors");
      for (const json& e : x) {
        if (!e.is_number()) fail("lambda", "entries must be numbers");
        out.push_back(e.get<double>());
      }
      return out;
    };
    if (nested) {
      for (const json& x : v) c.lambdas.push_back(vec(x));
    } else if (!v.empty()) {
      c.lambdas.push_back(vec(v));
    }
  }
  count("n_pairs", c.n_pairs);
  count("n_radii", c.n_radii);
  count("quad_points", c.quad_points);
  if (has("multiplier")) c.multiplier = read_number(doc, "multiplier");
  if (has("T_max")) c.t_max = read_number(doc, "T_max");
  count("oracle_paths", c.oracle_paths);

  fill_defaults(c, has("T") || has("T_list"), has("beta_frac") || has("beta_abs"), has("n"),
                has("lambda"));
  validate(c);
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["command"] = std::string(command_name(c.command));
  doc["d"] = c.d;
  doc["K"] = c.K;
  doc["h"] = c.h;
  doc["dt"] = c.dt;
  doc["T_list"] = c.horizons;
  doc[c.beta_mode == BetaMode::kFraction ? "beta_frac" : "beta_abs"] = c.betas;
  doc["n_paths"] = c.n_paths;
  doc["noise_seed"] = c.noise_seed;
  doc["n_noise_seeds"] = c.n_noise_seeds;
  doc["path_seed_start"] = c.path_seed_start;
  doc["chunk_size"] = c.chunk_size;
  doc["output_path"] = c.output_path;
  doc["n"] = c.n_index;
  doc["lambda"] = c.lambdas;
  doc["n_pairs"] = c.n_pairs;
  doc["n_radii"] = c.n_radii;
  doc["quad_points"] = c.quad_points;
  doc["multiplier"] = c.multiplier;
  doc["T_max"] = c.t_max;
  doc["oracle_paths"] = c.oracle_paths;
  return doc.dump(2);
}

std::vector<std::string> rounding_notes(const ExperimentConfig& config) {
  std::vector<std::string> notes;
  for (double T : config.horizons) {
    const StepCount s = round_steps(T, config.dt);
    if (!s.rounded) continue;
    notes.push_back("T=" + format_horizon(T) + " rounded to " + std::to_string(s.n_steps) +
                    " steps of dt=" + format_double(config.dt) + " (T=" +
                    format_double(s.horizon) + ")");
  }
  return notes;
}

void apply_noise_seed_override(ExperimentConfig& config, std::optional<std::uint64_t> flag_value,
                               const char* env_value) {
  if (flag_value) {
    config.noise_seed = *flag_value;
    return;
  }
  if (env_value == nullptr || *env_value == '\0') return;
  const std::string text(env_value);
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    if (text.front() == '-') throw std::invalid_argument("negative");
    value = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || used == 0) {
    throw ConfigError("noise_seed", std::string(kNoiseSeedEnv) + " is not an unsigned integer: '" +
                                        text + "'");
  }
  config.noise_seed = value;
}

ExperimentOutput execute(const ExperimentConfig& config, unsigned threads) {
  switch (config.command) {
    case Command::kKernelTable: return run_kernel_table(config);
    case Command::kBound: return run_bound(config, threads);
    case Command::kPhase: return run_phase(config, threads);
    case Command::kClt: return run_clt(config, threads);
    case Command::kMgf: return run_mgf(config, threads);
    case Command::kHermiteCheck: return run_hermite_check(config);
    case Command::kYnDecay: return run_yn_decay(config, threads);
    case Command::kSecondMoment: return run_second_moment(config, threads);
    case Command::kCollision: return run_collision(config, threads);
  }
  throw InvalidArgument("unhandled command");
}

ExperimentReport run(const ExperimentConfig& config, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutput out = execute(config, threads);
  ExperimentReport report;
  report.config = config;
  report.build_id = build_id();
  report.output_path = config.output_path.empty()
                           ? std::string(command_name(config.command)) + "." + out.extension
                           : config.output_path;
  write_atomically(report.output_path, out.payload);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.summary = std::move(out.summary);
  report.notes = rounding_notes(config);
  return report;
}

std::string report_to_json(const ExperimentReport& report) {
  json doc;
  doc["config"] = json::parse(config_to_json(report.config));
  doc["build_id"] = report.build_id;
  doc["wall_seconds"] = report.wall_seconds;
  doc["output_path"] = report.output_path;
  json summary = json::object();
  for (const auto& [key, value] : report.summary) summary[key] = value;
  doc["summary"] = summary;
  doc["notes"] = report.notes;
  return doc.dump(2);
}

std::string error_to_json(const std::exception& error) {
  json doc;
  std::string kind = "error";
  if (const auto* c = dynamic_cast<const ConfigError*>(&error)) {
    kind = "config";
    if (!c->field().empty()) doc["field"] = c->field();
  } else if (dynamic_cast<const GeometryMismatch*>(&error)) {
    kind = "geometry";
  } else if (dynamic_cast<const ConvergenceError*>(&error)) {
    kind = "convergence";
  } else if (dynamic_cast<const std::filesystem::filesystem_error*>(&error)) {
    kind = "io";
  } else if (dynamic_cast<const InvalidArgument*>(&error)) {
    kind = "invalid_argument";
  }
  doc["error"] = kind;
  doc["message"] = error.what();
  return doc.dump();
}

std::string build_id() { return POLYLAB_BUILD_ID; }

}  // namespace polylab
