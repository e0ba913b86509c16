// Acceptance suite: one PASS/FAIL line per criterion. Criteria 2-9 run once
// with one thread and again with eight; criterion 10 compares their CSV
// output byte for byte.
//
// POLYLAB_ACCEPTANCE_SCALE in (0, 1] shrinks every sample size for quick
// local runs; such runs are labelled and never count as acceptance.
// An optional first argument names a directory for the CSV outputs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <locale>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "polylab/analysis.hpp"
#include "polylab/csv.hpp"
#include "polylab/hermite.hpp"
#include "polylab/kernels.hpp"
#include "polylab/noise.hpp"
#include "polylab/parallel.hpp"
#include "polylab/polymer.hpp"
#include "polylab/stats.hpp"

using namespace polylab;

namespace {

constexpr int kDim = 3;
constexpr double kRadius = 1.0;
constexpr double kH = 0.25;
constexpr double kDt = 0.05;
constexpr std::size_t kChunk = 256;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string csv;  // empty for criteria without a simulation payload
};

struct Context {
  MollifierSpec spec;
  CovarianceTable table;
  double g = 0.0;
  double beta_lb = 0.0;
  double scale = 1.0;

  std::size_t sized(std::size_t full, std::size_t floor = 8) const {
    const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(full) * scale));
    return std::max(floor, n + (n & 1));  // even, so antithetic twins stay paired
  }
};

std::string num(double x, int precision = 4) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(precision) << x;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

VirtualNoiseField field(std::uint64_t seed) { return make_noise_field(seed, kDt, kH, kDim); }

// ---------------------------------------------------------------- 1

std::vector<MultiIndex> indices_up_to(int order) {
  std::vector<MultiIndex> out;
  for (int a = 0; a <= order; ++a)
    for (int b = 0; a + b <= order; ++b)
      for (int c = 0; a + b + c <= order; ++c) out.emplace_back(std::vector<int>{a, b, c});
  return out;
}

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t out = 1;
  while (e-- > 0) out *= base;
  return out;
}

// Exact integer value of sum_A A x^i T^j.
std::int64_t eval_integer(const HermiteCoefficients& coeffs, const std::vector<std::int64_t>& x,
                          std::int64_t T) {
  std::int64_t sum = 0;
  for (const auto& [key, c] : coeffs.terms) {
    std::int64_t term = c * ipow(T, key.t_power);
    for (int a = 0; a < kDim; ++a) term *= ipow(x[a], key.powers[a]);
    sum += term;
  }
  return sum;
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  int degree_violations = 0, leading_violations = 0, scaling_violations = 0;
  int nonzero_expectations = 0;
  for (const auto& n : indices_up_to(6)) {
    const auto coeffs = hermite_coeffs(n);
    bool saw_leading = false;
    for (const auto& [key, c] : coeffs.terms) {
      int degree = 2 * key.t_power;
      for (int p : key.powers) degree += p;
      if (degree != n.order()) ++degree_violations;
      if (key.t_power == 0) {
        if (key.powers != n.n || c != 1) ++leading_violations;
        saw_leading = true;
      }
    }
    if (!saw_leading) ++leading_violations;
    // T-free coefficients: I_n(c^2, c u) = c^{|n|} I_n(1, u) on integer points.
    for (std::int64_t c : {2, 3}) {
      for (std::int64_t u0 = -2; u0 <= 2; ++u0)
        for (std::int64_t u1 = -1; u1 <= 1; ++u1) {
          const std::vector<std::int64_t> u{u0, u1, 1 - u0};
          const std::vector<std::int64_t> x{c * u[0], c * u[1], c * u[2]};
          if (eval_integer(coeffs, x, c * c) != ipow(c, n.order()) * eval_integer(coeffs, u, 1)) {
            ++scaling_violations;
          }
        }
    }
    if (n.order() >= 1 && expected_in_under_gaussian(coeffs, 3.7) != 0.0) ++nonzero_expectations;
  }
  int recurrence_violations = 0;
  for (int k = 0; k <= 5; ++k) {
    if (normal_moment(2 * k + 2) != (2 * k + 1) * normal_moment(2 * k)) ++recurrence_violations;
  }
  std::mt19937_64 gen(20240611);
  std::uniform_int_distribution<int> order_dist(1, 6), axis_dist(0, kDim - 1);
  std::uniform_real_distribution<double> t_dist(0.25, 64.0);
  std::normal_distribution<double> z_dist;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> n(kDim, 0);
    for (int k = order_dist(gen); k > 0; --k) ++n[axis_dist(gen)];
    const double T = t_dist(gen);
    std::vector<double> x(kDim);
    for (double& v : x) v = std::sqrt(T) * z_dist(gen);
    const auto coeffs = hermite_coeffs(MultiIndex(n));
    const double a = i_n(coeffs, T, x);
    const double b = i_n_hermite_product(coeffs.n, T, x);
    worst = std::max(worst, std::abs(a - b) / i_n_magnitude(coeffs, T, x));
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = degree_violations == 0 && leading_violations == 0 && scaling_violations == 0 &&
             nonzero_expectations == 0 && recurrence_violations == 0 && worst <= 1e-12 &&
             elapsed < 1.0;
  out.detail = "degree violations=" + std::to_string(degree_violations) +
               " time-scaling violations=" + std::to_string(scaling_violations) +
               " leading-term violations=" + std::to_string(leading_violations) +
               " nonzero E[I_n]=" + std::to_string(nonzero_expectations) +
               " recurrence violations=" + std::to_string(recurrence_violations) +
               " dual-route max rel diff=" + num(worst, 3) + " time=" + num(elapsed, 3) + "s";
  return out;
}

// ---------------------------------------------------------------- 2

Outcome criterion2(const Context& ctx, const ExecPolicy& exec) {
  const double beta = 0.25 * ctx.beta_lb;
  const auto path = sample_path(0, kDim, 4.0, kDt);
  const std::size_t n_noise = ctx.sized(100000);
  const auto actions = parallel_map<PathAction>(
      n_noise, exec, [&](std::size_t s) { return path_action(path, field(s + 1), ctx.spec); });
  std::vector<double> h(n_noise), w(n_noise);
  bool same_compensator = true;
  for (std::size_t s = 0; s < n_noise; ++s) {
    h[s] = log_weight(actions[s], beta);
    w[s] = std::exp(h[s]);
    same_compensator = same_compensator && actions[s].compensator == actions[0].compensator;
  }
  const auto ws = stats::summarize(w);
  const auto hs = stats::summarize(h);
  const double target_var = beta * beta * actions[0].compensator;
  const double var_se = stats::variance_std_err(target_var, n_noise);
  Outcome out;
  out.pass = same_compensator && std::abs(ws.mean - 1.0) <= 4.0 * ws.std_err &&
             std::abs(hs.variance - target_var) <= 3.0 * var_se;
  out.detail = "N=" + std::to_string(n_noise) + " mean e^H=" + num(ws.mean, 6) + " (" +
               num((ws.mean - 1.0) / ws.std_err, 3) + " SE from 1); Var H=" + num(hs.variance, 6) +
               " vs beta^2 sum dt v0_loc=" + num(target_var, 6) + " (" +
               num((hs.variance - target_var) / var_se, 3) + " SE)";
  CsvTable t;
  t.header = {"quantity", "estimate", "std_err", "target"};
  t.rows.push_back({std::string("mean_exp_H"), ws.mean, ws.std_err, 1.0});
  t.rows.push_back({std::string("var_H"), hs.variance, var_se, target_var});
  out.csv = render_csv(t);
  return out;
}

// ---------------------------------------------------------------- 3, 4

struct AnnealedBatches {
  std::vector<double> m_hat;          // beta = 0.25 bound
  std::vector<double> second_moment;  // off-diagonal, beta = 0.3 bound
};

AnnealedBatches annealed_batches(const Context& ctx, const ExecPolicy& exec) {
  const std::size_t n_noise = ctx.sized(200);
  // Even seeds only: no two paths are antithetic twins, so the off-diagonal
  // products are products of independent paths.
  const auto seeds = seed_range(0, ctx.sized(200), 2);
  const long checkpoint[] = {round_steps(8.0, kDt).n_steps};
  const double b3 = 0.25 * ctx.beta_lb, b4 = 0.3 * ctx.beta_lb;
  AnnealedBatches out;
  out.m_hat.resize(n_noise);
  out.second_moment.resize(n_noise);
  parallel_chunks(n_noise, {exec.threads, 1}, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto batch = simulate_batch(field(1000 + s), ctx.spec, seeds, checkpoint, {1, kChunk});
      const auto e3 = ensemble_from_batch(batch, 0, b3, 1000 + s, kChunk);
      out.m_hat[s] = std::exp(partition_from_log_weights(e3.log_weights, kChunk).log_m_hat);
      const auto e4 = ensemble_from_batch(batch, 0, b4, 1000 + s, kChunk);
      out.second_moment[s] = offdiagonal_second_moment(e4.log_weights);
    }
  });
  return out;
}

Outcome criterion3(const AnnealedBatches& batches) {
  const auto s = stats::summarize(batches.m_hat);
  Outcome out;
  out.pass = std::abs(s.mean - 1.0) <= 3.0 * s.std_err;
  out.detail = std::to_string(batches.m_hat.size()) + " noise seeds: grand mean M_T=" +
               num(s.mean, 6) + " +- " + num(s.std_err, 3) + " (" +
               num((s.mean - 1.0) / s.std_err, 3) + " SE from 1)";
  CsvTable t;
  t.header = {"noise_seed", "m_hat"};
  for (std::size_t i = 0; i < batches.m_hat.size(); ++i) {
    t.rows.push_back({static_cast<std::int64_t>(1000 + i), batches.m_hat[i]});
  }
  t.rows.push_back({std::string("mean"), s.mean});
  out.csv = render_csv(t);
  return out;
}

Outcome criterion4(const Context& ctx, const AnnealedBatches& batches, const ExecPolicy& exec) {
  const double beta = 0.3 * ctx.beta_lb;
  const auto pair = pair_second_moment_mc(ctx.table, kDim, beta, 8.0, kDt, ctx.sized(100000), 0, exec);
  const auto noise = stats::summarize(batches.second_moment);
  const double combined = std::hypot(pair.std_err, noise.std_err);
  Outcome out;
  out.pass = std::abs(pair.value - noise.mean) <= 3.0 * combined;
  out.detail = "pair-path E[M^2]=" + num(pair.value, 6) + " +- " + num(pair.std_err, 3) +
               "; noise-side=" + num(noise.mean, 6) + " +- " + num(noise.std_err, 3) + " (" +
               num((pair.value - noise.mean) / combined, 3) + " combined SE)";
  CsvTable t;
  t.header = {"estimator", "estimate", "std_err"};
  t.rows.push_back({std::string("pair_path"), pair.value, pair.std_err});
  t.rows.push_back({std::string("noise_side"), noise.mean, noise.std_err});
  out.csv = render_csv(t);
  return out;
}

// ---------------------------------------------------------------- 5, 6

struct QuenchedRun {
  PathBatch batch;
  std::uint64_t noise_seed = 1;
  double beta = 0.0;
};

QuenchedRun quenched_run(const Context& ctx, const ExecPolicy& exec) {
  QuenchedRun run;
  run.beta = 0.25 * ctx.beta_lb;
  const auto seeds = seed_range(0, ctx.sized(20000));
  const std::vector<long> checkpoints{round_steps(4.0, kDt).n_steps, round_steps(16.0, kDt).n_steps,
                                      round_steps(64.0, kDt).n_steps};
  run.batch = simulate_batch(field(run.noise_seed), ctx.spec, seeds, checkpoints, exec);
  return run;
}

Outcome criterion5(const QuenchedRun& run) {
  CsvTable t;
  t.header = {"T", "n_index", "moment", "std_err", "gaussian_target"};
  std::vector<Estimate> second(3);
  Estimate fourth{}, mgf{};
  bool odd_ok = true;
  double worst_odd = 0.0;
  std::string ess;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto ens = ensemble_from_batch(run.batch, c, run.beta, run.noise_seed, kChunk);
    ess += (c ? "," : "") + num(partition_from_log_weights(ens.log_weights, kChunk).ess, 4);
    for (int p = 1; p <= 4; ++p) {
      const std::vector<int> n{p, 0, 0};
      const auto m = quenched_moment_with_error(ens, n);
      t.rows.push_back({ens.horizon, std::to_string(p) + ";0;0", m.value, m.std_err,
                        static_cast<double>(normal_moment(p))});
      if (p == 2) second[c] = m;
      if (p == 4 && c == 2) fourth = m;
      if (p % 2 == 1) {
        const double z = std::abs(m.value) / m.std_err;
        worst_odd = std::max(worst_odd, z);
        odd_ok = odd_ok && z < 3.0;
      }
    }
    const std::vector<double> e1{1.0, 0.0, 0.0};
    const auto g = mgf_endpoint_with_error(ens, e1);
    t.rows.push_back({ens.horizon, std::string("mgf;e1"), g.value, g.std_err, std::exp(0.5)});
    if (c == 2) mgf = g;
  }
  bool trend = true;
  for (std::size_t c = 0; c + 1 < 3; ++c) {
    const double slack = 2.0 * std::hypot(second[c].std_err, second[c + 1].std_err);
    trend = trend && std::abs(second[c + 1].value - 1.0) <= std::abs(second[c].value - 1.0) + slack;
  }
  const bool m2_ok = std::abs(second[2].value - 1.0) < 0.10;
  const bool m4_ok = std::abs(fourth.value - 3.0) < 0.4;
  const bool mgf_ok = std::abs(mgf.value - std::exp(0.5)) < 0.10;
  Outcome out;
  out.pass = m2_ok && trend && m4_ok && odd_ok && mgf_ok;
  out.detail = "N=" + std::to_string(run.batch.n_paths()) + " ESS(T=4,16,64)=" + ess +
               "; m2=" + num(second[0].value, 4) + "," + num(second[1].value, 4) + "," +
               num(second[2].value, 4) + " (T=64 " + (m2_ok ? "ok" : "off") +
               ", trend " + (trend ? "ok" : "broken") + "); m4(64)=" + num(fourth.value, 4) +
               " +- " + num(fourth.std_err, 3) + (m4_ok ? " ok" : " off") +
               "; max|odd|/SE=" + num(worst_odd, 3) + "; mgf(64)=" + num(mgf.value, 5) + " +- " +
               num(mgf.std_err, 3) + (mgf_ok ? " ok" : " off");
  out.csv = render_csv(t);
  return out;
}

Outcome criterion6(const QuenchedRun& run) {
  CsvTable t;
  t.header = {"n_index", "T", "scaled_Yn", "std_err"};
  bool pass = true;
  std::string detail;
  for (const std::vector<int>& n : {std::vector<int>{1, 0, 0}, std::vector<int>{2, 0, 0}}) {
    const auto coeffs = hermite_coeffs(MultiIndex(n));
    std::vector<DecayPoint> curve;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto y = y_n_from_batch(run.batch, c, run.beta, coeffs, kChunk);
      const double scale = std::pow(y.horizon, -0.5 * coeffs.n.order());
      curve.push_back({y.horizon, y.value * scale, y.std_err * scale});
      t.rows.push_back({std::to_string(n[0]) + ";0;0", y.horizon, curve.back().scaled, curve.back().std_err});
    }
    bool monotone = true;
    for (std::size_t c = 0; c + 1 < curve.size(); ++c) {
      const double slack = 2.0 * std::hypot(curve[c].std_err, curve[c + 1].std_err);
      monotone = monotone && std::abs(curve[c + 1].scaled) <= std::abs(curve[c].scaled) + slack;
    }
    pass = pass && monotone;
    detail += (detail.empty() ? "" : "; ") + std::string("n=(") + std::to_string(n[0]) + ",0,0): ";
    for (const auto& p : curve) detail += num(p.scaled, 3) + "+-" + num(p.std_err, 2) + " ";
    detail += monotone ? "non-increasing" : "increasing";
  }
  Outcome out;
  out.pass = pass;
  out.detail = detail;
  out.csv = render_csv(t);
  return out;
}

// ---------------------------------------------------------------- 7

Outcome criterion7(const Context& ctx, const ExecPolicy& exec) {
  CsvTable t;
  t.header = {"T", "estimate", "std_err"};
  std::vector<double> xs, ys;
  std::string detail;
  for (double T : {2.0, 4.0, 8.0, 16.0, 32.0}) {
    const auto p = collision_probability(kRadius, kDim, T, kDt, ctx.sized(100000), 0, exec);
    t.rows.push_back({T, p.value, p.std_err});
    xs.push_back(T);
    ys.push_back(p.value);
    detail += num(p.value, 3) + " ";
  }
  const double slope = loglog_slope(xs, ys);
  Outcome out;
  out.pass = slope >= -1.8 && slope <= -1.2;
  out.detail = "P(T=2..32)=" + detail + "slope=" + num(slope, 4);
  out.csv = render_csv(t);
  return out;
}

// ---------------------------------------------------------------- 8

Outcome criterion8(const Context& ctx, const ExecPolicy& exec) {
  const auto occ = occupation_oracle_mc(ctx.table, kDim, ctx.sized(40000), kDt, 1e4, 0, exec);
  const double diff = occ.value - ctx.g;
  const double combined = std::hypot(occ.std_err, occ.tail_bound);
  const bool duel = std::abs(diff) <= 0.03 * ctx.g && std::abs(diff) <= 3.0 * combined;

  const auto fine = covariance_build(ctx.spec, 2 * kDefaultCovarianceRadii);
  const double beta_fine = bound_report(fine, kDim).beta_lower_bound;
  const double drift = std::abs(beta_fine - ctx.beta_lb) / ctx.beta_lb;
  const auto k = khasminskii_bound(ctx.g, 0.25 * ctx.beta_lb, 8.0);

  Outcome out;
  out.pass = duel && drift <= 0.005 && k.eta < 1.0;
  out.detail = "g=" + num(ctx.g, 6) + " MC=" + num(occ.value, 6) + " +- " + num(occ.std_err, 3) +
               " (tail<=" + num(occ.tail_bound, 3) + ", rel diff " + num(diff / ctx.g, 3) + ", " +
               num(diff / combined, 3) + " combined err); beta_lb=" + num(ctx.beta_lb, 6) +
               " vs refined " + num(beta_fine, 6) + " (drift " + num(drift, 3) + "); eta(0.25,m=8)=" +
               num(k.eta, 4);
  CsvTable t;
  t.header = {"quantity", "value", "std_err"};
  t.rows.push_back({std::string("g_quadrature"), ctx.g, 0.0});
  t.rows.push_back({std::string("g_occupation_mc"), occ.value, occ.std_err});
  t.rows.push_back({std::string("occupation_tail_bound"), occ.tail_bound, 0.0});
  t.rows.push_back({std::string("beta_lower_bound"), ctx.beta_lb, 0.0});
  t.rows.push_back({std::string("beta_lower_bound_refined"), beta_fine, 0.0});
  t.rows.push_back({std::string("eta_quarter_bound_m8"), k.eta, 0.0});
  out.csv = render_csv(t);
  return out;
}

// ---------------------------------------------------------------- 9

Outcome criterion9(const Context& ctx, const ExecPolicy& exec) {
  const std::size_t n_noise = ctx.sized(50, 4);
  const auto seeds = seed_range(0, ctx.sized(2000));
  const long checkpoint[] = {round_steps(32.0, kDt).n_steps};
  const double strong = 5.0 * ctx.beta_lb, weak = 0.25 * ctx.beta_lb;
  std::vector<double> rate_strong, rate_weak;
  CsvTable t;
  t.header = {"beta", "T", "log_m_hat_over_T", "ess", "noise_seed"};
  for (std::size_t s = 0; s < n_noise; ++s) {
    const std::uint64_t noise_seed = 5000 + s;
    const auto batch = simulate_batch(field(noise_seed), ctx.spec, seeds, checkpoint, exec);
    for (double beta : {weak, strong}) {
      const auto ens = ensemble_from_batch(batch, 0, beta, noise_seed, kChunk);
      const auto z = partition_from_log_weights(ens.log_weights, kChunk);
      const double rate = z.log_m_hat / ens.horizon;
      (beta == strong ? rate_strong : rate_weak).push_back(rate);
      t.rows.push_back({beta, ens.horizon, rate, z.ess, static_cast<std::int64_t>(noise_seed)});
    }
  }
  const double negative =
      static_cast<double>(std::count_if(rate_strong.begin(), rate_strong.end(), [](double r) { return r < 0.0; })) /
      static_cast<double>(n_noise);
  const double med_strong = stats::median(rate_strong), med_weak = stats::median(rate_weak);
  const double combined = std::hypot(stats::median_std_err(rate_strong), stats::median_std_err(rate_weak));
  Outcome out;
  out.pass = negative >= 0.9 && med_strong < med_weak - 5.0 * combined;
  out.detail = std::to_string(n_noise) + " seeds x " + std::to_string(seeds.size()) +
               " paths: negative fraction=" + num(negative, 3) + "; median rate strong=" +
               num(med_strong, 4) + " weak=" + num(med_weak, 4) + " (" +
               num((med_weak - med_strong) / combined, 3) + " combined SE apart)";
  out.csv = render_csv(t);
  return out;
}

// ----------------------------------------------------------------

void report(int id, const std::string& name, const Outcome& o, double seconds) {
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << "criterion " << id << " " << name << ": "
            << o.detail << " [" << num(seconds, 4) << " s]" << std::endl;
}

using Runner = std::function<std::map<int, Outcome>(const ExecPolicy&, bool)>;

}  // namespace

int main(int argc, char** argv) {
  const auto suite_start = std::chrono::steady_clock::now();
  Context ctx;
  if (const char* s = std::getenv("POLYLAB_ACCEPTANCE_SCALE")) ctx.scale = std::clamp(std::atof(s), 1e-4, 1.0);
  const std::filesystem::path out_dir = argc > 1 ? argv[1] : "";
  if (ctx.scale < 1.0) {
    std::cout << "note: reduced-scale run (scale " << ctx.scale << "); results are not an acceptance run\n";
  }
  ctx.spec = make_mollifier(kRadius, kDim);
  ctx.table = covariance_build(ctx.spec);
  const BoundReport bound = bound_report(ctx.table, kDim);
  ctx.g = bound.green_integral;
  ctx.beta_lb = bound.beta_lower_bound;
  std::cout << "setup: d=3 K=1 h=0.25 dt=0.05 V0=" << num(ctx.table.v0, 8) << " g=" << num(ctx.g, 8)
            << " beta_lower_bound=" << num(ctx.beta_lb, 8) << std::endl;

  bool all_pass = true;
  {
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome c1 = criterion1();
    report(1, "exact algebra", c1, seconds_since(t0));
    all_pass = all_pass && c1.pass;
  }

  const std::map<int, std::string> names{{2, "mean-one weight"},     {3, "annealed partition mean"},
                                         {4, "second-moment duel"},  {5, "quenched CLT"},
                                         {6, "Y_n decay"},           {7, "collision decay"},
                                         {8, "Green/Khas'minskii"},  {9, "strong disorder"}};
  const auto run_all = [&](const ExecPolicy& exec, bool print) {
    std::map<int, Outcome> results;
    const auto timed = [&](int id, const std::function<Outcome()>& fn) {
      const auto t0 = std::chrono::steady_clock::now();
      results[id] = fn();
      if (print) report(id, names.at(id), results[id], seconds_since(t0));
    };
    timed(2, [&] { return criterion2(ctx, exec); });
    AnnealedBatches annealed;
    timed(3, [&] {
      annealed = annealed_batches(ctx, exec);
      return criterion3(annealed);
    });
    timed(4, [&] { return criterion4(ctx, annealed, exec); });
    QuenchedRun quenched;
    timed(5, [&] {
      quenched = quenched_run(ctx, exec);
      return criterion5(quenched);
    });
    timed(6, [&] { return criterion6(quenched); });
    timed(7, [&] { return criterion7(ctx, exec); });
    timed(8, [&] { return criterion8(ctx, exec); });
    timed(9, [&] { return criterion9(ctx, exec); });
    return results;
  };

  const auto single = run_all({1, kChunk}, true);
  for (const auto& [id, o] : single) all_pass = all_pass && o.pass;

  const auto t10 = std::chrono::steady_clock::now();
  const auto threaded = run_all({8, kChunk}, false);
  std::vector<int> mismatched;
  for (const auto& [id, o] : single) {
    if (threaded.at(id).csv != o.csv) mismatched.push_back(id);
  }
  Outcome c10;
  c10.pass = mismatched.empty();
  c10.detail = "criteria 2-9 rerun with 8 threads at chunk_size=256: ";
  if (mismatched.empty()) {
    c10.detail += "all CSV outputs byte-identical";
  } else {
    c10.detail += "differences in";
    for (int id : mismatched) c10.detail += " " + std::to_string(id);
  }
  report(10, "determinism", c10, seconds_since(t10));
  all_pass = all_pass && c10.pass;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [id, o] : single) {
      write_atomically(out_dir / ("criterion" + std::to_string(id) + ".csv"), o.csv);
    }
  }
  std::cout << (all_pass ? "acceptance: all criteria passed" : "acceptance: FAILED") << " ("
            << num(seconds_since(suite_start), 5) << " s)" << std::endl;
  return all_pass ? 0 : 1;
}
