#pragma once

// Monte Carlo drivers: phase-diagram scans, geometrization by projector
// resampling, figure-eight census, and energy statistics. Every trial owns
// an RNG stream derived from (seed, indices) and results are merged by
// index, so output does not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qsatlab/bounds.hpp"
#include "qsatlab/error.hpp"
#include "qsatlab/hypergraph.hpp"
#include "qsatlab/instance.hpp"
#include "qsatlab/io.hpp"
#include "qsatlab/kernel.hpp"
#include "qsatlab/rng.hpp"
#include "qsatlab/transfer.hpp"

namespace qsat {

// ---------------------------------------------------------------------------
// Workers

/// --threads value if given, else QSATLAB_THREADS, else the hardware count.
inline unsigned resolve_threads(std::optional<unsigned> requested = {}) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("QSATLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    throw ValidationError(std::string("QSATLAB_THREADS='") + env +
                          "' is not a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The exception
/// of the lowest failing index is rethrown.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(
                                                         std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::mutex lock;
  std::size_t failed_at = count;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> guard(lock);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Grids and summary statistics

/// "min:max:step" (inclusive within half a step), "a,b,c", or a single value.
inline std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(v)) {
      throw ValidationError("grid '" + text + "': '" + s + "' is not a number");
    }
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto a = text.find(':');
    const auto b = text.find(':', a + 1);
    if (b == std::string::npos || text.find(':', b + 1) != std::string::npos) {
      throw ValidationError("grid '" + text + "' must be min:max:step");
    }
    const double lo = number(text.substr(0, a));
    const double hi = number(text.substr(a + 1, b - a - 1));
    const double step = number(text.substr(b + 1));
    if (!(step > 0) || hi < lo) {
      throw ValidationError("grid '" + text + "' needs step > 0 and max >= min");
    }
    const auto count =
        static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(lo + static_cast<double>(i) * step);
    }
  } else {
    std::size_t start = 0;
    for (;;) {
      const auto comma = text.find(',', start);
      out.push_back(number(text.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

struct Summary {
  std::size_t count = 0;
  double mean = 0, variance = 0, min = 0, max = 0;

  double sd() const { return std::sqrt(variance); }
  double se() const { return count ? std::sqrt(variance / count) : 0.0; }
};

/// Mean, unbiased variance, extremes; accumulated in index order.
inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    for (double x : xs) s.variance += (x - s.mean) * (x - s.mean);
    s.variance /= static_cast<double>(xs.size() - 1);
  }
  return s;
}

inline json to_json(const Summary& s) {
  return json{{"count", s.count}, {"mean", s.mean}, {"variance", s.variance},
              {"min", s.min},     {"max", s.max}};
}

/// %.10g, the number format of every CSV file.
inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Phase-diagram scan

struct ScanOptions {
  int k = 2;
  int r = 1;
  std::vector<double> alphas;
  std::size_t n = 12;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  EdgeModel model = EdgeModel::poisson;
  std::size_t quantum_cap = 16;  ///< kernel statistics only up to this n
  bool energy = true;            ///< ground-state energy of UNSAT draws
  std::size_t energy_cap = 16;
  std::optional<unsigned> threads;
};

inline json to_json(const ScanOptions& o) {
  return json{{"k", o.k},
              {"r", o.r},
              {"alphas", o.alphas},
              {"n", o.n},
              {"trials", o.trials},
              {"seed", o.seed},
              {"model", to_string(o.model)},
              {"quantum_cap", o.quantum_cap},
              {"energy", o.energy},
              {"energy_cap", o.energy_cap}};
}

struct ScanTrial {
  bool empty_core = false;
  bool excess_le1 = false;
  double giant_fraction = 0;
  std::optional<std::uint64_t> dimension;
  std::optional<double> e0;
  bool e0_converged = true;
  std::optional<bool> lifted;  ///< product-state construction, r = 1
};

struct ScanRow {
  int k = 2, r = 1;
  double alpha = 0;
  std::size_t n = 0, trials = 0;
  std::uint64_t seed = 0;
  double p_empty_core = 0;
  std::optional<double> p_excess_le1;  ///< k = 2 only
  double giant_frac = 0;
  std::optional<double> p_sat, mean_d, median_d;
  std::optional<double> mean_e0, var_e0;
  std::size_t energy_unconverged = 0;
  /// k = 2 with quantum statistics: draws where D > 0 matches the graph
  /// criterion.
  std::optional<std::size_t> verdict_agreements;
  std::size_t lift_attempts = 0, lift_successes = 0;
  std::vector<ScanTrial> samples;  ///< per-trial data, in trial order
};

inline ScanTrial scan_trial(const ScanOptions& o, std::size_t alpha_index,
                            std::size_t trial) {
  const double alpha = o.alphas[alpha_index];
  const auto g = sample_hypergraph(o.n, o.k, alpha, o.model,
                                   derive_seed(o.seed, {alpha_index, trial, 0}));
  ScanTrial t;
  const auto stats = graph_stats(g);
  t.empty_core = stats.hypercore_edges == 0;
  t.excess_le1 = o.k == 2 && stats.max_excess() <= 1;
  t.giant_fraction = stats.giant_fraction;
  if (o.n > o.quantum_cap) return t;
  const auto inst =
      build_instance(g, o.r, derive_seed(o.seed, {alpha_index, trial, 1}));
  KernelOptions kopts;
  kopts.max_qubits = o.quantum_cap;
  const auto rep = kernel_dimension(inst, kopts);
  t.dimension = rep.dimension;
  if (o.energy && o.n <= o.energy_cap) {
    if (rep.dimension > 0) {
      t.e0 = 0.0;
    } else {
      EnergyOptions eopts;
      eopts.max_qubits = o.energy_cap;
      const auto e = ground_state_energy(inst, eopts);
      t.e0 = e.e0;
      t.e0_converged = e.converged;
    }
  }
  if (o.r == 1 && o.k >= 3 && t.empty_core) {
    try {
      t.lifted = verify_state(inst, lift_product_state(inst)) < 1e-10;
    } catch (const DegeneracyError&) {
      t.lifted = false;
    }
  }
  return t;
}

inline std::vector<ScanRow> scan(const ScanOptions& o) {
  if (o.alphas.empty()) throw ValidationError("scan grid is empty");
  if (o.trials == 0) throw ValidationError("scan needs trials > 0");
  require_rank(o.k, o.r);
  const std::size_t total = o.alphas.size() * o.trials;
  std::vector<ScanTrial> results(total);
  parallel_for(total, resolve_threads(o.threads), [&](std::size_t i) {
    results[i] = scan_trial(o, i / o.trials, i % o.trials);
  });

  std::vector<ScanRow> rows;
  for (std::size_t a = 0; a < o.alphas.size(); ++a) {
    ScanRow row;
    row.k = o.k;
    row.r = o.r;
    row.alpha = o.alphas[a];
    row.n = o.n;
    row.trials = o.trials;
    row.seed = o.seed;
    row.samples.assign(results.begin() + static_cast<std::ptrdiff_t>(a * o.trials),
                       results.begin() + static_cast<std::ptrdiff_t>((a + 1) * o.trials));
    const auto trials = static_cast<double>(o.trials);
    std::size_t core = 0, excess = 0, sat = 0, agree = 0;
    std::vector<double> dims, energies;
    for (const auto& t : row.samples) {
      core += t.empty_core;
      excess += t.excess_le1;
      row.giant_frac += t.giant_fraction / trials;
      if (t.dimension) {
        dims.push_back(static_cast<double>(*t.dimension));
        sat += *t.dimension > 0;
        agree += (*t.dimension > 0) == t.excess_le1;
      }
      if (t.e0) {
        if (t.e0_converged) {
          energies.push_back(*t.e0);
        } else {
          ++row.energy_unconverged;
        }
      }
      if (t.lifted) {
        ++row.lift_attempts;
        row.lift_successes += *t.lifted;
      }
    }
    row.p_empty_core = static_cast<double>(core) / trials;
    if (o.k == 2) row.p_excess_le1 = static_cast<double>(excess) / trials;
    if (!dims.empty()) {
      row.p_sat = static_cast<double>(sat) / trials;
      row.mean_d = summarize(dims).mean;
      std::sort(dims.begin(), dims.end());
      const auto h = dims.size() / 2;
      row.median_d = dims.size() % 2 ? dims[h] : 0.5 * (dims[h - 1] + dims[h]);
      if (o.k == 2) row.verdict_agreements = agree;
    }
    if (!energies.empty()) {
      const auto s = summarize(energies);
      row.mean_e0 = s.mean;
      row.var_e0 = s.variance;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline constexpr const char* kScanColumns =
    "k,r,alpha,n,trials,seed,p_empty_core,p_excess_le1,giant_frac,p_sat,"
    "mean_D,mean_E0,var_E0";

/// CSV with a leading "# qsatlab scan {config}" line and the header row.
inline std::string scan_csv(const std::vector<ScanRow>& rows,
                            const json& config) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
  };
  std::string out = "# qsatlab scan " + config.dump() + "\n";
  out += kScanColumns;
  out += "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.k) + "," + std::to_string(r.r) + "," +
           format_number(r.alpha) + "," + std::to_string(r.n) + "," +
           std::to_string(r.trials) + "," + std::to_string(r.seed) + "," +
           format_number(r.p_empty_core) + "," + opt(r.p_excess_le1) + "," +
           format_number(r.giant_frac) + "," + opt(r.p_sat) + "," +
           opt(r.mean_d) + "," + opt(r.mean_e0) + "," + opt(r.var_e0) + "\n";
  }
  return out;
}

inline json to_json(const ScanRow& r) {
  auto opt = [](const auto& v) -> json {
    if (v) return *v;
    return nullptr;
  };
  return json{{"k", r.k},
              {"r", r.r},
              {"alpha", r.alpha},
              {"n", r.n},
              {"trials", r.trials},
              {"seed", r.seed},
              {"p_empty_core", r.p_empty_core},
              {"p_excess_le1", opt(r.p_excess_le1)},
              {"giant_frac", r.giant_frac},
              {"p_sat", opt(r.p_sat)},
              {"mean_D", opt(r.mean_d)},
              {"median_D", opt(r.median_d)},
              {"mean_E0", opt(r.mean_e0)},
              {"var_E0", opt(r.var_e0)},
              {"energy_density",
               r.mean_e0 ? json(*r.mean_e0 / static_cast<double>(r.n)) : json()},
              {"energy_unconverged", r.energy_unconverged},
              {"verdict_agreements", opt(r.verdict_agreements)},
              {"lift_attempts", r.lift_attempts},
              {"lift_successes", r.lift_successes}};
}

// ---------------------------------------------------------------------------
// Finite-size transition estimate

struct TransitionFit {
  double crossing = 0;  ///< alpha where the fitted P crosses 1/2
  double slope = 0;     ///< s in P = 1 / (1 + exp(s (alpha - crossing)))
  bool converged = false;
  double crossing_se = 0, slope_se = 0;  ///< bootstrap standard errors
  std::size_t bootstrap = 0;
};

/// Maximum-likelihood logistic fit to binomial counts (IRLS).
inline TransitionFit fit_transition(const std::vector<double>& alphas,
                                    const std::vector<double>& successes,
                                    const std::vector<double>& trials) {
  if (alphas.size() != successes.size() || alphas.size() != trials.size() ||
      alphas.size() < 2) {
    throw ValidationError("transition fit needs matching arrays of length >= 2");
  }
  // P = sigmoid(a + b alpha)
  double a = 0, b = 0;
  TransitionFit fit;
  for (int iter = 0; iter < 200; ++iter) {
    double g0 = 0, g1 = 0, h00 = 1e-12, h01 = 0, h11 = 1e-12;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const double x = alphas[i];
      const double p = 1 / (1 + std::exp(-(a + b * x)));
      const double w = trials[i] * p * (1 - p);
      const double resid = successes[i] - trials[i] * p;
      g0 += resid;
      g1 += resid * x;
      h00 += w;
      h01 += w * x;
      h11 += w * x * x;
    }
    const double det = h00 * h11 - h01 * h01;
    const double da = (h11 * g0 - h01 * g1) / det;
    const double db = (h00 * g1 - h01 * g0) / det;
    a += da;
    b += db;
    if (std::abs(da) + std::abs(db) < 1e-12 * (1 + std::abs(a) + std::abs(b))) {
      fit.converged = true;
      break;
    }
  }
  fit.slope = -b;
  fit.crossing = -a / b;
  if (!std::isfinite(fit.crossing)) fit.converged = false;
  return fit;
}

/// fit_transition plus parametric-bootstrap standard errors: each
/// replicate redraws every count from Binomial(trials, observed fraction).
inline TransitionFit fit_transition_bootstrap(
    const std::vector<double>& alphas, const std::vector<double>& successes,
    const std::vector<double>& trials, std::size_t replicates,
    std::uint64_t seed) {
  auto fit = fit_transition(alphas, successes, trials);
  std::vector<double> cs, ss;
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    Rng rng(derive_seed(seed, rep));
    std::vector<double> draw(alphas.size());
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const double p = successes[i] / trials[i];
      double s = 0;
      for (std::size_t t = 0; t < static_cast<std::size_t>(trials[i]); ++t) {
        s += rng.uniform() < p;
      }
      draw[i] = s;
    }
    const auto f = fit_transition(alphas, draw, trials);
    if (f.converged) {
      cs.push_back(f.crossing);
      ss.push_back(f.slope);
    }
  }
  fit.bootstrap = cs.size();
  fit.crossing_se = summarize(cs).sd();
  fit.slope_se = summarize(ss).sd();
  return fit;
}

inline json to_json(const TransitionFit& f) {
  return json{{"crossing", f.crossing},       {"slope", f.slope},
              {"converged", f.converged},     {"crossing_se", f.crossing_se},
              {"slope_se", f.slope_se},       {"bootstrap", f.bootstrap}};
}

// ---------------------------------------------------------------------------
// Geometrization

struct GeometrizationReport {
  std::uint64_t graph_seed = 0;
  std::size_t trials = 0;
  std::map<std::uint64_t, std::size_t> histogram;  ///< D -> frequency
  std::uint64_t modal_d = 0;
  std::size_t modal_count = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  std::size_t low_margin_trials = 0;
  std::vector<std::uint64_t> dimensions;  ///< per trial
  std::vector<double> margins;            ///< per trial

  double modal_fraction() const {
    return trials ? static_cast<double>(modal_count) / trials : 0.0;
  }
};

/// Fixed graph, fresh Haar frames per trial.
inline GeometrizationReport geometrization_trial(
    const Hypergraph& g, int r, std::size_t trials, std::uint64_t seed,
    const KernelOptions& kopts = {}, std::optional<unsigned> threads = {}) {
  GeometrizationReport rep;
  rep.graph_seed = g.seed();
  rep.trials = trials;
  rep.dimensions.resize(trials);
  rep.margins.resize(trials);
  parallel_for(trials, resolve_threads(threads), [&](std::size_t t) {
    const auto k = kernel_dimension(build_instance(g, r, derive_seed(seed, t)), kopts);
    rep.dimensions[t] = k.dimension;
    rep.margins[t] = k.margin;
  });
  for (std::size_t t = 0; t < trials; ++t) {
    ++rep.histogram[rep.dimensions[t]];
    rep.min_margin = std::min(rep.min_margin, rep.margins[t]);
    rep.low_margin_trials += rep.margins[t] < kCleanMargin;
  }
  for (const auto& [d, c] : rep.histogram) {
    if (c > rep.modal_count) {
      rep.modal_count = c;
      rep.modal_d = d;
    }
  }
  return rep;
}

inline json to_json(const GeometrizationReport& r) {
  json hist = json::object();
  for (const auto& [d, c] : r.histogram) hist[std::to_string(d)] = c;
  return json{{"graph_seed", r.graph_seed},
              {"trials", r.trials},
              {"histogram", hist},
              {"modal_D", r.modal_d},
              {"modal_count", r.modal_count},
              {"modal_fraction", r.modal_fraction()},
              {"min_margin", detail::number_or_null(r.min_margin)},
              {"low_margin_trials", r.low_margin_trials}};
}

// ---------------------------------------------------------------------------
// Figure-eight census

struct CensusRow {
  std::size_t n = 0;
  double alpha = 0;
  std::size_t length = 0, distance = 0, trials = 0;
  std::uint64_t seed = 0;
  double mean = 0, variance = 0;
  double predicted = 0;  ///< expected count in G(n, p), p = alpha n / C(n,2)
  double z = 0;
};

/// Observed mean number of figure-eights (L-cycle plus a chord at distance
/// d) in random graphs against the expected-count formula. The z-score uses
/// the larger of the sample variance and the predicted mean (the Poisson
/// variance) so that an all-zero sample does not divide by zero.
inline CensusRow census(std::size_t n, double alpha, std::size_t length,
                        std::size_t distance, std::size_t trials,
                        std::uint64_t seed, std::optional<unsigned> threads = {}) {
  if (trials == 0) throw ValidationError("census needs trials > 0");
  std::vector<double> counts(trials);
  // Validate the shape once before spawning work.
  count_figure_eights(Hypergraph(length, 2, {}), length, distance);
  parallel_for(trials, resolve_threads(threads), [&](std::size_t t) {
    const auto g = sample_hypergraph(n, 2, alpha, EdgeModel::poisson,
                                     derive_seed(seed, t));
    counts[t] = static_cast<double>(count_figure_eights(g, length, distance));
  });
  const auto s = summarize(counts);
  CensusRow row;
  row.n = n;
  row.alpha = alpha;
  row.length = length;
  row.distance = distance;
  row.trials = trials;
  row.seed = seed;
  row.mean = s.mean;
  row.variance = s.variance;
  const auto L = static_cast<double>(length);
  row.predicted = expected_subgraph_count(
      {static_cast<double>(n), ensemble_edge_probability(static_cast<double>(n), alpha),
       L, L + 1, figure_eight_automorphisms(length, distance)});
  const double var = std::max(s.variance, row.predicted);
  row.z = var > 0 ? (s.mean - row.predicted) / std::sqrt(var / trials) : 0.0;
  return row;
}

inline json to_json(const CensusRow& c) {
  return json{{"n", c.n},           {"alpha", c.alpha},
              {"L", c.length},      {"d", c.distance},
              {"trials", c.trials}, {"seed", c.seed},
              {"mean", c.mean},     {"variance", c.variance},
              {"predicted", c.predicted}, {"z", c.z}};
}

// ---------------------------------------------------------------------------
// Energy statistics

/// Ground-state energies of `trials` Haar instances on a fixed graph.
inline std::vector<EnergyReport> energy_samples(
    const Hypergraph& g, int r, std::size_t trials, std::uint64_t seed,
    const EnergyOptions& eopts = {}, std::optional<unsigned> threads = {}) {
  std::vector<EnergyReport> out(trials);
  parallel_for(trials, resolve_threads(threads), [&](std::size_t t) {
    out[t] = ground_state_energy(build_instance(g, r, derive_seed(seed, t)), eopts);
  });
  return out;
}

struct LineFit {
  double slope = 0, intercept = 0, r2 = 0;
  double slope_ci = 0;  ///< 95% half-width (Student t)
};

/// Ordinary least squares y = intercept + slope x.
inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("line fit needs two or more points");
  }
  const auto n = static_cast<double>(x.size());
  const double mx = summarize(x).mean, my = summarize(y).mean;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r2 = syy > 0 ? 1 - sse / syy : 1.0;
  if (x.size() > 2) {
    // Two-sided 95% Student t quantiles for 1..10 degrees of freedom.
    static constexpr double t95[] = {12.706, 4.303, 3.182, 2.776, 2.571,
                                     2.447,  2.365, 2.306, 2.262, 2.228};
    const auto dof = x.size() - 2;
    const double t = dof <= 10 ? t95[dof - 1] : 1.96;
    f.slope_ci = t * std::sqrt(sse / (n - 2) / sxx);
  }
  return f;
}

inline json to_json(const LineFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2},
              {"slope_ci95", f.slope_ci}};
}

/// Crossbar separation used for figure-eight energies: L/2 - 1, at least 2.
inline std::size_t default_crossbar(std::size_t length) {
  return std::max<std::size_t>(2, length / 2 - 1);
}

struct FigureEightEnergyRow {
  std::size_t length = 0, distance = 0;
  Summary e0;                     ///< over converged solves
  std::size_t unconverged = 0;
  std::size_t below_floor = 0;    ///< draws with E0 <= 1e-8
};

struct FigureEightScaling {
  std::vector<FigureEightEnergyRow> rows;
  LineFit loglog;  ///< log mean E0 against log L
};

inline FigureEightScaling figure_eight_energy_scaling(
    const std::vector<std::size_t>& lengths, std::size_t trials,
    std::uint64_t seed, const EnergyOptions& eopts = {},
    std::optional<unsigned> threads = {}) {
  FigureEightScaling out;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    FigureEightEnergyRow row;
    row.length = lengths[i];
    row.distance = default_crossbar(lengths[i]);
    const auto g = figure_eight_graph(row.length, row.distance);
    const auto reps =
        energy_samples(g, 1, trials, derive_seed(seed, i), eopts, threads);
    std::vector<double> e;
    for (const auto& r : reps) {
      if (!r.converged) {
        ++row.unconverged;
        continue;
      }
      e.push_back(r.e0);
      row.below_floor += r.e0 <= 1e-8;
    }
    row.e0 = summarize(e);
    if (row.e0.mean > 0) {
      lx.push_back(std::log(static_cast<double>(row.length)));
      ly.push_back(std::log(row.e0.mean));
    }
    out.rows.push_back(row);
  }
  if (lx.size() >= 2) out.loglog = fit_line(lx, ly);
  return out;
}

inline json to_json(const FigureEightScaling& s) {
  json rows = json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"L", r.length},
                    {"d", r.distance},
                    {"E0", to_json(r.e0)},
                    {"unconverged", r.unconverged},
                    {"below_1e-8", r.below_floor}});
  }
  return json{{"rows", rows}, {"loglog_fit", to_json(s.loglog)}};
}

struct PromiseGapRow {
  std::size_t n = 0;
  Summary e0;
  double epsilon = 0;
  std::size_t violations = 0;  ///< draws with 0 < E0 < epsilon
  std::size_t zero = 0;        ///< draws with E0 <= 1e-8
  std::size_t unconverged = 0;
};

/// E0 statistics of random instances against a user threshold
/// eps(n) = eps_coeff * n^(-eps_power).
inline std::vector<PromiseGapRow> promise_gap_stats(
    int k, int r, double alpha, const std::vector<std::size_t>& ns,
    std::size_t trials, std::uint64_t seed, double eps_coeff, double eps_power,
    const EnergyOptions& eopts = {}, std::optional<unsigned> threads = {}) {
  require_rank(k, r);
  std::vector<PromiseGapRow> rows;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    std::vector<EnergyReport> reps(trials);
    parallel_for(trials, resolve_threads(threads), [&](std::size_t t) {
      const auto g = sample_hypergraph(ns[i], k, alpha, EdgeModel::poisson,
                                       derive_seed(seed, {i, t, 0}));
      reps[t] = ground_state_energy(
          build_instance(g, r, derive_seed(seed, {i, t, 1})), eopts);
    });
    PromiseGapRow row;
    row.n = ns[i];
    row.epsilon = eps_coeff * std::pow(static_cast<double>(ns[i]), -eps_power);
    std::vector<double> e;
    for (const auto& rep : reps) {
      if (!rep.converged) {
        ++row.unconverged;
        continue;
      }
      e.push_back(rep.e0);
      if (rep.e0 <= 1e-8) {
        ++row.zero;
      } else if (rep.e0 < row.epsilon) {
        ++row.violations;
      }
    }
    row.e0 = summarize(e);
    rows.push_back(row);
  }
  return rows;
}

inline json to_json(const PromiseGapRow& r) {
  return json{{"n", r.n},
              {"E0", to_json(r.e0)},
              {"epsilon", r.epsilon},
              {"violations", r.violations},
              {"zero", r.zero},
              {"unconverged", r.unconverged}};
}

}  // namespace qsat
