// qsatlab command-line tool.
//
// Exit codes: 0 success, 1 invalid input, 2 numerical degeneracy.

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsatlab/qsatlab.hpp"

namespace {

using qsat::json;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> threads;
};

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

/// Machine output to --out (summary on stdout), or to stdout alone.
void emit(const Common& c, const std::string& text, const std::string& summary) {
  if (c.out.empty()) {
    std::cout << text;
  } else {
    qsat::write_text_file(c.out, text);
    std::cout << summary << "\n";
  }
}

void emit_json(const Common& c, const json& config, json result,
               const std::string& summary) {
  emit(c, qsat::dump_json(json{{"config", config}, {"result", std::move(result)}}),
       summary);
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : qsat::parse_grid(text)) {
    if (v < 0 || v != std::floor(v)) {
      throw qsat::ValidationError("'" + text + "' must list non-negative integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void add_common(CLI::App* cmd, Common& c, bool seeded = true) {
  if (seeded) {
    cmd->add_option("--seed", c.seed, "RNG seed (random if omitted; recorded)");
  }
  cmd->add_option("--out", c.out, "output file (default: standard output)");
  cmd->add_option("--threads", c.threads,
                  "worker threads (default: QSATLAB_THREADS, then all cores)")
      ->check(CLI::PositiveNumber);
}

json kernel_result(const qsat::QsatInstance& inst, const qsat::KernelReport& rep,
                   bool with_basis) {
  json j = qsat::to_json(rep, with_basis);
  j["weak_bound"] = qsat::to_json(qsat::check_weak_bound(rep, inst.k(), inst.rank()));
  return j;
}

std::string fixed(double x, int digits = 4) {
  if (!std::isfinite(x)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsatlab: random quantum satisfiability laboratory"};
  app.require_subcommand(1);

  // gen ----------------------------------------------------------------------
  Common gen_c;
  std::size_t gen_n = 12;
  int gen_k = 2, gen_r = 1;
  double gen_alpha = 0.5;
  std::string gen_model = "poisson";
  auto* gen = app.add_subcommand("gen", "sample a random instance");
  gen->add_option("--n", gen_n, "qubits")->required();
  gen->add_option("--k", gen_k, "edge arity")->required();
  gen->add_option("--alpha", gen_alpha, "clause density M/N")->required();
  gen->add_option("--r", gen_r, "projector rank")->capture_default_str();
  gen->add_option("--model", gen_model, "poisson or fixed_m")->capture_default_str();
  add_common(gen, gen_c);

  // graph --------------------------------------------------------------------
  Common graph_c;
  std::string graph_in;
  std::size_t graph_n = 0;
  int graph_k = 2;
  double graph_alpha = 0.5;
  auto* graph = app.add_subcommand("graph", "graph statistics and verdicts");
  graph->add_option("--in", graph_in, "instance or graph JSON file");
  graph->add_option("--n", graph_n, "sample a graph with this many qubits");
  graph->add_option("--k", graph_k, "edge arity when sampling")->capture_default_str();
  graph->add_option("--alpha", graph_alpha, "density when sampling")->capture_default_str();
  add_common(graph, graph_c);

  // solve --------------------------------------------------------------------
  Common solve_c;
  std::string solve_in;
  double tol_factor = 100.0;
  std::size_t solve_cap = 16;
  bool solve_basis = false, solve_energy = false;
  auto* solve = app.add_subcommand("solve", "kernel dimension of an instance");
  solve->add_option("--in", solve_in, "instance JSON file")->required();
  solve->add_option("--tol-factor", tol_factor, "singular value threshold factor")
      ->capture_default_str();
  solve->add_option("--max-qubits", solve_cap, "solver cap")->capture_default_str();
  solve->add_flag("--basis", solve_basis, "include the kernel basis");
  solve->add_flag("--energy", solve_energy, "also compute the ground-state energy");
  add_common(solve, solve_c, false);

  // product-state ------------------------------------------------------------
  Common ps_c;
  std::string ps_in;
  auto* ps = app.add_subcommand("product-state", "construct a zero-energy product state");
  ps->add_option("--in", ps_in, "instance JSON file (r = 1)")->required();
  add_common(ps, ps_c);

  // scan ---------------------------------------------------------------------
  Common scan_c;
  qsat::ScanOptions scan_o;
  std::string scan_alpha, scan_model = "poisson", scan_format = "csv";
  bool scan_no_energy = false;
  auto* scan = app.add_subcommand("scan", "phase-diagram sweep");
  scan->add_option("--k", scan_o.k, "edge arity")->required();
  scan->add_option("--r", scan_o.r, "projector rank")->capture_default_str();
  scan->add_option("--n", scan_o.n, "qubits")->required();
  scan->add_option("--alpha", scan_alpha, "grid min:max:step or a,b,c")->required();
  scan->add_option("--trials", scan_o.trials, "draws per alpha")->capture_default_str();
  scan->add_option("--model", scan_model, "poisson or fixed_m")->capture_default_str();
  scan->add_option("--quantum-cap", scan_o.quantum_cap, "largest n for kernel statistics")
      ->capture_default_str();
  scan->add_flag("--no-energy", scan_no_energy, "skip ground-state energies");
  scan->add_option("--format", scan_format, "csv or json")->capture_default_str();
  add_common(scan, scan_c);

  // geometrize ---------------------------------------------------------------
  Common geo_c;
  std::string geo_in;
  std::size_t geo_n = 0, geo_trials = 50;
  int geo_k = 2, geo_r = 1;
  double geo_alpha = 0.5;
  auto* geo = app.add_subcommand("geometrize", "kernel dimension under projector re-draws");
  geo->add_option("--in", geo_in, "graph or instance JSON file");
  geo->add_option("--n", geo_n, "sample a graph with this many qubits");
  geo->add_option("--k", geo_k, "edge arity when sampling")->capture_default_str();
  geo->add_option("--alpha", geo_alpha, "density when sampling")->capture_default_str();
  geo->add_option("--r", geo_r, "projector rank")->capture_default_str();
  geo->add_option("--trials", geo_trials, "re-draws")->capture_default_str();
  add_common(geo, geo_c);

  // census -------------------------------------------------------------------
  Common cen_c;
  std::size_t cen_n = 100, cen_L = 6, cen_trials = 1000;
  std::optional<std::size_t> cen_d;
  double cen_alpha = 1.0;
  auto* cen = app.add_subcommand("census", "figure-eight counts against the expectation");
  cen->add_option("--n", cen_n, "qubits")->capture_default_str();
  cen->add_option("--alpha", cen_alpha, "density")->capture_default_str();
  cen->add_option("--L", cen_L, "loop length")->capture_default_str();
  cen->add_option("--d", cen_d, "crossbar separation (default L/2-1, at least 2)");
  cen->add_option("--trials", cen_trials, "graphs")->capture_default_str();
  add_common(cen, cen_c);

  // bounds -------------------------------------------------------------------
  Common bnd_c;
  int bnd_k = 3, bnd_r = 1;
  std::optional<double> bnd_n, bnd_m;
  bool bnd_csv = false;
  auto* bnd = app.add_subcommand("bounds", "threshold table");
  bnd->add_option("--k", bnd_k, "edge arity")->required();
  bnd->add_option("--r", bnd_r, "projector rank")->capture_default_str();
  bnd->add_option("--n", bnd_n, "qubits, for the dimension bound");
  bnd->add_option("--M", bnd_m, "edges, for the dimension bound");
  bnd->add_flag("--csv", bnd_csv, "write CSV to --out");
  add_common(bnd, bnd_c, false);

  // energy -------------------------------------------------------------------
  Common en_c;
  std::string en_in, en_fig8, en_ns;
  int en_k = 2, en_r = 1;
  double en_alpha = 0.75, eps_coeff = 1.0, eps_power = 1.0;
  std::size_t en_trials = 100;
  qsat::EnergyOptions en_opts;
  auto* en = app.add_subcommand("energy", "ground-state energies");
  auto* en_in_opt = en->add_option("--in", en_in, "instance JSON file");
  auto* en_f8_opt =
      en->add_option("--figure-eight", en_fig8, "loop lengths, e.g. 4,6,8");
  auto* en_ns_opt =
      en->add_option("--n-list", en_ns, "qubit counts for promise-gap statistics");
  en_in_opt->excludes(en_f8_opt)->excludes(en_ns_opt);
  en_f8_opt->excludes(en_ns_opt);
  en->add_option("--k", en_k, "edge arity")->capture_default_str();
  en->add_option("--r", en_r, "projector rank")->capture_default_str();
  en->add_option("--alpha", en_alpha, "density")->capture_default_str();
  en->add_option("--trials", en_trials, "draws")->capture_default_str();
  en->add_option("--eps-coeff", eps_coeff, "eps(n) = coeff * n^-power")->capture_default_str();
  en->add_option("--eps-power", eps_power, "eps(n) = coeff * n^-power")->capture_default_str();
  en->add_option("--tol", en_opts.tol, "residual target")->capture_default_str();
  en->add_option("--max-iter", en_opts.max_iter, "operator applications")->capture_default_str();
  en->add_option("--max-qubits", en_opts.max_qubits, "energy cap")->capture_default_str();
  add_common(en, en_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) {
      const auto seed = resolve_seed(gen_c);
      const auto model = qsat::parse_edge_model(gen_model);
      const auto g = qsat::sample_hypergraph(gen_n, gen_k, gen_alpha, model,
                                             qsat::derive_seed(seed, 0));
      const auto inst = qsat::build_instance(g, gen_r, qsat::derive_seed(seed, 1));
      json j = qsat::to_json(inst);
      j["config"] = {{"command", "gen"}, {"n", gen_n},       {"k", gen_k},
                     {"alpha", gen_alpha}, {"r", gen_r},     {"model", gen_model},
                     {"seed", seed}};
      emit(gen_c, qsat::dump_json(j),
           "generated n=" + std::to_string(gen_n) + " k=" + std::to_string(gen_k) +
               " M=" + std::to_string(g.m()) + " r=" + std::to_string(gen_r) +
               " seed=" + std::to_string(seed) + " -> " + gen_c.out);
    } else if (*graph) {
      qsat::Hypergraph g;
      json config{{"command", "graph"}};
      if (!graph_in.empty()) {
        g = qsat::hypergraph_from_json(qsat::read_json_file(graph_in));
        config["in"] = graph_in;
      } else if (graph_n > 0) {
        const auto seed = resolve_seed(graph_c);
        g = qsat::sample_hypergraph(graph_n, graph_k, graph_alpha,
                                    qsat::EdgeModel::poisson, seed);
        config.update({{"n", graph_n}, {"k", graph_k}, {"alpha", graph_alpha},
                       {"seed", seed}});
      } else {
        throw qsat::ValidationError("graph needs --in or --n");
      }
      const auto stats = qsat::graph_stats(g);
      json result = qsat::to_json(stats);
      const auto th = qsat::thresholds(g.k());
      result["alpha"] = g.density();
      result["alpha_gc"] = th.alpha_gc;
      result["alpha_hc"] = th.alpha_hc ? json(*th.alpha_hc) : json();
      std::string verdict = stats.hypercore_edges == 0 ? "SAT (empty hypercore)"
                                                       : "undetermined";
      if (g.k() == 2) verdict = qsat::to_string(qsat::classify_satisfiability_k2(g));
      result["verdict"] = verdict;
      emit_json(graph_c, config, result,
                "n=" + std::to_string(g.n()) + " M=" + std::to_string(g.m()) +
                    " components=" + std::to_string(stats.component_count) +
                    " core_edges=" + std::to_string(stats.hypercore_edges) +
                    " verdict=" + verdict);
    } else if (*solve) {
      const auto inst = qsat::instance_from_json(qsat::read_json_file(solve_in));
      qsat::KernelOptions ko;
      ko.tol_factor = tol_factor;
      ko.max_qubits = solve_cap;
      ko.keep_basis = solve_basis;
      const auto rep = qsat::kernel_dimension(inst, ko);
      json result = kernel_result(inst, rep, solve_basis);
      json config{{"command", "solve"}, {"in", solve_in},
                  {"tol_factor", tol_factor}, {"max_qubits", solve_cap},
                  {"basis", solve_basis}, {"energy", solve_energy}};
      if (solve_energy) {
        result["energy"] = qsat::to_json(qsat::ground_state_energy(inst));
      }
      emit_json(solve_c, config, result,
                "D=" + std::to_string(rep.dimension) +
                    (rep.ill_conditioned() ? " (ill-conditioned)" : ""));
    } else if (*ps) {
      const auto inst = qsat::instance_from_json(qsat::read_json_file(ps_in));
      const auto seed = resolve_seed(ps_c);
      qsat::CoreSearchOptions co;
      co.seed = seed;
      const auto state = qsat::construct_product_state(inst, co);
      const double residual = qsat::verify_state(inst, state);
      json config{{"command", "product-state"}, {"in", ps_in}, {"seed", seed}};
      emit_json(ps_c, config,
                json{{"product_state", qsat::to_json(state)}, {"residual", residual}},
                "residual=" + qsat::format_number(residual));
    } else if (*scan) {
      scan_o.seed = resolve_seed(scan_c);
      scan_o.alphas = qsat::parse_grid(scan_alpha);
      scan_o.model = qsat::parse_edge_model(scan_model);
      scan_o.energy = !scan_no_energy;
      scan_o.threads = scan_c.threads;
      if (scan_format != "csv" && scan_format != "json") {
        throw qsat::ValidationError("--format must be csv or json");
      }
      const auto rows = qsat::scan(scan_o);
      json config = qsat::to_json(scan_o);
      config["command"] = "scan";
      const std::string summary = std::to_string(rows.size()) + " rows, n=" +
                                  std::to_string(scan_o.n) + ", seed=" +
                                  std::to_string(scan_o.seed);
      if (scan_format == "csv") {
        emit(scan_c, qsat::scan_csv(rows, config), summary);
      } else {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back(qsat::to_json(r));
        emit_json(scan_c, config, arr, summary);
      }
    } else if (*geo) {
      const auto seed = resolve_seed(geo_c);
      qsat::Hypergraph g;
      json config{{"command", "geometrize"}, {"r", geo_r}, {"trials", geo_trials},
                  {"seed", seed}};
      if (!geo_in.empty()) {
        g = qsat::hypergraph_from_json(qsat::read_json_file(geo_in));
        config["in"] = geo_in;
      } else if (geo_n > 0) {
        g = qsat::sample_hypergraph(geo_n, geo_k, geo_alpha,
                                    qsat::EdgeModel::poisson,
                                    qsat::derive_seed(seed, 0));
        config.update({{"n", geo_n}, {"k", geo_k}, {"alpha", geo_alpha}});
      } else {
        throw qsat::ValidationError("geometrize needs --in or --n");
      }
      const auto rep = qsat::geometrization_trial(g, geo_r, geo_trials,
                                                  qsat::derive_seed(seed, 1), {},
                                                  geo_c.threads);
      json result = qsat::to_json(rep);
      result["graph"] = qsat::to_json(g);
      emit_json(geo_c, config, result,
                "modal D=" + std::to_string(rep.modal_d) + " in " +
                    std::to_string(rep.modal_count) + "/" +
                    std::to_string(rep.trials));
    } else if (*cen) {
      const auto seed = resolve_seed(cen_c);
      const auto d = cen_d.value_or(qsat::default_crossbar(cen_L));
      const auto row = qsat::census(cen_n, cen_alpha, cen_L, d, cen_trials, seed,
                                    cen_c.threads);
      json config{{"command", "census"}, {"n", cen_n}, {"alpha", cen_alpha},
                  {"L", cen_L},          {"d", d},     {"trials", cen_trials},
                  {"seed", seed}};
      emit_json(cen_c, config, qsat::to_json(row),
                "observed " + qsat::format_number(row.mean) + " predicted " +
                    qsat::format_number(row.predicted) + " z=" +
                    qsat::format_number(row.z));
    } else if (*bnd) {
      const auto th = qsat::thresholds(bnd_k);
      const double wb = qsat::alpha_weak_bound(bnd_k, bnd_r);
      std::ostringstream text;
      text << "k  r  alpha_gc  alpha_hc  alpha_wb\n"
           << bnd_k << "  " << bnd_r << "  " << fixed(th.alpha_gc) << "    "
           << (th.alpha_hc ? fixed(*th.alpha_hc, 2) + "    " : "-       ")
           << "  " << fixed(wb) << "\n";
      std::optional<double> dim_bound;
      if (bnd_n && bnd_m) {
        dim_bound = qsat::weak_dim_bound(*bnd_n, *bnd_m, bnd_k, bnd_r);
        text << "log2 D <= " << fixed(*dim_bound) << " (n=" << *bnd_n
             << ", M=" << *bnd_m << ")\n";
      }
      std::cout << text.str();
      if (!bnd_c.out.empty()) {
        json config{{"command", "bounds"}, {"k", bnd_k}, {"r", bnd_r}};
        if (bnd_csv) {
          std::string csv = "# qsatlab bounds " + config.dump() +
                            "\nk,r,alpha_gc,alpha_hc,alpha_wb\n" +
                            std::to_string(bnd_k) + "," + std::to_string(bnd_r) +
                            "," + qsat::format_number(th.alpha_gc) + "," +
                            (th.alpha_hc ? qsat::format_number(*th.alpha_hc) : "") +
                            "," + qsat::format_number(wb) + "\n";
          qsat::write_text_file(bnd_c.out, csv);
        } else {
          json result{{"alpha_gc", th.alpha_gc},
                      {"alpha_hc", th.alpha_hc ? json(*th.alpha_hc) : json()},
                      {"alpha_wb", wb}};
          if (dim_bound) result["log2_dim_bound"] = qsat::detail::number_or_null(*dim_bound);
          qsat::write_json_file(bnd_c.out, json{{"config", config}, {"result", result}});
        }
      }
    } else if (*en) {
      json config{{"command", "energy"},
                  {"tol", en_opts.tol},
                  {"max_iter", en_opts.max_iter},
                  {"max_qubits", en_opts.max_qubits}};
      if (!en_in.empty()) {
        const auto inst = qsat::instance_from_json(qsat::read_json_file(en_in));
        const auto rep = qsat::ground_state_energy(inst, en_opts);
        config["in"] = en_in;
        emit_json(en_c, config, qsat::to_json(rep),
                  "E0=" + qsat::format_number(rep.e0) + " residual=" +
                      qsat::format_number(rep.residual));
      } else if (!en_fig8.empty()) {
        const auto seed = resolve_seed(en_c);
        const auto lengths = parse_sizes(en_fig8);
        const auto res = qsat::figure_eight_energy_scaling(lengths, en_trials, seed,
                                                           en_opts, en_c.threads);
        config.update({{"figure_eight", lengths}, {"trials", en_trials}, {"seed", seed}});
        emit_json(en_c, config, qsat::to_json(res),
                  "log-log slope " + qsat::format_number(res.loglog.slope) +
                      " (R^2 " + qsat::format_number(res.loglog.r2) + ")");
      } else if (!en_ns.empty()) {
        const auto seed = resolve_seed(en_c);
        const auto ns = parse_sizes(en_ns);
        const auto rows = qsat::promise_gap_stats(en_k, en_r, en_alpha, ns, en_trials,
                                                  seed, eps_coeff, eps_power,
                                                  en_opts, en_c.threads);
        config.update({{"k", en_k}, {"r", en_r}, {"alpha", en_alpha}, {"n_list", ns},
                       {"trials", en_trials}, {"eps_coeff", eps_coeff},
                       {"eps_power", eps_power}, {"seed", seed}});
        json arr = json::array();
        std::size_t violations = 0;
        for (const auto& r : rows) {
          arr.push_back(qsat::to_json(r));
          violations += r.violations;
        }
        emit_json(en_c, config, arr,
                  std::to_string(violations) + " promise violations");
      } else {
        throw qsat::ValidationError("energy needs --in, --figure-eight or --n-list");
      }
    }
  } catch (const qsat::DegeneracyError& e) {
    std::cerr << "degenerate: " << e.what() << "\n";
    return 2;
  } catch (const qsat::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
