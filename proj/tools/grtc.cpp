// Copyright 2026 The grtc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Exit codes: 0 success, 2 configuration or usage
// error, 3 data error, 4 solver failure.

#include "grtc/bench.hpp"
#include "grtc/config.hpp"
#include "grtc/datagen.hpp"
#include "grtc/evaluation.hpp"
#include "grtc/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace grtc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

void ensure_writable(const fs::path& p, bool force) {
  if (fs::exists(p) && !force) throw ConfigError(p.string() + " exists; pass --force to overwrite");
}

template <typename T>
void override_with(const std::optional<T>& flag, T& target) {
  if (flag) target = *flag;
}

RunConfig base_config(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

void revalidate(RunConfig& c) {
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// "2=path" binds a graph to mode 2; a bare path binds to mode 1.
std::vector<GraphLaplacian<double>> load_laplacians(const std::vector<std::string>& specs, const Shape& shape) {
  std::vector<GraphLaplacian<double>> laps(static_cast<std::size_t>(shape.order()));
  for (const auto& s : specs) {
    Index mode = 1;
    std::string path = s;
    if (auto eq = s.find('='); eq != std::string::npos) {
      try {
        mode = std::stol(s.substr(0, eq));
      } catch (const std::exception&) {
        throw ConfigError("bad --graph value '" + s + "' (expected MODE=PATH)");
      }
      path = s.substr(eq + 1);
    }
    if (mode < 1 || mode > shape.order()) throw ConfigError("--graph mode " + std::to_string(mode) + " out of range");
    if (!fs::exists(path)) throw DataError("graph file not found: " + path);
    auto g = load_graph(path);
    if (g.nodes() != shape.dim(mode - 1))
      throw DataError("graph " + path + " has " + std::to_string(g.nodes()) + " nodes, mode " + std::to_string(mode) +
                      " has " + std::to_string(shape.dim(mode - 1)));
    laps[static_cast<std::size_t>(mode - 1)] = laplacian_from_adjacency(g);
  }
  return laps;
}

bool has_graph(const std::vector<GraphLaplacian<double>>& laps) {
  for (const auto& l : laps)
    if (l.nodes() > 0 && l.matrix().nonZeros() > 0) return true;
  return false;
}

Regularization<double> regularization_for(const RunConfig& c, Index order) {
  try {
    return make_regularization(c.model.variant, order, c.model.lambda, c.model.lambda_L);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------- gen
struct GenArgs {
  std::string config, out;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> rate, snr;
};

int cmd_gen(const GenArgs& a) {
  auto c = base_config(a.config);
  override_with(a.seed, c.seed);
  override_with(a.rate, c.sampling.rate);
  override_with(a.snr, c.data.snr_db);
  revalidate(c);
  const fs::path dir(a.out);
  const std::vector<std::string> names{"truth.tns", "train.tns", "test.tns", "test_truth.tns",
                                       "graph_mode1.edges", "factors_truth.txt", "gen.json"};
  for (const auto& n : names) ensure_writable(dir / n, a.force);
  fs::create_directories(dir);

  const Shape shape(c.data.shape);
  SyntheticSpec<double> spec{shape, c.data.rank, make_graph(c.data.graph, shape.dim(0), derive_seed(c.seed, 0, 0, 1)),
                             c.data.snr_db, derive_seed(c.seed, 0, 0, 2)};
  auto data = synth_graph_tensor(spec);
  SamplingSpec samp = c.sampling;
  samp.seed = derive_seed(c.seed, 0, 0, 3);
  auto omega = sample_omega(shape, samp);

  std::vector<Index> all(static_cast<std::size_t>(shape.numel()));
  for (Index e = 0; e < shape.numel(); ++e) all[static_cast<std::size_t>(e)] = e;
  save_tns(dir / "truth.tns", observe(data.signal, std::span<const Index>(all)));
  save_tns(dir / "train.tns", observe(data.observed, std::span<const Index>(omega.train)));
  save_tns(dir / "test.tns", observe(data.observed, std::span<const Index>(omega.test)));
  save_tns(dir / "test_truth.tns", observe(data.signal, std::span<const Index>(omega.test)));
  save_graph(dir / "graph_mode1.edges", spec.graph);
  save_factors(dir / "factors_truth.txt", data.factors);
  nlohmann::json meta = {{"seed", c.seed},
                         {"shape", shape.dims()},
                         {"rank", c.data.rank},
                         {"snr_db", c.data.snr_db},
                         {"noise_sigma", data.noise_sigma},
                         {"train_entries", omega.train.size()},
                         {"test_entries", omega.test.size()},
                         {"graph_edges", spec.graph.edge_count()}};
  if (data.noise_sigma > 0) meta["empirical_snr_db"] = empirical_snr_db(data);
  write_file_atomic(dir / "gen.json", meta.dump(2) + "\n");
  std::cout << "wrote " << dir.string() << ": " << omega.train.size() << " train, " << omega.test.size()
            << " test entries\n";
  return 0;
}

// ---------------------------------------------------------------- build-graph
struct GraphArgs {
  std::string config, input, out, method;
  bool force = false;
  std::optional<Index> mode, rank, nodes;
  std::optional<double> density, eps, sigma;
};

int cmd_build_graph(const GraphArgs& a) {
  auto c = base_config(a.config);
  auto& g = c.graph_build;
  if (!a.method.empty()) g.method = parse_graph_method(a.method);
  override_with(a.mode, g.mode);
  override_with(a.density, g.density);
  if (a.eps) g.eps = a.eps;
  if (a.sigma) g.sigma = a.sigma;
  if (a.rank) g.rank = a.rank;
  revalidate(c);
  ensure_writable(a.out, a.force);

  std::optional<Matrix<double>> features;
  if (!a.input.empty()) {
    if (fs::path(a.input).extension() == ".tns") {
      auto obs = load_tns(a.input);
      if (g.mode > obs.order()) throw ConfigError("--mode exceeds the tensor order");
      const Index mode = g.mode - 1;
      Matrix<double> unf = Matrix<double>::Zero(obs.shape().dim(mode), obs.shape().unfolded_cols(mode));
      for (Index e = 0; e < obs.size(); ++e) {
        auto at = mat_index(obs.shape(), mode, obs.index(e));
        unf(at.row, at.col) = obs.value(e);
      }
      features = std::move(unf);
    } else {
      if (g.mode != 1) throw ConfigError("--mode applies to .tns input only");
      features = load_matrix(a.input);
    }
    if (g.rank) {
      if (*g.rank > std::min(features->rows(), features->cols())) throw ConfigError("--rank exceeds the input size");
      auto tf = truncated_factorization(*features, *g.rank);
      features = Matrix<double>(tf.U * tf.S.asDiagonal());
    }
  }

  GraphAdjacency<double> graph;
  nlohmann::json info = {{"method", to_string(g.method)}};
  switch (g.method) {
    case GraphMethod::Chain: {
      const Index n = a.nodes ? *a.nodes : (features ? features->rows() : 0);
      if (n < 2) throw ConfigError("chain graph needs --nodes >= 2 or an input");
      graph = chain_graph<double>(n);
      break;
    }
    case GraphMethod::Eps: {
      if (!features) throw ConfigError("eps graph needs --input");
      EpsilonGraphOptions opt;
      opt.eps = g.eps;
      opt.sigma = g.sigma;
      opt.density = g.density;
      opt.distance = g.distance;
      auto eg = build_epsilon_graph(*features, opt);
      graph = std::move(eg.graph);
      info["eps"] = eg.eps;
      info["sigma"] = eg.sigma;
      break;
    }
    case GraphMethod::InvDist:
      if (!features) throw ConfigError("inv-dist graph needs --input");
      graph = inverse_distance_graph(*features, g.inv_dist_delta);
      break;
  }
  if (graph.edge_count() == 0) std::cerr << "warning: graph has no edges\n";
  save_graph(a.out, graph);
  info["nodes"] = graph.nodes();
  info["edges"] = graph.edge_count();
  info["density"] = static_cast<double>(2 * graph.edge_count()) / static_cast<double>(graph.nodes() * graph.nodes());
  std::cout << info.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- complete
struct SolveArgs {
  std::string config, train, test, out, solver, variant;
  std::vector<std::string> graphs;
  bool force = false;
  std::optional<double> lambda, lambda_L, delta_tol, time_budget;
  std::optional<Index> rank;
  std::optional<int> max_iters;
  std::optional<std::uint64_t> init_seed;
};

void apply_solve_overrides(const SolveArgs& a, RunConfig& c) {
  if (!a.solver.empty()) c.solver.kind = parse_solver(a.solver);
  if (!a.variant.empty()) c.model.variant = parse_variant(a.variant);
  override_with(a.lambda, c.model.lambda);
  override_with(a.lambda_L, c.model.lambda_L);
  override_with(a.rank, c.model.rank);
  override_with(a.delta_tol, c.solver.stop.delta_tol);
  override_with(a.time_budget, c.solver.stop.time_budget);
  override_with(a.max_iters, c.solver.stop.max_outer_iters);
  override_with(a.init_seed, c.init_seed);
  revalidate(c);
}

int cmd_complete(const SolveArgs& a) {
  auto c = base_config(a.config);
  apply_solve_overrides(a, c);
  const fs::path dir(a.out);
  for (const char* n : {"factors.txt", "report.json", "trace.csv"}) ensure_writable(dir / n, a.force);

  auto train = load_tns(a.train);
  auto laps = load_laplacians(a.graphs, train.shape());
  if (c.model.variant == ModelVariant::GReg && !has_graph(laps))
    throw ConfigError("variant greg needs at least one --graph with edges");
  std::optional<SparseObservations<double>> test;
  if (!a.test.empty()) test = load_tns(a.test, train.shape());

  Problem<double> p(train, laps, regularization_for(c, train.order()));
  auto init = random_init(train.shape(), c.model.rank, c.init_seed);
  SolveOptions<double> opts{test ? &*test : nullptr};
  auto res = solve(p, init, c.solver, opts);

  fs::create_directories(dir);
  save_factors(dir / "factors.txt", res.factors);
  auto j = res.report.to_json();
  j["model"] = {{"variant", to_string(c.model.variant)},
                {"lambda", c.model.lambda},
                {"lambda_L", c.model.variant == ModelVariant::GReg ? c.model.lambda_L : 0.0},
                {"rank", c.model.rank},
                {"init_seed", c.init_seed}};
  write_file_atomic(dir / "report.json", j.dump(2) + "\n");
  write_file_atomic(dir / "trace.csv", res.report.trace_csv());
  std::cout << j["summary"].dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- evaluate
int cmd_evaluate(const std::string& factors_path, const std::string& truth_path) {
  auto f = load_factors(factors_path);
  auto truth = load_tns(truth_path);
  if (!f.matches(truth.shape()))
    throw DataError("factor shape " + f.shape().to_string() + " does not match " + truth.shape().to_string());
  auto n = residual_norms(f, truth);
  if (n.count == 0) throw DataError("truth file has no entries");
  nlohmann::json out = {{"entries", n.count}, {"rmse", rmse(f, truth)}};
  out["re"] = n.truth > 0 ? nlohmann::json(n.residual / n.truth) : nlohmann::json(nullptr);
  std::cout << out.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- cv
struct CVArgs : SolveArgs {
  std::string candidates;
};

std::vector<Candidate> parse_candidates(const std::string& s) {
  std::vector<Candidate> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    auto item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back({std::stod(item), 0.0});
      } else {
        out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
      }
    } catch (const std::exception&) {
      throw ConfigError("bad --candidates entry '" + item + "' (expected LAMBDA[:LAMBDA_L])");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int cmd_cv(const CVArgs& a) {
  auto c = base_config(a.config);
  apply_solve_overrides(a, c);
  ensure_writable(a.out, a.force);
  auto train = load_tns(a.train);
  auto laps = load_laplacians(a.graphs, train.shape());
  if (c.model.variant == ModelVariant::GReg && !has_graph(laps))
    throw ConfigError("variant greg needs at least one --graph with edges");
  auto cands = a.candidates.empty() ? draw_candidates(c.cv, c.model.variant) : parse_candidates(a.candidates);
  CVResult res;
  try {
    res = cross_validate_candidates(train, laps, c.model.variant, cands, c.cv, c.solver, c.model.rank, c.init_seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto j = res.to_json();
  j["variant"] = to_string(c.model.variant);
  j["solver"] = to_string(c.solver.kind);
  write_file_atomic(a.out, j.dump(2) + "\n");
  std::cout << j["best"].dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- bench
int cmd_bench(const std::string& config, const std::string& out, bool force) {
  auto c = base_config(config);
  ensure_writable(out, force);
  BenchSpec spec;
  spec.shape = Shape(c.bench.shape);
  spec.rank = c.bench.rank;
  spec.entries = c.bench.entries;
  spec.graph_edges = c.bench.graph_edges;
  spec.repeats = c.bench.repeats;
  spec.mode = c.bench.mode - 1;
  spec.seed = c.seed;
  auto rows = hvp_scaling_bench(spec);
  const auto csv = bench_csv(rows);
  write_file_atomic(out, csv);
  std::cout << csv;
  std::printf("entries ratio %.3f, graph ratio %.3f\n", rows[1].median_s / rows[0].median_s,
              rows[2].median_s / rows[0].median_s);
  return 0;
}

// ---------------------------------------------------------------- experiment
int cmd_experiment(const std::string& config, const std::string& out, bool force) {
  auto c = base_config(config);
  const fs::path dir(out);
  ensure_writable(dir / "summary.json", force);
  auto report = run_experiment(c.experiment_spec());
  report.write(dir, force);
  for (auto v : report.spec.variants)
    for (auto s : report.spec.solvers)
      std::printf("%-8s %-12s aggregate test RE %.6g  RMSE %.6g\n", to_string(v).c_str(), to_string(s).c_str(),
                  report.aggregate_test_re(v, s), report.aggregate_test_rmse(v, s));
  return 0;
}

void add_solve_options(CLI::App* cmd, SolveArgs& a) {
  cmd->add_option("--config", a.config, "JSON run configuration");
  cmd->add_option("--train", a.train, "training entries (.tns)")->required();
  cmd->add_option("--graph", a.graphs, "graph edge list, PATH or MODE=PATH (modes are 1-based)");
  cmd->add_option("--solver", a.solver, "altmin-cg, admm or altmin-exact");
  cmd->add_option("--variant", a.variant, "greg, nuclreg or unreg");
  cmd->add_option("--lambda", a.lambda, "regularization weight for every mode");
  cmd->add_option("--lambda-L", a.lambda_L, "graph weight inside the shifted Laplacian");
  cmd->add_option("--rank", a.rank, "CP rank of the model");
  cmd->add_option("--init-seed", a.init_seed, "seed of the random initial factors");
  cmd->add_option("--max-iters", a.max_iters, "outer iteration cap");
  cmd->add_option("--delta-tol", a.delta_tol, "stop when the training error changes by less");
  cmd->add_option("--time-budget", a.time_budget, "wall-clock budget in seconds");
  cmd->add_flag("--force", a.force, "overwrite existing outputs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-regularized low-rank tensor completion"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "generate a synthetic graph-structured tensor and its samples");
  c_gen->add_option("--config", gen.config, "JSON run configuration");
  c_gen->add_option("--out", gen.out, "output directory")->required();
  c_gen->add_option("--seed", gen.seed, "base seed");
  c_gen->add_option("--rate", gen.rate, "sampling rate");
  c_gen->add_option("--snr", gen.snr, "signal-to-noise ratio in dB");
  c_gen->add_flag("--force", gen.force, "overwrite existing outputs");

  GraphArgs graph;
  auto* c_graph = app.add_subcommand("build-graph", "build a graph over the rows of a matrix or tensor unfolding");
  c_graph->add_option("--config", graph.config, "JSON run configuration");
  c_graph->add_option("--input", graph.input, "dense matrix file or .tns tensor");
  c_graph->add_option("--mode", graph.mode, "tensor mode to unfold (1-based)");
  c_graph->add_option("--method", graph.method, "eps, chain or inv-dist");
  c_graph->add_option("--density", graph.density, "target nnz(W)/n^2 for the eps graph");
  c_graph->add_option("--eps", graph.eps, "kernel width");
  c_graph->add_option("--sigma", graph.sigma, "weight threshold in (0, 1]");
  c_graph->add_option("--rank", graph.rank, "truncate the rows to this many leading singular directions");
  c_graph->add_option("--nodes", graph.nodes, "node count for a chain graph without input");
  c_graph->add_option("--out", graph.out, "output edge list")->required();
  c_graph->add_flag("--force", graph.force, "overwrite existing output");

  SolveArgs comp;
  auto* c_comp = app.add_subcommand("complete", "fit CP factors to the training entries");
  add_solve_options(c_comp, comp);
  c_comp->add_option("--test", comp.test, "held-out entries (.tns) tracked per iteration");
  c_comp->add_option("--out", comp.out, "output directory")->required();

  std::string ev_factors, ev_truth;
  auto* c_eval = app.add_subcommand("evaluate", "relative error and RMSE of factors on known entries");
  c_eval->add_option("--factors", ev_factors, "factor file")->required();
  c_eval->add_option("--truth", ev_truth, "reference entries (.tns)")->required();

  CVArgs cv;
  auto* c_cv = app.add_subcommand("cv", "K-fold cross-validation of (lambda, lambda_L)");
  add_solve_options(c_cv, cv);
  c_cv->add_option("--candidates", cv.candidates, "explicit LAMBDA[:LAMBDA_L] list, comma separated");
  c_cv->add_option("--out", cv.out, "best-parameter JSON file")->required();

  std::string bench_config, bench_out;
  bool bench_force = false;
  auto* c_bench = app.add_subcommand("bench", "time the block operator as |Omega| and nnz(L) double");
  c_bench->add_option("--config", bench_config, "JSON run configuration");
  c_bench->add_option("--out", bench_out, "timing CSV")->required();
  c_bench->add_flag("--force", bench_force, "overwrite existing output");

  std::string exp_config, exp_out;
  bool exp_force = false;
  auto* c_exp = app.add_subcommand("experiment", "repeated-trial comparison of model variants and solvers");
  c_exp->add_option("--config", exp_config, "JSON run configuration");
  c_exp->add_option("--out", exp_out, "report directory")->required();
  c_exp->add_flag("--force", exp_force, "overwrite an existing report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (c_gen->parsed()) return cmd_gen(gen);
    if (c_graph->parsed()) return cmd_build_graph(graph);
    if (c_comp->parsed()) return cmd_complete(comp);
    if (c_eval->parsed()) return cmd_evaluate(ev_factors, ev_truth);
    if (c_cv->parsed()) return cmd_cv(cv);
    if (c_bench->parsed()) return cmd_bench(bench_config, bench_out, bench_force);
    if (c_exp->parsed()) return cmd_experiment(exp_config, exp_out, exp_force);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
