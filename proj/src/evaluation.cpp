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

#include "grtc/evaluation.hpp"

#include "grtc/io.hpp"
#include "grtc/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <tuple>

namespace grtc {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double finite_or_inf(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

nlohmann::json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::GReg:
      return "greg";
    case ModelVariant::NuclReg:
      return "nuclreg";
    case ModelVariant::Unreg:
      return "unreg";
  }
  return "unknown";
}

ModelVariant parse_variant(const std::string& name) {
  const auto s = lower(name);
  if (s == "greg") return ModelVariant::GReg;
  if (s == "nuclreg") return ModelVariant::NuclReg;
  if (s == "unreg") return ModelVariant::Unreg;
  throw ConfigError("unknown variant '" + name + "' (expected greg, nuclreg or unreg)");
}

Regularization<double> make_regularization(ModelVariant v, Index order, double lambda, double lambda_L) {
  switch (v) {
    case ModelVariant::GReg:
      if (!(lambda > 0 && lambda_L > 0 && std::isfinite(lambda) && std::isfinite(lambda_L)))
        detail::fail_arg("greg needs lambda > 0 and lambda_L > 0");
      return Regularization<double>::uniform(order, lambda, lambda_L);
    case ModelVariant::NuclReg:
      if (!(lambda > 0 && std::isfinite(lambda))) detail::fail_arg("nuclreg needs lambda > 0");
      return Regularization<double>::uniform(order, lambda, 0.0);
    case ModelVariant::Unreg:
      return Regularization<double>::uniform(order, 0.0, 0.0);
  }
  detail::fail_arg("make_regularization: unknown variant");
}

std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::AltMinCG:
      return "altmin-cg";
    case SolverKind::ADMM:
      return "admm";
    case SolverKind::AltMinExact:
      return "altmin-exact";
  }
  return "unknown";
}

SolverKind parse_solver(const std::string& name) {
  const auto s = lower(name);
  if (s == "altmin-cg") return SolverKind::AltMinCG;
  if (s == "admm") return SolverKind::ADMM;
  if (s == "altmin-exact") return SolverKind::AltMinExact;
  throw ConfigError("unknown solver '" + name + "' (expected altmin-cg, admm or altmin-exact)");
}

SolveResult<double> solve(const Problem<double>& problem, const CPFactors<double>& init, const SolverSettings& settings,
                          const SolveOptions<double>& opts) {
  switch (settings.kind) {
    case SolverKind::AltMinCG:
      return altmin_cg(problem, init, settings.stop, settings.cg, opts);
    case SolverKind::ADMM:
      return admm(problem, init, settings.stop, settings.admm, opts);
    case SolverKind::AltMinExact:
      return altmin_exact(problem, init, settings.stop, opts);
  }
  throw ConfigError("unknown solver");
}

CPFactors<double> random_init(const Shape& shape, Index rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return CPFactors<double>::random_normal(shape, rank, rng);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  // splitmix64 finalizer applied to each coordinate in turn.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  h = mix(h ^ a);
  h = mix(h ^ b);
  return mix(h ^ c);
}

void CVConfig::validate() const {
  if (folds < 2) throw ConfigError("cv.folds must be at least 2");
  if (n_samples < 1) throw ConfigError("cv.n_samples must be at least 1");
  if (!(lo > 0 && hi >= lo && std::isfinite(hi))) throw ConfigError("cv bounds must satisfy 0 < lo <= hi");
  const double lo_l = lambda_L_lo();
  const double hi_l = lambda_L_hi();
  if (!(lo_l > 0 && hi_l >= lo_l && std::isfinite(hi_l)))
    throw ConfigError("cv lambda_L bounds must satisfy 0 < lo_L <= hi_L");
}

std::vector<Candidate> draw_candidates(const CVConfig& cfg, ModelVariant v) {
  cfg.validate();
  if (v == ModelVariant::Unreg) return {{0.0, 0.0}};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(std::log10(cfg.lo), std::log10(cfg.hi));
  std::uniform_real_distribution<double> u_L(std::log10(cfg.lambda_L_lo()), std::log10(cfg.lambda_L_hi()));
  std::vector<Candidate> out;
  for (int s = 0; s < cfg.n_samples; ++s) {
    const double lam = std::pow(10.0, u(rng));
    const double lam_L = std::pow(10.0, u_L(rng));
    out.push_back({lam, v == ModelVariant::GReg ? lam_L : 0.0});
  }
  return out;
}

std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < order.size(); ++p) fold[static_cast<std::size_t>(order[p])] = static_cast<int>(p % folds);
  return fold;
}

nlohmann::json CVResult::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table)
    rows.push_back({{"lambda", r.candidate.lambda},
                    {"lambda_L", r.candidate.lambda_L},
                    {"fold_rmse", r.fold_rmse},
                    {"mean_rmse", number_or_null(r.mean_rmse)}});
  return {{"best", {{"lambda", best.lambda}, {"lambda_L", best.lambda_L}}}, {"table", std::move(rows)}};
}

CVResult cross_validate_candidates(const SparseObservations<double>& train,
                                   const std::vector<GraphLaplacian<double>>& laplacians, ModelVariant variant,
                                   const std::vector<Candidate>& candidates, const CVConfig& cfg,
                                   const SolverSettings& settings, Index rank, std::uint64_t init_seed) {
  cfg.validate();
  if (candidates.empty()) throw ConfigError("cross_validate: no candidates");
  if (train.size() < cfg.folds)
    throw DataError("cross_validate: " + std::to_string(train.size()) + " training entries for " +
                    std::to_string(cfg.folds) + " folds");
  for (const auto& c : candidates) make_regularization(variant, train.order(), c.lambda, c.lambda_L);

  CVResult out;
  for (const auto& c : candidates) out.table.push_back({c, {}, std::numeric_limits<double>::quiet_NaN()});
  if (candidates.size() == 1) {
    out.best = candidates.front();
    return out;
  }

  const auto fold = fold_assignment(train.size(), cfg.folds, cfg.seed);
  std::vector<SparseObservations<double>> fit(static_cast<std::size_t>(cfg.folds));
  std::vector<SparseObservations<double>> held(static_cast<std::size_t>(cfg.folds));
  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<Index> in;
    std::vector<Index> out_ids;
    for (Index e = 0; e < train.size(); ++e) (fold[static_cast<std::size_t>(e)] == f ? out_ids : in).push_back(e);
    fit[static_cast<std::size_t>(f)] = train.subset(in);
    held[static_cast<std::size_t>(f)] = train.subset(out_ids);
  }
  const auto init = random_init(train.shape(), rank, init_seed);

  const std::size_t n_folds = static_cast<std::size_t>(cfg.folds);
  std::vector<double> score(candidates.size() * n_folds);
  parallel_for(score.size(), [&](std::size_t job) {
    const auto& c = candidates[job / n_folds];
    const auto f = job % n_folds;
    Problem<double> p(fit[f], laplacians, make_regularization(variant, train.order(), c.lambda, c.lambda_L));
    try {
      auto res = solve(p, init, settings);
      score[job] = finite_or_inf(rmse(res.factors, held[f]));
    } catch (const SolverError&) {
      score[job] = std::numeric_limits<double>::infinity();
    }
  });

  std::size_t best = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    auto& row = out.table[c];
    row.fold_rmse.assign(score.begin() + static_cast<std::ptrdiff_t>(c * n_folds),
                         score.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_folds));
    double sum = 0;
    for (double s : row.fold_rmse) sum += s;
    row.mean_rmse = sum / static_cast<double>(n_folds);
    const auto& b = out.table[best];
    if (std::make_tuple(row.mean_rmse, -row.candidate.lambda_L, -row.candidate.lambda) <
        std::make_tuple(b.mean_rmse, -b.candidate.lambda_L, -b.candidate.lambda))
      best = c;
  }
  out.best = out.table[best].candidate;
  return out;
}

CVResult cross_validate(const SparseObservations<double>& train, const std::vector<GraphLaplacian<double>>& laplacians,
                        ModelVariant variant, const CVConfig& cfg, const SolverSettings& settings, Index rank,
                        std::uint64_t init_seed) {
  return cross_validate_candidates(train, laplacians, variant, draw_candidates(cfg, variant), cfg, settings, rank,
                                   init_seed);
}

void ExperimentSpec::validate() const {
  if (shape.order() < 2) throw ConfigError("experiment: shape needs at least two modes");
  if (rank < 1 || model_rank < 0) throw ConfigError("experiment: rank must be positive");
  if (!(sampling_rate > 0 && sampling_rate <= 1)) throw ConfigError("experiment: sampling_rate must lie in (0, 1]");
  if (!(train_fraction > 0 && test_fraction > 0 && train_fraction + test_fraction <= 1 + 1e-12))
    throw ConfigError("experiment: train/test fractions must be positive and sum to at most 1");
  if (n_test < 1 || n_init < 1) throw ConfigError("experiment: n_test and n_init must be at least 1");
  if (variants.empty() || solvers.empty()) throw ConfigError("experiment: need at least one variant and one solver");
  settings.stop.validate();
  settings.cg.validate();
  settings.admm.validate();
  if (use_cv) {
    cv.validate();
  } else {
    for (auto v : variants) {
      if (v == ModelVariant::Unreg) continue;
      auto it = fixed.find(v);
      if (it == fixed.end()) throw ConfigError("experiment: no fixed weights for " + to_string(v));
      try {
        make_regularization(v, shape.order(), it->second.lambda, it->second.lambda_L);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("experiment: ") + e.what());
      }
    }
  }
}

double ExperimentReport::aggregate_test_re(ModelVariant v, SolverKind s, std::optional<int> trial) const {
  std::vector<double> vals;
  for (const auto& r : runs)
    if (r.variant == v && r.solver == s && (!trial || r.trial == *trial)) vals.push_back(r.test_re);
  return aggregate_err(std::span<const double>(vals));
}

double ExperimentReport::aggregate_test_rmse(ModelVariant v, SolverKind s, std::optional<int> trial) const {
  std::vector<double> vals;
  for (const auto& r : runs)
    if (r.variant == v && r.solver == s && (!trial || r.trial == *trial)) vals.push_back(r.test_rmse);
  return aggregate_err(std::span<const double>(vals));
}

nlohmann::json to_json(const ExperimentSpec& spec) {
  nlohmann::json variants = nlohmann::json::array();
  for (auto v : spec.variants) variants.push_back(to_string(v));
  nlohmann::json solvers = nlohmann::json::array();
  for (auto s : spec.solvers) solvers.push_back(to_string(s));
  nlohmann::json fixed = nlohmann::json::object();
  for (const auto& [v, c] : spec.fixed) fixed[to_string(v)] = {{"lambda", c.lambda}, {"lambda_L", c.lambda_L}};
  return {{"shape", spec.shape.dims()},
          {"rank", spec.rank},
          {"model_rank", spec.fit_rank()},
          {"graph",
           {{"kind", spec.graph.kind == GraphRecipe::Kind::Chain ? "chain" : "community"},
            {"communities", spec.graph.communities},
            {"p_in", spec.graph.p_in},
            {"p_out", spec.graph.p_out}}},
          {"snr_db", spec.snr_db},
          {"sampling_rate", spec.sampling_rate},
          {"train_fraction", spec.train_fraction},
          {"test_fraction", spec.test_fraction},
          {"n_test", spec.n_test},
          {"n_init", spec.n_init},
          {"seed", spec.seed},
          {"variants", variants},
          {"solvers", solvers},
          {"stop",
           {{"delta_tol", spec.settings.stop.delta_tol},
            {"time_budget", number_or_null(spec.settings.stop.time_budget)},
            {"max_outer_iters", spec.settings.stop.max_outer_iters}}},
          {"cg", {{"rel_tol", spec.settings.cg.rel_tol}, {"max_iters", spec.settings.cg.max_iters}}},
          {"admm",
           {{"eta0", spec.settings.admm.eta0},
            {"gamma", spec.settings.admm.gamma},
            {"eta_max", number_or_null(spec.settings.admm.eta_max)},
            {"primal_tol", spec.settings.admm.primal_tol}}},
          {"use_cv", spec.use_cv},
          {"cv",
           {{"folds", spec.cv.folds},
            {"n_samples", spec.cv.n_samples},
            {"lo", spec.cv.lo},
            {"hi", spec.cv.hi},
            {"lo_L", spec.cv.lambda_L_lo()},
            {"hi_L", spec.cv.lambda_L_hi()},
            {"seed", spec.cv.seed}}},
          {"fixed", fixed}};
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json table = nlohmann::json::array();
  for (auto v : spec.variants)
    for (auto s : spec.solvers) {
      nlohmann::json per_trial = nlohmann::json::array();
      for (int t = 0; t < spec.n_test; ++t) per_trial.push_back(aggregate_test_re(v, s, t));
      table.push_back({{"variant", to_string(v)},
                       {"solver", to_string(s)},
                       {"aggregate_test_re", aggregate_test_re(v, s)},
                       {"aggregate_test_rmse", aggregate_test_rmse(v, s)},
                       {"per_trial_test_re", per_trial}});
    }
  nlohmann::json run_rows = nlohmann::json::array();
  for (const auto& r : runs)
    run_rows.push_back({{"trial", r.trial},
                        {"init", r.init},
                        {"variant", to_string(r.variant)},
                        {"solver", to_string(r.solver)},
                        {"lambda", r.weights.lambda},
                        {"lambda_L", r.weights.lambda_L},
                        {"test_re", number_or_null(r.test_re)},
                        {"test_rmse", number_or_null(r.test_rmse)},
                        {"train_re", number_or_null(r.train_re)},
                        {"train_rmse", number_or_null(r.train_rmse)},
                        {"objective", number_or_null(r.objective)},
                        {"termination", grtc::to_string(r.report.termination)},
                        {"outer_iters", r.report.records.size()},
                        {"inner_iters", r.report.total_inner_iters()},
                        {"time_s", r.report.total_time()}});
  nlohmann::json cv_rows = nlohmann::json::array();
  for (const auto& c : cv) {
    auto j = c.result.to_json();
    j["trial"] = c.trial;
    j["variant"] = to_string(c.variant);
    j["solver"] = to_string(c.solver);
    cv_rows.push_back(std::move(j));
  }
  return {{"spec", grtc::to_json(spec)}, {"table", table}, {"runs", run_rows}, {"cv", cv_rows}};
}

void ExperimentReport::write(const std::filesystem::path& dir, bool force) const {
  namespace fs = std::filesystem;
  const auto summary = dir / "summary.json";
  if (fs::exists(summary) && !force) throw ConfigError(summary.string() + " exists; pass --force to overwrite");
  fs::create_directories(dir / "traces");
  for (const auto& r : runs) {
    const auto name = to_string(r.variant) + "_" + to_string(r.solver) + "_t" + std::to_string(r.trial) + "_i" +
                      std::to_string(r.init) + ".csv";
    write_file_atomic(dir / "traces" / name, r.report.trace_csv());
  }
  write_file_atomic(summary, to_json().dump(2) + "\n");
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  struct Instance {
    SparseObservations<double> train;
    SparseObservations<double> test;  // noise-free values
    std::vector<GraphLaplacian<double>> laplacians;
  };
  std::vector<Instance> inst;
  for (int t = 0; t < spec.n_test; ++t) {
    const auto ut = static_cast<std::uint64_t>(t);
    SyntheticSpec<double> syn{spec.shape, spec.rank,
                              make_graph(spec.graph, spec.shape.dim(0), derive_seed(spec.seed, ut, 0, 1)),
                              spec.snr_db, derive_seed(spec.seed, ut, 0, 2)};
    auto data = synth_graph_tensor(syn);
    auto omega = sample_omega(spec.shape, {spec.sampling_rate, derive_seed(spec.seed, ut, 0, 3), spec.train_fraction,
                                           spec.test_fraction});
    if (omega.test.empty()) throw DataError("experiment: empty test set");
    inst.push_back({observe(data.observed, std::span<const Index>(omega.train)),
                    observe(data.signal, std::span<const Index>(omega.test)),
                    {laplacian_from_adjacency(syn.graph)}});
  }

  ExperimentReport rep;
  rep.spec = spec;
  // weights[(t, v, s)]
  std::map<std::tuple<int, ModelVariant, SolverKind>, Candidate> weights;
  for (int t = 0; t < spec.n_test; ++t)
    for (auto v : spec.variants)
      for (auto s : spec.solvers) {
        Candidate w{0, 0};
        if (spec.use_cv) {
          SolverSettings st = spec.settings;
          st.kind = s;
          CVConfig cv = spec.cv;
          cv.seed = derive_seed(spec.cv.seed, static_cast<std::uint64_t>(t), 0, 6);
          auto res = cross_validate(inst[static_cast<std::size_t>(t)].train, inst[static_cast<std::size_t>(t)].laplacians,
                                    v, cv, st, spec.fit_rank(), derive_seed(spec.seed, static_cast<std::uint64_t>(t), 0, 4));
          w = res.best;
          rep.cv.push_back({t, v, s, std::move(res)});
        } else if (v != ModelVariant::Unreg) {
          w = spec.fixed.at(v);
        }
        weights[{t, v, s}] = w;
      }

  for (int t = 0; t < spec.n_test; ++t)
    for (int j = 0; j < spec.n_init; ++j)
      for (auto v : spec.variants)
        for (auto s : spec.solvers) rep.runs.push_back({t, j, v, s, weights[{t, v, s}], 0, 0, 0, 0, 0, {}});

  parallel_for(rep.runs.size(), [&](std::size_t i) {
    auto& r = rep.runs[i];
    const auto& in = inst[static_cast<std::size_t>(r.trial)];
    SolverSettings st = spec.settings;
    st.kind = r.solver;
    Problem<double> p(in.train, in.laplacians,
                      make_regularization(r.variant, spec.shape.order(), r.weights.lambda, r.weights.lambda_L));
    const auto init = random_init(spec.shape, spec.fit_rank(),
                                  derive_seed(spec.seed, static_cast<std::uint64_t>(r.trial),
                                              static_cast<std::uint64_t>(r.init) + 1, 5));
    SolveOptions<double> opts{&in.test};
    auto res = solve(p, init, st, opts);
    r.test_re = relative_error(res.factors, in.test);
    r.test_rmse = rmse(res.factors, in.test);
    r.train_re = res.report.records.empty() ? relative_error(res.factors, in.train) : res.report.records.back().train_re;
    r.train_rmse = rmse(res.factors, in.train);
    r.objective = objective_value(p, res.factors);
    r.report = std::move(res.report);
  });
  return rep;
}

}  // namespace grtc
