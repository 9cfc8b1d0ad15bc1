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

#include "grtc/report.hpp"

#include <cmath>
#include <cstdio>

namespace grtc {
namespace {

// JSON has no NaN; missing metrics serialize as null.
nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::DeltaTol:
      return "delta_tol";
    case Termination::TimeBudget:
      return "time_budget";
    case Termination::MaxIters:
      return "max_iters";
  }
  return "unknown";
}

long SolverReport::total_inner_iters() const {
  long n = 0;
  for (const auto& r : records) n += r.inner_iters;
  return n;
}

nlohmann::json SolverReport::to_json() const {
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& r : records) {
    iters.push_back({{"iter", r.iter},
                     {"time_s", r.time_s},
                     {"objective", number_or_null(r.objective)},
                     {"train_re", number_or_null(r.train_re)},
                     {"train_rmse", number_or_null(r.train_rmse)},
                     {"test_re", number_or_null(r.test_re)},
                     {"test_rmse", number_or_null(r.test_rmse)},
                     {"inner_iters", r.inner_iters},
                     {"primal_residual", number_or_null(r.primal_residual)}});
  }
  nlohmann::json summary = {{"solver", solver},
                            {"termination", to_string(termination)},
                            {"outer_iters", records.size()},
                            {"total_inner_iters", total_inner_iters()},
                            {"total_time_s", total_time()}};
  if (!records.empty()) {
    summary["final_objective"] = number_or_null(records.back().objective);
    summary["final_train_rmse"] = number_or_null(records.back().train_rmse);
    summary["final_test_rmse"] = number_or_null(records.back().test_rmse);
    summary["final_train_re"] = number_or_null(records.back().train_re);
    summary["final_test_re"] = number_or_null(records.back().test_re);
  }
  return {{"iterations", std::move(iters)}, {"summary", std::move(summary)}};
}

std::string SolverReport::trace_csv() const {
  std::string out = "iter,time_s,objective,train_rmse,test_rmse,train_re,test_re\n";
  for (const auto& r : records) {
    out += std::to_string(r.iter) + "," + fmt(r.time_s) + "," + fmt(r.objective) + "," + fmt(r.train_rmse) + "," +
           fmt(r.test_rmse) + "," + fmt(r.train_re) + "," + fmt(r.test_re) + "\n";
  }
  return out;
}

}  // namespace grtc
