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

#pragma once

#include <json.hpp>

#include <limits>
#include <string>
#include <vector>

namespace grtc {

enum class Termination { DeltaTol, TimeBudget, MaxIters };

std::string to_string(Termination t);

/// One outer iteration of a solver. Test metrics are NaN without a test set;
/// primal_residual is NaN for solvers without a split variable.
struct IterationRecord {
  int iter = 0;
  double time_s = 0;
  double objective = 0;
  double train_re = 0;
  double train_rmse = 0;
  double test_re = std::numeric_limits<double>::quiet_NaN();
  double test_rmse = std::numeric_limits<double>::quiet_NaN();
  long inner_iters = 0;
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
};

struct SolverReport {
  std::string solver;
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxIters;

  double total_time() const { return records.empty() ? 0.0 : records.back().time_s; }
  long total_inner_iters() const;

  nlohmann::json to_json() const;
  /// Columns: iter,time_s,objective,train_rmse,test_rmse,train_re,test_re
  std::string trace_csv() const;
};

}  // namespace grtc
