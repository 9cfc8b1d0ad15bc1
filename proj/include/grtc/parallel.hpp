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

/// @file parallel.hpp
/// Fixed-size fan-out for independent jobs. The worker count is
/// min(GRTC_THREADS, hardware threads, jobs).

#pragma once

#include <cstddef>
#include <functional>

namespace grtc {

/// Worker cap from GRTC_THREADS, or the hardware thread count when unset.
/// Throws ConfigError for a value that is not a positive integer.
unsigned thread_limit();

/// Runs job(0) ... job(n - 1), each exactly once. Results must be written to
/// per-index slots so the outcome does not depend on scheduling. The first
/// exception thrown by a job is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& job);

}  // namespace grtc
