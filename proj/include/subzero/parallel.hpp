// Copyright 2026 The Subzero Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SUBZERO_PARALLEL_HPP_
#define SUBZERO_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace subzero {

// Worker count from SUBZERO_THREADS, falling back to the hardware
// concurrency (at least 1).
std::size_t default_threads();

// Runs fn(i) for i in [0, n) on up to `threads` workers. Indices are handed
// out dynamically; callers write results by index so output order never
// depends on scheduling. The first exception thrown by any task is
// rethrown after all workers have joined.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace subzero

#endif  // SUBZERO_PARALLEL_HPP_
