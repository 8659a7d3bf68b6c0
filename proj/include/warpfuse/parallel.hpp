// Copyright 2026 The warpfuse Authors
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

#include <functional>

namespace warpfuse {

/// Sets the worker count used by parallel_for. 0 = hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [begin, end), split into contiguous blocks across
/// workers. Callers must only write to per-index disjoint outputs; under that
/// contract results are bit-identical for any thread count.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace warpfuse
