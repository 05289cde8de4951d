// Copyright 2026 The mposterior Authors
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

#pragma once

#include <cstddef>
#include <functional>

namespace mpost {

/// Caps the number of worker threads used by parallel_for. Zero restores
/// the hardware default.
void set_max_threads(int threads);
int max_threads();

/// Runs body(i) for i in [0, count). Work is split into contiguous chunks,
/// so results written by index are independent of the thread count. Calls
/// made from inside a worker run serially. The first exception thrown by
/// any chunk is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mpost
