// Copyright 2026 The lrevent Authors. All Rights Reserved.
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

#ifndef LREVENT_PARALLEL_HPP_
#define LREVENT_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace lrevent {

// Worker count for a request of `threads` (0 means available parallelism).
unsigned ResolveThreads(unsigned threads);

// Calls body(k) for k in [0, count) over contiguous static chunks. Blocks
// until every call returns; the first exception thrown is rethrown.
void ParallelFor(std::size_t count, unsigned threads,
                 const std::function<void(std::size_t)>& body);

}  // namespace lrevent

#endif  // LREVENT_PARALLEL_HPP_
