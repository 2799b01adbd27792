// Copyright 2026 The adpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADPRIV_PARALLEL_H_
#define ADPRIV_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace adpriv {

// Runs fn(0) .. fn(count - 1) across up to `threads` workers. Each index is
// an independent unit writing only to its own slot, so results cannot depend
// on the thread count. threads <= 1 runs inline. Exceptions from workers are
// rethrown on the calling thread.
void ParallelFor(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// Hardware concurrency with a sane floor of 1; `requested` 0 means "use all".
int ResolveThreadCount(int requested);

}  // namespace adpriv

#endif  // ADPRIV_PARALLEL_H_
