// Copyright 2026 The mvpcl Authors
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

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mvpcl {

/// 0 means "all hardware threads".
inline int resolve_threads(int requested) {
  if (requested > 0) {
    return requested;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot, which keeps results independent of scheduling. If several bodies
/// throw, the exception from the lowest index is rethrown.
template <typename Body>
void parallel_for(std::ptrdiff_t n, int threads, Body&& body) {
  const int workers = std::min<std::ptrdiff_t>(resolve_threads(threads), n);
  if (workers <= 1) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }

  std::atomic<std::ptrdiff_t> next{0};
  std::mutex error_mutex;
  std::ptrdiff_t error_index = n;
  std::exception_ptr error;

  auto worker = [&] {
    for (std::ptrdiff_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back(worker);
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace mvpcl
