// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace meshtex::detail {

/// Run body(i) for i in [0, count). thread_count <= 1 runs inline; 0 asks the
/// hardware. Work is handed out in chunks through an atomic cursor; every
/// index writes only its own slot, so results never depend on thread count.
template <class Body>
void parallel_for(int64_t count, int thread_count, Body&& body) {
  if (thread_count == 0) thread_count = int(std::thread::hardware_concurrency());
  if (thread_count <= 1 || count < 2) {
    for (auto i = int64_t{0}; i < count; i++) body(i);
    return;
  }
  auto chunk = std::max(int64_t{1}, count / (int64_t(thread_count) * 16));
  auto cursor = std::atomic<int64_t>{0};
  auto worker = [&]() {
    while (true) {
      auto begin = cursor.fetch_add(chunk);
      if (begin >= count) return;
      auto end = std::min(begin + chunk, count);
      for (auto i = begin; i < end; i++) body(i);
    }
  };
  auto threads = std::vector<std::thread>{};
  threads.reserve(thread_count);
  for (auto t = 0; t < thread_count; t++) threads.emplace_back(worker);
  for (auto& thread : threads) thread.join();
}

}  // namespace meshtex::detail
