// sslvc/loader.hpp

// Copyright 2026  sslvc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SSLVC_LOADER_HPP
#define SSLVC_LOADER_HPP

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace sslvc {

// Runs `produce(i)` for i in [0, count) on `workers` threads and hands every
// result to `consume` on the calling thread. Items arrive in unspecified
// order, but each index is produced exactly once. At most `capacity` items
// wait in the queue. The first exception thrown by a producer is rethrown
// here after all workers stop.
template <typename Item>
void parallel_load(std::size_t count, std::size_t workers, std::size_t capacity,
                   const std::function<Item(std::size_t)> &produce,
                   const std::function<void(std::size_t, Item &&)> &consume) {
  workers = std::max<std::size_t>(1, std::min(workers, std::max<std::size_t>(count, 1)));
  capacity = std::max<std::size_t>(capacity, 1);

  std::mutex mutex;
  std::condition_variable not_empty, not_full;
  std::deque<std::pair<std::size_t, Item>> queue;
  std::atomic<std::size_t> next{0};
  std::size_t finished_workers = 0;
  std::exception_ptr failure;
  bool abort = false;

  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      std::optional<Item> item;
      try {
        item.emplace(produce(i));
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        abort = true;
        not_empty.notify_all();
        not_full.notify_all();
        break;
      }
      std::unique_lock lock(mutex);
      not_full.wait(lock, [&] { return queue.size() < capacity || abort; });
      if (abort) break;
      queue.emplace_back(i, std::move(*item));
      not_empty.notify_one();
    }
    std::lock_guard lock(mutex);
    ++finished_workers;
    not_empty.notify_all();
  };

  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);

  std::exception_ptr consumer_failure;
  for (;;) {
    std::unique_lock lock(mutex);
    not_empty.wait(lock, [&] { return !queue.empty() || finished_workers == workers || abort; });
    if (abort) break;
    if (queue.empty()) break;
    auto [index, item] = std::move(queue.front());
    queue.pop_front();
    not_full.notify_one();
    lock.unlock();
    try {
      consume(index, std::move(item));
    } catch (...) {
      std::lock_guard relock(mutex);
      consumer_failure = std::current_exception();
      abort = true;
      not_full.notify_all();
      break;
    }
  }
  for (auto &t : threads) t.join();
  if (consumer_failure) std::rethrow_exception(consumer_failure);
  if (failure) std::rethrow_exception(failure);
}

}  // namespace sslvc

#endif  // SSLVC_LOADER_HPP
