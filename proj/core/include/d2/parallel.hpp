#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace d2 {

/// Fixed-size pool that splits an index range [0, n) into `size()`
/// contiguous chunks, one per worker. Chunk boundaries depend only on n and
/// the worker count, and callers write results into per-index slots, so
/// every reduction downstream runs in index order and is bit-reproducible.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers = 1);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return workers_; }

  /// Runs body(begin, end) over the chunks and blocks until all finish.
  /// The first exception thrown by any chunk is rethrown here.
  void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

  /// Chunk [begin, end) owned by `worker` when splitting n items.
  static std::pair<std::size_t, std::size_t> chunk(std::size_t n, std::size_t workers,
                                                   std::size_t worker);

 private:
  void worker_loop(std::size_t id);

  std::size_t workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
  std::size_t n_ = 0;
  std::size_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

/// Runs body over [0, n) on `pool` if given, inline otherwise.
void for_each_index(WorkerPool* pool, std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace d2
