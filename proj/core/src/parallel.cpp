#include "d2/parallel.hpp"

#include <algorithm>

namespace d2 {

WorkerPool::WorkerPool(std::size_t workers) : workers_(std::max<std::size_t>(1, workers)) {
  for (std::size_t id = 1; id < workers_; ++id)
    threads_.emplace_back([this, id] { worker_loop(id); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

std::pair<std::size_t, std::size_t> WorkerPool::chunk(std::size_t n, std::size_t workers,
                                                      std::size_t worker) {
  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;
  const std::size_t begin = worker * base + std::min(worker, extra);
  const std::size_t end = begin + base + (worker < extra ? 1 : 0);
  return {begin, end};
}

void WorkerPool::parallel_for(std::size_t n,
                              const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  if (workers_ == 1 || n == 1) {
    body(0, n);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    body_ = &body;
    n_ = n;
    pending_ = workers_ - 1;
    error_ = nullptr;
    ++generation_;
  }
  start_cv_.notify_all();

  std::exception_ptr local;
  const auto [b, e] = chunk(n, workers_, 0);
  try {
    if (b < e) body(b, e);
  } catch (...) {
    local = std::current_exception();
  }

  std::unique_lock lock(mutex_);
  done_cv_.wait(lock, [this] { return pending_ == 0; });
  body_ = nullptr;
  if (!local) local = error_;
  lock.unlock();
  if (local) std::rethrow_exception(local);
}

void WorkerPool::worker_loop(std::size_t id) {
  std::size_t seen = 0;
  while (true) {
    const std::function<void(std::size_t, std::size_t)>* body = nullptr;
    std::size_t n = 0;
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      body = body_;
      n = n_;
    }
    std::exception_ptr err;
    const auto [b, e] = chunk(n, workers_, id);
    try {
      if (b < e) (*body)(b, e);
    } catch (...) {
      err = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      if (err && !error_) error_ = err;
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }
}

void for_each_index(WorkerPool* pool, std::size_t n, const std::function<void(std::size_t)>& body) {
  auto range = [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) body(i);
  };
  if (pool)
    pool->parallel_for(n, range);
  else
    range(0, n);
}

}  // namespace d2
