#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dissipnet {

/// Persistent worker pool for indexed task batches. parallel_for splits
/// [0, count) into contiguous chunks, one per worker; tasks must write only to
/// their own slots, so results are identical for any worker count. With one
/// worker everything runs inline on the calling thread. Not reentrant: tasks
/// must not call parallel_for on the same pool.
class ThreadPool {
 public:
  explicit ThreadPool(int workers) : n_(workers < 1 ? 1 : workers) {
    for (int w = 1; w < n_; ++w)
      threads_.emplace_back([this, w] { worker_loop(w); });
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
      ++generation_;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int workers() const { return n_; }

  void parallel_for(int count, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    if (n_ == 1) {
      for (int i = 0; i < count; ++i) fn(i);
      return;
    }
    {
      std::lock_guard<std::mutex> lk(mu_);
      fn_ = &fn;
      count_ = count;
      remaining_ = n_ - 1;
      error_ = nullptr;
      ++generation_;
    }
    cv_.notify_all();
    run_chunk(0);
    std::unique_lock<std::mutex> lk(mu_);
    done_cv_.wait(lk, [this] { return remaining_ == 0; });
    fn_ = nullptr;
    if (error_) {
      std::exception_ptr e = error_;
      error_ = nullptr;
      lk.unlock();
      std::rethrow_exception(e);
    }
  }

 private:
  void run_chunk(int w) {
    const long long c = count_;
    const int lo = static_cast<int>(c * w / n_);
    const int hi = static_cast<int>(c * (w + 1) / n_);
    try {
      for (int i = lo; i < hi; ++i) (*fn_)(i);
    } catch (...) {
      std::lock_guard<std::mutex> lk(mu_);
      if (!error_) error_ = std::current_exception();
    }
  }

  void worker_loop(int w) {
    long long seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
        seen = generation_;
        if (stop_) return;
      }
      run_chunk(w);
      {
        std::lock_guard<std::mutex> lk(mu_);
        if (--remaining_ == 0) done_cv_.notify_all();
      }
    }
  }

  int n_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(int)>* fn_ = nullptr;
  int count_ = 0;
  int remaining_ = 0;
  long long generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace dissipnet
