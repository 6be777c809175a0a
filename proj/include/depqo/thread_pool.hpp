#pragma once

#include <condition_variable>
#include <functional>
#include <future>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace depqo {

// Fixed-size worker pool. With zero workers, submitted tasks run inline on the calling thread.
class ThreadPool {
 public:
  explicit ThreadPool(size_t workers) {
    for (size_t index = 0; index < workers; ++index) {
      threads_.emplace_back([this] { work(); });
    }
  }

  ~ThreadPool() {
    {
      auto lock = std::lock_guard{mutex_};
      stopping_ = true;
    }
    ready_.notify_all();
    for (auto& thread : threads_) thread.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  size_t size() const { return threads_.size(); }

  template <typename F>
  std::future<void> submit(F&& function) {
    auto task = std::make_shared<std::packaged_task<void()>>(std::forward<F>(function));
    auto future = task->get_future();
    if (threads_.empty()) {
      (*task)();
      return future;
    }
    {
      auto lock = std::lock_guard{mutex_};
      tasks_.emplace([task] { (*task)(); });
    }
    ready_.notify_one();
    return future;
  }

 private:
  void work() {
    while (true) {
      auto task = std::function<void()>{};
      {
        auto lock = std::unique_lock{mutex_};
        ready_.wait(lock, [this] { return stopping_ || !tasks_.empty(); });
        if (tasks_.empty()) return;
        task = std::move(tasks_.front());
        tasks_.pop();
      }
      task();
    }
  }

  std::mutex mutex_;
  std::condition_variable ready_;
  std::queue<std::function<void()>> tasks_;
  std::vector<std::thread> threads_;
  bool stopping_{false};
};

}  // namespace depqo
