#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace racorn {

/// Fixed set of worker threads running index-parallel loops.
///
/// Each index is handled by exactly one call of the body, so bodies that
/// only write their own output slot give results independent of the
/// worker count. With one worker the loop runs inline on the caller.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t workers = 1);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    std::size_t workers() const noexcept { return threads_.size() + 1; }

    /// Runs body(i) for i in [0, n). Rethrows the first exception raised.
    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

private:
    void worker_loop();
    void drain();

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t)>* body_ = nullptr;
    std::size_t count_ = 0;
    std::size_t next_ = 0;
    std::size_t active_ = 0;
    std::size_t generation_ = 0;
    bool stopping_ = false;
    std::exception_ptr error_;
};

}  // namespace racorn
