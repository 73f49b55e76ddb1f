#include "racorn/parallel.hpp"

namespace racorn {

WorkerPool::WorkerPool(std::size_t workers) {
    for (std::size_t i = 1; i < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::drain() {
    for (;;) {
        std::size_t i;
        {
            std::lock_guard lock(mutex_);
            if (next_ >= count_ || error_) return;
            i = next_++;
        }
        try {
            (*body_)(i);
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }
}

void WorkerPool::worker_loop() {
    std::size_t seen = 0;
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_) return;
            seen = generation_;
            ++active_;
        }
        drain();
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        done_cv_.notify_all();
    }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    if (threads_.empty() || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        body_ = &body;
        count_ = n;
        next_ = 0;
        error_ = nullptr;
        ++generation_;
    }
    start_cv_.notify_all();
    drain();
    std::exception_ptr error;
    {
        std::unique_lock lock(mutex_);
        done_cv_.wait(lock, [&] { return active_ == 0 && (next_ >= count_ || error_); });
        // Workers that never woke for this generation must not pick it up later.
        count_ = 0;
        body_ = nullptr;
        error = error_;
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace racorn
