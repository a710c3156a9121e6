#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace stx {

namespace detail {

// Persistent worker pool shared by every parallel_for call site. Work is
// handed out as contiguous index chunks, so results land in index-addressed
// slots regardless of which worker runs them.
class ThreadPool {
public:
    static ThreadPool& instance() {
        static ThreadPool pool;
        return pool;
    }

    static bool on_worker_thread() { return on_worker_; }

    // Runs fn(chunk) for chunk in [0, chunks); blocks until all complete.
    void run(size_t chunks, const std::function<void(size_t)>& fn) {
        ensure_workers();
        std::exception_ptr err;
        {
            std::unique_lock<std::mutex> lk(mu_);
            job_fn_ = &fn;
            job_next_ = 0;
            job_total_ = chunks;
            job_active_ = 0;
            job_err_ = nullptr;
            ++job_id_;
            work_cv_.notify_all();
            // The caller participates too.
            while (true) {
                size_t mine = job_next_ < job_total_ ? job_next_++ : job_total_;
                if (mine >= job_total_) break;
                ++job_active_;
                lk.unlock();
                try {
                    fn(mine);
                } catch (...) {
                    lk.lock();
                    if (!job_err_) job_err_ = std::current_exception();
                    --job_active_;
                    continue;
                }
                lk.lock();
                --job_active_;
            }
            done_cv_.wait(lk, [&] { return job_next_ >= job_total_ && job_active_ == 0; });
            job_fn_ = nullptr;
            err = job_err_;
        }
        if (err) std::rethrow_exception(err);
    }

private:
    ThreadPool() = default;
    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
            work_cv_.notify_all();
        }
        for (auto& t : workers_) t.join();
    }

    void ensure_workers() {
        std::lock_guard<std::mutex> lk(mu_);
        if (!workers_.empty()) return;
        unsigned n = std::min(std::max(1u, std::thread::hardware_concurrency()), 16u);
        for (unsigned i = 0; i < n; ++i) workers_.emplace_back([this] { worker_loop(); });
    }

    void worker_loop() {
        on_worker_ = true;
        std::unique_lock<std::mutex> lk(mu_);
        uint64_t seen_job = 0;
        while (true) {
            work_cv_.wait(lk, [&] { return stop_ || (job_fn_ && job_next_ < job_total_) || job_id_ != seen_job; });
            seen_job = job_id_;
            if (stop_) return;
            while (job_fn_ && job_next_ < job_total_) {
                size_t mine = job_next_++;
                ++job_active_;
                auto* fn = job_fn_;
                lk.unlock();
                try {
                    (*fn)(mine);
                } catch (...) {
                    lk.lock();
                    if (!job_err_) job_err_ = std::current_exception();
                    --job_active_;
                    if (job_next_ >= job_total_ && job_active_ == 0) done_cv_.notify_all();
                    continue;
                }
                lk.lock();
                --job_active_;
                if (job_next_ >= job_total_ && job_active_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::mutex mu_;
    std::condition_variable work_cv_, done_cv_;
    std::vector<std::thread> workers_;
    const std::function<void(size_t)>* job_fn_ = nullptr;
    size_t job_next_ = 0, job_total_ = 0, job_active_ = 0;
    uint64_t job_id_ = 0;
    std::exception_ptr job_err_ = nullptr;
    bool stop_ = false;
    static thread_local bool on_worker_;
};

inline thread_local bool ThreadPool::on_worker_ = false;

}  // namespace detail

// Chunked parallel loop. fn(i) must only touch state owned by index i;
// workers <= 1 degenerates to a serial loop, as do calls nested inside
// another parallel_for. Chunks are contiguous index ranges, so output
// placement never depends on scheduling.
template <typename Fn>
void parallel_for(size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1 || detail::ThreadPool::on_worker_thread()) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    size_t nw = std::min<size_t>(size_t(workers), n);
    size_t chunk = (n + nw - 1) / nw;
    size_t chunks = (n + chunk - 1) / chunk;
    std::function<void(size_t)> job = [&](size_t c) {
        size_t lo = c * chunk, hi = std::min(n, lo + chunk);
        for (size_t i = lo; i < hi; ++i) fn(i);
    };
    detail::ThreadPool::instance().run(chunks, job);
}

}  // namespace stx
