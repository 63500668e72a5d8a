#pragma once

#include <barrier>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace d3l::detail {

// Persistent workers driven in bulk-synchronous rounds. Worker w runs the
// tasks i with i % size() == w, so the task-to-worker mapping is fixed.
class WorkerTeam {
public:
    explicit WorkerTeam(int workers)
        : size_(workers < 1 ? 1 : workers), start_(size_ + 1), done_(size_ + 1) {
        threads_.reserve(static_cast<std::size_t>(size_));
        for (int w = 0; w < size_; ++w) {
            threads_.emplace_back([this, w] { loop(w); });
        }
    }

    WorkerTeam(const WorkerTeam&) = delete;
    WorkerTeam& operator=(const WorkerTeam&) = delete;

    ~WorkerTeam() {
        stop_ = true;
        start_.arrive_and_wait();
        for (auto& t : threads_) t.join();
    }

    [[nodiscard]] int size() const noexcept { return size_; }

    /// Runs fn(0..tasks-1) across the team and returns once all finished.
    /// The first exception in task order is rethrown.
    void run(int tasks, const std::function<void(int)>& fn) {
        job_ = &fn;
        tasks_ = tasks;
        errors_.assign(static_cast<std::size_t>(tasks), nullptr);
        start_.arrive_and_wait();
        done_.arrive_and_wait();
        job_ = nullptr;
        for (const auto& e : errors_) {
            if (e) std::rethrow_exception(e);
        }
    }

private:
    void loop(int w) {
        for (;;) {
            start_.arrive_and_wait();
            if (stop_) return;
            for (int i = w; i < tasks_; i += size_) {
                try {
                    (*job_)(i);
                } catch (...) {
                    errors_[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
            done_.arrive_and_wait();
        }
    }

    int size_;
    std::barrier<> start_;
    std::barrier<> done_;
    std::vector<std::thread> threads_;
    const std::function<void(int)>* job_ = nullptr;
    int tasks_ = 0;
    std::vector<std::exception_ptr> errors_;
    bool stop_ = false;
};

} // namespace d3l::detail
