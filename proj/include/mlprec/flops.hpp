#pragma once

#include <cstdint>

namespace mlprec {

/// Floating point operation tallies. A multiply-add counts as one add plus
/// one multiply; comparisons and copies are free.
struct FlopCounter
{
    std::uint64_t adds = 0;
    std::uint64_t mults = 0;
    std::uint64_t divs = 0;

    std::uint64_t total() const { return adds + mults + divs; }
    void reset() { *this = FlopCounter{}; }

    FlopCounter& operator+=(const FlopCounter& other)
    {
        adds += other.adds;
        mults += other.mults;
        divs += other.divs;
        return *this;
    }
};

namespace flops {

inline thread_local FlopCounter* active_counter = nullptr;

inline void madd(std::uint64_t n = 1)
{
    if (active_counter) {
        active_counter->adds += n;
        active_counter->mults += n;
    }
}

inline void add(std::uint64_t n = 1)
{
    if (active_counter)
        active_counter->adds += n;
}

inline void mult(std::uint64_t n = 1)
{
    if (active_counter)
        active_counter->mults += n;
}

inline void div(std::uint64_t n = 1)
{
    if (active_counter)
        active_counter->divs += n;
}

} // namespace flops

/// Routes the instrumented kernels on this thread into `counter` for the
/// lifetime of the scope. Scopes nest: on exit the inner tallies are also
/// added to the enclosing counter.
class FlopScope
{
public:
    explicit FlopScope(FlopCounter& counter)
        : counter_(counter), start_(counter), previous_(flops::active_counter)
    {
        flops::active_counter = &counter_;
    }

    ~FlopScope()
    {
        flops::active_counter = previous_;
        if (previous_) {
            previous_->adds += counter_.adds - start_.adds;
            previous_->mults += counter_.mults - start_.mults;
            previous_->divs += counter_.divs - start_.divs;
        }
    }

    FlopScope(const FlopScope&) = delete;
    FlopScope& operator=(const FlopScope&) = delete;

private:
    FlopCounter& counter_;
    FlopCounter start_;
    FlopCounter* previous_;
};

/// Suspends counting on this thread for the lifetime of the scope (for
/// instrumentation work such as evaluating the stopping test).
class FlopPause
{
public:
    FlopPause() : previous_(flops::active_counter) { flops::active_counter = nullptr; }
    ~FlopPause() { flops::active_counter = previous_; }

    FlopPause(const FlopPause&) = delete;
    FlopPause& operator=(const FlopPause&) = delete;

private:
    FlopCounter* previous_;
};

} // namespace mlprec
