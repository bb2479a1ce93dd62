#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>

namespace fmx {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Mean and standard error of a sample, accumulated with compensation.
class RunningMoments {
public:
    void add(double v) noexcept {
        sum_.add(v);
        sum_sq_.add(v * v);
        ++count_;
    }
    std::size_t count() const noexcept { return count_; }
    double mean() const noexcept { return count_ ? sum_.value() / double(count_) : 0.0; }
    double variance() const noexcept;
    double standard_error() const noexcept;

private:
    CompensatedSum sum_;
    CompensatedSum sum_sq_;
    std::size_t count_ = 0;
};

// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Bodies must write only to their own slot of a result
// buffer; reductions happen afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

// Fractional part in [0, 1), used to keep phase arguments small.
inline double frac(double x) noexcept { return x - std::floor(x); }

inline double db10(double ratio) { return 10.0 * std::log10(ratio); }
inline double from_db10(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace fmx
