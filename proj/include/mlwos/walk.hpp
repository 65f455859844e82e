#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlwos/geometry.hpp"
#include "mlwos/random.hpp"

namespace mlwos {

inline constexpr std::uint64_t kDefaultMaxSteps = 10'000'000;

/// Outcome of one Walk-on-Spheres path.
struct WalkResult {
    Point stop_point;   // first position with distance < eps
    Point exit_point;   // its projection onto the boundary
    std::uint64_t steps = 0;
    double value = std::numeric_limits<double>::quiet_NaN();  // f(exit_point)
};

/// One path observed at a coarse and a fine stopping threshold.
struct MlPair {
    WalkResult coarse;
    WalkResult fine;
    double diff = 0.0;  // fine.value - coarse.value
};

struct TracePoint {
    std::uint64_t step;
    Point position;
    double distance;
};

struct WalkOptions {
    std::uint64_t max_steps = kDefaultMaxSteps;
    std::vector<TracePoint>* trace = nullptr;  // records every position when set
};

class StepLimitExceeded : public std::runtime_error {
public:
    explicit StepLimitExceeded(std::uint64_t max_steps);
    StepLimitExceeded(std::uint64_t max_steps, int level, std::uint64_t sample_index);

    std::uint64_t max_steps() const { return max_steps_; }
    std::optional<int> level() const { return level_; }
    std::optional<std::uint64_t> sample_index() const { return sample_index_; }

private:
    std::uint64_t max_steps_;
    std::optional<int> level_;
    std::optional<std::uint64_t> sample_index_;
};

/// Runs X_{i+1} = X_i + d(X_i) * direction until d(X_i) < eps.
/// Requires 0 < eps < d(x0). The returned value is left as NaN.
WalkResult wos_walk(const Domain& domain, const Point& x0, double eps, Stream& stream,
                    const WalkOptions& options = {});

/// wos_walk from the problem's start point with value = f(exit_point).
WalkResult wos_walk(const Problem& problem, double eps, Stream& stream,
                    const WalkOptions& options = {});

/// Coupled pair: one path, recorded at the first crossing of eps_coarse and
/// continued with the same stream until it crosses eps_fine.
/// Requires 0 < eps_fine <= eps_coarse < d(start).
MlPair ml_pair(const Problem& problem, double eps_coarse, double eps_fine, Stream& stream,
               const WalkOptions& options = {});

/// CSV with columns step, x1..xd, dist.
void write_trace_csv(std::ostream& out, std::span<const TracePoint> trace);

}  // namespace mlwos
