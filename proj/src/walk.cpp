#include "mlwos/walk.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace mlwos {

StepLimitExceeded::StepLimitExceeded(std::uint64_t max_steps)
    : std::runtime_error("walk reached the step limit of " + std::to_string(max_steps)),
      max_steps_(max_steps) {}

StepLimitExceeded::StepLimitExceeded(std::uint64_t max_steps, int level, std::uint64_t sample_index)
    : std::runtime_error("walk reached the step limit of " + std::to_string(max_steps) +
                         " (level " + std::to_string(level) + ", sample " +
                         std::to_string(sample_index) + ")"),
      max_steps_(max_steps), level_(level), sample_index_(sample_index) {}

namespace {

// Single path observed at up to two thresholds; eps_first >= eps_last.
struct PathOutcome {
    WalkResult first;
    WalkResult last;
};

PathOutcome run_path(const Domain& domain, const Point& x0, double eps_first, double eps_last,
                     Stream& stream, const WalkOptions& options) {
    if (!(eps_last > 0.0) || !(eps_last <= eps_first))
        throw std::invalid_argument("walk: thresholds must satisfy 0 < eps_fine <= eps_coarse");
    Point x = x0;
    double d = distance_to_boundary(domain, x);
    if (!(eps_first < d))
        throw std::invalid_argument("walk: start point lies within eps of the boundary");

    if (options.trace) options.trace->push_back({0, x, d});

    PathOutcome out;
    bool have_first = false;
    std::uint64_t steps = 0;
    std::array<double, kMaxDim> dir{};
    const std::span<double> dir_span(dir.data(), domain.dim());

    while (true) {
        if (!have_first && d < eps_first) {
            out.first = {x, project_to_boundary(domain, x), steps};
            have_first = true;
        }
        if (d < eps_last) break;
        if (steps >= options.max_steps) throw StepLimitExceeded(options.max_steps);
        uniform_direction(stream, dir_span);
        for (std::size_t i = 0; i < domain.dim(); ++i) x[i] += d * dir[i];
        ++steps;
        d = distance_to_boundary(domain, x);
        if (options.trace) options.trace->push_back({steps, x, d});
    }
    out.last = {x, project_to_boundary(domain, x), steps};
    return out;
}

}  // namespace

WalkResult wos_walk(const Domain& domain, const Point& x0, double eps, Stream& stream,
                    const WalkOptions& options) {
    return run_path(domain, x0, eps, eps, stream, options).last;
}

WalkResult wos_walk(const Problem& problem, double eps, Stream& stream, const WalkOptions& options) {
    WalkResult r = wos_walk(problem.domain(), problem.start(), eps, stream, options);
    r.value = boundary_value(problem, r.exit_point);
    return r;
}

MlPair ml_pair(const Problem& problem, double eps_coarse, double eps_fine, Stream& stream,
               const WalkOptions& options) {
    PathOutcome path =
        run_path(problem.domain(), problem.start(), eps_coarse, eps_fine, stream, options);
    MlPair pair{std::move(path.first), std::move(path.last), 0.0};
    pair.coarse.value = boundary_value(problem, pair.coarse.exit_point);
    pair.fine.value = boundary_value(problem, pair.fine.exit_point);
    pair.diff = pair.fine.value - pair.coarse.value;
    return pair;
}

void write_trace_csv(std::ostream& out, std::span<const TracePoint> trace) {
    const std::size_t dim = trace.empty() ? 0 : trace.front().position.dim();
    out << "step";
    for (std::size_t i = 1; i <= dim; ++i) out << ",x" << i;
    out << ",dist\n";
    const auto old_precision = out.precision(17);
    for (const TracePoint& t : trace) {
        out << t.step;
        for (double v : t.position.coords()) out << ',' << v;
        out << ',' << t.distance << '\n';
    }
    out.precision(old_precision);
}

}  // namespace mlwos
