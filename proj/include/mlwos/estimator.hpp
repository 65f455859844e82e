#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "mlwos/geometry.hpp"
#include "mlwos/walk.hpp"

namespace mlwos {

/// Geometric ladder of stopping widths eps_l = eta^{-l} eps_0, l = 0..L.
class Ladder {
public:
    /// Single level at eps.
    static Ladder single(double eps);
    /// Explicit widths; only requires positive, nonincreasing entries.
    /// Used for hand-built (possibly degenerate) ladders.
    static Ladder from_values(std::vector<double> eps, double eta);

    double eps0() const { return eps_.front(); }
    double finest() const { return eps_.back(); }
    double eta() const { return eta_; }
    /// L, the index of the finest level.
    std::size_t levels() const { return eps_.size() - 1; }
    std::size_t size() const { return eps_.size(); }
    double eps(std::size_t level) const { return eps_.at(level); }
    const std::vector<double>& values() const { return eps_; }

private:
    Ladder(std::vector<double> eps, double eta) : eps_(std::move(eps)), eta_(eta) {}
    friend Ladder build_ladder(double, double, double);

    std::vector<double> eps_;
    double eta_;
};

/// L is the smallest integer with eps0_hint * eta^{-L} <= eps_target; the
/// widths are built upward from eps_L = eps_target by repeated
/// multiplication, so the finest width equals the target exactly.
Ladder build_ladder(double eps_target, double eta, double eps0_hint);

struct LevelPlan {
    Ladder ladder;
    std::vector<std::uint64_t> m;
};

/// Running moments of the level-l samples (Welford), accumulated in sample
/// index order.
struct LevelStats {
    int level = 0;
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    std::uint64_t total_steps = 0;

    void add(double value, std::uint64_t steps);
    /// Unbiased sample variance; NaN below two samples.
    double variance() const;
    double mean_steps() const;
    /// sqrt(mean(y^2)).
    double l2_norm() const;
};

struct Allocation {
    std::vector<double> exact;       // before rounding
    std::vector<std::uint64_t> m;    // ceil(exact), at least 2
};

inline constexpr std::uint64_t kMinSamples = 2;

/// ceil(variance / eps^2), at least kMinSamples.
std::uint64_t auto_sample_count(double pilot_variance, double eps);

/// M_l = eps^{-2} sqrt(V_l / w_l) sum_k sqrt(V_k w_k); the unrounded values
/// satisfy sum V_l / M_l = eps^2.
Allocation optimal_allocation(std::span<const double> variances, std::span<const double> works,
                              double eps_target);

struct PowerWork {
    double gamma;
};
struct PolylogWork {
    int p;
};
using WorkModel = std::variant<PowerWork, PolylogWork>;

/// Asymptotic rates: V_l = v0 (eps_l/eps_0)^{2s}; w_l = w0 eta^{gamma l}
/// or w0 max(1,l)^p.
struct AllocationModel {
    double s;
    WorkModel work;
    double v0;
    double w0;
};

Allocation model_allocation(const AllocationModel& model, const Ladder& ladder);

struct SamplingOptions {
    std::uint64_t seed = 0;
    std::uint32_t context = 0;
    unsigned threads = 1;
    std::uint64_t max_steps = kDefaultMaxSteps;
    /// Stream keys use level_offset + level, so a ladder that is a suffix of
    /// a longer one can keep drawing the same streams.
    std::uint16_t level_offset = 0;
};

/// Draws samples [stats.count, target) of the given level and folds them
/// into `stats` in index order. Level 0 samples are f at eps_0; level l > 0
/// samples are fine-minus-coarse differences of fresh coupled pairs.
/// `fine_stats`, when given, also receives the fine values (plain samples
/// at eps_l) of the same draws.
void extend_level(const Problem& problem, const Ladder& ladder, std::size_t level,
                  LevelStats& stats, std::uint64_t target, const SamplingOptions& options,
                  LevelStats* fine_stats = nullptr);

struct EstimateReport {
    std::string method;
    double value = 0.0;
    double eps_target = 0.0;
    double eta = 0.0;  // NaN for single-level runs
    LevelPlan plan;
    std::vector<LevelStats> levels;
    std::uint64_t total_steps = 0;     // includes discarded_steps
    std::uint64_t discarded_steps = 0; // warm-up work on levels dropped from the ladder
    double stat_error = 0.0;
    double discr_error_bound = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t context = 0;
    double wall_time_s = 0.0;
};

inline constexpr std::uint64_t kPilotSamples = 100;
inline constexpr std::uint64_t kDefaultWarmup = 100;
// Share of the plain-MC sample count spent on the coarse-level selection pilot.
inline constexpr double kSelectionFraction = 0.01;

/// Plain WoS. With m unset, a 100-sample pilot fixes M = ceil(Var/eps^2);
/// the pilot samples are part of the estimate.
EstimateReport mc_estimate(const Problem& problem, double eps, std::optional<std::uint64_t> m,
                           const SamplingOptions& options);

/// Telescoping estimator for a fixed plan.
EstimateReport mlmc_estimate(const Problem& problem, const LevelPlan& plan,
                             const SamplingOptions& options);

/// Coarsest width hint used by the multilevel drivers: eps_0 stays below
/// half the start point's distance to the boundary.
double coarse_eps_hint(const Problem& problem, double eta);

/// Ladder for a target width; a single level when the target is already
/// coarser than the hint.
Ladder default_ladder(const Problem& problem, double eps_target, double eta);

/// Predicted work of the optimal allocation, times eps^2:
/// (sum_l sqrt(V_l w_l))^2.
double predicted_cost(std::span<const double> variances, std::span<const double> works);

/// Measured-value allocation. Warm-up on every level of default_ladder,
/// extended to kSelectionFraction * V/eps^2 samples when that is larger;
/// the coarsest level is then chosen to minimize predicted_cost (the plain
/// samples at a candidate eps_k are the fine halves of the level-k pairs);
/// allocate from measured V_l and w_l, top up, re-allocate once and top up
/// again if a requirement grew by more than 10%.
EstimateReport adaptive_mlmc(const Problem& problem, double eps_target, double eta,
                             std::uint64_t warmup, const SamplingOptions& options);

/// Asymptotic-model allocation from a level-0 pilot (v0, w0) and the given
/// decay exponent and work model.
EstimateReport analytic_mlmc(const Problem& problem, double eps_target, double eta, double s,
                             const WorkModel& work, std::uint64_t warmup,
                             const SamplingOptions& options);

/// {value, eps_target, eta, levels:[...], total_steps, stat_error, seed,
/// wall_time_s, ...}
nlohmann::json to_json(const EstimateReport& report, bool include_timing = true);

}  // namespace mlwos
