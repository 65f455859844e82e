#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "mlwos/estimator.hpp"
#include "mlwos/geometry.hpp"

namespace mlwos {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    bool degenerate = false;  // set when the data could not be fitted
};

/// Least-squares line through (log x, log y).
FitResult fit_loglog(std::span<const double> xs, std::span<const double> ys);

/// Least-squares line y = intercept + slope * x.
FitResult fit_linear(std::span<const double> xs, std::span<const double> ys);

struct RmsResult {
    double rms;
    double ci_halfwidth;  // 1 sigma, propagated through the square root
};

RmsResult rms_error(std::span<const double> values, double truth);

enum class Method { wos, mlwos, meas };

std::string_view method_name(Method m);     // "WOS", "MLWOS", "MEAS"
Method parse_method(std::string_view name);  // case-insensitive

/// Seed of repetition `rep` in a study run from `seed`.
inline std::uint64_t rep_seed(std::uint64_t seed, int rep) { return seed + static_cast<std::uint64_t>(rep); }

// ---------------------------------------------------------------------------
// Variance decay of the level corrections

struct VarianceRecord {
    int level;
    double eps;
    double l2_norm;   // sqrt(mean((Y_l - Y_{l-1})^2)); plain ||Y_0|| on level 0
    double variance;
    double mean_steps;
    int rep;
};

struct VarianceStudyResult {
    std::vector<VarianceRecord> records;
    std::vector<double> eps;           // levels 0..num_levels
    std::vector<double> mean_l2_norm;  // averaged over reps, per level
    FitResult fit;                     // slope s of mean_l2_norm vs eps over levels >= 1
};

/// Levels l = 0..num_levels with eps_l = eps0 / eta^l; m_per_level fresh
/// pairs per level and repetition.
VarianceStudyResult variance_study(const Problem& problem, double eta, double eps0, int num_levels,
                                   std::uint64_t m_per_level, int reps,
                                   const SamplingOptions& options);

// ---------------------------------------------------------------------------
// Divergence probability of coupled pairs

inline constexpr double kPdivRefinement = 16.0;

struct PdivRecord {
    double eps;
    double radius;
    std::uint64_t m;
    std::uint64_t divergences;
    double p_hat;
};

struct PdivStudyResult {
    std::vector<PdivRecord> records;
    FitResult fit;  // slope of p_hat vs eps over entries with p_hat > 0
    std::vector<std::string> warnings;
};

/// For each eps, m pairs (eps, eps/16) from the problem's start point; counts
/// pairs whose exit points are more than `radius` apart. With
/// radius_constant set, the radius follows C eps^{1/(2 alpha + 1)} instead.
PdivStudyResult pdiv_study(const Problem& problem, std::span<const double> eps_list, double radius,
                           std::uint64_t m, const SamplingOptions& options,
                           std::optional<double> radius_constant = std::nullopt);

// ---------------------------------------------------------------------------
// Error versus work

struct StudyRecord {
    Method method;
    double eps_target;
    double eta;
    int rep;
    std::uint64_t rep_seed;
    double value;
    double error;
    std::uint64_t work;
    double stat_error;
    double wall_time_s;
};

struct WorkErrorPoint {
    double eps_target;
    double rms_error;
    double ci_halfwidth;
    double mean_work;
    double mean_stat_error;
};

/// Mean work rescaled to a statistical error of exactly eps_target:
/// mean_work * (mean_stat_error / eps_target)^2. Methods sharing the finest
/// width carry the same bias, so this compares them at matched error.
double matched_work(const WorkErrorPoint& point);

struct MethodSummary {
    Method method;
    std::vector<WorkErrorPoint> points;
    FitResult fit;  // log RMS error vs log mean work
};

struct WorkErrorResult {
    double truth;
    std::vector<StudyRecord> records;
    std::vector<MethodSummary> summaries;
};

struct WorkErrorOptions {
    double eta = 16.0;
    int reps = 20;
    std::uint64_t warmup = kDefaultWarmup;
    double analytic_s = 1.0 / 3.0;
    WorkModel analytic_work = PolylogWork{2};
};

/// Runs every (method, eps_target, rep) cell; methods in canonical order,
/// targets in the given order. Refuses problems without a reference value.
WorkErrorResult work_error_study(const Problem& problem, std::span<const Method> methods,
                                 std::span<const double> eps_targets, const WorkErrorOptions& study,
                                 const SamplingOptions& options);

/// One cell of the study: the estimator behind `method` at rep seed `seed`.
EstimateReport run_method(const Problem& problem, Method method, double eps_target,
                          const WorkErrorOptions& study, const SamplingOptions& options);

// ---------------------------------------------------------------------------
// Output

void write_variance_csv(std::ostream& out, std::span<const VarianceRecord> records);
void write_pdiv_csv(std::ostream& out, std::span<const PdivRecord> records);
void write_workerr_csv(std::ostream& out, std::span<const StudyRecord> records, bool include_timing);

nlohmann::json to_json(const FitResult& fit);
nlohmann::json summary_json(const VarianceStudyResult& result);
nlohmann::json summary_json(const PdivStudyResult& result);
nlohmann::json summary_json(const WorkErrorResult& result);

}  // namespace mlwos
