#include "mlwos/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mlwos/parallel.hpp"

namespace mlwos {

Ladder Ladder::single(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("Ladder: eps must be positive");
    return Ladder({eps}, std::numeric_limits<double>::quiet_NaN());
}

Ladder Ladder::from_values(std::vector<double> eps, double eta) {
    if (eps.empty()) throw std::invalid_argument("Ladder: no levels");
    for (std::size_t l = 0; l < eps.size(); ++l) {
        if (!(eps[l] > 0.0)) throw std::invalid_argument("Ladder: widths must be positive");
        if (l > 0 && eps[l] > eps[l - 1]) throw std::invalid_argument("Ladder: widths must not increase");
    }
    return Ladder(std::move(eps), eta);
}

Ladder build_ladder(double eps_target, double eta, double eps0_hint) {
    if (!(eta > 1.0)) throw std::invalid_argument("build_ladder: eta must be > 1");
    if (!(eps_target > 0.0) || !(eps_target <= eps0_hint))
        throw std::invalid_argument("build_ladder: need 0 < eps_target <= eps0_hint");
    // The 1e-12 slack absorbs rounding when the hint is an exact power of eta
    // above the target.
    std::size_t levels = 0;
    for (double e = eps0_hint; e > eps_target * (1.0 + 1e-12); e /= eta) ++levels;
    std::vector<double> eps(levels + 1);
    eps[levels] = eps_target;
    for (std::size_t l = levels; l-- > 0;) eps[l] = eps[l + 1] * eta;
    return Ladder(std::move(eps), eta);
}

void LevelStats::add(double value, std::uint64_t steps) {
    ++count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
    total_steps += steps;
}

double LevelStats::variance() const {
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    return m2 / static_cast<double>(count - 1);
}

double LevelStats::mean_steps() const {
    if (count == 0) return 0.0;
    return static_cast<double>(total_steps) / static_cast<double>(count);
}

double LevelStats::l2_norm() const {
    if (count == 0) return 0.0;
    return std::sqrt(m2 / static_cast<double>(count) + mean * mean);
}

namespace {

std::uint64_t round_up_count(double exact) {
    // Relative slack keeps values like 100.00000000000001 from rounding to 101.
    const double m = std::ceil(exact * (1.0 - 1e-12));
    if (!(m < 1e18)) throw std::overflow_error("sample count overflows");
    return std::max<std::uint64_t>(kMinSamples, static_cast<std::uint64_t>(std::max(m, 0.0)));
}

}  // namespace

std::uint64_t auto_sample_count(double pilot_variance, double eps) {
    if (!(pilot_variance >= 0.0)) throw std::invalid_argument("auto_sample_count: negative variance");
    if (!(eps > 0.0)) throw std::invalid_argument("auto_sample_count: eps must be positive");
    return round_up_count(pilot_variance / (eps * eps));
}

Allocation optimal_allocation(std::span<const double> variances, std::span<const double> works,
                              double eps_target) {
    if (variances.empty() || variances.size() != works.size())
        throw std::invalid_argument("optimal_allocation: need equal, nonempty inputs");
    if (!(eps_target > 0.0)) throw std::invalid_argument("optimal_allocation: eps must be positive");
    double sum = 0.0;
    for (std::size_t l = 0; l < variances.size(); ++l) {
        if (!(works[l] > 0.0)) throw std::invalid_argument("optimal_allocation: work must be positive");
        if (!(variances[l] >= 0.0)) throw std::invalid_argument("optimal_allocation: negative variance");
        sum += std::sqrt(variances[l] * works[l]);
    }
    Allocation out;
    const double scale = sum / (eps_target * eps_target);
    for (std::size_t l = 0; l < variances.size(); ++l) {
        const double exact = scale * std::sqrt(variances[l] / works[l]);
        out.exact.push_back(exact);
        out.m.push_back(round_up_count(exact));
    }
    return out;
}

Allocation model_allocation(const AllocationModel& model, const Ladder& ladder) {
    if (!(model.s > 0.0)) throw std::invalid_argument("model_allocation: s must be positive");
    if (!(model.v0 > 0.0) || !(model.w0 > 0.0))
        throw std::invalid_argument("model_allocation: pilot values must be positive");
    std::vector<double> v(ladder.size());
    std::vector<double> w(ladder.size());
    for (std::size_t l = 0; l < ladder.size(); ++l) {
        v[l] = model.v0 * std::pow(ladder.eps(l) / ladder.eps0(), 2.0 * model.s);
        if (const auto* power = std::get_if<PowerWork>(&model.work)) {
            if (!(2.0 * model.s > power->gamma))
                throw std::invalid_argument("model_allocation: requires 2s > gamma");
            w[l] = model.w0 * std::pow(ladder.eta(), power->gamma * static_cast<double>(l));
        } else {
            const int p = std::get<PolylogWork>(model.work).p;
            if (p != 1 && p != 2) throw std::invalid_argument("model_allocation: p must be 1 or 2");
            w[l] = model.w0 * std::pow(static_cast<double>(std::max<std::size_t>(1, l)), p);
        }
    }
    return optimal_allocation(v, w, ladder.finest());
}

void extend_level(const Problem& problem, const Ladder& ladder, std::size_t level,
                  LevelStats& stats, std::uint64_t target, const SamplingOptions& options,
                  LevelStats* fine_stats) {
    constexpr std::uint64_t kBlock = 1u << 15;
    if (level >= ladder.size()) throw std::out_of_range("extend_level: level outside ladder");
    stats.level = static_cast<int>(level);
    if (fine_stats) fine_stats->level = static_cast<int>(level);
    const auto key_level = static_cast<std::uint16_t>(options.level_offset + level);
    struct Draw {
        double value;
        double fine;
        std::uint64_t steps;
    };
    std::vector<Draw> draws;
    const WalkOptions walk_options{options.max_steps, nullptr};
    while (stats.count < target) {
        const std::uint64_t first = stats.count;
        const std::uint64_t n = std::min(kBlock, target - first);
        draws.assign(n, Draw{});
        parallel_for(n, options.threads, [&](std::uint64_t k) {
            const std::uint64_t index = first + k;
            Stream stream({options.seed, options.context, key_level, index});
            try {
                if (level == 0) {
                    const WalkResult r = wos_walk(problem, ladder.eps(0), stream, walk_options);
                    draws[k] = {r.value, r.value, r.steps};
                } else {
                    const MlPair p =
                        ml_pair(problem, ladder.eps(level - 1), ladder.eps(level), stream, walk_options);
                    draws[k] = {p.diff, p.fine.value, p.fine.steps};
                }
            } catch (const StepLimitExceeded& e) {
                throw StepLimitExceeded(e.max_steps(), key_level, index);
            }
        });
        for (const Draw& d : draws) {
            stats.add(d.value, d.steps);
            if (fine_stats) fine_stats->add(d.fine, d.steps);
        }
    }
}

double predicted_cost(std::span<const double> variances, std::span<const double> works) {
    double sum = 0.0;
    for (std::size_t l = 0; l < variances.size(); ++l) sum += std::sqrt(variances[l] * works[l]);
    return sum * sum;
}

namespace {

using Clock = std::chrono::steady_clock;

EstimateReport finish_report(std::string method, const Ladder& ladder, std::vector<LevelStats> levels,
                             const SamplingOptions& options, Clock::time_point started,
                             std::uint64_t discarded_steps = 0) {
    EstimateReport r{.method = std::move(method), .plan = {ladder, {}}, .levels = std::move(levels)};
    r.eps_target = ladder.finest();
    r.eta = ladder.eta();
    double var_sum = 0.0;
    for (const LevelStats& s : r.levels) {
        r.value += s.mean;
        r.total_steps += s.total_steps;
        r.plan.m.push_back(s.count);
        var_sum += s.variance() / static_cast<double>(s.count);
    }
    r.discarded_steps = discarded_steps;
    r.total_steps += discarded_steps;
    r.stat_error = std::sqrt(var_sum);
    r.discr_error_bound = ladder.finest();
    r.seed = options.seed;
    r.context = options.context;
    r.wall_time_s = std::chrono::duration<double>(Clock::now() - started).count();
    return r;
}

void check_coarsest(const Problem& problem, const Ladder& ladder) {
    if (!(ladder.eps0() < distance_to_boundary(problem.domain(), problem.start())))
        throw std::invalid_argument("eps_0 must be smaller than the start point's distance to the boundary");
}

}  // namespace

EstimateReport mc_estimate(const Problem& problem, double eps, std::optional<std::uint64_t> m,
                           const SamplingOptions& options) {
    const auto started = Clock::now();
    const Ladder ladder = Ladder::single(eps);
    check_coarsest(problem, ladder);
    if (m && *m < kMinSamples) throw std::invalid_argument("mc_estimate: need at least 2 samples");
    std::vector<LevelStats> stats(1);
    if (m) {
        extend_level(problem, ladder, 0, stats[0], *m, options);
    } else {
        extend_level(problem, ladder, 0, stats[0], kPilotSamples, options);
        extend_level(problem, ladder, 0, stats[0], auto_sample_count(stats[0].variance(), eps), options);
    }
    return finish_report("wos", ladder, std::move(stats), options, started);
}

EstimateReport mlmc_estimate(const Problem& problem, const LevelPlan& plan,
                             const SamplingOptions& options) {
    const auto started = Clock::now();
    if (plan.m.size() != plan.ladder.size()) throw std::invalid_argument("mlmc_estimate: plan size mismatch");
    for (std::uint64_t m : plan.m)
        if (m < 1) throw std::invalid_argument("mlmc_estimate: every level needs samples");
    check_coarsest(problem, plan.ladder);
    std::vector<LevelStats> stats(plan.ladder.size());
    for (std::size_t l = 0; l < stats.size(); ++l)
        extend_level(problem, plan.ladder, l, stats[l], plan.m[l], options);
    return finish_report("mlmc", plan.ladder, std::move(stats), options, started);
}

double coarse_eps_hint(const Problem& problem, double eta) {
    return 0.5 * distance_to_boundary(problem.domain(), problem.start()) / eta;
}

Ladder default_ladder(const Problem& problem, double eps_target, double eta) {
    if (!(eta > 1.0)) throw std::invalid_argument("eta must be > 1");
    const double hint = coarse_eps_hint(problem, eta);
    if (eps_target >= hint) return Ladder::from_values({eps_target}, eta);
    return build_ladder(eps_target, eta, hint);
}

namespace {

std::vector<std::uint64_t> measured_requirement(const std::vector<LevelStats>& stats, double eps,
                                                std::uint64_t warmup) {
    std::vector<double> v;
    std::vector<double> w;
    for (const LevelStats& s : stats) {
        v.push_back(s.variance());
        w.push_back(std::max(1.0, s.mean_steps()));
    }
    std::vector<std::uint64_t> m = optimal_allocation(v, w, eps).m;
    for (auto& x : m) x = std::max(x, warmup);
    return m;
}

}  // namespace

EstimateReport adaptive_mlmc(const Problem& problem, double eps_target, double eta,
                             std::uint64_t warmup, const SamplingOptions& options) {
    const auto started = Clock::now();
    if (warmup < kMinSamples) throw std::invalid_argument("adaptive_mlmc: warmup must be >= 2");
    const Ladder full = default_ladder(problem, eps_target, eta);
    check_coarsest(problem, full);

    std::vector<LevelStats> diff(full.size());
    std::vector<LevelStats> plain(full.size());
    for (std::size_t l = 0; l < full.size(); ++l)
        extend_level(problem, full, l, diff[l], warmup, options, &plain[l]);
    const double v_fine = plain.back().variance();
    const auto pilot = static_cast<std::uint64_t>(
        std::ceil(kSelectionFraction * v_fine / (eps_target * eps_target)));
    if (full.size() > 1 && pilot > warmup)
        for (std::size_t l = 0; l < full.size(); ++l)
            extend_level(problem, full, l, diff[l], pilot, options, &plain[l]);

    // Coarsest level: the suffix of the ladder with the least predicted work.
    std::size_t coarsest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < full.size(); ++k) {
        std::vector<double> v{plain[k].variance()};
        std::vector<double> w{std::max(1.0, plain[k].mean_steps())};
        for (std::size_t l = k + 1; l < full.size(); ++l) {
            v.push_back(diff[l].variance());
            w.push_back(std::max(1.0, diff[l].mean_steps()));
        }
        const double cost = predicted_cost(v, w);
        if (cost < best) {
            best = cost;
            coarsest = k;
        }
    }
    std::uint64_t discarded = 0;
    for (std::size_t l = 0; l < coarsest; ++l) discarded += diff[l].total_steps;

    const Ladder ladder = Ladder::from_values(
        std::vector<double>(full.values().begin() + static_cast<std::ptrdiff_t>(coarsest), full.values().end()),
        eta);
    std::vector<LevelStats> stats{plain[coarsest]};
    stats.insert(stats.end(), diff.begin() + static_cast<std::ptrdiff_t>(coarsest) + 1, diff.end());
    for (std::size_t l = 0; l < stats.size(); ++l) stats[l].level = static_cast<int>(l);
    SamplingOptions opts = options;
    opts.level_offset = static_cast<std::uint16_t>(options.level_offset + coarsest);

    std::vector<std::uint64_t> required = measured_requirement(stats, eps_target, warmup);
    for (std::size_t l = 0; l < ladder.size(); ++l)
        extend_level(problem, ladder, l, stats[l], required[l], opts);

    const std::vector<std::uint64_t> revised = measured_requirement(stats, eps_target, warmup);
    bool grew = false;
    for (std::size_t l = 0; l < ladder.size(); ++l)
        grew = grew || static_cast<double>(revised[l]) > 1.1 * static_cast<double>(required[l]);
    if (grew)
        for (std::size_t l = 0; l < ladder.size(); ++l)
            extend_level(problem, ladder, l, stats[l], revised[l], opts);

    return finish_report("meas", ladder, std::move(stats), options, started, discarded);
}

EstimateReport analytic_mlmc(const Problem& problem, double eps_target, double eta, double s,
                             const WorkModel& work, std::uint64_t warmup,
                             const SamplingOptions& options) {
    const auto started = Clock::now();
    if (warmup < kMinSamples) throw std::invalid_argument("analytic_mlmc: warmup must be >= 2");
    const Ladder ladder = default_ladder(problem, eps_target, eta);
    check_coarsest(problem, ladder);

    std::vector<LevelStats> stats(ladder.size());
    extend_level(problem, ladder, 0, stats[0], warmup, options);
    const double v0 = stats[0].variance();
    const double w0 = std::max(1.0, stats[0].mean_steps());

    std::vector<std::uint64_t> m(ladder.size(), kMinSamples);
    if (v0 > 0.0) m = model_allocation({s, work, v0, w0}, ladder).m;
    m[0] = std::max(m[0], warmup);
    for (std::size_t l = 0; l < ladder.size(); ++l)
        extend_level(problem, ladder, l, stats[l], m[l], options);

    return finish_report("mlwos", ladder, std::move(stats), options, started);
}

nlohmann::json to_json(const EstimateReport& report, bool include_timing) {
    nlohmann::json levels = nlohmann::json::array();
    for (std::size_t l = 0; l < report.levels.size(); ++l) {
        const LevelStats& s = report.levels[l];
        levels.push_back({{"level", s.level},
                          {"eps", report.plan.ladder.eps(l)},
                          {"m", s.count},
                          {"mean", s.mean},
                          {"variance", s.variance()},
                          {"mean_steps", s.mean_steps()}});
    }
    nlohmann::json j;
    j["method"] = report.method;
    j["value"] = report.value;
    j["eps_target"] = report.eps_target;
    j["eta"] = std::isnan(report.eta) ? nlohmann::json(nullptr) : nlohmann::json(report.eta);
    j["levels"] = std::move(levels);
    j["total_steps"] = report.total_steps;
    j["discarded_steps"] = report.discarded_steps;
    j["stat_error"] = report.stat_error;
    j["discr_error_bound"] = report.discr_error_bound;
    j["seed"] = report.seed;
    j["context"] = report.context;
    j["wall_time_s"] = include_timing ? report.wall_time_s : 0.0;
    return j;
}

}  // namespace mlwos
