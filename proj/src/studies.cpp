#include "mlwos/studies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mlwos/parallel.hpp"

namespace mlwos {

namespace {

constexpr std::uint32_t kVarianceContext = 0x01000000u;
constexpr std::uint32_t kPdivContext = 0x02000000u;
constexpr std::uint32_t kWorkErrorContext = 0x03000000u;

// Shortest round-trip representation.
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

}  // namespace

FitResult fit_linear(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit: size mismatch");
    const auto n = static_cast<double>(xs.size());
    if (xs.size() < 2) throw std::invalid_argument("fit: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit: need at least two distinct abscissae");
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return f;
}

FitResult fit_loglog(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit_loglog: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("fit_loglog: entries must be positive");
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
    }
    return fit_linear(lx, ly);
}

RmsResult rms_error(std::span<const double> values, double truth) {
    if (values.size() < 2) throw std::invalid_argument("rms_error: need at least two values");
    const auto n = static_cast<double>(values.size());
    double mean_sq = 0.0;
    for (double v : values) mean_sq += (v - truth) * (v - truth);
    mean_sq /= n;
    double var_sq = 0.0;
    for (double v : values) {
        const double e2 = (v - truth) * (v - truth);
        var_sq += (e2 - mean_sq) * (e2 - mean_sq);
    }
    var_sq /= n - 1.0;
    const double rms = std::sqrt(mean_sq);
    // d sqrt(q) = dq / (2 sqrt(q))
    const double half = rms > 0.0 ? std::sqrt(var_sq / n) / (2.0 * rms) : 0.0;
    return {rms, half};
}

std::string_view method_name(Method m) {
    switch (m) {
    case Method::wos: return "WOS";
    case Method::mlwos: return "MLWOS";
    case Method::meas: return "MEAS";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "wos") return Method::wos;
    if (lower == "mlwos") return Method::mlwos;
    if (lower == "meas") return Method::meas;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

VarianceStudyResult variance_study(const Problem& problem, double eta, double eps0, int num_levels,
                                   std::uint64_t m_per_level, int reps,
                                   const SamplingOptions& options) {
    if (m_per_level < 100) throw std::invalid_argument("variance_study: need at least 100 pairs per level");
    if (num_levels < 1) throw std::invalid_argument("variance_study: need at least one correction level");
    if (reps < 1) throw std::invalid_argument("variance_study: need at least one repetition");
    if (!(eta > 1.0)) throw std::invalid_argument("variance_study: eta must be > 1");

    std::vector<double> eps{eps0};
    for (int l = 1; l <= num_levels; ++l) eps.push_back(eps.back() / eta);
    const Ladder ladder = Ladder::from_values(eps, eta);
    if (!(eps0 < distance_to_boundary(problem.domain(), problem.start())))
        throw std::invalid_argument("variance_study: eps0 must be below the start point's distance");

    VarianceStudyResult result;
    result.eps = eps;
    result.mean_l2_norm.assign(eps.size(), 0.0);
    for (int rep = 0; rep < reps; ++rep) {
        SamplingOptions o = options;
        o.seed = rep_seed(options.seed, rep);
        o.context = kVarianceContext;
        for (std::size_t l = 0; l < ladder.size(); ++l) {
            LevelStats stats;
            extend_level(problem, ladder, l, stats, m_per_level, o);
            result.records.push_back({static_cast<int>(l), eps[l], stats.l2_norm(), stats.variance(),
                                      stats.mean_steps(), rep});
            result.mean_l2_norm[l] += stats.l2_norm() / reps;
        }
    }

    std::vector<double> xs(eps.begin() + 1, eps.end());
    std::vector<double> ys(result.mean_l2_norm.begin() + 1, result.mean_l2_norm.end());
    if (std::any_of(ys.begin(), ys.end(), [](double y) { return !(y > 0.0); }) || xs.size() < 2)
        result.fit.degenerate = true;
    else
        result.fit = fit_loglog(xs, ys);
    return result;
}

PdivStudyResult pdiv_study(const Problem& problem, std::span<const double> eps_list, double radius,
                           std::uint64_t m, const SamplingOptions& options,
                           std::optional<double> radius_constant) {
    const Domain& domain = problem.domain();
    if (eps_list.empty()) throw std::invalid_argument("pdiv_study: no eps values");
    if (m < 1) throw std::invalid_argument("pdiv_study: need at least one pair");
    if (!radius_constant && !(radius > 0.0 && radius < domain.diameter()))
        throw std::invalid_argument("pdiv_study: radius must lie in (0, diameter)");
    const double alpha = problem.bc().holder_alpha;
    const WalkOptions walk_options{options.max_steps, nullptr};

    PdivStudyResult result;
    for (double eps : eps_list) {
        const double r = radius_constant ? *radius_constant * std::pow(eps, 1.0 / (2.0 * alpha + 1.0))
                                         : radius;
        if (!(eps < r)) throw std::invalid_argument("pdiv_study: every eps must be below the radius");
        std::vector<unsigned char> diverged(m, 0);
        // Same stream keys for every eps: common random numbers across the sweep.
        parallel_for(m, options.threads, [&](std::uint64_t i) {
            Stream stream({options.seed, kPdivContext, 0, i});
            const MlPair p = ml_pair(problem, eps, eps / kPdivRefinement, stream, walk_options);
            diverged[i] = distance(p.fine.exit_point, p.coarse.exit_point) > r ? 1 : 0;
        });
        std::uint64_t count = 0;
        for (unsigned char d : diverged) count += d;
        const double p_hat = static_cast<double>(count) / static_cast<double>(m);
        result.records.push_back({eps, r, m, count, p_hat});
        if (count < 20)
            result.warnings.push_back("eps=" + fmt(eps) + ": only " + std::to_string(count) +
                                      " divergence events; estimate is unstable");
    }

    std::vector<double> xs, ys;
    for (const PdivRecord& rec : result.records)
        if (rec.p_hat > 0.0) {
            xs.push_back(rec.eps);
            ys.push_back(rec.p_hat);
        }
    const bool distinct = xs.size() >= 2 && *std::min_element(xs.begin(), xs.end()) <
                                                 *std::max_element(xs.begin(), xs.end());
    if (distinct)
        result.fit = fit_loglog(xs, ys);
    else
        result.fit.degenerate = true;
    return result;
}

double matched_work(const WorkErrorPoint& point) {
    const double r = point.mean_stat_error / point.eps_target;
    return point.mean_work * r * r;
}

EstimateReport run_method(const Problem& problem, Method method, double eps_target,
                          const WorkErrorOptions& study, const SamplingOptions& options) {
    switch (method) {
    case Method::wos: return mc_estimate(problem, eps_target, std::nullopt, options);
    case Method::meas: return adaptive_mlmc(problem, eps_target, study.eta, study.warmup, options);
    case Method::mlwos:
        return analytic_mlmc(problem, eps_target, study.eta, study.analytic_s, study.analytic_work,
                             study.warmup, options);
    }
    throw std::logic_error("run_method: unknown method");
}

WorkErrorResult work_error_study(const Problem& problem, std::span<const Method> methods,
                                 std::span<const double> eps_targets, const WorkErrorOptions& study,
                                 const SamplingOptions& options) {
    const auto reference = reference_value(problem);
    if (!reference) throw std::invalid_argument("work_error_study: problem has no reference solution");
    if (study.reps < 5) throw std::invalid_argument("work_error_study: need at least five repetitions");
    if (eps_targets.empty() || methods.empty()) throw std::invalid_argument("work_error_study: empty sweep");

    std::vector<Method> ordered(methods.begin(), methods.end());
    std::sort(ordered.begin(), ordered.end());
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    WorkErrorResult result;
    result.truth = reference->value;
    for (Method method : ordered) {
        MethodSummary summary{method, {}, {}};
        for (double eps : eps_targets) {
            std::vector<double> values;
            double work_sum = 0.0, stat_sum = 0.0;
            for (int rep = 0; rep < study.reps; ++rep) {
                SamplingOptions o = options;
                o.seed = rep_seed(options.seed, rep);
                o.context = kWorkErrorContext | (static_cast<std::uint32_t>(method) << 16);
                const EstimateReport r = run_method(problem, method, eps, study, o);
                result.records.push_back({method, eps, study.eta, rep, o.seed, r.value,
                                          std::abs(r.value - result.truth), r.total_steps, r.stat_error,
                                          r.wall_time_s});
                values.push_back(r.value);
                work_sum += static_cast<double>(r.total_steps);
                stat_sum += r.stat_error;
            }
            const RmsResult rms = rms_error(values, result.truth);
            summary.points.push_back(
                {eps, rms.rms, rms.ci_halfwidth, work_sum / study.reps, stat_sum / study.reps});
        }
        std::vector<double> xs, ys;
        for (const WorkErrorPoint& p : summary.points) {
            xs.push_back(p.mean_work);
            ys.push_back(p.rms_error);
        }
        const bool fittable = std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; }) &&
                              xs.size() >= 2 &&
                              *std::min_element(xs.begin(), xs.end()) < *std::max_element(xs.begin(), xs.end());
        if (fittable)
            summary.fit = fit_loglog(xs, ys);
        else
            summary.fit.degenerate = true;
        result.summaries.push_back(std::move(summary));
    }
    return result;
}

void write_variance_csv(std::ostream& out, std::span<const VarianceRecord> records) {
    out << "level,eps,l2_norm,variance,mean_steps,rep\n";
    for (const auto& r : records)
        out << r.level << ',' << fmt(r.eps) << ',' << fmt(r.l2_norm) << ',' << fmt(r.variance) << ','
            << fmt(r.mean_steps) << ',' << r.rep << '\n';
}

void write_pdiv_csv(std::ostream& out, std::span<const PdivRecord> records) {
    out << "eps,radius,m,divergences,p_hat\n";
    for (const auto& r : records)
        out << fmt(r.eps) << ',' << fmt(r.radius) << ',' << r.m << ',' << r.divergences << ','
            << fmt(r.p_hat) << '\n';
}

void write_workerr_csv(std::ostream& out, std::span<const StudyRecord> records, bool include_timing) {
    out << "method,eps_target,eta,rep,value,error,work,wall_time_s\n";
    for (const auto& r : records)
        out << method_name(r.method) << ',' << fmt(r.eps_target) << ',' << fmt(r.eta) << ',' << r.rep
            << ',' << fmt(r.value) << ',' << fmt(r.error) << ',' << r.work << ','
            << fmt(include_timing ? r.wall_time_s : 0.0) << '\n';
}

nlohmann::json to_json(const FitResult& fit) {
    if (fit.degenerate) return {{"degenerate", true}};
    return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared},
            {"degenerate", false}};
}

nlohmann::json summary_json(const VarianceStudyResult& result) {
    nlohmann::json levels = nlohmann::json::array();
    for (std::size_t l = 0; l < result.eps.size(); ++l)
        levels.push_back({{"level", l}, {"eps", result.eps[l]}, {"mean_l2_norm", result.mean_l2_norm[l]}});
    return {{"study", "variance"}, {"levels", levels}, {"fit", to_json(result.fit)}};
}

nlohmann::json summary_json(const PdivStudyResult& result) {
    return {{"study", "pdiv"}, {"fit", to_json(result.fit)}, {"warnings", result.warnings}};
}

nlohmann::json summary_json(const WorkErrorResult& result) {
    nlohmann::json methods = nlohmann::json::array();
    for (const MethodSummary& s : result.summaries) {
        nlohmann::json points = nlohmann::json::array();
        for (const WorkErrorPoint& p : s.points)
            points.push_back({{"eps_target", p.eps_target},
                              {"rms_error", p.rms_error},
                              {"ci_halfwidth", p.ci_halfwidth},
                              {"mean_work", p.mean_work},
                              {"matched_work", matched_work(p)},
                              {"mean_stat_error", p.mean_stat_error}});
        methods.push_back({{"method", method_name(s.method)}, {"points", points}, {"fit", to_json(s.fit)}});
    }
    return {{"study", "workerr"}, {"truth", result.truth}, {"methods", methods}};
}

}  // namespace mlwos
