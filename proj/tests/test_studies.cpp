#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "mlwos/studies.hpp"

using namespace mlwos;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("rms_error trivial cases") {
    CHECK(rms_error(std::vector<double>{1.0, 3.0}, 2.0).rms == 1.0);
    CHECK(rms_error(std::vector<double>{2.0, 2.0, 2.0}, 2.0).rms == 0.0);
    CHECK(rms_error(std::vector<double>{2.0, 2.0, 2.0}, 2.0).ci_halfwidth == 0.0);
    CHECK(rms_error(std::vector<double>{0.0, 2.0}, 0.0).rms == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(rms_error(std::vector<double>{1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("rms_error confidence half-width") {
    // squared errors 1 and 9: mean 5, sample variance 32, rms sqrt(5)
    const RmsResult r = rms_error(std::vector<double>{1.0, -3.0}, 0.0);
    CHECK(r.rms == doctest::Approx(std::sqrt(5.0)));
    CHECK(r.ci_halfwidth == doctest::Approx(std::sqrt(32.0 / 2.0) / (2.0 * std::sqrt(5.0))));
}

TEST_CASE("fit_loglog trivial cases") {
    const FitResult a = fit_loglog(std::vector<double>{1.0, 10.0}, std::vector<double>{1.0, 100.0});
    CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(a.intercept) < 1e-14);
    CHECK(a.r_squared == doctest::Approx(1.0));

    const FitResult b = fit_loglog(std::vector<double>{1.0, 2.0, 5.0}, std::vector<double>{3.0, 3.0, 3.0});
    CHECK(b.slope == 0.0);

    std::vector<double> xs{1.0, 4.0, 16.0}, ys;
    for (double x : xs) ys.push_back(3.0 / std::sqrt(x));
    const FitResult c = fit_loglog(xs, ys);
    CHECK(c.slope == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(c.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-14));

    CHECK_THROWS_AS(fit_loglog(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_loglog(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_loglog(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 3.0}), std::invalid_argument);
}

TEST_CASE("fit_linear") {
    const FitResult f = fit_linear(std::vector<double>{0.0, 1.0, 2.0}, std::vector<double>{1.0, 3.0, 5.0});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
}

TEST_CASE("method names") {
    CHECK(method_name(Method::mlwos) == "MLWOS");
    CHECK(parse_method("MeAs") == Method::meas);
    CHECK(parse_method("wos") == Method::wos);
    CHECK_THROWS_AS(parse_method("mlmc"), std::invalid_argument);
}

TEST_CASE("variance study with constant data is degenerate") {
    const VarianceStudyResult r = variance_study(ball_problem(2), 2.0, 0.25, 3, 100, 2, {});
    CHECK(r.fit.degenerate);
    CHECK(r.records.size() == 8);
    for (std::size_t l = 1; l < r.mean_l2_norm.size(); ++l) CHECK(r.mean_l2_norm[l] == 0.0);
}

TEST_CASE("variance study on the square") {
    const VarianceStudyResult r = variance_study(square_problem(), 2.0, 0.5, 4, 2000, 2, {.seed = 1, .threads = 4});
    CHECK(r.eps == std::vector<double>{0.5, 0.25, 0.125, 0.0625, 0.03125});
    CHECK_FALSE(r.fit.degenerate);
    CHECK(r.fit.slope > 0.0);
    std::ostringstream out;
    write_variance_csv(out, r.records);
    CHECK(first_line(out.str()) == "level,eps,l2_norm,variance,mean_steps,rep");
}

TEST_CASE("pdiv study basics") {
    const std::vector<double> eps{0.05, 0.0125};
    const PdivStudyResult r = pdiv_study(square_problem(), eps, 0.2, 4000, {.seed = 2, .threads = 4});
    REQUIRE(r.records.size() == 2);
    for (const PdivRecord& rec : r.records) {
        CHECK(rec.p_hat >= 0.0);
        CHECK(rec.p_hat <= 1.0);
        CHECK(rec.divergences <= rec.m);
    }
    // common random numbers: a smaller eps never diverges more here
    CHECK(r.records[1].p_hat <= r.records[0].p_hat + 2.0 * std::sqrt(r.records[0].p_hat / 4000.0));
    std::ostringstream out;
    write_pdiv_csv(out, r.records);
    CHECK(first_line(out.str()) == "eps,radius,m,divergences,p_hat");

    CHECK_THROWS_AS(pdiv_study(square_problem(), std::vector<double>{0.3}, 0.2, 10, {}), std::invalid_argument);
    const PdivStudyResult coupled =
        pdiv_study(square_problem(), eps, 0.0, 1000, {.seed = 2}, 1.0);
    CHECK(coupled.records[0].radius == doctest::Approx(std::pow(0.05, 1.0 / 3.0)));
}

TEST_CASE("pairs from the ball centre never diverge when the widths agree") {
    const Problem p = ball_problem(3);
    for (std::uint64_t i = 0; i < 200; ++i) {
        Stream s({3, 0, 0, i});
        const MlPair pair = ml_pair(p, 0.1, 0.1, s);
        CHECK(distance(pair.fine.exit_point, pair.coarse.exit_point) == 0.0);
    }
}

TEST_CASE("work-error study preconditions") {
    const std::vector<Method> methods{Method::wos};
    const std::vector<double> eps{0.1};
    WorkErrorOptions study;
    CHECK_THROWS_AS(work_error_study(square_problem({0.5, 0.5}), methods, eps, study, {}), std::invalid_argument);
    study.reps = 4;
    CHECK_THROWS_AS(work_error_study(square_problem(), methods, eps, study, {}), std::invalid_argument);
}

TEST_CASE("work-error study records") {
    const std::vector<Method> methods{Method::meas, Method::wos, Method::meas};
    const std::vector<double> eps{0.05, 0.02};
    WorkErrorOptions study;
    study.reps = 5;
    const WorkErrorResult r = work_error_study(hemisphere_problem(), methods, eps, study, {.seed = 3, .threads = 4});
    CHECK(r.records.size() == 2 * 2 * 5);
    CHECK(r.summaries.size() == 2);
    CHECK(r.summaries[0].method == Method::wos);
    CHECK(r.records.front().method == Method::wos);
    CHECK(r.records.back().method == Method::meas);
    for (const StudyRecord& rec : r.records) {
        CHECK(rec.work >= 1);
        CHECK(rec.error >= 0.0);
        CHECK(rec.rep_seed == rep_seed(3, rec.rep));
    }
    std::ostringstream out;
    write_workerr_csv(out, r.records, false);
    CHECK(first_line(out.str()) == "method,eps_target,eta,rep,value,error,work,wall_time_s");

    const WorkErrorPoint p{0.1, 0.0, 0.0, 1000.0, 0.05};
    CHECK(matched_work(p) == doctest::Approx(250.0));
}

TEST_CASE("identical seeds give identical cells") {
    WorkErrorOptions study;
    for (Method m : {Method::wos, Method::mlwos, Method::meas}) {
        const EstimateReport a = run_method(square_problem(), m, 3e-3, study, {.seed = 4, .threads = 2});
        const EstimateReport b = run_method(square_problem(), m, 3e-3, study, {.seed = 4, .threads = 5});
        CHECK(a.value == b.value);
        CHECK(a.total_steps == b.total_steps);
    }
}
