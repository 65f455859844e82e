#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "mlwos/estimator.hpp"
#include "mlwos/studies.hpp"
#include "mlwos/walk.hpp"

using namespace mlwos;

TEST_CASE("first jump from the ball centre lands on the sphere") {
    const Domain ball = Domain::ball(3, 1.0);
    for (std::uint64_t i = 0; i < 100; ++i) {
        Stream s({1, 0, 0, i});
        const WalkResult r = wos_walk(ball, Point{0.0, 0.0, 0.0}, 0.3, s);
        CHECK(r.steps == 1);
        CHECK(norm(r.exit_point) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::isnan(r.value));
    }
}

TEST_CASE("walk preconditions") {
    const Problem p = hemisphere_problem();
    Stream s({0, 0, 0, 0});
    CHECK_THROWS_AS(wos_walk(p, 0.1, s), std::invalid_argument);  // eps == d(start)
    CHECK_THROWS_AS(wos_walk(p, 0.0, s), std::invalid_argument);
    CHECK_THROWS_AS(ml_pair(p, 0.01, 0.02, s), std::invalid_argument);
}

TEST_CASE("step limit") {
    const Problem p = square_problem();
    Stream s({0, 0, 0, 0});
    WalkOptions opts;
    opts.max_steps = 2;
    CHECK_THROWS_AS(wos_walk(p, 1e-6, s, opts), StepLimitExceeded);
}

TEST_CASE("walk result invariants") {
    const Problem p = hemisphere_problem();
    const double eps = 1e-3;
    for (std::uint64_t i = 0; i < 500; ++i) {
        Stream s({2, 0, 0, i});
        const WalkResult r = wos_walk(p, eps, s);
        CHECK(distance_to_boundary(p.domain(), r.stop_point) < eps);
        CHECK(distance(r.exit_point, r.stop_point) < eps);
        CHECK(distance_to_boundary(p.domain(), r.exit_point) <= p.domain().boundary_tolerance());
        CHECK(r.value == boundary_value(p, r.exit_point));
    }
}

TEST_CASE("step-size exactness and containment along a traced path") {
    for (const Problem& p : {square_problem(), hemisphere_problem()}) {
        const double diam = p.domain().diameter();
        for (std::uint64_t i = 0; i < 50; ++i) {
            std::vector<TracePoint> trace;
            Stream s({3, 0, 0, i});
            const WalkResult r = wos_walk(p, 1e-4, s, {kDefaultMaxSteps, &trace});
            REQUIRE(trace.size() == r.steps + 1);
            CHECK(trace.front().position == p.start());
            CHECK(trace.back().position == r.stop_point);
            for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
                CHECK(trace[k].distance >= 1e-4);
                CHECK(trace[k].distance > 0.0);
                CHECK(std::abs(distance(trace[k + 1].position, trace[k].position) - trace[k].distance) <=
                      1e-12 * diam);
            }
        }
    }
}

TEST_CASE("trace csv") {
    std::vector<TracePoint> trace;
    Stream s({4, 0, 0, 0});
    wos_walk(square_problem(), 1e-2, s, {kDefaultMaxSteps, &trace});
    std::ostringstream out;
    write_trace_csv(out, trace);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,x1,x2,dist");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == trace.size());
}

TEST_CASE("same key gives the same walk") {
    const Problem p = hemisphere_problem();
    Stream a({5, 1, 2, 3});
    Stream b({5, 1, 2, 3});
    const WalkResult ra = wos_walk(p, 1e-4, a);
    const WalkResult rb = wos_walk(p, 1e-4, b);
    CHECK(ra.stop_point == rb.stop_point);
    CHECK(ra.exit_point == rb.exit_point);
    CHECK(ra.steps == rb.steps);
    CHECK(ra.value == rb.value);
}

TEST_CASE("ball with f = x1 has mean zero") {
    const Problem p = ball_problem(2, BallData::first_coordinate);
    const EstimateReport r = mc_estimate(p, 1e-3, 100000, {.seed = 6, .threads = 4});
    CHECK(std::abs(r.value) <= 3.0 * r.stat_error);
}

TEST_CASE("mean steps grow like log^2(1/eps)") {
    const Problem p = square_problem();
    std::vector<double> x, y;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const EstimateReport r = mc_estimate(p, eps, 10000, {.seed = 7, .threads = 4});
        const double l = std::log(1.0 / eps);
        x.push_back(l * l);
        y.push_back(r.levels[0].mean_steps());
    }
    const FitResult fit = fit_linear(x, y);
    CHECK(fit.slope > 0.0);
    CHECK(fit.r_squared > 0.95);
    // monotone work
    for (std::size_t i = 1; i < y.size(); ++i) CHECK(y[i] > y[i - 1]);
}

TEST_CASE("degenerate pair") {
    const Problem p = square_problem();
    for (std::uint64_t i = 0; i < 100; ++i) {
        Stream s({8, 0, 0, i});
        const MlPair pair = ml_pair(p, 0.05, 0.05, s);
        CHECK(pair.diff == 0.0);
        CHECK(pair.coarse.steps == pair.fine.steps);
        CHECK(pair.coarse.exit_point == pair.fine.exit_point);
    }
}

TEST_CASE("pair from the ball centre") {
    const Problem p = ball_problem(3);
    for (std::uint64_t i = 0; i < 100; ++i) {
        Stream s({9, 0, 0, i});
        const MlPair pair = ml_pair(p, 0.5, 1e-6, s);
        CHECK(pair.coarse.steps == 1);
        CHECK(pair.fine.steps == 1);
    }
}

TEST_CASE("pair continues the coarse path") {
    const Problem p = square_problem();
    for (std::uint64_t i = 0; i < 200; ++i) {
        std::vector<TracePoint> trace;
        Stream s({10, 0, 0, i});
        const MlPair pair = ml_pair(p, 0.05, 0.05 / 16, s, {kDefaultMaxSteps, &trace});
        CHECK(pair.coarse.steps <= pair.fine.steps);
        CHECK(pair.diff == pair.fine.value - pair.coarse.value);
        REQUIRE(trace.size() == pair.fine.steps + 1);
        std::size_t k = 0;
        while (trace[k].distance >= 0.05) ++k;
        CHECK(k == pair.coarse.steps);
        CHECK(trace[k].position == pair.coarse.stop_point);

        // a plain walk at the coarse width from the same key stops at the same point
        Stream t({10, 0, 0, i});
        const WalkResult coarse = wos_walk(p, 0.05, t);
        CHECK(coarse.stop_point == pair.coarse.stop_point);
        Stream u({10, 0, 0, i});
        const WalkResult fine = wos_walk(p, 0.05 / 16, u);
        CHECK(fine.stop_point == pair.fine.stop_point);
    }
}

TEST_CASE("coupled difference has smaller variance than the fine value") {
    const Problem p = square_problem();
    LevelStats diff, fine;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        Stream s({11, 0, 0, i});
        const MlPair pair = ml_pair(p, 0.1, 0.1 / 16, s);
        diff.add(pair.diff, pair.fine.steps);
        fine.add(pair.fine.value, pair.fine.steps);
    }
    CHECK(diff.variance() < fine.variance());
}
