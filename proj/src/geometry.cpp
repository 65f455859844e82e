#include "mlwos/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace mlwos {

Point::Point(std::size_t dim) : dim_(dim) {
    if (dim == 0 || dim > kMaxDim) throw std::invalid_argument("Point: dimension out of range");
}

Point::Point(std::initializer_list<double> coords) : dim_(coords.size()) {
    if (dim_ == 0 || dim_ > kMaxDim) throw std::invalid_argument("Point: dimension out of range");
    std::copy(coords.begin(), coords.end(), c_.begin());
}

bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (std::size_t i = 0; i < a.dim_; ++i)
        if (a.c_[i] != b.c_[i]) return false;
    return true;
}

double norm(const Point& p) {
    double s = 0.0;
    for (double v : p.coords()) s += v * v;
    return std::sqrt(s);
}

double distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

Domain Domain::square() { return {DomainKind::square2d, 2, 2.0 * std::sqrt(2.0), 0.0}; }

Domain Domain::hemisphere() { return {DomainKind::hemisphere3d, 3, 2.0, 1.0}; }

Domain Domain::ball(std::size_t dim, double radius) {
    if (dim == 0 || dim > kMaxDim) throw std::invalid_argument("ball: dimension out of range");
    if (!(radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
    return {DomainKind::ball, dim, 2.0 * radius, radius};
}

double Domain::signed_distance(const Point& p) const {
    switch (kind_) {
    case DomainKind::square2d:
        return std::min({p[0], 2.0 - p[0], p[1], 2.0 - p[1]});
    case DomainKind::hemisphere3d:
        return std::min(1.0 - norm(p), p[2]);
    case DomainKind::ball:
        return radius_ - norm(p);
    }
    return 0.0;
}

double distance_to_boundary(const Domain& domain, const Point& p) {
    if (p.dim() != domain.dim()) throw GeometryError("distance_to_boundary: dimension mismatch");
    const double sd = domain.signed_distance(p);
    if (!(sd >= -domain.boundary_tolerance()))
        throw GeometryError("distance_to_boundary: point outside the closed domain");
    return std::max(sd, 0.0);
}

Point project_to_boundary(const Domain& domain, const Point& p) {
    if (p.dim() != domain.dim()) throw GeometryError("project_to_boundary: dimension mismatch");
    Point q = p;
    switch (domain.kind()) {
    case DomainKind::square2d: {
        const std::array<double, 4> d{p[0], 2.0 - p[0], p[1], 2.0 - p[1]};
        const auto best = std::min_element(d.begin(), d.end()) - d.begin();
        const auto axis = static_cast<std::size_t>(best / 2);
        q[axis] = (best % 2 == 0) ? 0.0 : 2.0;
        return q;
    }
    case DomainKind::hemisphere3d: {
        const double r = norm(p);
        if (p[2] <= 1.0 - r || r == 0.0) {
            q[2] = 0.0;
            return q;
        }
        for (double& v : q.coords()) v /= r;
        return q;
    }
    case DomainKind::ball: {
        const double r = norm(p);
        if (r == 0.0) {
            q = Point(domain.dim());
            q[0] = domain.radius();
            return q;
        }
        for (double& v : q.coords()) v *= domain.radius() / r;
        return q;
    }
    }
    return q;
}

Problem::Problem(std::string name, Domain domain, BoundaryCondition bc, Point start,
                 std::optional<Reference> reference)
    : name_(std::move(name)), domain_(domain), bc_(std::move(bc)), start_(start),
      reference_(reference) {
    if (!bc_.evaluate) throw std::invalid_argument("Problem: boundary condition has no evaluator");
    if (!(bc_.holder_alpha > 0.0 && bc_.holder_alpha <= 1.0))
        throw std::invalid_argument("Problem: holder_alpha must lie in (0,1]");
    if (start_.dim() != domain_.dim()) throw std::invalid_argument("Problem: start has wrong dimension");
    for (double v : start_.coords())
        if (!std::isfinite(v)) throw std::invalid_argument("Problem: start is not finite");
    if (!(domain_.signed_distance(start_) > 0.0))
        throw std::invalid_argument("Problem: start must be strictly interior");
}

double boundary_value(const Problem& problem, const Point& p) {
    const double d = distance_to_boundary(problem.domain(), p);
    if (d > problem.domain().boundary_tolerance())
        throw GeometryError("boundary_value: point is not on the boundary");
    return problem.bc().evaluate(p);
}

std::optional<Reference> reference_value(const Problem& problem) { return problem.reference(); }

double square_bc(const Point& p) {
    const double x = p[0];
    if (x <= 0.5) return 4.0 * (x - 0.5) * (x - 0.5);
    if (x >= 1.5) return 4.0 * (x - 1.5) * (x - 1.5);
    return 0.0;
}

double hemisphere_bc(const Point& p) {
    const double r = norm(p);
    // planar face when it is at least as close as the sphere
    if (p[2] <= 1.0 - r) return 1.0 / std::sqrt(p[0] * p[0] + p[1] * p[1] + 1.0);
    return 1.0 / std::sqrt(2.0 * (p[2] + 1.0));
}

double hemisphere_solution(const Point& x) {
    const double z = x[2] + 1.0;
    return 1.0 / std::sqrt(x[0] * x[0] + x[1] * x[1] + z * z);
}

Problem square_problem(Point start) {
    std::optional<Reference> ref;
    if (start == Point{1.0, 1.0}) ref = Reference{kSquareCentreReference, ReferenceKind::oracle};
    return {"square", Domain::square(), BoundaryCondition{square_bc, 1.0, std::nullopt}, start, ref};
}

Problem hemisphere_problem(Point start) {
    if (start.dim() != 3) throw std::invalid_argument("hemisphere_problem: start must be 3-d");
    return {"hemisphere", Domain::hemisphere(), BoundaryCondition{hemisphere_bc, 1.0, std::nullopt},
            start, Reference{hemisphere_solution(start), ReferenceKind::analytic}};
}

Problem ball_problem(std::size_t dim, BallData data, double radius) {
    const Domain domain = Domain::ball(dim, radius);
    const Point origin(dim);
    const std::string name = "ball" + std::to_string(dim);
    if (data == BallData::constant_one)
        return {name, domain, BoundaryCondition{[](const Point&) { return 1.0; }, 1.0, 0.0}, origin,
                Reference{1.0, ReferenceKind::analytic}};
    return {name + "-x1", domain, BoundaryCondition{[](const Point& p) { return p[0]; }, 1.0, 1.0},
            origin, Reference{origin[0], ReferenceKind::analytic}};
}

Problem make_problem(std::string_view id) {
    if (id == "square") return square_problem();
    if (id == "hemisphere") return hemisphere_problem();
    if (id == "ball2") return ball_problem(2);
    if (id == "ball3") return ball_problem(3);
    throw std::invalid_argument("unknown problem '" + std::string(id) + "'");
}

}  // namespace mlwos
