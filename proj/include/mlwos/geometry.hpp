#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mlwos {

inline constexpr std::size_t kMaxDim = 8;

/// Position in R^d with d <= kMaxDim, stored inline.
class Point {
public:
    Point() = default;
    explicit Point(std::size_t dim);
    Point(std::initializer_list<double> coords);

    std::size_t dim() const { return dim_; }
    double operator[](std::size_t i) const { return c_[i]; }
    double& operator[](std::size_t i) { return c_[i]; }

    std::span<const double> coords() const { return {c_.data(), dim_}; }
    std::span<double> coords() { return {c_.data(), dim_}; }

    friend bool operator==(const Point& a, const Point& b);

private:
    std::array<double, kMaxDim> c_{};
    std::size_t dim_ = 0;
};

double norm(const Point& p);
double distance(const Point& a, const Point& b);

/// Signals a geometric query outside its domain of validity.
class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class DomainKind { square2d, hemisphere3d, ball };

/// Convex domain described by its distance and projection oracles.
///
/// square2d is [0,2]^2, hemisphere3d is {|x| <= 1, x3 >= 0}, ball is the
/// centred ball of the given radius in d dimensions.
class Domain {
public:
    static Domain square();
    static Domain hemisphere();
    static Domain ball(std::size_t dim, double radius);

    DomainKind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    /// Circumsphere diameter |D|.
    double diameter() const { return diameter_; }
    double radius() const { return radius_; }

    /// Positive inside, zero on the boundary, negative outside.
    double signed_distance(const Point& p) const;

    /// Slack used for boundary membership and the outside check.
    double boundary_tolerance() const { return 1e-9 * diameter_; }

private:
    Domain(DomainKind kind, std::size_t dim, double diameter, double radius)
        : kind_(kind), dim_(dim), diameter_(diameter), radius_(radius) {}

    DomainKind kind_;
    std::size_t dim_;
    double diameter_;
    double radius_;
};

/// Distance from p to the boundary. Throws GeometryError for points
/// outside the closed domain (beyond boundary_tolerance()).
double distance_to_boundary(const Domain& domain, const Point& p);

/// Nearest boundary point. Ties on the hemisphere go to the planar face;
/// ties on the square go to the edge with the smallest axis index.
Point project_to_boundary(const Domain& domain, const Point& p);

struct BoundaryCondition {
    std::function<double(const Point&)> evaluate;
    double holder_alpha = 1.0;
    std::optional<double> holder_C;
};

enum class ReferenceKind { analytic, oracle };

struct Reference {
    double value;
    ReferenceKind kind;
};

/// Laplace Dirichlet problem evaluated at one interior point.
class Problem {
public:
    Problem(std::string name, Domain domain, BoundaryCondition bc, Point start,
            std::optional<Reference> reference = std::nullopt);

    const std::string& name() const { return name_; }
    const Domain& domain() const { return domain_; }
    const BoundaryCondition& bc() const { return bc_; }
    const Point& start() const { return start_; }
    const std::optional<Reference>& reference() const { return reference_; }

private:
    std::string name_;
    Domain domain_;
    BoundaryCondition bc_;
    Point start_;
    std::optional<Reference> reference_;
};

/// f(p) for a boundary point p; rejects points farther than the domain's
/// boundary tolerance from the boundary.
double boundary_value(const Problem& problem, const Point& p);

std::optional<Reference> reference_value(const Problem& problem);

/// u(1,1) on the square: 5-point finite differences at h = 1/128 and 1/256
/// with Richardson extrapolation (agrees with the Fourier series to 1e-10).
inline constexpr double kSquareCentreReference = 0.5227662978;

double square_bc(const Point& p);
double hemisphere_bc(const Point& p);
/// [x1^2 + x2^2 + (x3+1)^2]^{-1/2}, harmonic in the hemisphere.
double hemisphere_solution(const Point& x);

enum class BallData { constant_one, first_coordinate };

Problem square_problem(Point start = {1.0, 1.0});
Problem hemisphere_problem(Point start = {0.2, 0.3, 0.1});
Problem ball_problem(std::size_t dim, BallData data = BallData::constant_one,
                     double radius = 1.0);

/// Problem by CLI identifier: square, hemisphere, ball2, ball3.
Problem make_problem(std::string_view id);

}  // namespace mlwos
