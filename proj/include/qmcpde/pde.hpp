#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qmcpde/theory.hpp"

namespace qmcpde {

/// Coefficient is not uniformly positive.
class EllipticityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// a(x, y) = a0 + sum_{j<=s} y_j A j^-decay sin(j pi x), y_j in [-1/2, 1/2].
class UniformField {
public:
    UniformField(double a0, double amplitude, double decay, std::size_t s);

    double a0() const { return a0_; }
    double amplitude() const { return amplitude_; }
    double decay() const { return decay_; }
    std::size_t dimension() const { return s_; }
    double a_min() const { return a_min_; }
    double a_max() const { return a_max_; }

    /// ||psi_j||_inf for 1-based j.
    double psi_norm(std::size_t j) const;
    /// b_j = ||psi_j||_inf / a_min.
    double b(std::size_t j) const { return psi_norm(j) / a_min_; }
    /// (1/decay + 1) / 2, strictly between 1/decay and 1.
    double default_p0() const { return 0.5 * (1.0 / decay_ + 1.0); }
    DecayModel decay_model() const;
    DecayModel decay_model(double p0) const;

    UniformField truncated(std::size_t s) const;

private:
    double a0_, amplitude_, decay_;
    std::size_t s_;
    double a_min_, a_max_;
};

/// a(x, y) = a0 exp(sum_{j<=s} y_j sqrt(mu_j) xi_j(x)), mu_j = A^2 j^-2 decay,
/// xi_j(x) = sqrt(2) sin(j pi x), y_j standard normal.
class LognormalField {
public:
    LognormalField(double a0, double amplitude, double decay, std::size_t s);

    double a0() const { return a0_; }
    double amplitude() const { return amplitude_; }
    double decay() const { return decay_; }
    std::size_t dimension() const { return s_; }
    double mu(std::size_t j) const;
    static double xi(std::size_t j, double x);

    LognormalField truncated(std::size_t s) const;

private:
    double a0_, amplitude_, decay_;
    std::size_t s_;
};

using Field = std::variant<UniformField, LognormalField>;

std::size_t field_dimension(const Field& f);
Field truncate_field(const Field& f, std::size_t s);

double eval_coefficient(const Field& field, double x, std::span<const double> y);

/// Nodal data on a uniform mesh of `elements` cells over [0, 1].
using NodalFunction = std::function<double(double)>;

/// Linear functional G(v) = int_0^1 v g dx with g piecewise linear.
class Functional {
public:
    Functional(std::vector<double> nodal, NodalFunction source = {});
    static Functional from_function(const NodalFunction& g, std::size_t elements);

    std::size_t elements() const { return g_.size() - 1; }
    const std::vector<double>& nodal() const { return g_; }
    /// Same functional on another mesh: resampled from the source function
    /// when known, else linearly interpolated.
    Functional on_mesh(std::size_t elements) const;

    /// Exact integral of the product of two piecewise-linear functions.
    double apply(std::span<const double> v) const;

private:
    std::vector<double> g_;
    NodalFunction source_;
};

/// Galerkin solution on M = 1/h elements. `u` holds all M+1 nodal values
/// including the zero boundary values.
struct FemSystem {
    std::size_t elements = 0;
    double h = 0.0;
    std::vector<double> diag;      // interior stiffness diagonal, size M-1
    std::vector<double> off;       // super-diagonal, size M-2
    std::vector<double> load;      // size M-1
    std::vector<double> u;         // size M+1
    std::vector<double> a_mid;     // coefficient at element midpoints, size M

    std::size_t interior() const { return elements - 1; }
    /// Normwise backward error |K u - f| / (|K| |u| + |f|) in the max norm.
    double relative_residual() const;
};

/// Process-wide FEM solve tally.
std::uint64_t total_solves();

/// Number of elements for mesh width h; h must be 1/M with M >= 2 a power of 2.
std::size_t elements_for_width(double h);

/// Assemble and solve with given element-midpoint coefficients.
FemSystem solve_with_coefficient(std::span<const double> a_mid, const NodalFunction& kappa);

/// Field solve: midpoint rule for the coefficient, exact load for the
/// piecewise-linear interpolant of kappa, tridiagonal elimination.
FemSystem solve(const Field& field, std::span<const double> y, double h,
                const NodalFunction& kappa);

double qoi(const FemSystem& sys, const Functional& g);

/// ||grad v||_{L2} for nodal values v on a uniform mesh of v.size()-1 cells.
double energy_seminorm(std::span<const double> v);

/// Discrete H^-1 norm of f: energy norm of the Galerkin solution of
/// -w'' = f on the same mesh.
double dual_norm(const NodalFunction& f, std::size_t elements);

/// Derivative of the uniform-field solution with respect to y_j (1-based):
/// same operator, right-hand side -int psi_j grad u . grad w.
FemSystem solve_first_derivative(const UniformField& field, std::span<const double> y,
                                 double h, std::size_t j, const FemSystem& base);

/// Reusable solver for one (field, mesh, kappa): caches the fluctuation
/// modes at element midpoints and the load vector. Thread-safe for
/// concurrent solve() calls.
class FemSolver {
public:
    FemSolver(Field field, std::size_t elements, const NodalFunction& kappa);

    std::size_t elements() const { return elements_; }
    const Field& field() const { return field_; }
    FemSystem solve(std::span<const double> y) const;

private:
    Field field_;
    std::size_t elements_;
    std::size_t s_;
    std::vector<double> modes_;  // elements x s, row-major
    std::vector<double> load_;
    bool lognormal_;
    double a0_;
};

} // namespace qmcpde
