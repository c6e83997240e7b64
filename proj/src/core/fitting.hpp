#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace cespdc {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct FitTolerances {
    double gradient = 1e-12;  // max |J^T r| scaled by (1 + cost)
    double step = 1e-12;      // |dx| <= step * (|x| + step)
    double cost = 1e-15;      // relative cost decrease of an accepted step
    int max_iterations = 200;
};

/// Bounded nonlinear least squares: minimize 0.5 |r(x)|^2 with lower <= x <= upper.
struct FitProblem {
    std::vector<std::string> names;
    ResidualFn residual;
    JacobianFn jacobian;  // optional; central differences otherwise
    Eigen::VectorXd initial;
    Eigen::VectorXd lower;  // empty: unbounded
    Eigen::VectorXd upper;
    std::vector<bool> fixed;  // empty: all free
    FitTolerances tolerances;
    double initial_damping = 1e-3;  // 0 starts with a pure Gauss-Newton step
    double fd_floor = 1e-8;         // absolute floor of the finite-difference step

    void validate() const;
};

struct FitParameter {
    std::string name;
    double value = 0.0;
    double std_error = 0.0;
    bool fixed = false;
};

struct FitResult {
    std::vector<FitParameter> params;
    double cost = 0.0;  // 0.5 |r|^2
    int iterations = 0;
    bool converged = false;
    std::string reason;
    std::vector<double> cost_history;  // cost after every accepted step, starting at the initial point
    std::size_t residual_count = 0;

    const FitParameter& param(std::string_view name) const;
    double value(std::string_view name) const { return param(name).value; }
    double std_error_of(std::string_view name) const { return param(name).std_error; }
    nlohmann::json to_json() const;
};

/// Central-difference Jacobian, relative step 1e-6 with absolute floor;
/// one-sided next to a bound.
Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x, double fd_floor = 1e-8,
                                 const Eigen::VectorXd& lower = {}, const Eigen::VectorXd& upper = {});

/// Levenberg-Marquardt with Marquardt diagonal scaling, multiplicative damping
/// (x10 on a rejected step, /10 on an accepted one) and projection onto the
/// bounds. Standard errors are sqrt(diag(s^2 (J^T J)^-1)) with
/// s^2 = 2 cost / (m - n_free). Hitting max_iterations is reported, not thrown;
/// a non-finite residual throws NonFiniteError with the parameter snapshot.
FitResult least_squares(const FitProblem& problem);

}  // namespace cespdc
