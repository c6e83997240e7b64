#include "core/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/error.hpp"

namespace cespdc {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

std::string snapshot(const std::vector<std::string>& names, const Eigen::VectorXd& x) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) os << ", ";
        os << (static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)] : "p" + std::to_string(i))
           << "=" << x[i];
    }
    return os.str();
}

}  // namespace

void FitProblem::validate() const {
    const auto n = initial.size();
    if (n == 0) throw PreconditionError("fit: no parameters");
    if (!residual) throw PreconditionError("fit: missing residual function");
    if (static_cast<Eigen::Index>(names.size()) != n) throw PreconditionError("fit: one name per parameter required");
    if (lower.size() != 0 && lower.size() != n) throw PreconditionError("fit: lower bound size mismatch");
    if (upper.size() != 0 && upper.size() != n) throw PreconditionError("fit: upper bound size mismatch");
    if (!fixed.empty() && static_cast<Eigen::Index>(fixed.size()) != n) throw PreconditionError("fit: fixed mask size mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lo = lower.size() ? lower[i] : -INFINITY;
        const double hi = upper.size() ? upper[i] : INFINITY;
        if (!(lo <= initial[i] && initial[i] <= hi)) {
            throw PreconditionError("fit: initial value of " + names[static_cast<std::size_t>(i)] + " violates its bounds");
        }
    }
}

const FitParameter& FitResult::param(std::string_view name) const {
    for (const auto& p : params) {
        if (p.name == name) return p;
    }
    throw PreconditionError("fit result has no parameter '" + std::string(name) + "'");
}

nlohmann::json FitResult::to_json() const {
    nlohmann::json p = nlohmann::json::object();
    for (const auto& q : params) p[q.name] = {{"value", q.value}, {"stderr", q.std_error}};
    return {{"params", p}, {"cost", cost}, {"iterations", iterations}, {"converged", converged}, {"reason", reason}};
}

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x, double fd_floor,
                                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    const Eigen::VectorXd r0 = residual(x);
    Eigen::MatrixXd J(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = std::max(1e-6 * std::abs(x[j]), fd_floor);
        const bool can_up = upper.size() == 0 || x[j] + h <= upper[j];
        const bool can_down = lower.size() == 0 || x[j] - h >= lower[j];
        Eigen::VectorXd xp = x, xm = x;
        if (can_up && can_down) {
            xp[j] += h;
            xm[j] -= h;
            J.col(j) = (residual(xp) - residual(xm)) / (2.0 * h);
        } else if (can_up) {
            xp[j] += h;
            J.col(j) = (residual(xp) - r0) / h;
        } else {
            xm[j] -= h;
            J.col(j) = (r0 - residual(xm)) / h;
        }
    }
    return J;
}

FitResult least_squares(const FitProblem& problem) {
    problem.validate();
    const Eigen::Index n = problem.initial.size();
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (problem.fixed.empty() || !problem.fixed[static_cast<std::size_t>(i)]) free.push_back(i);
    }
    const auto nf = static_cast<Eigen::Index>(free.size());

    auto project = [&](Eigen::VectorXd x) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (problem.lower.size()) x[i] = std::max(x[i], problem.lower[i]);
            if (problem.upper.size()) x[i] = std::min(x[i], problem.upper[i]);
        }
        return x;
    };
    auto eval = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd r = problem.residual(x);
        if (!all_finite(r)) throw NonFiniteError("fit: non-finite residual at " + snapshot(problem.names, x));
        return r;
    };
    auto jacobian_free = [&](const Eigen::VectorXd& x) {
        const Eigen::MatrixXd full = problem.jacobian
                                         ? problem.jacobian(x)
                                         : numeric_jacobian(problem.residual, x, problem.fd_floor, problem.lower, problem.upper);
        if (!full.allFinite()) throw NonFiniteError("fit: non-finite Jacobian at " + snapshot(problem.names, x));
        Eigen::MatrixXd J(full.rows(), nf);
        for (Eigen::Index k = 0; k < nf; ++k) J.col(k) = full.col(free[static_cast<std::size_t>(k)]);
        return J;
    };

    Eigen::VectorXd x = project(problem.initial);
    Eigen::VectorXd r = eval(x);
    if (r.size() < nf) {
        throw UnderdeterminedError("fit: " + std::to_string(r.size()) + " residuals for " + std::to_string(nf) +
                                   " free parameters");
    }
    double cost = 0.5 * r.squaredNorm();

    FitResult result;
    result.residual_count = static_cast<std::size_t>(r.size());
    result.cost_history.push_back(cost);
    result.reason = "max_iterations";
    const FitTolerances& tol = problem.tolerances;
    double lambda = problem.initial_damping;

    Eigen::MatrixXd J = nf > 0 ? jacobian_free(x) : Eigen::MatrixXd(r.size(), 0);
    int it = 0;
    bool done = nf == 0;
    if (done) {
        result.converged = true;
        result.reason = "no free parameters";
    }
    while (!done && it < tol.max_iterations) {
        if (cost == 0.0) {
            result.converged = true;
            result.reason = "zero cost";
            break;
        }
        const Eigen::VectorXd g = J.transpose() * r;
        const Eigen::MatrixXd A = J.transpose() * J;
        Eigen::VectorXd D = A.diagonal();
        // Scale-free gradient test: cosine between r and each Jacobian column.
        double gmax = 0.0;
        for (Eigen::Index k = 0; k < nf; ++k) {
            if (D[k] > 0.0) gmax = std::max(gmax, std::abs(g[k]) / std::sqrt(D[k] * 2.0 * cost));
            if (!(D[k] > 0.0)) D[k] = 1.0;
        }
        if (gmax <= tol.gradient) {
            result.converged = true;
            result.reason = "gradient tolerance";
            break;
        }
        ++it;
        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd M = A;
            M.diagonal() += lambda * D;
            Eigen::VectorXd step = M.ldlt().solve(-g);
            if (!step.allFinite()) step = M.completeOrthogonalDecomposition().solve(-g);
            Eigen::VectorXd trial = x;
            for (Eigen::Index k = 0; k < nf; ++k) trial[free[static_cast<std::size_t>(k)]] += step[k];
            trial = project(trial);
            const Eigen::VectorXd r_trial = eval(trial);
            const double c_trial = 0.5 * r_trial.squaredNorm();
            if (step.allFinite() && c_trial < cost) {
                const double dx = (trial - x).norm();
                const double decrease = cost - c_trial;
                const double prev = cost;
                x = trial;
                r = r_trial;
                cost = c_trial;
                result.cost_history.push_back(cost);
                lambda /= 10.0;
                accepted = true;
                J = jacobian_free(x);
                if (dx <= tol.step * (x.norm() + tol.step)) {
                    result.converged = true;
                    result.reason = "step tolerance";
                    done = true;
                } else if (decrease <= tol.cost * prev) {
                    result.converged = true;
                    result.reason = "cost tolerance";
                    done = true;
                }
            } else {
                lambda = lambda == 0.0 ? 1e-3 : lambda * 10.0;
                if (lambda > 1e20) {
                    // No direction decreases the cost any further.
                    result.converged = true;
                    result.reason = "no further decrease";
                    done = true;
                    break;
                }
            }
        }
    }

    result.iterations = it;
    result.cost = cost;
    const auto m = r.size();
    Eigen::VectorXd se = Eigen::VectorXd::Zero(nf);
    if (nf > 0 && m > nf) {
        const double s2 = 2.0 * cost / static_cast<double>(m - nf);
        // Equilibrate columns first; parameter scales differ by many decades.
        Eigen::VectorXd d(nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            const double c = J.col(k).norm();
            d[k] = c > 0.0 ? 1.0 / c : 1.0;
        }
        const Eigen::MatrixXd Js = J * d.asDiagonal();
        const Eigen::MatrixXd A = Js.transpose() * Js;
        const Eigen::MatrixXd cov =
            s2 * (d.asDiagonal() * A.completeOrthogonalDecomposition().pseudoInverse() * d.asDiagonal());
        for (Eigen::Index k = 0; k < nf; ++k) se[k] = std::sqrt(std::max(cov(k, k), 0.0));
    }
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        FitParameter p;
        p.name = problem.names[static_cast<std::size_t>(i)];
        p.value = x[i];
        p.fixed = !problem.fixed.empty() && problem.fixed[static_cast<std::size_t>(i)];
        if (!p.fixed) p.std_error = se[k++];
        result.params.push_back(p);
    }
    return result;
}

}  // namespace cespdc
