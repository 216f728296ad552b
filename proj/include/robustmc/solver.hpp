#pragma once

#include "robustmc/matrix.hpp"
#include "robustmc/operators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace robustmc {

enum class SolverMode {
    column_sparse,    ///< nuclear norm + lambda * sum of column norms
    entry_sparse,     ///< nuclear norm + lambda * sum of |entries| (low-rank plus sparse baseline)
    completion_only,  ///< plain nuclear-norm completion, C fixed at zero
};

std::string to_string(SolverMode mode);
SolverMode parse_solver_mode(const std::string& name);

struct SolverConfig {
    double lambda = 1.0;
    /// Initial penalty; unset means 1 / ||M_obs||_{1,2}.
    std::optional<double> u0;
    double alpha = 1.1;
    double tol = 1e-6;
    int max_iter = 500;
    SolverMode mode = SolverMode::column_sparse;
    /// Column-norm cut for the recovered support; unset means 1e-6 ||M_obs||_F / sqrt(n).
    std::optional<double> support_threshold;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

struct SolverResult {
    Matrix L_star;
    Matrix C_star;
    Matrix E;  ///< fill-in on unobserved positions
    Matrix Y;  ///< Lagrange multiplier
    int iterations = 0;
    std::vector<double> residual_trace;  ///< ||M - E - L - C||_F / ||M||_F per iterate
    bool converged = false;
};

struct RecoveredSolution {
    Matrix L_prime;
    ColumnSet I_prime;
};

/// Augmented Lagrange multiplier iteration for
///   min ||L||_* + lambda * g(C)   s.t.  P_Omega(L + C) = P_Omega(M)
/// where g is the column-group, entrywise, or zero penalty selected by cfg.mode.
/// M_obs must vanish off the mask. Non-convergence is reported through
/// `converged`, never thrown.
SolverResult solve(const Matrix& M_obs, const ObservationMask& omega, const SolverConfig& cfg);

/// Default support threshold 1e-6 ||M_obs||_F / sqrt(n).
double default_support_threshold(const Matrix& M_obs);

/// I' = columns of C* with l2 norm above threshold; L' = L* with those columns zeroed.
RecoveredSolution extract_solution(const SolverResult& res, double threshold);

/// ||L||_* + lambda * penalty(C) for the given mode.
double objective(const Matrix& L, const Matrix& C, double lambda, SolverMode mode);

}  // namespace robustmc
