#include "robustmc/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace robustmc {

std::string to_string(SolverMode mode) {
    switch (mode) {
        case SolverMode::column_sparse: return "column_sparse";
        case SolverMode::entry_sparse: return "entry_sparse";
        case SolverMode::completion_only: return "completion_only";
    }
    return "unknown";
}

SolverMode parse_solver_mode(const std::string& name) {
    if (name == "column_sparse") return SolverMode::column_sparse;
    if (name == "entry_sparse") return SolverMode::entry_sparse;
    if (name == "completion_only") return SolverMode::completion_only;
    throw std::invalid_argument("unknown solver mode: " + name);
}

void SolverConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
    if (u0 && !(*u0 > 0.0)) throw std::invalid_argument("u0 must be positive");
    if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("tol must lie in (0, 1)");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
    if (support_threshold && !(*support_threshold >= 0.0)) {
        throw std::invalid_argument("support_threshold must be nonnegative");
    }
}

double default_support_threshold(const Matrix& M_obs) {
    if (M_obs.cols() == 0) return 0.0;
    return 1e-6 * M_obs.norm() / std::sqrt(static_cast<double>(M_obs.cols()));
}

double objective(const Matrix& L, const Matrix& C, double lambda, SolverMode mode) {
    const double low_rank = norm(L, NormKind::nuclear);
    switch (mode) {
        case SolverMode::column_sparse: return low_rank + lambda * norm(C, NormKind::one_two);
        case SolverMode::entry_sparse: return low_rank + lambda * C.cwiseAbs().sum();
        case SolverMode::completion_only: return low_rank;
    }
    return low_rank;
}

SolverResult solve(const Matrix& M, const ObservationMask& omega, const SolverConfig& cfg) {
    cfg.validate();
    require_finite(M, "solve");
    if (M.rows() != omega.rows() || M.cols() != omega.cols()) {
        throw std::invalid_argument("solve: mask and data dimensions differ");
    }
    const Matrix observed = omega.indicator();
    if ((M.array() * (1.0 - observed.array())).cwiseAbs().maxCoeff() != 0.0) {
        throw std::invalid_argument("solve: observed data must be zero off the mask");
    }
    const Matrix unobserved = (1.0 - observed.array()).matrix();

    SolverResult res;
    res.L_star = Matrix::Zero(M.rows(), M.cols());
    res.C_star = res.L_star;
    res.E = res.L_star;
    res.Y = res.L_star;

    const double m_norm = M.norm();
    if (m_norm == 0.0) {
        res.iterations = 1;
        res.residual_trace.push_back(0.0);
        res.converged = true;
        return res;
    }

    double u = cfg.u0 ? *cfg.u0 : 1.0 / norm(M, NormKind::one_two);
    Matrix& L = res.L_star;
    Matrix& C = res.C_star;
    Matrix& E = res.E;
    Matrix& Y = res.Y;

    for (int k = 0; k < cfg.max_iter; ++k) {
        const double inv_u = 1.0 / u;
        const Matrix scaled_y = inv_u * Y;

        L = shrink_singular(M - E - C + scaled_y, inv_u);

        switch (cfg.mode) {
            case SolverMode::column_sparse:
                C = shrink_columns(M - E - L + scaled_y, cfg.lambda * inv_u);
                break;
            case SolverMode::entry_sparse:
                C = shrink_entries(M - E - L + scaled_y, cfg.lambda * inv_u);
                break;
            case SolverMode::completion_only:
                break;
        }

        E = (M - L - C + scaled_y).cwiseProduct(unobserved);

        const Matrix residual = M - E - L - C;
        Y += u * residual;
        u *= cfg.alpha;

        res.iterations = k + 1;
        const double rel = residual.norm() / m_norm;
        res.residual_trace.push_back(rel);
        if (!std::isfinite(rel)) throw std::runtime_error("solve: iterate became non-finite");
        if (rel <= cfg.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

RecoveredSolution extract_solution(const SolverResult& res, double threshold) {
    if (!(threshold >= 0.0)) throw std::invalid_argument("extract_solution: threshold must be >= 0");
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < res.C_star.cols(); ++j) {
        if (res.C_star.col(j).norm() > threshold) support.push_back(j);
    }
    ColumnSet corrupted(res.C_star.cols(), std::move(support));
    return {project_columns(res.L_star, corrupted, /*complement=*/true), std::move(corrupted)};
}

}  // namespace robustmc
