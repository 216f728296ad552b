#pragma once

#include "robustmc/solver.hpp"
#include "robustmc/synth.hpp"
#include "robustmc/theory.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace robustmc {

/// Outcome of one solve against ground truth. success requires all three of
/// exact clean recovery, exact corrupted-column identification and a
/// recovered matrix inside the true column space.
struct RecoveryReport {
    double clean_rel_error = 0;
    bool support_exact = false;
    bool colspace_ok = false;
    bool success = false;
    bool converged = false;
    int iterations = 0;
    double wall_time = 0;     ///< seconds
    std::string failure_reason;  ///< non-empty when the solver threw
};

RecoveryReport run_trial(const ProblemInstance& inst, const SolverConfig& cfg, double success_tol = 1e-3);

struct Axis {
    std::string name;  ///< one of rho, r, gamma
    std::vector<double> values;
};

struct GridSpec {
    Axis axis1{"rho", {}};
    Axis axis2{"r", {}};
    Eigen::Index p = 80;
    Eigen::Index n = 80;
    Eigen::Index r = 2;
    double gamma = 0.0;
    double rho = 1.0;
    int trials_per_cell = 5;
    std::uint64_t base_seed = 1;
    std::vector<SolverMode> modes{SolverMode::column_sparse};
    CorruptionScheme scheme;
    LambdaRule lambda_rule = LambdaRule::corollary1;
    std::optional<double> lambda;        ///< overrides lambda_rule when set
    std::optional<double> entry_lambda;  ///< entry_sparse weight; default 1/sqrt(max(p, n))
    SolverConfig solver;                 ///< tol, alpha, max_iter, u0 template
    double success_tol = 1e-3;
    int threads = 0;  ///< 0: ROBUSTMC_THREADS or hardware concurrency

    void validate() const;
};

struct GridResult {
    Axis axis1;
    Axis axis2;
    std::vector<SolverMode> modes;
    std::vector<Matrix> frequency;  ///< per mode, axis1.size() x axis2.size()
};

/// Seed of trial `trial` in cell (i, j).
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t i, std::size_t j, int trial);

/// Resolves the lambda a grid uses for one instance and mode.
double grid_lambda(const GridSpec& spec, const ProblemInstance& inst, SolverMode mode);

/// Worker count: explicit > ROBUSTMC_THREADS > hardware concurrency.
int resolve_threads(int requested);

/// Success frequency per cell and mode; every mode runs on the same instances.
/// Output is independent of the thread count.
GridResult run_grid(const GridSpec& spec);

enum class GridFormat { csv, pgm };
GridFormat parse_grid_format(const std::string& name);

/// CSV: header "<axis1>/<axis2>,v1,v2,..." then one row per axis1 value.
void write_grid_csv(std::ostream& out, const Axis& axis1, const Axis& axis2, const Matrix& freq);
/// Plain PGM (P2), maxval 255, pixel = round(255 * frequency); white = always succeeds.
void write_grid_pgm(std::ostream& out, const Matrix& freq);

struct ParsedGrid {
    Axis axis1;
    Axis axis2;
    Matrix freq;
};
ParsedGrid read_grid_csv(std::istream& in);

/// Writes one file per mode; with several modes "_<mode>" is inserted before the extension.
std::vector<std::string> emit(const GridResult& grid, GridFormat format, const std::string& path);

}  // namespace robustmc
