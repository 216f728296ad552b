#include "robustmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace robustmc {

RecoveryReport run_trial(const ProblemInstance& inst, const SolverConfig& cfg, double success_tol) {
    RecoveryReport rep;
    const auto start = std::chrono::steady_clock::now();
    try {
        const SolverResult res = solve(inst.M_obs, inst.omega, cfg);
        const double threshold = cfg.support_threshold ? *cfg.support_threshold : default_support_threshold(inst.M_obs);
        const RecoveredSolution sol = extract_solution(res, threshold);

        rep.iterations = res.iterations;
        rep.converged = res.converged;

        const double l0_norm = inst.L0.norm();
        const double err = (project_columns(sol.L_prime, inst.I0, true) - inst.L0).norm();
        rep.clean_rel_error = l0_norm > 0.0 ? err / l0_norm : err;
        rep.support_exact = sol.I_prime == inst.I0;

        const SvdFactors f = svd(inst.L0);
        const Matrix U0 = f.U.leftCols(f.numerical_rank());
        const Matrix outside = sol.L_prime - U0 * (U0.transpose() * sol.L_prime);
        rep.colspace_ok = outside.norm() <= success_tol * sol.L_prime.norm();

        rep.success = rep.clean_rel_error <= success_tol && rep.support_exact && rep.colspace_ok;
    } catch (const std::exception& e) {
        rep.failure_reason = e.what();
        rep.success = false;
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

bool valid_axis_name(const std::string& name) { return name == "rho" || name == "r" || name == "gamma"; }

struct CellParams {
    Eigen::Index r;
    double gamma;
    double rho;
};

CellParams cell_params(const GridSpec& spec, double v1, double v2) {
    CellParams c{spec.r, spec.gamma, spec.rho};
    auto assign = [&c](const std::string& name, double v) {
        if (name == "rho") c.rho = v;
        else if (name == "gamma") c.gamma = v;
        else c.r = static_cast<Eigen::Index>(std::llround(v));
    };
    assign(spec.axis1.name, v1);
    assign(spec.axis2.name, v2);
    return c;
}

}  // namespace

void GridSpec::validate() const {
    if (!valid_axis_name(axis1.name) || !valid_axis_name(axis2.name)) {
        throw std::invalid_argument("grid axes must be rho, r or gamma");
    }
    if (axis1.name == axis2.name) throw std::invalid_argument("grid axes must differ");
    if (axis1.values.empty() || axis2.values.empty()) throw std::invalid_argument("grid axes must be nonempty");
    if (trials_per_cell < 1) throw std::invalid_argument("trials per cell must be at least 1");
    if (modes.empty()) throw std::invalid_argument("at least one solver mode is required");
    if (p < 1 || n < 1) throw std::invalid_argument("grid dimensions must be positive");
    if (!(success_tol > 0.0)) throw std::invalid_argument("success tolerance must be positive");
    if (lambda && !(*lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (entry_lambda && !(*entry_lambda > 0.0)) throw std::invalid_argument("entry lambda must be positive");
    SolverConfig probe = solver;
    probe.lambda = 1.0;
    probe.validate();
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t i, std::size_t j, int trial) {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(i) + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ (static_cast<std::uint64_t>(j) + 0xc2b2ae3d27d4eb4fULL));
    h = mix64(h ^ (static_cast<std::uint64_t>(trial) + 0x165667b19e3779f9ULL));
    return base_seed + h;
}

double grid_lambda(const GridSpec& spec, const ProblemInstance& inst, SolverMode mode) {
    if (mode == SolverMode::entry_sparse) {
        if (spec.entry_lambda) return *spec.entry_lambda;
        return 1.0 / std::sqrt(static_cast<double>(std::max(inst.p, inst.n)));
    }
    if (mode == SolverMode::completion_only) return 1.0;  // unused by the solver
    if (spec.lambda) return *spec.lambda;
    TheoremParams params;
    params.p = static_cast<double>(inst.p);
    params.n = static_cast<double>(inst.n);
    params.n1 = static_cast<double>(inst.n1);
    params.r_bar = static_cast<double>(std::max<Eigen::Index>(inst.r, 1));
    params.gamma_bar = static_cast<double>(inst.I0.size()) / static_cast<double>(inst.n);
    params.rho_lower = inst.rho;
    if (spec.lambda_rule == LambdaRule::theorem1 || spec.lambda_rule == LambdaRule::corollary2) {
        const Matrix clean = restrict_columns(inst.L0, inst.I0, 0.0);
        const TangentSpace t = TangentSpace::from_matrix(clean);
        params.mu0 = t.rank() > 0 ? tangent_incoherence(t) : 1.0;
    }
    return lambda_select(spec.lambda_rule, params);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ROBUSTMC_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

GridResult run_grid(const GridSpec& spec) {
    spec.validate();
    const std::size_t rows = spec.axis1.values.size();
    const std::size_t cols = spec.axis2.values.size();
    const std::size_t trials = static_cast<std::size_t>(spec.trials_per_cell);
    const std::size_t modes = spec.modes.size();
    const std::size_t tasks = rows * cols * trials;

    // One slot per (task, mode); written by exactly one worker.
    std::vector<unsigned char> success(tasks * modes, 0);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t task = next++; task < tasks; task = next++) {
            const std::size_t cell = task / trials;
            const int trial = static_cast<int>(task % trials);
            const std::size_t i = cell / cols;
            const std::size_t j = cell % cols;
            const CellParams c = cell_params(spec, spec.axis1.values[i], spec.axis2.values[j]);
            try {
                const ProblemInstance inst = build_instance(spec.p, spec.n, c.r, c.gamma, c.rho, spec.scheme,
                                                            cell_seed(spec.base_seed, i, j, trial));
                for (std::size_t k = 0; k < modes; ++k) {
                    SolverConfig cfg = spec.solver;
                    cfg.mode = spec.modes[k];
                    cfg.lambda = grid_lambda(spec, inst, cfg.mode);
                    success[task * modes + k] = run_trial(inst, cfg, spec.success_tol).success ? 1 : 0;
                }
            } catch (const std::exception&) {
                // Infeasible cell parameters count as failures.
            }
        }
    };

    const int threads = std::min<int>(resolve_threads(spec.threads), static_cast<int>(std::max<std::size_t>(tasks, 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    GridResult out{spec.axis1, spec.axis2, spec.modes, {}};
    for (std::size_t k = 0; k < modes; ++k) {
        Matrix freq = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t task = 0; task < tasks; ++task) {
            const std::size_t cell = task / trials;
            freq(static_cast<Eigen::Index>(cell / cols), static_cast<Eigen::Index>(cell % cols)) +=
                success[task * modes + k];
        }
        out.frequency.push_back(freq / static_cast<double>(trials));
    }
    return out;
}

// ---------------------------------------------------------------------------

GridFormat parse_grid_format(const std::string& name) {
    if (name == "csv") return GridFormat::csv;
    if (name == "pgm") return GridFormat::pgm;
    throw std::invalid_argument("unknown output format: " + name);
}

void write_grid_csv(std::ostream& out, const Axis& axis1, const Axis& axis2, const Matrix& freq) {
    out << axis1.name << '/' << axis2.name;
    for (double v : axis2.values) out << ',' << format_double(v);
    out << '\n';
    for (Eigen::Index i = 0; i < freq.rows(); ++i) {
        out << format_double(axis1.values[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < freq.cols(); ++j) out << ',' << format_double(freq(i, j));
        out << '\n';
    }
}

void write_grid_pgm(std::ostream& out, const Matrix& freq) {
    out << "P2\n" << freq.cols() << ' ' << freq.rows() << "\n255\n";
    for (Eigen::Index i = 0; i < freq.rows(); ++i) {
        for (Eigen::Index j = 0; j < freq.cols(); ++j) {
            if (j) out << ' ';
            out << std::lround(255.0 * std::clamp(freq(i, j), 0.0, 1.0));
        }
        out << '\n';
    }
}

ParsedGrid read_grid_csv(std::istream& in) {
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_grid_csv: empty input");
    const auto header = split(line);
    const auto slash = header.empty() ? std::string::npos : header[0].find('/');
    if (slash == std::string::npos) throw std::runtime_error("read_grid_csv: bad header");
    ParsedGrid g;
    g.axis1.name = header[0].substr(0, slash);
    g.axis2.name = header[0].substr(slash + 1);
    for (std::size_t k = 1; k < header.size(); ++k) g.axis2.values.push_back(std::stod(header[k]));
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) throw std::runtime_error("read_grid_csv: ragged row");
        g.axis1.values.push_back(std::stod(cells[0]));
        std::vector<double> row;
        for (std::size_t k = 1; k < cells.size(); ++k) row.push_back(std::stod(cells[k]));
        rows.push_back(std::move(row));
    }
    g.freq.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(g.axis2.values.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            g.freq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return g;
}

std::vector<std::string> emit(const GridResult& grid, GridFormat format, const std::string& path) {
    std::vector<std::string> written;
    for (std::size_t k = 0; k < grid.modes.size(); ++k) {
        std::string target = path;
        if (grid.modes.size() > 1) {
            const auto dot = path.find_last_of('.');
            const auto sep = path.find_last_of('/');
            const bool has_ext = dot != std::string::npos && (sep == std::string::npos || dot > sep);
            const std::string suffix = "_" + to_string(grid.modes[k]);
            target = has_ext ? path.substr(0, dot) + suffix + path.substr(dot) : path + suffix;
        }
        std::ofstream out(target);
        if (!out) throw std::runtime_error("cannot open " + target + " for writing");
        if (format == GridFormat::csv)
            write_grid_csv(out, grid.axis1, grid.axis2, grid.frequency[k]);
        else
            write_grid_pgm(out, grid.frequency[k]);
        if (!out) throw std::runtime_error("write failed: " + target);
        written.push_back(target);
    }
    return written;
}

}  // namespace robustmc
