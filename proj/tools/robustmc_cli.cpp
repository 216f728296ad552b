#include "robustmc/experiment.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace robustmc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

// Everything an instance needs; shared by trial and grid.
struct ProblemOpts {
    long p = 80;
    long n = 80;
    long r = 2;
    double rho = 1.0;
    double gamma = 0.0;
    std::string scheme = "single_adversarial";
    double magnitude = 10.0;
    std::optional<double> lambda;
    std::string lambda_rule = "corollary1";
    std::optional<double> entry_lambda;
    std::uint64_t seed = 1;
    double tol = 1e-6;
    int max_iter = 500;
    double alpha = 1.1;
    std::optional<double> u0;
    double success_tol = 1e-3;
};

void add_problem_options(CLI::App* sub, ProblemOpts& o) {
    sub->add_option("--p", o.p, "rows")->capture_default_str();
    sub->add_option("--n", o.n, "columns, corrupted included")->capture_default_str();
    sub->add_option("--r", o.r, "rank of the clean block")->capture_default_str();
    sub->add_option("--rho", o.rho, "observed fraction of clean entries")->capture_default_str();
    sub->add_option("--gamma", o.gamma, "corrupted column fraction")->capture_default_str();
    sub->add_option("--scheme", o.scheme, "single_adversarial | neutral_gaussian | adversarial_copy")
        ->capture_default_str();
    sub->add_option("--magnitude", o.magnitude, "single_adversarial spike")->capture_default_str();
    sub->add_option("--lambda", o.lambda, "explicit lambda (overrides --lambda-rule)");
    sub->add_option("--lambda-rule", o.lambda_rule, "theorem1 | corollary1 | corollary2 | corollary3 | theorem2")
        ->capture_default_str();
    sub->add_option("--entry-lambda", o.entry_lambda, "lambda for entry_sparse (default 1/sqrt(max(p,n)))");
    sub->add_option("--seed", o.seed, "base seed")->capture_default_str();
    sub->add_option("--tol", o.tol, "relative residual tolerance")->capture_default_str();
    sub->add_option("--max-iter", o.max_iter, "iteration cap")->capture_default_str();
    sub->add_option("--alpha", o.alpha, "penalty growth factor")->capture_default_str();
    sub->add_option("--u0", o.u0, "initial penalty (default 1/||M||_{1,2})");
    sub->add_option("--success-tol", o.success_tol, "relative error counted as exact")->capture_default_str();
}

GridSpec spec_from(const ProblemOpts& o) {
    GridSpec s;
    s.p = o.p;
    s.n = o.n;
    s.r = o.r;
    s.rho = o.rho;
    s.gamma = o.gamma;
    s.scheme = {parse_corruption_kind(o.scheme), o.magnitude};
    s.lambda = o.lambda;
    s.lambda_rule = parse_lambda_rule(o.lambda_rule);
    s.entry_lambda = o.entry_lambda;
    s.base_seed = o.seed;
    s.solver.tol = o.tol;
    s.solver.max_iter = o.max_iter;
    s.solver.alpha = o.alpha;
    s.solver.u0 = o.u0;
    s.success_tol = o.success_tol;
    return s;
}

std::vector<double> default_axis(const std::string& name) {
    std::vector<double> v;
    if (name == "rho")
        for (int k = 0; k < 10; ++k) v.push_back(0.05 + 0.1 * k);
    else if (name == "r")
        for (int k = 1; k <= 10; ++k) v.push_back(k);
    else if (name == "gamma")
        for (int k = 1; k <= 10; ++k) v.push_back(0.025 * k);
    return v;
}

// trial ---------------------------------------------------------------------

int run_trial_cmd(const ProblemOpts& o, const std::string& mode, const std::string& save_dir) {
    const GridSpec spec = spec_from(o);
    const ProblemInstance inst = build_instance(spec.p, spec.n, spec.r, spec.gamma, spec.rho, spec.scheme, spec.base_seed);
    if (!save_dir.empty()) save_instance(save_dir, inst);

    SolverConfig cfg = spec.solver;
    cfg.mode = parse_solver_mode(mode);
    cfg.lambda = grid_lambda(spec, inst, cfg.mode);
    cfg.validate();

    const RecoveryReport rep = run_trial(inst, cfg, spec.success_tol);
    std::cout << "mode=" << to_string(cfg.mode) << '\n'
              << "lambda=" << format_double(cfg.lambda) << '\n'
              << "corrupted=" << format_columns(inst.I0) << '\n'
              << "iterations=" << rep.iterations << '\n'
              << "converged=" << rep.converged << '\n'
              << "clean_rel_error=" << format_double(rep.clean_rel_error) << '\n'
              << "support_exact=" << rep.support_exact << '\n'
              << "colspace_ok=" << rep.colspace_ok << '\n'
              << "success=" << rep.success << '\n'
              << "wall_time=" << rep.wall_time << '\n';
    if (!rep.failure_reason.empty()) {
        std::cerr << "solver error: " << rep.failure_reason << '\n';
        return kExitSolver;
    }
    return 0;
}

// grid ----------------------------------------------------------------------

struct GridOpts {
    std::string axis1 = "rho";
    std::string axis2 = "r";
    std::vector<double> values1;
    std::vector<double> values2;
    int trials = 5;
    std::vector<std::string> modes{"column_sparse"};
    int threads = 0;
    std::string out = "grid.csv";
    std::string format = "csv";
};

int run_grid_cmd(const ProblemOpts& o, const GridOpts& g) {
    GridSpec spec = spec_from(o);
    spec.axis1 = {g.axis1, g.values1.empty() ? default_axis(g.axis1) : g.values1};
    spec.axis2 = {g.axis2, g.values2.empty() ? default_axis(g.axis2) : g.values2};
    spec.trials_per_cell = g.trials;
    spec.modes.clear();
    for (const auto& m : g.modes) spec.modes.push_back(parse_solver_mode(m));
    spec.threads = g.threads;
    const GridFormat format = parse_grid_format(g.format);
    spec.validate();

    const GridResult res = run_grid(spec);
    std::vector<std::string> written;
    try {
        written = emit(res, format, g.out);
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument(e.what());  // bad output path
    }
    for (const auto& path : written) std::cout << path << '\n';
    return 0;
}

// lemma ---------------------------------------------------------------------

struct LemmaOpts {
    std::string which = "L5";
    long p = 30;
    long n1 = 60;
    long r = 1;
    std::size_t m0 = 900;
    double beta = 1.5;
    int trials = 100;
    std::uint64_t seed = 1;
    std::string out;
};

int run_lemma_cmd(const LemmaOpts& o) {
    const LemmaReport rep = lemma_monte_carlo(parse_lemma_kind(o.which), o.p, o.n1, o.r, o.m0, o.beta, o.trials, Rng(o.seed));
    std::cout << "lemma=" << o.which << '\n'
              << "trials=" << rep.trials << '\n'
              << "violations=" << rep.violations << '\n'
              << "applicable_trials=" << rep.applicable_trials << '\n'
              << "applicable_violations=" << rep.applicable_violations << '\n';
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw std::invalid_argument("cannot open " + o.out);
        write_lemma_csv(f, rep);
    }
    return 0;
}

// golfing -------------------------------------------------------------------

struct GolfOpts {
    long p = 40;
    long n1 = 40;
    long r = 1;
    std::optional<std::size_t> q;
    std::size_t s = 6;
    std::uint64_t seed = 1;
};

int run_golfing_cmd(const GolfOpts& o) {
    Rng rng(o.seed);
    const Matrix u = orthonormalize(rng.gaussian(o.p, o.r));
    const Matrix v = orthonormalize(rng.gaussian(o.n1, o.r));
    const TangentSpace t(u, v);
    const std::size_t q = o.q ? *o.q : static_cast<std::size_t>(std::ceil(0.5 * o.p * o.n1));
    const auto batches = sample_batch_replacement(o.p, o.n1, o.s, q, rng);
    const GolfingResult res = golfing_run(u * v.transpose(), batches, t, q);
    std::cout << "step,error\n0," << format_double(std::sqrt(static_cast<double>(o.r))) << '\n';
    for (std::size_t k = 0; k < res.error_trace.size(); ++k)
        std::cout << k + 1 << ',' << format_double(res.error_trace[k]) << '\n';
    return 0;
}

// certify -------------------------------------------------------------------

struct CertOpts {
    std::string q, u, v, c, mask;
    std::string corrupted;
    double lambda = 0;
    std::optional<std::size_t> m;
};

void print_check(const ConditionCheck& c) {
    std::cout << c.name << ": " << (c.holds ? "holds" : "fails") << " lhs=" << format_double(c.lhs)
              << " rhs=" << format_double(c.rhs) << " slack=" << format_double(c.slack) << '\n';
}

// Unreadable or malformed inputs are configuration errors, not solver errors.
Matrix load_input(const std::string& path) {
    try {
        return load_matrix(path);
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument(e.what());
    }
}

int run_certify_cmd(const CertOpts& o) {
    CertificateInput in;
    in.Q_hat = load_input(o.q);
    const Matrix u = load_input(o.u);
    const Matrix v = load_input(o.v);
    in.T_hat = TangentSpace(u, v);
    in.UV_t = u * v.transpose();
    in.C_hat = o.c.empty() ? Matrix::Zero(in.Q_hat.rows(), in.Q_hat.cols()) : load_input(o.c);
    if (o.mask.empty()) {
        in.omega = ObservationMask::full(in.Q_hat.rows(), in.Q_hat.cols());
    } else {
        std::ifstream f(o.mask);
        if (!f) throw std::invalid_argument("cannot open " + o.mask);
        try {
            in.omega = read_mask(f);
        } catch (const std::runtime_error& e) {
            throw std::invalid_argument(e.what());
        }
    }
    in.I0 = parse_columns(in.Q_hat.cols(), o.corrupted);
    in.lambda = o.lambda;
    in.p = in.Q_hat.rows();
    in.n1 = in.Q_hat.cols() - static_cast<Eigen::Index>(in.I0.size());
    in.m = o.m ? *o.m : in.omega.count_in_columns(in.I0.complement().members());

    const CertificateReport rep = dual_certificate_check(in);
    for (const auto* c : {&rep.a, &rep.b_prime, &rep.c_prime, &rep.d, &rep.e_prime}) print_check(*c);
    std::cout << "witness_residual=" << format_double(rep.witness_residual) << '\n'
              << "all_hold=" << rep.all_hold() << '\n'
              << "strict=" << rep.strict << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Matrix completion with corrupted columns: solver, experiment grids and validators"};
    app.require_subcommand(1);

    ProblemOpts trial_opts;
    std::string trial_mode = "column_sparse";
    std::string save_dir;
    auto* trial = app.add_subcommand("trial", "generate one instance and solve it");
    add_problem_options(trial, trial_opts);
    trial->add_option("--mode", trial_mode, "column_sparse | entry_sparse | completion_only")->capture_default_str();
    trial->add_option("--save-instance", save_dir, "write the generated instance to this directory");

    ProblemOpts grid_opts;
    GridOpts g;
    auto* grid = app.add_subcommand("grid", "success-frequency grid over two parameters");
    add_problem_options(grid, grid_opts);
    grid->add_option("--axis1", g.axis1, "rho | r | gamma")->capture_default_str();
    grid->add_option("--axis2", g.axis2, "rho | r | gamma")->capture_default_str();
    grid->add_option("--values1", g.values1, "comma-separated axis1 values")->delimiter(',');
    grid->add_option("--values2", g.values2, "comma-separated axis2 values")->delimiter(',');
    grid->add_option("--trials", g.trials, "trials per cell")->capture_default_str();
    grid->add_option("--mode", g.modes, "solver modes (repeat or comma-separate)")->delimiter(',');
    grid->add_option("--threads", g.threads, "worker threads (0: ROBUSTMC_THREADS or all cores)");
    grid->add_option("--out", g.out, "output path")->capture_default_str();
    grid->add_option("--format", g.format, "csv | pgm")->capture_default_str();

    LemmaOpts l;
    auto* lemma = app.add_subcommand("lemma", "Monte-Carlo check of a concentration bound");
    lemma->add_option("--which", l.which, "L5 | L6 | L7 | L8")->capture_default_str();
    lemma->add_option("--p", l.p)->capture_default_str();
    lemma->add_option("--n1", l.n1)->capture_default_str();
    lemma->add_option("--r", l.r)->capture_default_str();
    lemma->add_option("--m0", l.m0, "sample size")->capture_default_str();
    lemma->add_option("--beta", l.beta)->capture_default_str();
    lemma->add_option("--trials", l.trials)->capture_default_str();
    lemma->add_option("--seed", l.seed)->capture_default_str();
    lemma->add_option("--out", l.out, "per-trial CSV");

    GolfOpts go;
    auto* golf = app.add_subcommand("golfing", "golfing recursion on a random rank-r tangent space");
    golf->add_option("--p", go.p)->capture_default_str();
    golf->add_option("--n1", go.n1)->capture_default_str();
    golf->add_option("--r", go.r)->capture_default_str();
    golf->add_option("--q", go.q, "batch size (default ceil(p n1 / 2))");
    golf->add_option("--s", go.s, "number of batches")->capture_default_str();
    golf->add_option("--seed", go.seed)->capture_default_str();

    CertOpts co;
    auto* cert = app.add_subcommand("certify", "check the dual-certificate conditions of a given Q");
    cert->add_option("--Q", co.q, "candidate certificate")->required();
    cert->add_option("--U", co.u, "orthonormal column basis")->required();
    cert->add_option("--V", co.v, "orthonormal row basis")->required();
    cert->add_option("--C", co.c, "oracle corruption estimate (default zero)");
    cert->add_option("--mask", co.mask, "observation mask (default full)");
    cert->add_option("--corrupted", co.corrupted, "comma-separated corrupted columns")->capture_default_str();
    cert->add_option("--lambda", co.lambda)->required();
    cert->add_option("--m", co.m, "clean observed entries (default from mask)");

    // Keys live under a [subcommand] section (or as subcommand.key); the
    // flag may appear before or after the subcommand name.
    app.set_config("--config", "", "INI file, e.g. [trial] with p=40 lines");
    app.allow_config_extras(CLI::config_extras_mode::error);
    for (auto* sub : {trial, grid, lemma, golf, cert}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*trial) return run_trial_cmd(trial_opts, trial_mode, save_dir);
        if (*grid) return run_grid_cmd(grid_opts, g);
        if (*lemma) return run_lemma_cmd(l);
        if (*golf) return run_golfing_cmd(go);
        if (*cert) return run_certify_cmd(co);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SvdError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    }
    return 0;
}
