#include "robustmc/theory.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace robustmc {

namespace {

ConditionCheck upper_bound(std::string name, double lhs, double rhs) {
    return {std::move(name), lhs <= rhs, lhs, rhs, rhs - lhs};
}

ConditionCheck lower_bound(std::string name, double lhs, double rhs) {
    return {std::move(name), lhs >= rhs, lhs, rhs, lhs - rhs};
}

ConditionCheck dimension_check(const TheoremParams& t) {
    ConditionCheck c;
    c.name = "n1 >= p >= 32";
    c.lhs = t.n1;
    c.rhs = t.p;
    c.slack = std::min(t.n1 - t.p, t.p - 32.0);
    c.holds = c.slack >= 0.0;
    return c;
}

void require_positive(double v, const char* field, LambdaRule rule) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("lambda_select(" + to_string(rule) + "): " + field + " must be positive");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

double incoherence_mu(const Matrix& basis, Eigen::Index dim, Eigen::Index r) {
    if (r < 1) throw std::invalid_argument("incoherence_mu: rank must be positive");
    if (basis.rows() != dim || basis.cols() != r) {
        throw std::invalid_argument("incoherence_mu: basis must be dim x r");
    }
    if (orthonormality_error(basis) > 1e-8) {
        throw std::invalid_argument("incoherence_mu: basis columns are not orthonormal");
    }
    return static_cast<double>(dim) / static_cast<double>(r) * basis.rowwise().squaredNorm().maxCoeff();
}

double tangent_incoherence(const TangentSpace& t) {
    return std::max(incoherence_mu(t.U(), t.rows(), t.rank()), incoherence_mu(t.V(), t.cols(), t.rank()));
}

Matrix orthonormalize(const Matrix& a) {
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

Matrix orthogonal_complement(const Matrix& basis) {
    const Eigen::Index p = basis.rows();
    const Eigen::Index r = basis.cols();
    if (r == 0) return Matrix::Identity(p, p);
    Eigen::HouseholderQR<Matrix> qr(basis);
    const Matrix q = qr.householderQ() * Matrix::Identity(p, p);
    return q.rightCols(p - r);
}

// ---------------------------------------------------------------------------

std::string to_string(LambdaRule rule) {
    switch (rule) {
        case LambdaRule::theorem1: return "theorem1";
        case LambdaRule::corollary1: return "corollary1";
        case LambdaRule::corollary2: return "corollary2";
        case LambdaRule::corollary3: return "corollary3";
        case LambdaRule::theorem2: return "theorem2";
    }
    return "unknown";
}

LambdaRule parse_lambda_rule(const std::string& name) {
    if (name == "theorem1") return LambdaRule::theorem1;
    if (name == "corollary1") return LambdaRule::corollary1;
    if (name == "corollary2") return LambdaRule::corollary2;
    if (name == "corollary3") return LambdaRule::corollary3;
    if (name == "theorem2") return LambdaRule::theorem2;
    throw std::invalid_argument("unknown lambda rule: " + name);
}

double lambda_select(LambdaRule rule, const TheoremParams& t) {
    switch (rule) {
        case LambdaRule::theorem1: {
            require_positive(t.rho_lower, "rho_lower", rule);
            require_positive(t.gamma_bar, "gamma_bar", rule);
            require_positive(t.r_bar, "r_bar", rule);
            require_positive(t.mu0, "mu0", rule);
            require_positive(t.n, "n", rule);
            require_positive(t.n1, "n1", rule);
            const double lg = std::log(4.0 * t.n1);
            return std::sqrt(t.rho_lower / (t.gamma_bar * t.r_bar * t.mu0 * t.n * lg * lg)) / 48.0;
        }
        case LambdaRule::corollary1:
            require_positive(t.p, "p", rule);
            require_positive(t.n, "n", rule);
            return std::sqrt(std::pow(t.p, 0.25) / t.n);
        case LambdaRule::corollary2: {
            require_positive(t.mu0, "mu0", rule);
            require_positive(t.r_bar, "r_bar", rule);
            require_positive(t.n, "n", rule);
            require_positive(t.n1, "n1", rule);
            const double lg = std::log(4.0 * t.n1);
            return t.mu0 * t.r_bar * lg * lg / std::sqrt(t.n);
        }
        case LambdaRule::corollary3:
            if (t.gamma_bar != 0.0) {
                throw std::invalid_argument("lambda_select(corollary3): requires gamma_bar == 0");
            }
            require_positive(t.n, "n", rule);
            return t.n;
        case LambdaRule::theorem2:
            require_positive(t.gamma_bar, "gamma_bar", rule);
            require_positive(t.n, "n", rule);
            return 1.0 / (4.0 * std::sqrt(t.gamma_bar * t.n));
    }
    throw std::invalid_argument("lambda_select: unknown rule");
}

std::vector<ConditionCheck> check_theorem_conditions(LambdaRule rule, const TheoremParams& t) {
    std::vector<ConditionCheck> out;
    const double lg = std::log(4.0 * t.n1);
    const double gamma_ratio = t.gamma_bar / (1.0 - t.gamma_bar);
    const double mu = t.mu0;
    const double r = t.r_bar;
    const double rho = t.rho_lower;
    switch (rule) {
        case LambdaRule::theorem1: {
            out.push_back(dimension_check(t));
            out.push_back(lower_bound("rho >= eta1 mu0^2 r^2 log^3(4n1) / p", rho,
                                      t.eta1 * mu * mu * r * r * std::pow(lg, 3) / t.p));
            const double inflate = 1.0 + mu * r / (rho * std::sqrt(t.p));
            out.push_back(upper_bound(
                "gamma/(1-gamma) <= eta2 rho^2 / ((1 + mu0 r/(rho sqrt p))^2 mu0^3 r^3 log^6(4n1))",
                gamma_ratio, t.eta2 * rho * rho / (inflate * inflate * std::pow(mu * r, 3) * std::pow(lg, 6))));
            break;
        }
        case LambdaRule::corollary1:
            out.push_back(dimension_check(t));
            out.push_back(upper_bound("r <= eta1 / mu0", r, t.eta1 / mu));
            out.push_back(lower_bound("rho >= eta2 log(4n1) / p^(1/4)", rho, t.eta2 * lg / std::pow(t.p, 0.25)));
            out.push_back(upper_bound("gamma <= eta3 / sqrt(p)", t.gamma_bar, t.eta3 / std::sqrt(t.p)));
            break;
        case LambdaRule::corollary2:
            out.push_back(dimension_check(t));
            out.push_back(lower_bound("rho >= 0.1", rho, 0.1));
            out.push_back(upper_bound("r <= eta1 sqrt(p) / (mu0 log^(3/2)(4n1))", r,
                                      t.eta1 * std::sqrt(t.p) / (mu * std::pow(lg, 1.5))));
            out.push_back(upper_bound("gamma <= eta2 / (mu0^3 r^3 log^6(4n1))", t.gamma_bar,
                                      t.eta2 / (std::pow(mu * r, 3) * std::pow(lg, 6))));
            break;
        case LambdaRule::corollary3: {
            out.push_back(upper_bound("gamma == 0", t.gamma_bar, 0.0));
            const double m = rho * t.p * t.n1;
            const double lgn = std::log(4.0 * t.n);
            out.push_back(lower_bound("m >= eta1 mu0^2 r^2 n log^2(4n)", m, t.eta1 * mu * mu * r * r * t.n * lgn * lgn));
            break;
        }
        case LambdaRule::theorem2: {
            out.push_back(dimension_check(t));
            const double lp = std::log(t.p);
            out.push_back(lower_bound("rho >= eta1 mu0^2 r^2 log^2(4n1) / (sqrt(p) log p)", rho,
                                      t.eta1 * mu * mu * r * r * lg * lg / (std::sqrt(t.p) * lp)));
            out.push_back(upper_bound("gamma/(1-gamma) <= eta2 rho^2 / (mu0^2 r^2 log^2(4n1) / log^2 p)",
                                      gamma_ratio, t.eta2 * rho * rho / (mu * mu * r * r * lg * lg / (lp * lp))));
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

double tangent_sampling_gap(const TangentSpace& t, const ObservationMask& omega, std::size_t m0) {
    if (m0 == 0) throw std::invalid_argument("tangent_sampling_gap: m0 must be positive");
    const Eigen::Index p = t.rows();
    const Eigen::Index n1 = t.cols();
    const Eigen::Index r = t.rank();
    if (omega.rows() != p || omega.cols() != n1) {
        throw std::invalid_argument("tangent_sampling_gap: mask dimension mismatch");
    }
    const Eigen::Index dim = t.dimension();
    if (dim == 0) return 0.0;
    if (dim > kMaxTangentDimension) {
        throw std::invalid_argument("tangent_sampling_gap: tangent dimension " + std::to_string(dim) +
                                    " exceeds dense cap " + std::to_string(kMaxTangentDimension));
    }

    // Orthonormal basis of T: {U_a e_j^T} and {Uperp_b V_a^T}. Row k of W holds
    // the k-th observed entry of every basis element, so the restricted operator
    // is (p n1 / m0) W^T W - I.
    const Matrix& U = t.U();
    const Matrix& V = t.V();
    const Matrix Uperp = orthogonal_complement(U);
    Matrix W = Matrix::Zero(static_cast<Eigen::Index>(omega.size()), dim);
    Eigen::Index row = 0;
    for (const auto& e : omega.entries()) {
        for (Eigen::Index a = 0; a < r; ++a) W(row, a * n1 + e.col) = U(e.row, a);
        for (Eigen::Index b = 0; b < p - r; ++b) {
            const double ub = Uperp(e.row, b);
            for (Eigen::Index a = 0; a < r; ++a) W(row, r * n1 + b * r + a) = ub * V(e.col, a);
        }
        ++row;
    }
    const double scale = static_cast<double>(p * n1) / static_cast<double>(m0);
    Matrix G = scale * (W.transpose() * W);
    G.diagonal().array() -= 1.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw std::runtime_error("tangent_sampling_gap: eigensolver failed");
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double sampling_gap_bound(double mu0, double r, double p, double n1, double m0, double beta) {
    return std::sqrt(16.0 * beta * mu0 * r * (n1 + p) * std::log(n1 + p) / (3.0 * m0));
}

bool sampling_gap_bound_applies(double mu0, double r, double p, double n1, double m0, double beta) {
    return beta > 1.0 && m0 > 16.0 / 3.0 * mu0 * r * (n1 + p) * beta * std::log(n1 + p);
}

// ---------------------------------------------------------------------------

GolfingResult golfing_run(const Matrix& target, const std::vector<ObservationMask>& batches,
                          const TangentSpace& t, std::size_t q) {
    const Eigen::Index p = t.rows();
    const Eigen::Index n1 = t.cols();
    if (target.rows() != p || target.cols() != n1) {
        throw std::invalid_argument("golfing_run: target dimension mismatch");
    }
    if (target.size() > 0 &&
        (project_tangent(target, t) - target).norm() > 1e-8 * std::max(1.0, target.norm())) {
        throw std::invalid_argument("golfing_run: target is not in the tangent space");
    }
    GolfingResult out{Matrix::Zero(p, n1), {}};
    if (batches.empty()) return out;
    if (q == 0) throw std::invalid_argument("golfing_run: batch size must be positive");
    const double scale = static_cast<double>(p * n1) / static_cast<double>(q);
    for (const auto& batch : batches) {
        if (batch.size() != q) throw std::invalid_argument("golfing_run: batch size differs from q");
        out.Y += scale * project_mask(target - project_tangent(out.Y, t), batch);
        out.error_trace.push_back((project_tangent(out.Y, t) - target).norm());
    }
    return out;
}

// ---------------------------------------------------------------------------

CertificateReport dual_certificate_check(const CertificateInput& in) {
    const Matrix& Q = in.Q_hat;
    const Eigen::Index n = Q.cols();
    require_same_shape(Q, in.UV_t, "dual_certificate_check");
    require_same_shape(Q, in.C_hat, "dual_certificate_check");
    if (in.I0.n() != n || in.omega.rows() != Q.rows() || in.omega.cols() != n ||
        in.T_hat.rows() != Q.rows() || in.T_hat.cols() != n) {
        throw std::invalid_argument("dual_certificate_check: inconsistent dimensions");
    }

    CertificateReport rep;

    // (a)
    const Matrix off_mask = project_mask_complement(Q, in.omega);
    const double off = off_mask.size() ? off_mask.cwiseAbs().maxCoeff() : 0.0;
    rep.a = {"Q in Omega", off <= 1e-10, off, 0.0, -off};

    // (b')
    const Matrix residual = project_tangent(Q, in.T_hat) - in.UV_t;
    const Matrix D = restrict_columns(project_columns(residual, in.I0, /*complement=*/true), in.I0, 0.0);
    const double d_norm = D.norm();
    const double b_bound = 0.5 * std::sqrt(static_cast<double>(in.m) /
                                           (2.0 * static_cast<double>(in.p) * static_cast<double>(in.n1))) *
                           in.lambda;
    rep.b_prime = upper_bound("||D||_F <= 1/2 sqrt(m/(2 p n1)) lambda", d_norm, b_bound);
    rep.witness_residual =
        (project_tangent(embed_columns(D, in.I0, n), in.T_hat) - residual).norm();

    // (c')
    rep.c_prime = upper_bound("||P_T_perp(Q)|| <= 1/2", norm(project_tangent(Q, in.T_hat, true), NormKind::spectral), 0.5);

    // (d): columns of the support of C_hat carry lambda * C_i / ||C_i||; the
    // remaining corrupted columns have norm at most lambda.
    constexpr double kDirectionTol = 1e-8;
    double direction_dev = 0.0;
    double excess = -in.lambda;  // max ||Q_i|| - lambda over I0 outside supp(C_hat)
    bool support_inside = true;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double c_norm = in.C_hat.col(j).norm();
        const bool corrupted = in.I0.contains(j);
        if (c_norm > 0.0) {
            if (!corrupted) {
                support_inside = false;
                continue;
            }
            const double dev = (Q.col(j) - in.lambda * in.C_hat.col(j) / c_norm).norm();
            direction_dev = std::max(direction_dev, dev);
        } else if (corrupted) {
            excess = std::max(excess, Q.col(j).norm() - in.lambda);
        }
    }
    rep.d.name = "P_I0(Q) in lambda G(C_hat)";
    rep.d.lhs = direction_dev;
    rep.d.rhs = kDirectionTol;
    rep.d.slack = std::min(kDirectionTol - direction_dev, -excess);
    rep.d.holds = support_inside && direction_dev <= kDirectionTol &&
                  excess <= 1e-12 * std::max(1.0, in.lambda);

    // (e')
    rep.e_prime = upper_bound("||P_I0c(Q)||_{inf,2} <= lambda/2",
                              norm(project_columns(Q, in.I0, true), NormKind::inf_two), in.lambda / 2.0);

    rep.strict = rep.c_prime.lhs < rep.c_prime.rhs && rep.e_prime.lhs < rep.e_prime.rhs;
    return rep;
}

PerturbationCheck perturbation_inequality_check(const Matrix& d1, const Matrix& d2, const TangentSpace& t,
                                                const ColumnSet& I0, const ObservationMask& omega,
                                                std::size_t m) {
    require_same_shape(d1, d2, "perturbation_inequality_check");
    if (m == 0) throw std::invalid_argument("perturbation_inequality_check: m must be positive");
    const Matrix sum = project_mask(d1 + d2, omega);
    const double scale = std::max({1.0, d1.cwiseAbs().maxCoeff(), d2.cwiseAbs().maxCoeff()});
    if (sum.size() && sum.cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument("perturbation_inequality_check: perturbation pair is not feasible");
    }
    const double p = static_cast<double>(d1.rows());
    const double n1 = static_cast<double>(d1.cols()) - static_cast<double>(I0.size());
    PerturbationCheck out;
    out.lhs = project_columns(project_tangent(d1, t), I0, true).norm();
    out.rhs = std::sqrt(2.0 * p * n1 / static_cast<double>(m)) *
              (norm(project_tangent(d1, t, true), NormKind::nuclear) +
               norm(project_columns(d2, I0, true), NormKind::one_two));
    out.holds = out.lhs <= out.rhs;
    return out;
}

// ---------------------------------------------------------------------------

std::string to_string(LemmaKind kind) {
    switch (kind) {
        case LemmaKind::L5_inf: return "L5_inf";
        case LemmaKind::L6_op_inf: return "L6_op_inf";
        case LemmaKind::L7_inf2_order2: return "L7_inf2_order2";
        case LemmaKind::L8_inf2_order1: return "L8_inf2_order1";
    }
    return "unknown";
}

LemmaKind parse_lemma_kind(const std::string& name) {
    if (name == "L5_inf" || name == "L5") return LemmaKind::L5_inf;
    if (name == "L6_op_inf" || name == "L6") return LemmaKind::L6_op_inf;
    if (name == "L7_inf2_order2" || name == "L7") return LemmaKind::L7_inf2_order2;
    if (name == "L8_inf2_order1" || name == "L8") return LemmaKind::L8_inf2_order1;
    throw std::invalid_argument("unknown lemma: " + name);
}

LemmaReport lemma_monte_carlo(LemmaKind which, Eigen::Index p, Eigen::Index n1, Eigen::Index r,
                              std::size_t m0, double beta, int trials, const Rng& rng) {
    if (p < 1 || n1 < 1 || r < 1 || r > std::min(p, n1)) {
        throw std::invalid_argument("lemma_monte_carlo: invalid dimensions");
    }
    if (m0 == 0 || m0 > static_cast<std::size_t>(p * n1)) {
        throw std::invalid_argument("lemma_monte_carlo: m0 out of range");
    }
    if (trials < 0) throw std::invalid_argument("lemma_monte_carlo: negative trial count");

    const double dp = static_cast<double>(p);
    const double dn = static_cast<double>(n1);
    const double dr = static_cast<double>(r);
    const double dm = static_cast<double>(m0);
    const double scale = dp * dn / dm;
    const double lg = std::log(dn + dp);

    LemmaReport rep;
    rep.trials = trials;
    rep.samples.reserve(static_cast<std::size_t>(trials));
    for (int trial = 0; trial < trials; ++trial) {
        Rng local = rng.child(static_cast<std::uint64_t>(trial));
        const TangentSpace t(orthonormalize(local.gaussian(p, r)), orthonormalize(local.gaussian(n1, r)));
        const double mu0 = tangent_incoherence(t);
        const ObservationMask omega = [&] {
            // Local sampler keeps theory independent of the synth module.
            std::vector<std::size_t> cells(static_cast<std::size_t>(p * n1));
            for (std::size_t k = 0; k < cells.size(); ++k) cells[k] = k;
            for (std::size_t k = 0; k < m0; ++k) {
                std::swap(cells[k], cells[k + static_cast<std::size_t>(local.below(cells.size() - k))]);
            }
            std::vector<Entry> e;
            e.reserve(m0);
            for (std::size_t k = 0; k < m0; ++k) {
                const auto c = static_cast<Eigen::Index>(cells[k]);
                e.push_back({c / n1, c % n1});
            }
            return ObservationMask(p, n1, std::move(e));
        }();

        LemmaSample s;
        switch (which) {
            case LemmaKind::L5_inf: {
                const Matrix Z = project_tangent(local.gaussian(p, n1), t);
                s.lhs = (scale * project_tangent(project_mask(Z, omega), t) - Z).cwiseAbs().maxCoeff();
                s.rhs = std::sqrt(8.0 * beta * mu0 * dr * (dn + dp) * lg / (3.0 * dm)) * Z.cwiseAbs().maxCoeff();
                s.applicable = beta > 2.0 && dm > 8.0 / 3.0 * beta * mu0 * dr * (dn + dp) * lg;
                break;
            }
            case LemmaKind::L6_op_inf: {
                const Matrix Z = local.gaussian(p, n1);
                s.lhs = norm(scale * project_mask(Z, omega) - Z, NormKind::spectral);
                s.rhs = std::sqrt(8.0 * beta * dp * dn * std::max(dp, dn) * lg / (3.0 * dm)) * Z.cwiseAbs().maxCoeff();
                s.applicable = beta > 1.0 && dm > 6.0 * beta * std::min(dn, dp) * lg;
                break;
            }
            case LemmaKind::L7_inf2_order2: {
                const Matrix Z = project_tangent(local.gaussian(p, n1), t);
                const Matrix PZ = project_tangent(Z, t);
                s.lhs = norm(scale * project_tangent(project_mask(PZ, omega), t) - PZ, NormKind::inf_two);
                const double lg2 = std::log(2.0 * dn);
                s.rhs = 16.0 / 3.0 * beta *
                        std::sqrt(mu0 * mu0 * dr * dr * dp * dn * dn / (dm * dm) * lg2 * lg2) *
                        norm(Z, NormKind::inf_two);
                s.applicable = beta > 1.0 && p <= n1;
                break;
            }
            case LemmaKind::L8_inf2_order1: {
                const Matrix X = t.U() * local.gaussian(n1, r).transpose();
                s.lhs = norm(scale * project_mask(X, omega), NormKind::inf_two);
                s.rhs = (1.0 + std::sqrt(16.0 * beta * mu0 * dr * (dn + dp) * dp * lg / (3.0 * dm))) *
                        norm(X, NormKind::inf_two);
                s.applicable = beta > 1.0 && dm >= 64.0 / 3.0 * beta * mu0 * dr * (dn + dp) * lg;
                break;
            }
        }
        s.violated = s.lhs > s.rhs;
        rep.violations += s.violated;
        if (s.applicable) {
            ++rep.applicable_trials;
            rep.applicable_violations += s.violated;
        }
        rep.samples.push_back(s);
    }
    rep.bound_applicable = trials > 0 && rep.applicable_trials == trials;
    return rep;
}

void write_lemma_csv(std::ostream& out, const LemmaReport& report) {
    out << "trial,lhs,rhs,violated\n";
    for (std::size_t k = 0; k < report.samples.size(); ++k) {
        const auto& s = report.samples[k];
        out << k << ',' << format_double(s.lhs) << ',' << format_double(s.rhs) << ',' << (s.violated ? 1 : 0)
            << '\n';
    }
}

}  // namespace robustmc
