#pragma once

#include "robustmc/matrix.hpp"
#include "robustmc/operators.hpp"
#include "robustmc/rng.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace robustmc {

// ---------------------------------------------------------------------------
// Incoherence

/// Smallest mu with max_i ||basis^T e_i||^2 <= mu * r / dim, i.e.
/// (dim / r) * max_i ||row_i||^2. `basis` must have r orthonormal columns.
double incoherence_mu(const Matrix& basis, Eigen::Index dim, Eigen::Index r);

/// max of the column-space and row-space incoherence of a tangent space.
double tangent_incoherence(const TangentSpace& t);

/// Orthonormal basis of the column span of a full-column-rank matrix.
Matrix orthonormalize(const Matrix& a);
/// Orthonormal complement of the span of an orthonormal basis.
Matrix orthogonal_complement(const Matrix& basis);

// ---------------------------------------------------------------------------
// Regularization selectors and sufficient conditions

enum class LambdaRule { theorem1, corollary1, corollary2, corollary3, theorem2 };

std::string to_string(LambdaRule rule);
LambdaRule parse_lambda_rule(const std::string& name);

/// Problem-size bounds used by the recovery guarantees. eta1..eta3 are the
/// unspecified absolute constants; they default to 1 and only enter the
/// condition checks.
struct TheoremParams {
    double p = 0;
    double n = 0;
    double n1 = 0;
    double r_bar = 0;
    double gamma_bar = 0;
    double rho_lower = 1;
    double mu0 = 1;
    double eta1 = 1;
    double eta2 = 1;
    double eta3 = 1;
};

/// Closed-form lambda for each rule (natural logarithms):
///   theorem1:   (1/48) sqrt(rho / (gamma r mu0 n log^2(4 n1)))
///   corollary1: sqrt(p^{1/4} / n)
///   corollary2: mu0 r log^2(4 n1) / sqrt(n)
///   corollary3: n            (requires gamma_bar == 0)
///   theorem2:   1 / (4 sqrt(gamma n))
double lambda_select(LambdaRule rule, const TheoremParams& params);

/// One displayed inequality evaluated literally. slack >= 0 exactly when it holds
/// (slack = rhs - lhs for upper bounds, lhs - rhs for lower bounds).
struct ConditionCheck {
    std::string name;
    bool holds = false;
    double lhs = 0;
    double rhs = 0;
    double slack = 0;
};

std::vector<ConditionCheck> check_theorem_conditions(LambdaRule rule, const TheoremParams& params);

// ---------------------------------------------------------------------------
// Sampling operator on the tangent space

/// Largest tangent dimension r (p + n1 - r) materialized by tangent_sampling_gap.
inline constexpr Eigen::Index kMaxTangentDimension = 2000;

/// Spectral norm of (p n1 / m0) P_T P_Omega P_T - P_T, computed on an
/// orthonormal basis of T. Throws for m0 == 0 or oversized tangent spaces.
double tangent_sampling_gap(const TangentSpace& t, const ObservationMask& omega, std::size_t m0);

/// sqrt(16 beta mu0 r (n1 + p) log(n1 + p) / (3 m0)).
double sampling_gap_bound(double mu0, double r, double p, double n1, double m0, double beta);
/// m0 > (16/3) mu0 r (n1 + p) beta log(n1 + p) and beta > 1.
bool sampling_gap_bound_applies(double mu0, double r, double p, double n1, double m0, double beta);

// ---------------------------------------------------------------------------
// Golfing recursion

struct GolfingResult {
    Matrix Y;
    std::vector<double> error_trace;  ///< ||P_T(Y_i) - target||_F after each batch
};

/// Y_0 = 0, Y_i = Y_{i-1} + (p n1 / q) P_{Omega_i}(target - P_T(Y_{i-1})).
/// `target` must lie in T to 1e-8 and every batch must hold q entries.
GolfingResult golfing_run(const Matrix& target, const std::vector<ObservationMask>& batches,
                          const TangentSpace& t, std::size_t q);

// ---------------------------------------------------------------------------
// Certificate validation

struct CertificateInput {
    Matrix Q_hat;
    TangentSpace T_hat;
    Matrix UV_t;  ///< U_hat V_hat^T
    Matrix C_hat;
    ColumnSet I0;
    ObservationMask omega;
    double lambda = 0;
    std::size_t m = 0;  ///< observed entries on the clean columns
    Eigen::Index p = 0;
    Eigen::Index n1 = 0;
};

struct CertificateReport {
    ConditionCheck a;        ///< Q_hat vanishes off Omega (lhs = largest off-mask magnitude)
    ConditionCheck b_prime;  ///< ||D||_F <= (1/2) sqrt(m / (2 p n1)) lambda
    ConditionCheck c_prime;  ///< ||P_{T_hat perp}(Q_hat)|| <= 1/2
    ConditionCheck d;        ///< P_{I0}(Q_hat) in lambda * G(C_hat)
    ConditionCheck e_prime;  ///< ||P_{I0^c}(Q_hat)||_{inf,2} <= lambda / 2
    /// ||P_T_hat(R^{-1}(D)) - (P_T_hat(Q_hat) - UV^T)||_F for the canonical witness
    /// D = R(P_{I0^c}(P_T_hat(Q_hat) - UV^T)).
    double witness_residual = 0;
    /// (c') and (e') both hold strictly.
    bool strict = false;

    bool all_hold() const { return a.holds && b_prime.holds && c_prime.holds && d.holds && e_prime.holds; }
};

CertificateReport dual_certificate_check(const CertificateInput& inp);

struct PerturbationCheck {
    bool holds = false;
    double lhs = 0;
    double rhs = 0;
};

/// ||P_{I0^c} P_T(d1)||_F <= sqrt(2 p n1 / m) (||P_{T perp}(d1)||_* + ||P_{I0^c}(d2)||_{1,2})
/// for a feasible pair (P_Omega(d1) + P_Omega(d2) = 0 to 1e-10).
PerturbationCheck perturbation_inequality_check(const Matrix& d1, const Matrix& d2, const TangentSpace& t,
                                                const ColumnSet& I0, const ObservationMask& omega,
                                                std::size_t m);

// ---------------------------------------------------------------------------
// Monte-Carlo validators for the concentration bounds

enum class LemmaKind {
    L5_inf,          ///< ||(pn1/m0) P_T P_Omega(Z) - Z||_inf, Z in T
    L6_op_inf,       ///< ||(pn1/m0) P_Omega(Z) - Z||, Z arbitrary
    L7_inf2_order2,  ///< ||(pn1/m0) P_T P_Omega P_T(Z) - P_T(Z)||_{inf,2}, Z in T
    L8_inf2_order1,  ///< ||(pn1/m0) P_Omega(U0 Z^T)||_{inf,2}, Z in R^{n1 x r}
};

std::string to_string(LemmaKind kind);
LemmaKind parse_lemma_kind(const std::string& name);

struct LemmaSample {
    double lhs = 0;
    double rhs = 0;
    bool applicable = false;  ///< the bound's sample-size precondition held for this draw
    bool violated = false;
};

struct LemmaReport {
    int trials = 0;
    int violations = 0;             ///< over all trials
    int applicable_trials = 0;
    int applicable_violations = 0;  ///< over trials where the precondition held
    std::vector<LemmaSample> samples;
    bool bound_applicable = false;  ///< precondition held in every trial
};

/// Each trial draws orthonormal U0 (p x r), V0 (n1 x r), a fresh Z of the
/// required form and an m0-subset Omega0, then evaluates both sides. Trial t
/// uses rng.child(t).
LemmaReport lemma_monte_carlo(LemmaKind which, Eigen::Index p, Eigen::Index n1, Eigen::Index r,
                              std::size_t m0, double beta, int trials, const Rng& rng);

/// CSV with header "trial,lhs,rhs,violated".
void write_lemma_csv(std::ostream& out, const LemmaReport& report);

}  // namespace robustmc
