#include "robustmc/synth.hpp"
#include "robustmc/theory.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace robustmc;

namespace {

TangentSpace random_tangent(Rng& rng, Eigen::Index p, Eigen::Index n, Eigen::Index r) {
    return TangentSpace(orthonormalize(rng.gaussian(p, r)), orthonormalize(rng.gaussian(n, r)));
}

CertificateInput hand_input(const oracle::HandCertificate& h) {
    CertificateInput in;
    in.Q_hat = h.Q;
    in.T_hat = TangentSpace(h.U, h.V);
    in.UV_t = h.UV;
    in.C_hat = h.C;
    in.I0 = ColumnSet(4, {3});
    in.omega = ObservationMask::full(4, 4);
    in.lambda = h.lambda;
    in.m = 12;
    in.p = 4;
    in.n1 = 3;
    return in;
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("incoherence examples and bounds") {
    Matrix e1 = Matrix::Zero(2, 1);
    e1(0, 0) = 1;
    CHECK(incoherence_mu(e1, 2, 1) == doctest::Approx(2.0));
    const Matrix flat = Matrix::Constant(7, 1, 1.0 / std::sqrt(7.0));
    CHECK(incoherence_mu(flat, 7, 1) == doctest::Approx(1.0));

    Rng rng(1);
    const Matrix b = orthonormalize(rng.gaussian(50, 3));
    double direct = 0;
    for (Eigen::Index i = 0; i < 50; ++i) {
        double s = 0;
        for (Eigen::Index k = 0; k < 3; ++k) s += b(i, k) * b(i, k);
        direct = std::max(direct, 50.0 / 3.0 * s);
    }
    const double mu = incoherence_mu(b, 50, 3);
    CHECK(mu == doctest::Approx(direct).epsilon(1e-12));
    CHECK(mu >= 1.0);
    CHECK(mu <= 50.0 / 3.0);
    CHECK_THROWS(incoherence_mu(rng.gaussian(5, 2), 5, 2));

    const Matrix comp = orthogonal_complement(b);
    CHECK(comp.cols() == 47);
    CHECK((b.transpose() * comp).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lambda selectors") {
    TheoremParams t;
    t.n = 400;
    t.p = 256;
    CHECK(lambda_select(LambdaRule::corollary1, t) == doctest::Approx(0.1));
    t.gamma_bar = 0.01;
    CHECK(lambda_select(LambdaRule::theorem2, t) == doctest::Approx(0.125));
    t.gamma_bar = 0;
    CHECK(lambda_select(LambdaRule::corollary3, t) == 400.0);

    TheoremParams sweep;
    sweep.n = 77;
    for (double v : {1.0, 5.0, 1000.0}) {
        sweep.p = v;
        sweep.n1 = v;
        sweep.r_bar = v;
        sweep.mu0 = v;
        sweep.rho_lower = 1.0 / v;
        CHECK(lambda_select(LambdaRule::corollary3, sweep) == 77.0);
    }
    t.gamma_bar = 0.1;
    CHECK_THROWS(lambda_select(LambdaRule::corollary3, t));

    TheoremParams th;
    th.n = 400;
    th.n1 = 390;
    th.r_bar = 2;
    th.gamma_bar = 0.025;
    th.rho_lower = 0.5;
    th.mu0 = 1.5;
    const double want = std::sqrt(0.5 / (0.025 * 2 * 1.5 * 400 * std::pow(std::log(4 * 390.0), 2))) / 48.0;
    CHECK(lambda_select(LambdaRule::theorem1, th) == doctest::Approx(want).epsilon(1e-14));
    CHECK(lambda_select(LambdaRule::corollary2, th) ==
          doctest::Approx(1.5 * 2 * std::pow(std::log(1560.0), 2) / 20.0).epsilon(1e-14));
    th.gamma_bar = 0;
    CHECK_THROWS(lambda_select(LambdaRule::theorem1, th));
    CHECK(parse_lambda_rule("theorem2") == LambdaRule::theorem2);
    CHECK_THROWS(parse_lambda_rule("corollary4"));
}

TEST_CASE("theorem condition checks") {
    TheoremParams t;
    t.p = 32;
    t.n1 = 16;
    t.n = 16;
    t.r_bar = 1;
    t.rho_lower = 0.5;
    t.gamma_bar = 0.0;
    const auto checks = check_theorem_conditions(LambdaRule::theorem1, t);
    REQUIRE(checks.size() == 3);
    CHECK_FALSE(checks[0].holds);
    CHECK(checks[2].holds);
    CHECK(checks[2].slack == doctest::Approx(checks[2].rhs));
    CHECK(checks[2].lhs == 0.0);

    TheoremParams big;
    big.p = big.n1 = big.n = 1e4;
    big.r_bar = 1;
    big.mu0 = 1;
    big.rho_lower = 0.5;
    big.gamma_bar = 1e-9;
    const auto c = check_theorem_conditions(LambdaRule::theorem1, big);
    const double lg = std::log(4e4);
    CHECK(c[0].holds);
    CHECK(c[1].rhs == doctest::Approx(std::pow(lg, 3) / 1e4));
    CHECK(c[1].holds == (0.5 >= std::pow(lg, 3) / 1e4));
    const double inflate = 1.0 + 1.0 / (0.5 * 100.0);
    CHECK(c[2].rhs == doctest::Approx(0.25 / (inflate * inflate * std::pow(lg, 6))));
    for (const auto& k : c) CHECK(k.holds == (k.slack >= 0));

    for (auto rule : {LambdaRule::corollary1, LambdaRule::corollary2, LambdaRule::theorem2}) {
        for (const auto& k : check_theorem_conditions(rule, big)) CHECK(k.holds == (k.slack >= 0));
    }
    big.gamma_bar = 0;
    const auto c3 = check_theorem_conditions(LambdaRule::corollary3, big);
    CHECK(c3[0].holds);
    CHECK(c3[1].lhs == doctest::Approx(0.5e8));
}

TEST_CASE("sampling gap matches a dense operator oracle") {
    Rng rng(2);
    for (int k = 0; k < 4; ++k) {
        const Eigen::Index p = 6, n1 = 5;
        const TangentSpace t = random_tangent(rng, p, n1, 2);
        const ObservationMask omega = sample_uniform_without_replacement(p, n1, 18, rng);
        const double scale = 30.0 / 18.0;
        const Matrix op = oracle::dense_operator(p, n1, [&](const Matrix& x) {
            return Matrix(scale * project_tangent(project_mask(project_tangent(x, t), omega), t) - project_tangent(x, t));
        });
        CHECK(tangent_sampling_gap(t, omega, 18) == doctest::Approx(oracle::symmetric_norm(op)).epsilon(1e-10));
    }
}

TEST_CASE("sampling gap edge cases and rotation invariance") {
    Rng rng(3);
    const TangentSpace t = random_tangent(rng, 30, 30, 2);
    CHECK(tangent_sampling_gap(t, ObservationMask::full(30, 30), 900) <= 1e-10);
    CHECK_THROWS(tangent_sampling_gap(t, ObservationMask::full(30, 30), 0));
    const TangentSpace huge = random_tangent(rng, 200, 200, 6);
    CHECK_THROWS(tangent_sampling_gap(huge, ObservationMask::full(200, 200), 10));

    const ObservationMask omega = sample_uniform_without_replacement(30, 30, 450, rng);
    const Matrix qa = orthonormalize(rng.gaussian(2, 2)), qb = orthonormalize(rng.gaussian(2, 2));
    const TangentSpace rotated(t.U() * qa, t.V() * qb);
    CHECK(tangent_sampling_gap(rotated, omega, 450) == doctest::Approx(tangent_sampling_gap(t, omega, 450)).epsilon(1e-9));

    CHECK(sampling_gap_bound(1, 2, 30, 30, 450, 1.5) == doctest::Approx(std::sqrt(16 * 1.5 * 2 * 60 * std::log(60.0) / 1350)));
    CHECK_FALSE(sampling_gap_bound_applies(1, 2, 30, 30, 450, 1.5));
    CHECK(sampling_gap_bound_applies(1, 1, 30, 30, 1e5, 1.5));
}

TEST_CASE("golfing recursion") {
    Rng rng(4);
    const TangentSpace t = random_tangent(rng, 10, 12, 1);
    const Matrix target = t.U() * t.V().transpose();
    const GolfingResult none = golfing_run(target, {}, t, 5);
    CHECK(none.Y.isZero());
    CHECK(none.error_trace.empty());

    const GolfingResult full = golfing_run(target, {ObservationMask::full(10, 12)}, t, 120);
    REQUIRE(full.error_trace.size() == 1);
    CHECK(full.error_trace[0] <= 1e-12);
    const auto batches = sample_batch_replacement(10, 12, 1, 120, rng);
    CHECK(golfing_run(target, batches, t, 120).error_trace[0] <= 1e-12);

    CHECK_THROWS(golfing_run(rng.gaussian(10, 12), {}, t, 5));
    CHECK_THROWS(golfing_run(target, sample_batch_replacement(10, 12, 1, 30, rng), t, 40));

    const auto half = sample_batch_replacement(10, 12, 4, 60, rng);
    const GolfingResult g = golfing_run(target, half, t, 60);
    CHECK(g.error_trace.size() == 4);
    CHECK(g.error_trace.back() < g.error_trace.front());
}

TEST_CASE("certificate: trivial Q = UV^T") {
    Rng rng(5);
    const TangentSpace t = random_tangent(rng, 5, 6, 2);
    CertificateInput in;
    in.UV_t = t.U() * t.V().transpose();
    in.Q_hat = in.UV_t;
    in.T_hat = t;
    in.C_hat = Matrix::Zero(5, 6);
    in.I0 = ColumnSet::none(6);
    in.omega = ObservationMask::full(5, 6);
    in.m = 30;
    in.p = 5;
    in.n1 = 6;
    const double inf2 = norm(in.UV_t, NormKind::inf_two);
    for (double lambda : {1.9 * inf2, 2.1 * inf2}) {
        in.lambda = lambda;
        const CertificateReport rep = dual_certificate_check(in);
        CHECK(rep.a.holds);
        CHECK(rep.b_prime.holds);
        CHECK(rep.b_prime.lhs <= 1e-12);
        CHECK(rep.c_prime.holds);
        CHECK(rep.d.holds);
        CHECK(rep.e_prime.holds == (inf2 <= lambda / 2));
    }

    in.omega = ObservationMask(5, 6, [] {
        std::vector<Entry> e;
        for (Eigen::Index i = 0; i < 5; ++i)
            for (Eigen::Index j = 0; j < 6; ++j)
                if (i != 2 || j != 4) e.push_back({i, j});
        return e;
    }());
    const CertificateReport rep = dual_certificate_check(in);
    CHECK_FALSE(rep.a.holds);
    CHECK(rep.a.lhs == doctest::Approx(std::abs(in.Q_hat(2, 4))));
    CHECK(rep.a.slack == doctest::Approx(-std::abs(in.Q_hat(2, 4))));
}

TEST_CASE("certificate: hand-built orthogonal corruption") {
    for (double lambda : {0.3, 0.45, 1.0, 1.4, 2.0}) {
        for (double delta : {0.0, 0.1, -0.2}) {
            const auto h = oracle::hand_certificate(lambda, delta);
            const auto want = oracle::hand_expectation(lambda, delta);
            const CertificateReport rep = dual_certificate_check(hand_input(h));
            CHECK(rep.a.holds == want.a);
            CHECK(rep.b_prime.holds == want.b_prime);
            CHECK(rep.b_prime.lhs == doctest::Approx(std::abs(delta)));
            CHECK(rep.b_prime.rhs == doctest::Approx(lambda / (2 * std::sqrt(2.0))));
            CHECK(rep.c_prime.holds == want.c_prime);
            CHECK(rep.c_prime.lhs == doctest::Approx(lambda));
            CHECK(rep.d.holds == want.d);
            CHECK(rep.e_prime.holds == want.e_prime);
            CHECK(rep.e_prime.lhs == doctest::Approx(2 * (1 + delta) / 3));
            CHECK(rep.witness_residual <= 1e-12);
        }
    }
}

TEST_CASE("certificate: (d) detects wrong direction and oversized columns") {
    auto h = oracle::hand_certificate(1.0);
    CertificateInput in = hand_input(h);
    in.Q_hat(2, 3) += 1e-3;
    CHECK_FALSE(dual_certificate_check(in).d.holds);

    in = hand_input(h);
    in.C_hat.setZero();  // column 3 now needs norm <= lambda
    CHECK(dual_certificate_check(in).d.holds);
    in.Q_hat.col(3) *= 1.01;
    CHECK_FALSE(dual_certificate_check(in).d.holds);

    in = hand_input(h);
    in.C_hat(0, 0) = 1.0;  // support outside I0
    CHECK_FALSE(dual_certificate_check(in).d.holds);
}

TEST_CASE("certificate: homogeneous conditions are scale invariant") {
    // (a), (d) and (e') are positively homogeneous in (Q, lambda, C); (b') and
    // (c') compare against UV^T and the constant 1/2, which do not scale.
    Rng rng(6);
    for (double lambda : {0.45, 1.4, 2.0}) {
        const auto h = oracle::hand_certificate(lambda, 0.1);
        const CertificateReport base = dual_certificate_check(hand_input(h));
        for (int k = 0; k < 10; ++k) {
            const double c = std::exp(4.0 * rng.uniform() - 2.0);
            CertificateInput in = hand_input(h);
            in.Q_hat *= c;
            in.C_hat *= c;
            in.lambda *= c;
            const CertificateReport rep = dual_certificate_check(in);
            CHECK(rep.a.holds == base.a.holds);
            CHECK(rep.d.holds == base.d.holds);
            CHECK(rep.e_prime.holds == base.e_prime.holds);
        }
    }
}

TEST_CASE("perturbation inequality") {
    Rng rng(7);
    const Eigen::Index p = 20, n = 25;
    const ColumnSet I0(n, {23, 24});
    const TangentSpace t = random_tangent(rng, p, n, 2);
    const ObservationMask omega = sample_uniform_without_replacement(p, n, 250, rng);
    const std::size_t m = omega.count_in_columns(I0.complement().members());

    const PerturbationCheck zero = perturbation_inequality_check(Matrix::Zero(p, n), Matrix::Zero(p, n), t, I0, omega, m);
    CHECK(zero.holds);
    CHECK(zero.lhs == 0.0);

    const Matrix d1 = project_tangent(rng.gaussian(p, n), t, true);
    const PerturbationCheck perp = perturbation_inequality_check(d1, -project_mask(d1, omega), t, I0, omega, m);
    CHECK(perp.lhs <= 1e-12);
    CHECK(perp.holds);

    CHECK_THROWS(perturbation_inequality_check(d1, Matrix::Zero(p, n), t, I0, omega, m));

    int holds = 0;
    for (int s = 0; s < 100; ++s) {
        Rng local(1000 + s);
        const TangentSpace ts = random_tangent(local, p, n, 2);
        const ObservationMask om = sample_uniform_without_replacement(p, n, 250, local);
        const std::size_t mm = om.count_in_columns(I0.complement().members());
        const Matrix a = local.gaussian(p, n);
        const Matrix b = -project_mask(a, om) + project_mask_complement(local.gaussian(p, n), om);
        holds += perturbation_inequality_check(a, b, ts, I0, om, mm).holds;
    }
    CHECK(holds >= 99);
}

TEST_CASE("lemma validators") {
    const Rng rng(8);
    for (auto k : {LemmaKind::L5_inf, LemmaKind::L6_op_inf, LemmaKind::L7_inf2_order2}) {
        const LemmaReport rep = lemma_monte_carlo(k, 6, 8, 1, 48, 1.5, 5, rng);
        CHECK(rep.violations == 0);
        for (const auto& s : rep.samples) CHECK(s.lhs <= 1e-12);
    }
    const LemmaReport empty = lemma_monte_carlo(LemmaKind::L6_op_inf, 6, 8, 1, 20, 1.5, 0, rng);
    CHECK(empty.trials == 0);
    CHECK(empty.samples.empty());
    CHECK_FALSE(empty.bound_applicable);

    const LemmaReport l7 = lemma_monte_carlo(LemmaKind::L7_inf2_order2, 30, 60, 1, 900, 1.5, 100, rng);
    CHECK(l7.violations <= 1);
    CHECK(l7.violations <= l7.trials);

    // L5 needs beta > 2: never applicable at 1.5
    const LemmaReport l5 = lemma_monte_carlo(LemmaKind::L5_inf, 10, 10, 1, 100, 1.5, 3, rng);
    CHECK(l5.applicable_trials == 0);

    const LemmaReport again = lemma_monte_carlo(LemmaKind::L7_inf2_order2, 30, 60, 1, 900, 1.5, 100, rng);
    for (std::size_t i = 0; i < l7.samples.size(); ++i) CHECK(again.samples[i].lhs == l7.samples[i].lhs);

    std::ostringstream out;
    write_lemma_csv(out, lemma_monte_carlo(LemmaKind::L8_inf2_order1, 5, 6, 1, 10, 1.5, 2, rng));
    const std::string csv = out.str();
    CHECK(csv.rfind("trial,lhs,rhs,violated\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(parse_lemma_kind("L8") == LemmaKind::L8_inf2_order1);
    CHECK_THROWS(lemma_monte_carlo(LemmaKind::L6_op_inf, 6, 8, 1, 0, 1.5, 1, rng));
}

}  // TEST_SUITE
