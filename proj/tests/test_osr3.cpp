#include "doctest.h"
#include "test_helpers.hpp"

#include "qcert/osr3.hpp"
#include "qcert/schmidt.hpp"
#include "qcert/tensor.hpp"

#include <cmath>

using namespace qcert;
using namespace qcert::osr3;
using qcert_test::kronv;

namespace {

Matrix kron_mat(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Positive definite left-PT-invariant instance with operator Schmidt rank 3.
BipartiteOperator random_invariant_instance(int k, std::mt19937_64& rng) {
    Matrix a = Matrix::Zero(3 * k, 3 * k);
    for (int i = 0; i < 3; ++i) {
        Matrix g = qcert_test::random_real_symmetric_pd(3, rng);
        Matrix d = qcert_test::random_psd(k, rng) + 0.05 * Matrix::Identity(k, k);
        a += kron_mat(g, d);
    }
    return make_operator(a, Shape(3, k));
}

double cert_residual_vs(const SeparabilityCertificate& cert, const Matrix& target,
                        const Shape& shape) {
    Matrix rec = ppt::ensemble_reconstruct(cert.constructive);
    if (cert.cited && cert.cited->embedding == "2xk")
        rec += chain_unapply(cert.chain, cert.cited->block, shape);
    else if (cert.cited)
        rec += cert.cited->block;
    return (rec - target).norm() / target.norm();
}

bool has_note(const SeparabilityCertificate& cert, const std::string& needle) {
    for (const auto& n : cert.notes)
        if (n.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("left partial transpose invariance check") {
    std::mt19937_64 rng(3);
    BipartiteOperator good = random_invariant_instance(4, rng);
    InvarianceCheck c = left_pt_invariance_check(good);
    CHECK(c.invariant);
    CHECK(c.residual < 1e-12);

    // An antisymmetric left factor breaks the invariance.
    Matrix sy(3, 3);
    sy.setZero();
    sy(0, 1) = Complex(0, 1);
    sy(1, 0) = Complex(0, -1);
    Matrix bad_mat = good.mat + 0.05 * kron_mat(sy, Matrix::Identity(4, 4));
    BipartiteOperator bad = make_operator(bad_mat, Shape(3, 4));
    CHECK_FALSE(left_pt_invariance_check(bad).invariant);
}

TEST_CASE("normal form of a product state") {
    std::mt19937_64 rng(7);
    Matrix rho = qcert_test::random_psd(3, rng);
    Matrix sigma = qcert_test::random_psd(5, rng);
    BipartiteOperator a = make_operator(kron_mat(rho, sigma), Shape(3, 5));
    NormalForm nf = normal_form(a);
    CHECK(nf.rank == 1);
    CHECK(nf.residual < 1e-10);
    // gamma_1 is proportional to rho.
    Complex scale = nf.gammas[0](0, 0) / rho(0, 0);
    CHECK((nf.gammas[0] - scale * rho).norm() < 1e-9 * rho.norm());
    CHECK(psd_check(nf.gammas[0]).psd);
    CHECK(nf.delta1_psd);
}

TEST_CASE("normal form of identity plus a correlation term") {
    Matrix sx(2, 2);
    sx << 0, 1, 1, 0;
    Matrix a = Matrix::Identity(4, 4) + 0.5 * kron_mat(sx, sx);
    BipartiteOperator op = make_operator(a, Shape(2, 2));
    NormalForm nf = normal_form(op);
    CHECK(nf.rank == 2);
    CHECK((nf.gammas[0] - 2.0 * Matrix::Identity(2, 2)).norm() < 1e-10);
    CHECK(nf.residual < 1e-10);
    CHECK(nf.delta1_psd);
    CHECK(nf.range_defect < 1e-10);
}

TEST_CASE("normal form invariants on random instances") {
    std::mt19937_64 rng(11);
    for (int k : {3, 4}) {
        BipartiteOperator a = random_invariant_instance(k, rng);
        NormalForm nf = normal_form(a);
        CHECK(nf.rank == 3);
        CHECK(nf.residual < 1e-10);
        CHECK(nf.range_defect < 1e-8);
        CHECK(nf.delta1_psd);
        for (const Matrix& g : nf.gammas) CHECK((g - g.adjoint()).norm() < 1e-10);
        for (const Matrix& d : nf.deltas) CHECK((d - d.adjoint()).norm() < 1e-10);
        // Left factors are real symmetric for an invariant state.
        for (const Matrix& g : nf.gammas) {
            CHECK(g.imag().cwiseAbs().maxCoeff() < 1e-10);
            CHECK((g - g.transpose()).norm() < 1e-10);
        }
    }
    // Rank error above 3.
    std::mt19937_64 rng2(13);
    Matrix big = Matrix::Zero(12, 12);
    for (int i = 0; i < 5; ++i)
        big += kron_mat(qcert_test::random_real_symmetric_pd(3, rng2),
                        qcert_test::random_psd(4, rng2));
    CHECK_THROWS_AS((void)normal_form(make_operator(big, Shape(3, 4))), RankError);
}

TEST_CASE("lblock ensemble") {
    // L = 0: one term per basis vector, reconstructing [[Id, 0], [0, 0]].
    ppt::ProductEnsemble e0 = lblock_ensemble(Matrix::Zero(3, 3));
    CHECK(e0.terms.size() == 3);
    Matrix target = Matrix::Zero(6, 6);
    target.block(0, 0, 3, 3) = Matrix::Identity(3, 3);
    CHECK((ppt::ensemble_reconstruct(e0) - target).norm() < 1e-12);

    // L = diag(1, -1) reconstructs [[Id, L], [L, Id]].
    Matrix l(2, 2);
    l << 1, 0, 0, -1;
    ppt::ProductEnsemble e1 = lblock_ensemble(l);
    Matrix t1(4, 4);
    t1 << 1, 0, 1, 0,
          0, 1, 0, -1,
          1, 0, 1, 0,
          0, -1, 0, 1;
    CHECK((ppt::ensemble_reconstruct(e1) - t1).norm() < 1e-12);
    CHECK(ppt::sn_upper_from_ensemble(e1) == 1);

    // Random Hermitian L: exact reconstruction of [[Id, L], [L, L^2]].
    std::mt19937_64 rng(17);
    for (int t = 0; t < 10; ++t) {
        Matrix lr = qcert_test::random_hermitian(5, rng);
        ppt::ProductEnsemble e = lblock_ensemble(lr);
        CHECK(e.terms.size() == 5);
        Matrix tgt(10, 10);
        tgt.block(0, 0, 5, 5) = Matrix::Identity(5, 5);
        tgt.block(0, 5, 5, 5) = lr;
        tgt.block(5, 0, 5, 5) = lr;
        tgt.block(5, 5, 5, 5) = lr * lr;
        CHECK((ppt::ensemble_reconstruct(e) - tgt).norm() < 1e-10);
        for (const auto& term : e.terms) CHECK(term.weight == doctest::Approx(1.0));
    }

    Matrix nh(2, 2);
    nh << 0, 1, 0, 0;
    CHECK_THROWS_AS((void)lblock_ensemble(nh), HermiticityError);
}

TEST_CASE("separation of random positive definite instances") {
    std::mt19937_64 rng(19);
    for (int k : {3, 4, 5}) {
        for (int t = 0; t < 5; ++t) {
            BipartiteOperator a = random_invariant_instance(k, rng);
            REQUIRE(operator_schmidt_rank(a) == 3);
            SeparabilityCertificate cert = separate(a);
            CHECK(cert.reconstruction_residual < 1e-7);
            CHECK(cert_residual_vs(cert, a.mat, a.shape) < 1e-7);
            for (const auto& term : cert.constructive.terms) {
                Ket tk = make_ket(term.ket / term.ket.norm(), a.shape);
                CHECK(schmidt_rank(tk) == 1);
            }
            if (cert.cited) {
                CHECK(cert.status == CertStatus::constructive_plus_cited);
                CHECK(cert.cited->ppt_verified);
                CHECK(cert.cited->osr <= 3);
                // First block row and column vanish: the 2xk embedding.
                CHECK(cert.cited->block.block(0, 0, k, 3 * k).norm() <
                      1e-7 * cert.cited->block.norm());
            }
            // The chain replays the final frame back onto the input.
            Matrix final_frame = chain_apply(cert.chain, a.mat, a.shape);
            Matrix back = chain_unapply(cert.chain, final_frame, a.shape);
            CHECK((back - a.mat).norm() < 1e-8 * a.mat.norm());
        }
    }
}

TEST_CASE("separation of a product state is fully constructive") {
    std::mt19937_64 rng(23);
    Matrix g = qcert_test::random_real_symmetric_pd(3, rng);
    Matrix d = qcert_test::random_psd(4, rng) + 0.1 * Matrix::Identity(4, 4);
    BipartiteOperator a = make_operator(kron_mat(g, d), Shape(3, 4));
    SeparabilityCertificate cert = separate(a);
    CHECK(cert.status == CertStatus::fully_constructive);
    CHECK_FALSE(cert.cited.has_value());
    CHECK(cert.reconstruction_residual < 1e-10);
}

TEST_CASE("rank-2 inputs delegate to the cited route") {
    std::mt19937_64 rng(29);
    Matrix a = kron_mat(qcert_test::random_real_symmetric_pd(3, rng),
                        qcert_test::random_psd(4, rng) + 0.1 * Matrix::Identity(4, 4)) +
               kron_mat(qcert_test::random_real_symmetric_pd(3, rng),
                        qcert_test::random_psd(4, rng));
    BipartiteOperator op = make_operator(a, Shape(3, 4));
    REQUIRE(operator_schmidt_rank(op) == 2);
    SeparabilityCertificate cert = separate(op);
    CHECK(cert.status == CertStatus::constructive_plus_cited);
    REQUIRE(cert.cited.has_value());
    CHECK(cert.cited->embedding == "full");
    CHECK(cert.cited->ppt_verified);
    CHECK(cert.constructive.terms.empty());
}

TEST_CASE("engineered vanishing couplers") {
    std::mt19937_64 rng(31);
    const int k = 4;
    Matrix delta1 = 5.0 * Matrix::Identity(k, k);
    Matrix delta2 = qcert_test::random_hermitian(k, rng);
    delta2 -= (delta2.trace() / static_cast<double>(k)) * Matrix::Identity(k, k);
    delta2 /= delta2.norm();
    Matrix delta3 = qcert_test::random_hermitian(k, rng);
    delta3 -= (delta3.trace() / static_cast<double>(k)) * Matrix::Identity(k, k);
    delta3 -= (delta2.conjugate().cwiseProduct(delta3).sum()) * delta2;
    delta3 /= delta3.norm();
    delta3 *= 0.6;

    Matrix gamma2 = Matrix::Zero(3, 3);
    gamma2(0, 0) = 1.0;
    gamma2(2, 2) = -1.0;
    gamma2 /= gamma2.norm();

    SUBCASE("coupler (2,1) vanishes, (3,1) does not: swap branch") {
        // Traceless, orthogonal to gamma2, zero at (1,0) and (2,1), nonzero at (2,0).
        Matrix gamma3(3, 3);
        double tdiag = 0.3, g = 0.8;
        gamma3 << tdiag, 0, g,
                  0, -2 * tdiag, 0,
                  g, 0, tdiag;
        gamma3 = gamma3.real().cast<Complex>();
        gamma3 /= gamma3.norm();
        Matrix a = kron_mat(Matrix::Identity(3, 3), delta1) + kron_mat(gamma2, delta2) +
                   kron_mat(gamma3, delta3);
        BipartiteOperator op = make_operator(a, Shape(3, k));
        REQUIRE(psd_check(op).psd);
        REQUIRE(operator_schmidt_rank(op) == 3);
        SeparabilityCertificate cert = separate(op);
        CHECK(has_note(cert, "swapped block rows"));
        CHECK(cert.reconstruction_residual < 1e-7);
        CHECK(cert_residual_vs(cert, a, op.shape) < 1e-7);
    }

    SUBCASE("both couplers vanish: diagonal branch") {
        Matrix gamma3 = Matrix::Zero(3, 3);
        gamma3(0, 0) = 1.0;
        gamma3(1, 1) = -2.0;
        gamma3(2, 2) = 1.0;
        gamma3 /= gamma3.norm();
        Matrix a = kron_mat(Matrix::Identity(3, 3), delta1) + kron_mat(gamma2, delta2) +
                   kron_mat(gamma3, delta3);
        BipartiteOperator op = make_operator(a, Shape(3, k));
        REQUIRE(psd_check(op).psd);
        SeparabilityCertificate cert = separate(op);
        CHECK(has_note(cert, "both couplers below gate"));
        CHECK(cert.reconstruction_residual < 1e-7);
    }
}

TEST_CASE("singular inputs are regularized") {
    std::mt19937_64 rng(37);
    const int k = 4;
    // All left factors supported on the upper-left 2x2 block.
    Matrix a = Matrix::Zero(3 * k, 3 * k);
    for (int i = 0; i < 3; ++i) {
        Matrix g2 = qcert_test::random_real_symmetric_pd(2, rng);
        Matrix g = Matrix::Zero(3, 3);
        g.block(0, 0, 2, 2) = g2;
        a += kron_mat(g, qcert_test::random_psd(k, rng) + 0.05 * Matrix::Identity(k, k));
    }
    BipartiteOperator op = make_operator(a, Shape(3, k));
    REQUIRE(operator_schmidt_rank(op) == 3);
    REQUIRE(psd_check(op).psd);
    REQUIRE(psd_check(op).min_eigenvalue < 1e-10);

    const double eps = 1e-6;
    SeparabilityCertificate cert = separate(op, eps);
    CHECK(cert.regularized);
    CHECK(has_note(cert, "regularized"));
    CHECK(cert.reconstruction_residual < 1e-7);

    // The reported distance to the input matches the shift structure within 10x.
    NormalForm nf = normal_form(op);
    Matrix shift = eps * kron_mat(Matrix::Identity(3, 3), nf.deltas[0]) +
                   eps * kron_mat(nf.gammas[0], Matrix::Identity(k, k)) +
                   eps * eps * Matrix::Identity(3 * k, 3 * k);
    CHECK(cert.regularization_residual == doctest::Approx(shift.norm()).epsilon(1e-8));
    double scale = eps * (kron_mat(Matrix::Identity(3, 3), nf.deltas[0]) +
                          kron_mat(nf.gammas[0], Matrix::Identity(k, k)))
                             .norm();
    CHECK(cert.regularization_residual > 0.1 * scale);
    CHECK(cert.regularization_residual < 10.0 * scale);

    // The certificate decomposes the regularized operator.
    Matrix reg_target =
        kron_mat(nf.gammas[0] + eps * Matrix::Identity(3, 3),
                 nf.deltas[0] + eps * Matrix::Identity(k, k)) +
        kron_mat(nf.gammas[1], nf.deltas[1]) + kron_mat(nf.gammas[2], nf.deltas[2]);
    CHECK(cert_residual_vs(cert, reg_target, op.shape) < 1e-7);
}

TEST_CASE("tighter regularization does not worsen the reconstruction") {
    std::mt19937_64 rng(53);
    const int k = 4;
    Matrix a = Matrix::Zero(3 * k, 3 * k);
    for (int i = 0; i < 3; ++i) {
        Matrix g2 = qcert_test::random_real_symmetric_pd(2, rng);
        Matrix g = Matrix::Zero(3, 3);
        g.block(0, 0, 2, 2) = g2;
        a += kron_mat(g, qcert_test::random_psd(k, rng) + 0.05 * Matrix::Identity(k, k));
    }
    BipartiteOperator op = make_operator(a, Shape(3, k));
    double shift4 = separate(op, 1e-4).regularization_residual;
    double shift6 = separate(op, 1e-6).regularization_residual;
    double shift8 = separate(op, 1e-8).regularization_residual;
    CHECK(shift4 >= shift6);
    CHECK(shift6 > 0.0);
    // Below 1e-6 float noise can dominate; log only.
    INFO("shift at 1e-8: ", shift8);
    CHECK(shift8 <= shift6);
}

TEST_CASE("whitened frame has proportional off-diagonal blocks") {
    std::mt19937_64 rng(59);
    const int k = 4;
    BipartiteOperator a = random_invariant_instance(k, rng);
    SeparabilityCertificate cert = separate(a);
    REQUIRE(cert.chain.size() >= 2);
    // Apply only the whitening and diagonalization steps.
    LocalOpChain head(cert.chain.begin(), cert.chain.begin() + 2);
    Matrix c = chain_apply(head, a.mat, a.shape);
    // The three off-diagonal blocks must be pairwise collinear.
    std::vector<Matrix> blocks;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) blocks.push_back(c.block(i * k, j * k, k, k));
    size_t ref = 0;
    for (size_t i = 1; i < blocks.size(); ++i)
        if (blocks[i].norm() > blocks[ref].norm()) ref = i;
    if (blocks[ref].norm() > 1e-10 * c.norm()) {
        Matrix dir = blocks[ref] / blocks[ref].norm();
        for (const Matrix& b : blocks) {
            Complex coeff = dir.conjugate().cwiseProduct(b).sum();
            CHECK((b - coeff * dir).cwiseAbs().maxCoeff() < 1e-8 * c.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("separate rejects bad inputs") {
    std::mt19937_64 rng(41);
    // Wrong left dimension.
    Matrix m4 = qcert_test::random_psd(16, rng);
    CHECK_THROWS_AS((void)separate(make_operator(m4, Shape(4, 4))), ShapeError);

    // Rank 4 invariant operator.
    Matrix big = Matrix::Zero(12, 12);
    for (int i = 0; i < 6; ++i)
        big += kron_mat(qcert_test::random_real_symmetric_pd(3, rng),
                        qcert_test::random_psd(4, rng));
    BipartiteOperator bop = make_operator(big, Shape(3, 4));
    if (operator_schmidt_rank(bop) > 3)
        CHECK_THROWS_AS((void)separate(bop), RankError);

    // Not left-PT invariant.
    Matrix h = qcert_test::random_psd(12, rng);
    BipartiteOperator hop = make_operator(h, Shape(3, 4));
    if (!left_pt_invariance_check(hop).invariant)
        CHECK_THROWS_AS((void)separate(hop), PreconditionError);

    // Not PSD.
    BipartiteOperator neg = make_operator(
        -Matrix::Identity(12, 12) + 0.1 * qcert_test::random_hermitian(12, rng), Shape(3, 4));
    CHECK_THROWS_AS((void)separate(neg), PreconditionError);
}

TEST_CASE("schmidt number bound reports") {
    std::mt19937_64 rng(43);

    // k = 3: bound 1 with an attached certificate.
    BipartiteOperator a34 = random_invariant_instance(4, rng);
    REQUIRE(operator_schmidt_rank(a34) == 3);
    SnBoundReport rep = schmidt_number_report(a34);
    CHECK(rep.bound == 1);
    CHECK(rep.certificate.has_value());
    CHECK(rep.certificate->reconstruction_residual < 1e-7);

    // Witness ensemble sharpens the report.
    ppt::ProductEnsemble witness;
    witness.target_shape = a34.shape;
    {
        Matrix rec = Matrix::Zero(12, 12);
        std::mt19937_64 rng2(43);  // rebuild the same instance factor by factor
        for (int i = 0; i < 3; ++i) {
            Matrix g = qcert_test::random_real_symmetric_pd(3, rng2);
            Matrix d = qcert_test::random_psd(4, rng2) + 0.05 * Matrix::Identity(4, 4);
            Eigen::SelfAdjointEigenSolver<Matrix> eg(g), ed(d);
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 4; ++q) {
                    double w = eg.eigenvalues()(p) * ed.eigenvalues()(q);
                    if (w > 1e-14)
                        witness.terms.push_back(
                            {w, kronv(eg.eigenvectors().col(p), ed.eigenvectors().col(q)), 1});
                }
            rec += kron_mat(g, d);
        }
        REQUIRE((rec - a34.mat).norm() < 1e-10);
    }
    SnBoundReport rep_w = schmidt_number_report(a34, &witness);
    REQUIRE(rep_w.ensemble_upper.has_value());
    CHECK(*rep_w.ensemble_upper == 1);

    // k = 5: bound 3, cited provenance.
    Matrix a55 = Matrix::Zero(25, 25);
    for (int i = 0; i < 3; ++i)
        a55 += kron_mat(qcert_test::random_real_symmetric_pd(5, rng),
                        qcert_test::random_psd(5, rng) + 0.05 * Matrix::Identity(5, 5));
    BipartiteOperator op55 = make_operator(a55, Shape(5, 5));
    REQUIRE(operator_schmidt_rank(op55) == 3);
    SnBoundReport rep5 = schmidt_number_report(op55);
    CHECK(rep5.bound == 3);
    CHECK_FALSE(rep5.certificate.has_value());
    CHECK(rep5.provenance.find("cited") != std::string::npos);

    // Rank 2 is rejected with a pointer to the citation.
    Matrix a2 = kron_mat(qcert_test::random_real_symmetric_pd(3, rng),
                         qcert_test::random_psd(4, rng) + 0.1 * Matrix::Identity(4, 4)) +
                kron_mat(qcert_test::random_real_symmetric_pd(3, rng),
                         qcert_test::random_psd(4, rng));
    BipartiteOperator op2 = make_operator(a2, Shape(3, 4));
    REQUIRE(operator_schmidt_rank(op2) == 2);
    CHECK_THROWS_AS((void)schmidt_number_report(op2), RankError);
}
