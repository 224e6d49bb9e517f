#include "doctest.h"
#include "test_helpers.hpp"

#include "qcert/tensor.hpp"

using namespace qcert;
using qcert_test::kronv;

namespace {

BipartiteOperator op_from(const Matrix& m, Shape s) { return make_operator(m, std::move(s)); }

}  // namespace

TEST_CASE("kron basics") {
    BipartiteOperator i2 = op_from(Matrix::Identity(2, 2), Shape::unipartite(2));
    BipartiteOperator k = kron(i2, i2);
    CHECK((k.mat - Matrix::Identity(4, 4)).norm() == doctest::Approx(0.0));

    Ket zero = make_ket((Vector(2) << 1, 0).finished(), Shape::unipartite(2));
    Ket one = make_ket((Vector(2) << 0, 1).finished(), Shape::unipartite(2));
    Ket k01 = kron(zero, one);
    Vector expect(4);
    expect << 0, 1, 0, 0;
    CHECK((k01.entries - expect).norm() == doctest::Approx(0.0));

    Matrix d1(2, 2), d2(2, 2);
    d1 << 1, 0, 0, 2;
    d2 << 3, 0, 0, 4;
    Matrix kd = kron(op_from(d1, Shape::unipartite(2)), op_from(d2, Shape::unipartite(2))).mat;
    Vector diag(4);
    diag << 3, 4, 6, 8;
    CHECK((kd.diagonal() - diag).norm() == doctest::Approx(0.0));
    CHECK(kd.norm() == doctest::Approx(diag.norm()));
}

TEST_CASE("kron enforces the dimension cap") {
    BipartiteOperator big = op_from(Matrix::Identity(70, 70), Shape::unipartite(70));
    CHECK_THROWS_AS((void)kron(big, big), SizeError);
}

TEST_CASE("partial traces") {
    // Bell state marginal is maximally mixed.
    Vector bell(4);
    bell << 1, 0, 0, 1;
    bell /= std::sqrt(2.0);
    BipartiteOperator rho = op_from(bell * bell.adjoint(), Shape(2, 2));
    CHECK((partial_trace_left(rho) - 0.5 * Matrix::Identity(2, 2)).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));

    // Tr_A(rho (x) sigma) = Tr(rho) sigma.
    std::mt19937_64 rng(7);
    Matrix a = qcert_test::random_hermitian(3, rng);
    Matrix b = qcert_test::random_hermitian(4, rng);
    BipartiteOperator prod = kron(op_from(a, Shape::unipartite(3)), op_from(b, Shape::unipartite(4)));
    CHECK((partial_trace_left(prod) - a.trace() * b).norm() < 1e-12 * b.norm());
    CHECK((partial_trace_right(prod) - b.trace() * a).norm() < 1e-12 * a.norm());

    // w = (1,0,0,0): left marginal diag(1,0).
    Vector w = Vector::Zero(4);
    w(0) = 1;
    Matrix marg = partial_trace_left(op_from(w * w.adjoint(), Shape(2, 2)));
    Matrix expect(2, 2);
    expect << 1, 0, 0, 0;
    CHECK((marg - expect).norm() == doctest::Approx(0.0));

    // Trace preservation on random input.
    Matrix x = qcert_test::random_hermitian(12, rng);
    BipartiteOperator bx = op_from(x, Shape(3, 4));
    CHECK(partial_trace_left(bx).trace().real() == doctest::Approx(x.trace().real()));
    CHECK(partial_trace_right(bx).trace().real() == doctest::Approx(x.trace().real()));

    // Linearity.
    Matrix y = qcert_test::random_hermitian(12, rng);
    Matrix lhs = partial_trace_left(op_from(2.0 * x - 3.0 * y, Shape(3, 4)));
    Matrix rhs = 2.0 * partial_trace_left(bx) - 3.0 * partial_trace_left(op_from(y, Shape(3, 4)));
    CHECK((lhs - rhs).norm() < 1e-12);
}

TEST_CASE("four-site partial trace") {
    std::mt19937_64 rng(11);
    const int m = 2, n = 3;
    Matrix a = qcert_test::random_matrix(m, m, rng);
    Matrix b = qcert_test::random_matrix(n, n, rng);
    Matrix c = qcert_test::random_matrix(m, m, rng);
    Matrix d = qcert_test::random_matrix(n, n, rng);
    BipartiteOperator ab = kron(op_from(a, Shape::unipartite(m)), op_from(b, Shape::unipartite(n)));
    BipartiteOperator cd = kron(op_from(c, Shape::unipartite(m)), op_from(d, Shape::unipartite(n)));
    BipartiteOperator x = kron(op_from(ab.mat, Shape(m, n)), op_from(cd.mat, Shape(m, n)));
    REQUIRE(x.shape.is_four_site());
    Matrix bd = kron(op_from(b, Shape::unipartite(n)), op_from(d, Shape::unipartite(n))).mat;
    Matrix expect = a.trace() * c.trace() * bd;
    CHECK((partial_trace_sites_13(x) - expect).norm() < 1e-12 * expect.norm());

    BipartiteOperator id4 = op_from(Matrix::Identity(16, 16), Shape::four_site(2, 2));
    CHECK((partial_trace_sites_13(id4) - 4.0 * Matrix::Identity(4, 4)).norm() ==
          doctest::Approx(0.0));

    Matrix h = qcert_test::random_hermitian(m * n * m * n, rng);
    BipartiteOperator hx = op_from(h, Shape::four_site(m, n));
    CHECK(partial_trace_sites_13(hx).trace().real() == doctest::Approx(h.trace().real()));
}

TEST_CASE("partial transpose") {
    std::mt19937_64 rng(23);
    Matrix a = qcert_test::random_matrix(3, 3, rng);
    Matrix b = qcert_test::random_matrix(4, 4, rng);
    BipartiteOperator ab = kron(op_from(a, Shape::unipartite(3)), op_from(b, Shape::unipartite(4)));
    ab.shape = Shape(3, 4);
    Matrix expect = kron(op_from(a, Shape::unipartite(3)),
                         op_from(b.transpose(), Shape::unipartite(4))).mat;
    CHECK((partial_transpose_right(ab).mat - expect).norm() < 1e-13 * expect.norm());
    Matrix expect_l = kron(op_from(a.transpose(), Shape::unipartite(3)),
                           op_from(b, Shape::unipartite(4))).mat;
    CHECK((partial_transpose_left(ab).mat - expect_l).norm() < 1e-13 * expect_l.norm());

    // PT of the unnormalized maximally entangled projector is the flip.
    Vector phi = max_ent_unnormalized(2).entries;
    BipartiteOperator proj = op_from(phi * phi.adjoint(), Shape(2, 2));
    CHECK((partial_transpose_right(proj).mat - flip(2).mat).norm() == doctest::Approx(0.0));

    // Involution on random operators.
    Matrix x = qcert_test::random_matrix(12, 12, rng);
    BipartiteOperator bx = op_from(x, Shape(3, 4));
    CHECK((partial_transpose_right(partial_transpose_right(bx)).mat - x).norm() < 1e-13 * x.norm());
    CHECK((partial_transpose_left(partial_transpose_left(bx)).mat - x).norm() < 1e-13 * x.norm());

    // Gamma commutes with Hermitian conjugation.
    Matrix g1 = partial_transpose_right(op_from(Matrix(x.adjoint()), Shape(3, 4))).mat;
    Matrix g2 = partial_transpose_right(bx).mat.adjoint();
    CHECK((g1 - g2).norm() < 1e-13 * x.norm());
}

TEST_CASE("flip operator") {
    BipartiteOperator f2 = flip(2);
    Vector k01(4), k10(4);
    k01 << 0, 1, 0, 0;
    k10 << 0, 0, 1, 0;
    CHECK((f2.mat * k01 - k10).norm() == doctest::Approx(0.0));

    SpectralReport rep = psd_check(f2);
    CHECK(rep.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(rep.eigenvalues(3) == doctest::Approx(-1.0));
    CHECK(rep.eigenvalues(1) == doctest::Approx(1.0));
    CHECK_FALSE(rep.psd);

    for (int d = 2; d <= 8; ++d) {
        BipartiteOperator f = flip(d);
        CHECK(f.mat.trace().real() == doctest::Approx(d));
        CHECK((f.mat * f.mat - Matrix::Identity(d * d, d * d)).norm() == doctest::Approx(0.0));
        std::mt19937_64 rng(d);
        Vector a = qcert_test::random_ket(d, rng);
        Vector b = qcert_test::random_ket(d, rng);
        CHECK((f.mat * kronv(a, b) - kronv(b, a)).norm() < 1e-13);
    }
}

TEST_CASE("symmetric projector") {
    for (int d = 2; d <= 5; ++d) {
        BipartiteOperator p = sym_projector(d);
        CHECK((p.mat * p.mat - p.mat).norm() < 1e-13);
        CHECK((p.mat - p.mat.adjoint()).norm() == doctest::Approx(0.0));
        CHECK(p.mat.trace().real() == doctest::Approx(d * (d + 1) / 2.0));

        // Gram-based construction of the same projector.
        Matrix span = Matrix::Zero(d * d, d * (d + 1) / 2);
        int col = 0;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                Vector ei = Vector::Unit(d, i), ej = Vector::Unit(d, j);
                Vector s = kronv(ei, ej) + kronv(ej, ei);
                span.col(col++) = s / s.norm();
            }
        Eigen::HouseholderQR<Matrix> qr(span);
        Matrix q = Matrix(qr.householderQ()).leftCols(col);
        CHECK(operator_norm(q * q.adjoint() - p.mat) < 1e-12);

        // Minimum eigenvalue of the partial transpose is 1/2.
        SpectralReport rep = psd_check(partial_transpose_right(p));
        CHECK(rep.min_eigenvalue == doctest::Approx(0.5).epsilon(1e-12));
    }

    BipartiteOperator p2 = sym_projector(2);
    Vector singlet(4);
    singlet << 0, 1, -1, 0;
    CHECK((p2.mat * singlet).norm() == doctest::Approx(0.0));
}

TEST_CASE("purity") {
    CHECK(purity(0.5 * Matrix::Identity(2, 2)) == doctest::Approx(0.5));

    std::mt19937_64 rng(37);
    Vector a = qcert_test::random_ket(3, rng);
    Vector b = qcert_test::random_ket(5, rng);
    Vector prod = kronv(a, b);
    BipartiteOperator rho = op_from(prod * prod.adjoint(), Shape(3, 5));
    CHECK(purity(partial_trace_left(rho)) == doctest::Approx(1.0).epsilon(1e-12));

    // Purity equals the sum of squared eigenvalues.
    Matrix h = qcert_test::random_psd(6, rng);
    SpectralReport rep = psd_check(h);
    CHECK(purity(h) == doctest::Approx(rep.eigenvalues.array().square().sum()).epsilon(1e-12));

    CHECK_THROWS_AS((void)purity(Matrix::Zero(2, 3)), ShapeError);
}

TEST_CASE("psd_check") {
    CHECK(psd_check(sym_projector(3)).psd);
    CHECK(psd_check(sym_projector(3)).min_eigenvalue == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(psd_check(flip(2)).psd);
    CHECK(psd_check(flip(2)).min_eigenvalue == doctest::Approx(-1.0));

    Matrix x = Matrix::Identity(4, 4) - 2.0 * sym_projector(2).mat;
    CHECK_FALSE(psd_check(x).psd);

    Matrix nh(2, 2);
    nh << 0, 1, 0, 0;
    CHECK_THROWS_AS((void)psd_check(nh), HermiticityError);
}

TEST_CASE("maximally entangled ket") {
    Ket phi2 = max_ent_unnormalized(2);
    Vector expect(4);
    expect << 1, 0, 0, 1;
    CHECK((phi2.entries - expect).norm() == doctest::Approx(0.0));

    Ket phi3 = max_ent_unnormalized(3);
    CHECK(phi3.entries.squaredNorm() == doctest::Approx(3.0));
    BipartiteOperator proj = op_from(phi3.entries * phi3.entries.adjoint(), Shape(3, 3));
    CHECK((partial_trace_left(proj) - Matrix::Identity(3, 3)).norm() == doctest::Approx(0.0));

    CHECK_THROWS_AS((void)max_ent_unnormalized(0), ShapeError);
}
