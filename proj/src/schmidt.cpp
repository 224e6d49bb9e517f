#include "qcert/schmidt.hpp"

#include "qcert/tensor.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace qcert {

namespace {

// Rotate v so its first entry above the cutoff is real positive; returns the
// applied phase so callers can compensate a paired vector.
Complex fix_phase(Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            Complex ph = std::abs(v(i)) / v(i);
            v *= ph;
            return ph;
        }
    }
    return Complex(1.0, 0.0);
}

int rank_of(const RVector& sv, double tol) {
    if (sv.size() == 0 || sv(0) <= 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * sv(0)) ++r;
    return r;
}

}  // namespace

SchmidtDecomposition schmidt_decompose(const Ket& w, double tol) {
    if (!w.shape.is_bipartite()) throw ShapeError("bipartite ket required");
    const int m = w.shape.dim_a(), n = w.shape.dim_b();
    if (w.entries.norm() < 1e-300) throw DegenerateInputError("zero vector has no Schmidt form");
    Matrix coeff(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) coeff(i, j) = w.entries(i * n + j);
    Eigen::JacobiSVD<Matrix> svd(coeff, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SchmidtDecomposition out;
    out.tol = tol;
    out.coefficients = svd.singularValues();
    out.rank = rank_of(out.coefficients, tol);
    const int r = static_cast<int>(out.coefficients.size());
    for (int k = 0; k < r; ++k) {
        Vector a = svd.matrixU().col(k);
        Vector b = svd.matrixV().col(k).conjugate();  // w = sum c_k a_k (x) b_k
        Complex ph = fix_phase(a);
        b *= std::conj(ph);
        out.left_vectors.push_back(std::move(a));
        out.right_vectors.push_back(std::move(b));
    }
    return out;
}

int schmidt_rank(const Ket& w, double tol) {
    return schmidt_decompose(w, tol).rank;
}

std::vector<Matrix> hermitian_basis(int d) {
    std::vector<Matrix> basis;
    const double s = 1.0 / std::sqrt(2.0);
    // Diagonal part: Id/sqrt(d), then traceless diag(1,..,1,-l,0,..)/sqrt(l(l+1)).
    basis.push_back(Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
    for (int l = 1; l < d; ++l) {
        Matrix h = Matrix::Zero(d, d);
        for (int i = 0; i < l; ++i) h(i, i) = 1.0;
        h(l, l) = -static_cast<double>(l);
        basis.push_back(h / std::sqrt(static_cast<double>(l) * (l + 1)));
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Matrix h = Matrix::Zero(d, d);
            h(i, j) = s;
            h(j, i) = s;
            basis.push_back(h);
            Matrix g = Matrix::Zero(d, d);
            g(i, j) = Complex(0.0, s);
            g(j, i) = Complex(0.0, -s);
            basis.push_back(g);
        }
    return basis;
}

namespace {

// Realignment R[(i,i'),(j,j')] = X[(i,j),(i',j')], an m^2 x n^2 matrix.
Matrix realign(const Matrix& x, int m, int n) {
    Matrix r(m * m, n * n);
    for (int i = 0; i < m; ++i)
        for (int ip = 0; ip < m; ++ip)
            for (int j = 0; j < n; ++j)
                for (int jp = 0; jp < n; ++jp)
                    r(i * m + ip, j * n + jp) = x(i * n + j, ip * n + jp);
    return r;
}

}  // namespace

OperatorSchmidtDecomposition operator_schmidt_decompose(const BipartiteOperator& x,
                                                        double tol) {
    if (!x.shape.is_bipartite()) throw ShapeError("bipartite operator required");
    const int m = x.shape.dim_a(), n = x.shape.dim_b();
    if (entry_scale(x.mat) < 1e-300)
        throw DegenerateInputError("zero operator has no Schmidt form");
    Matrix r = realign(x.mat, m, n);
    OperatorSchmidtDecomposition out;
    out.tol = tol;
    if (is_hermitian(x.mat)) {
        // Coefficients C[a][b] = Tr((H_a (x) K_b) X) are real for Hermitian X;
        // a real SVD then yields Hermitian factor pairs directly.
        auto hb = hermitian_basis(m);
        auto kb = hermitian_basis(n);
        Matrix u(m * m, m * m), v(n * n, n * n);
        for (int a = 0; a < m * m; ++a)
            for (int i = 0; i < m; ++i)
                for (int ip = 0; ip < m; ++ip) u(a, i * m + ip) = hb[a](ip, i);
        for (int b = 0; b < n * n; ++b)
            for (int j = 0; j < n; ++j)
                for (int jp = 0; jp < n; ++jp) v(b, j * n + jp) = kb[b](jp, j);
        Matrix cc = u * r * v.transpose();
        if (cc.imag().cwiseAbs().maxCoeff() > 1e-8 * std::max(entry_scale(cc), 1e-300))
            throw InternalError("realignment of a Hermitian operator was not real");
        RMatrix c = cc.real();
        Eigen::JacobiSVD<RMatrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.singular_values = svd.singularValues();
        out.rank = rank_of(out.singular_values, tol);
        for (int k = 0; k < out.rank; ++k) {
            Matrix g = Matrix::Zero(m, m), d = Matrix::Zero(n, n);
            for (int a = 0; a < m * m; ++a) g += svd.matrixU()(a, k) * hb[a];
            for (int b = 0; b < n * n; ++b) d += svd.matrixV()(b, k) * kb[b];
            out.left_operators.push_back(std::move(g));
            out.right_operators.push_back(std::move(d));
        }
        out.hermitian_factors = true;
    } else {
        Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.singular_values = svd.singularValues();
        out.rank = rank_of(out.singular_values, tol);
        for (int k = 0; k < out.rank; ++k) {
            Matrix g(m, m), d(n, n);
            for (int i = 0; i < m; ++i)
                for (int ip = 0; ip < m; ++ip) g(i, ip) = svd.matrixU()(i * m + ip, k);
            for (int j = 0; j < n; ++j)
                for (int jp = 0; jp < n; ++jp) d(j, jp) = std::conj(svd.matrixV()(j * n + jp, k));
            out.left_operators.push_back(std::move(g));
            out.right_operators.push_back(std::move(d));
        }
    }
    return out;
}

int operator_schmidt_rank(const BipartiteOperator& x, double tol) {
    return operator_schmidt_decompose(x, tol).rank;
}

SupportCheckResult antisym_support_check(const BipartiteOperator& gamma, double tol) {
    if (!gamma.shape.is_bipartite() || gamma.shape.dim_a() != gamma.shape.dim_b())
        throw ShapeError("square bipartite shape k(x)k required");
    if (!is_hermitian(gamma.mat, 1e-8))
        throw HermiticityError("antisym_support_check requires a Hermitian operator");
    const int k = gamma.shape.dim_a();
    Matrix p = sym_projector(k).mat;
    double num = operator_norm(p * gamma.mat * p);
    double den = operator_norm(gamma.mat);
    if (den < 1e-300) throw DegenerateInputError("zero operator");
    SupportCheckResult r;
    r.residual = num / den;
    r.antisymmetric = r.residual <= tol;
    return r;
}

SupportCheckResult antisym_support_check_ket(const Ket& v, double tol) {
    if (!v.shape.is_bipartite() || v.shape.dim_a() != v.shape.dim_b())
        throw ShapeError("square bipartite shape k(x)k required");
    const int k = v.shape.dim_a();
    double den = v.entries.norm();
    if (den < 1e-300) throw DegenerateInputError("zero vector");
    SupportCheckResult r;
    r.residual = (sym_projector(k).mat * v.entries).norm() / den;
    r.antisymmetric = r.residual <= tol;
    return r;
}

AntisymCanonicalForm antisym_canonical_form(const Ket& v, double tol) {
    auto sup = antisym_support_check_ket(v, 1e-8);
    if (!sup.antisymmetric)
        throw SupportError("ket is not supported on the antisymmetric subspace "
                           "(||P_sym v|| / ||v|| = " + std::to_string(sup.residual) + ")",
                           sup.residual);
    const int d = v.shape.dim_a();
    Matrix coeff(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) coeff(i, j) = v.entries(i * d + j);
    Matrix k = 0.5 * (coeff - coeff.transpose());  // guard: exactly skew-symmetric

    // Peel 2x2 blocks: a top singular triple (s, u, t) of a skew-symmetric K
    // always satisfies K conj(u) = -s conj(t) and u^T t = 0, so
    // s (u t^* - conj(t) u^T) is a clean rank-2 skew deflation.
    AntisymCanonicalForm out;
    std::vector<double> lambdas;
    const double cutoff = tol * std::max(operator_norm(k), 1e-300);
    Matrix rem = k;
    for (int guard = 0; guard < d; ++guard) {
        Eigen::JacobiSVD<Matrix> svd(rem, Eigen::ComputeThinU | Eigen::ComputeThinV);
        double s = svd.singularValues()(0);
        if (s <= cutoff) break;
        Vector a = svd.matrixU().col(0);
        Vector b = svd.matrixV().col(0).conjugate();
        Complex ph = fix_phase(a);
        b *= std::conj(ph);
        rem -= s * (a * b.transpose() - b * a.transpose());
        lambdas.push_back(s);
        out.v_vectors.push_back(std::move(a));
        out.w_vectors.push_back(std::move(b));
    }
    out.n = static_cast<int>(lambdas.size());
    out.lambdas = RVector(out.n);
    for (int i = 0; i < out.n; ++i) out.lambdas(i) = lambdas[i];

    // The pairing heuristic is only trusted after reconstruction and Gram checks.
    Vector rec = Vector::Zero(d * d);
    for (int i = 0; i < out.n; ++i)
        for (int p = 0; p < d; ++p)
            for (int q = 0; q < d; ++q)
                rec(p * d + q) += out.lambdas(i) * (out.v_vectors[i](p) * out.w_vectors[i](q) -
                                                    out.w_vectors[i](p) * out.v_vectors[i](q));
    double relres = (rec - v.entries).norm() / v.entries.norm();
    if (relres > 1e-10)
        throw InternalError("canonical form reconstruction failed (residual " +
                            std::to_string(relres) + ")");
    for (int i = 0; i < out.n; ++i)
        for (int j = 0; j < out.n; ++j) {
            Complex vv = out.v_vectors[i].dot(out.v_vectors[j]);
            Complex ww = out.w_vectors[i].dot(out.w_vectors[j]);
            Complex vw = out.v_vectors[i].dot(out.w_vectors[j]);
            double dev = std::max({std::abs(vv - static_cast<double>(i == j)),
                                   std::abs(ww - static_cast<double>(i == j)), std::abs(vw)});
            if (dev > 1e-10)
                throw InternalError("canonical form vectors lost orthonormality");
        }
    return out;
}

}  // namespace qcert
