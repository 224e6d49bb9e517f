#include "qcert/tensor.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace qcert {

double entry_scale(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    double scale = entry_scale(m);
    if (scale == 0.0) return true;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

Ket make_ket(Vector entries, Shape shape) {
    if (entries.size() != shape.total())
        throw ShapeError("ket length " + std::to_string(entries.size()) +
                         " does not match shape " + shape.str());
    if (!entries.allFinite()) throw DegenerateInputError("ket has non-finite entries");
    Ket k{std::move(entries), std::move(shape), false};
    k.unit = std::abs(k.entries.norm() - 1.0) <= 1e-8;
    return k;
}

BipartiteOperator make_operator(Matrix mat, Shape shape) {
    if (mat.rows() != mat.cols()) throw ShapeError("operator matrix must be square");
    if (mat.rows() != shape.total())
        throw ShapeError("matrix side " + std::to_string(mat.rows()) +
                         " does not match shape " + shape.str());
    if (!mat.allFinite()) throw DegenerateInputError("operator has non-finite entries");
    BipartiteOperator op{std::move(mat), std::move(shape), false};
    op.hermitian = is_hermitian(op.mat);
    return op;
}

BipartiteOperator kron(const BipartiteOperator& a, const BipartiteOperator& b) {
    std::vector<int> dims = a.shape.dims;
    dims.insert(dims.end(), b.shape.dims.begin(), b.shape.dims.end());
    if (dims.size() == 3) dims = {dims[0] * dims[1], dims[2]};  // keep 1, 2 or 4 factors
    if (dims.size() > 4) throw ShapeError("kron result beyond four sites is unsupported");
    Shape s(dims);
    s.total();  // enforce the cap before allocating
    const Matrix& A = a.mat;
    const Matrix& B = b.mat;
    Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return make_operator(std::move(out), s);
}

Ket kron(const Ket& a, const Ket& b) {
    std::vector<int> dims = a.shape.dims;
    dims.insert(dims.end(), b.shape.dims.begin(), b.shape.dims.end());
    if (dims.size() == 3) dims = {dims[0] * dims[1], dims[2]};
    if (dims.size() > 4) throw ShapeError("kron result beyond four sites is unsupported");
    Shape s(dims);
    s.total();
    Vector out(a.entries.size() * b.entries.size());
    for (Eigen::Index i = 0; i < a.entries.size(); ++i)
        out.segment(i * b.entries.size(), b.entries.size()) = a.entries(i) * b.entries;
    return make_ket(std::move(out), s);
}

Matrix partial_trace_left(const BipartiteOperator& x) {
    const int m = x.shape.dim_a(), n = x.shape.dim_b();
    Matrix out = Matrix::Zero(n, n);
    for (int i = 0; i < m; ++i)
        out += x.mat.block(i * n, i * n, n, n);
    return out;
}

Matrix partial_trace_right(const BipartiteOperator& x) {
    const int m = x.shape.dim_a(), n = x.shape.dim_b();
    Matrix out = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            out(i, j) = x.mat.block(i * n, j * n, n, n).trace();
    return out;
}

Matrix partial_trace_sites_13(const BipartiteOperator& x) {
    if (!x.shape.is_four_site()) throw ShapeError("four-site shape required");
    const int m = x.shape.dims[0], n = x.shape.dims[1];
    auto idx = [m, n](int i1, int i2, int i3, int i4) {
        return ((i1 * n + i2) * m + i3) * n + i4;
    };
    Matrix out = Matrix::Zero(n * n, n * n);
    for (int i2 = 0; i2 < n; ++i2)
        for (int i4 = 0; i4 < n; ++i4)
            for (int j2 = 0; j2 < n; ++j2)
                for (int j4 = 0; j4 < n; ++j4) {
                    Complex acc = 0.0;
                    for (int i1 = 0; i1 < m; ++i1)
                        for (int i3 = 0; i3 < m; ++i3)
                            acc += x.mat(idx(i1, i2, i3, i4), idx(i1, j2, i3, j4));
                    out(i2 * n + i4, j2 * n + j4) = acc;
                }
    return out;
}

BipartiteOperator partial_transpose_right(const BipartiteOperator& x) {
    const int m = x.shape.dim_a(), n = x.shape.dim_b();
    Matrix out(x.mat.rows(), x.mat.cols());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            out.block(i * n, j * n, n, n) = x.mat.block(i * n, j * n, n, n).transpose();
    return make_operator(std::move(out), x.shape);
}

BipartiteOperator partial_transpose_left(const BipartiteOperator& x) {
    const int m = x.shape.dim_a(), n = x.shape.dim_b();
    Matrix out(x.mat.rows(), x.mat.cols());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            out.block(i * n, j * n, n, n) = x.mat.block(j * n, i * n, n, n);
    return make_operator(std::move(out), x.shape);
}

BipartiteOperator flip(int d) {
    if (d < 1) throw ShapeError("flip dimension must be >= 1");
    Shape s(d, d);
    s.total();
    Matrix out = Matrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out(i * d + j, j * d + i) = 1.0;
    return make_operator(std::move(out), s);
}

BipartiteOperator sym_projector(int d) {
    BipartiteOperator f = flip(d);
    f.mat = 0.5 * (Matrix::Identity(d * d, d * d) + f.mat);
    f.hermitian = true;
    return f;
}

double purity(const Matrix& rho) {
    if (rho.rows() != rho.cols()) throw ShapeError("purity requires a square matrix");
    Complex t = (rho * rho).trace();
    return t.real();
}

SpectralReport psd_check(const Matrix& x, double tol) {
    if (!is_hermitian(x, 1e-8))
        throw HermiticityError("psd_check requires a Hermitian matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + Matrix(x.adjoint())),
                                             Eigen::EigenvaluesOnly);
    RVector ev = es.eigenvalues().reverse();  // descending
    SpectralReport rep;
    rep.eigenvalues = ev;
    rep.min_eigenvalue = ev.size() ? ev(ev.size() - 1) : 0.0;
    rep.scale = ev.size() ? std::max(std::abs(ev(0)), std::abs(rep.min_eigenvalue)) : 0.0;
    rep.tol = tol;
    rep.psd = rep.min_eigenvalue >= -tol * std::max(rep.scale, 1e-300);
    return rep;
}

SpectralReport psd_check(const BipartiteOperator& x, double tol) {
    return psd_check(x.mat, tol);
}

Ket max_ent_unnormalized(int n) {
    if (n < 1) throw ShapeError("dimension must be >= 1");
    Shape s(n, n);
    s.total();
    Vector v = Vector::Zero(n * n);
    for (int j = 0; j < n; ++j) v(j * n + j) = 1.0;
    return make_ket(std::move(v), s);
}

double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    if (is_hermitian(m)) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

}  // namespace qcert
