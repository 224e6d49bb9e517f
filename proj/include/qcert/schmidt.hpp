#pragma once

#include "qcert/types.hpp"

namespace qcert {

struct SchmidtDecomposition {
    RVector coefficients;             // nonnegative, descending
    std::vector<Vector> left_vectors;   // orthonormal in dim_a
    std::vector<Vector> right_vectors;  // orthonormal in dim_b
    int rank = 0;                     // count of coefficients > tol * c_1
    double tol = kRankTol;
};

struct OperatorSchmidtDecomposition {
    RVector singular_values;          // positive, descending
    std::vector<Matrix> left_operators;   // Hilbert-Schmidt orthonormal
    std::vector<Matrix> right_operators;
    int rank = 0;
    bool hermitian_factors = false;   // set when the input was Hermitian
    double tol = kRankTol;
};

// |v> = sum_i lambda_i (v_i (x) w_i - w_i (x) v_i) with {v_i, w_i} orthonormal
// as one set; SR(|v>) = 2n; for unit input 2 * sum lambda_i^2 = 1.
struct AntisymCanonicalForm {
    RVector lambdas;                  // positive, descending
    std::vector<Vector> v_vectors;
    std::vector<Vector> w_vectors;
    int n = 0;
};

struct SupportCheckResult {
    bool antisymmetric = false;
    double residual = 0.0;            // ||P_sym gamma P_sym|| / ||gamma||
};

// SVD of the dim_a x dim_b reshaping of w. Zero vector -> DegenerateInputError.
SchmidtDecomposition schmidt_decompose(const Ket& w, double tol = kRankTol);
int schmidt_rank(const Ket& w, double tol = kRankTol);

// SVD of the realignment of X. Hermitian inputs are realigned in a Hermitian
// operator basis so the factors come out Hermitian.
OperatorSchmidtDecomposition operator_schmidt_decompose(const BipartiteOperator& x,
                                                        double tol = kRankTol);
int operator_schmidt_rank(const BipartiteOperator& x, double tol = kRankTol);

// Canonical pairing of the skew-symmetric coefficient matrix of an
// antisymmetric ket, validated by reconstruction.
AntisymCanonicalForm antisym_canonical_form(const Ket& v, double tol = kRankTol);

// True iff ||P_sym gamma P_sym|| <= tol * ||gamma||.
SupportCheckResult antisym_support_check(const BipartiteOperator& gamma,
                                         double tol = kRankTol);
SupportCheckResult antisym_support_check_ket(const Ket& v, double tol = kRankTol);

// Hilbert-Schmidt orthonormal Hermitian basis of M_d (diagonal, symmetric and
// antisymmetric elements). Under transpose each element is +/- itself.
std::vector<Matrix> hermitian_basis(int d);

}  // namespace qcert
