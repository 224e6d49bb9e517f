#pragma once

#include "qcert/types.hpp"

namespace qcert {

// Kronecker products; output shape is the concatenation of the input shapes.
BipartiteOperator kron(const BipartiteOperator& a, const BipartiteOperator& b);
Ket kron(const Ket& a, const Ket& b);

// Partial traces of a bipartite operator. "left" traces out the first factor
// (result side dim_b), "right" the second (result side dim_a).
Matrix partial_trace_left(const BipartiteOperator& x);
Matrix partial_trace_right(const BipartiteOperator& x);

// Trace over sites 1 and 3 of a four-site operator; result has side n*n.
Matrix partial_trace_sites_13(const BipartiteOperator& x);

// Block-wise transpose of the second (resp. first) tensor factor.
BipartiteOperator partial_transpose_right(const BipartiteOperator& x);
BipartiteOperator partial_transpose_left(const BipartiteOperator& x);

// Swap operator F_d on C^d (x) C^d: F(a (x) b) = b (x) a.
BipartiteOperator flip(int d);

// Orthogonal projector onto the symmetric subspace of C^d (x) C^d,
// P = (Id + F_d) / 2. Kept unnormalized (it is a projector, trace d(d+1)/2).
BipartiteOperator sym_projector(int d);

// Tr(rho^2) for Hermitian rho.
double purity(const Matrix& rho);

// Full Hermitian eigensolve; psd iff min eigenvalue >= -tol * scale.
SpectralReport psd_check(const BipartiteOperator& x, double tol = kPsdTol);
SpectralReport psd_check(const Matrix& x, double tol = kPsdTol);

// Unnormalized maximally entangled ket sum_j |jj> in C^n (x) C^n; norm^2 = n.
Ket max_ent_unnormalized(int n);

// Spectral norm (largest singular value), via Hermitian eigensolve when
// applicable and SVD otherwise.
double operator_norm(const Matrix& m);

}  // namespace qcert
