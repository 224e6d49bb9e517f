#pragma once

#include "qcert/rational.hpp"
#include "qcert/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace qcert {
namespace mub {

enum class Field { complex_field, real_field };

struct Basis {
    int d = 0;
    std::vector<Vector> vectors;  // d unit kets, pairwise orthonormal
};

struct MubFamily {
    int d = 0;
    std::vector<Basis> bases;
    bool verified = false;
    double max_deviation = 0.0;  // from the last verification
};

// Worst offender located by family_verify; indices are (basis, vector).
struct VerifyRecord {
    bool verified = false;
    double max_cross_deviation = 0.0;  // | |<a,b>| - 1/sqrt(d) | over cross pairs
    double max_gram_defect = 0.0;      // intra-basis orthonormality defect
    double max_imag_entry = 0.0;       // only relevant when certifying realness
    int worst_pair[4] = {-1, -1, -1, -1};
    std::string failure;
};

struct BoundReport {
    int m = 0, n = 0, t = 0;
    Field field = Field::complex_field;
    double purity_sum = 0.0;
    Rational bound;      // exact; (m^2+t-1)n complex, (m(m+1)/2+t-1)n real
    bool satisfied = false;
    double slack = 0.0;  // bound - purity_sum
};

struct IdentityCheck {
    std::string name;
    double value = 0.0;
    double expected = 0.0;
    double rel_err = 0.0;
    bool pass = false;
};

struct IdentityReport {
    int m = 0, n = 0, trials = 0;
    std::uint64_t seed = 0;
    std::vector<IdentityCheck> checks;
    bool all_pass = false;
};

struct CommutationReport {
    int m = 0, n = 0, t = 0;
    double max_product_residual = 0.0;  // || A_j A_k - (1/mn) |Psi><Psi| ||
    double slack_min_eig = 0.0;         // min eigenvalue of the slack operator B
    bool slack_psd = false;
    bool pass = false;
};

struct ConservationReport {
    int m = 0, n = 0, t = 0;
    double purity_sum = 0.0;
    double target = 0.0;  // mn(m+n)
    bool pass = false;
};

// Per-n comparison of the low-Schmidt-rank bound against the mn+1 / mn-1
// reference values for bases with fixed Schmidt coefficients.
struct BoundComparison {
    int k = 0, m = 0, n = 0;
    Rational bound;                  // k(m^2-1)/(m-k)
    bool below_mn_plus_1 = false;    // bound < mn+1
    bool threshold_equiv = false;    // (bound < mn+1) <=> (k < (mn+1)/(m+n))
    bool half_regime = false;        // k <= m/2
    struct Row { int n = 0; bool strict = false; bool equal = false; };
    std::vector<Row> sweep;          // bound vs mn'-1 for n' = m..n
    bool strict_all = false;         // bound < mn'-1 for every swept n'
};

// p+1 mutually unbiased bases of C^p for prime p <= 31. Pauli eigenbases for
// p = 2, quadratic phases over Z_p for odd p. The first basis is canonical.
MubFamily mub_prime(int p);

MubFamily family_load(const std::string& path);
VerifyRecord family_verify(MubFamily& family, double tol = kUnbiasedTol,
                           bool require_real = false);

// Product bases {A_i (x) B_j} for the given (left, right) index pairs
// (0-based). Verification is run on the result; repeated indices surface as a
// failed record rather than an upfront error.
MubFamily product_mub(const MubFamily& fa, const MubFamily& fb,
                      const std::vector<std::pair<int, int>>& pairing);

// f(X) = <Phi| Tr_{1,3}(X) |Phi> on four-site operators; real for Hermitian X
// and nonnegative for PSD X.
Complex functional_f(const BipartiteOperator& x);

// Checks the five closed-form values of f (product marginals on random kets,
// the maximally entangled witness, identity, flip, symmetric projector).
IdentityReport functional_identity_suite(int m, int n, int trials = 100,
                                         std::uint64_t seed = 0);

// Sum of left-marginal purities of every vector in every basis, for the
// factorization d = m * n.
double purity_sum(const MubFamily& family, int m, int n);

Rational purity_sum_bound(int m, int n, int t, Field field);
BoundReport check_bound(const MubFamily& family, int m, int n, Field field);

// Upper bound on the number of mutually unbiased bases of C^m (x) C^n (resp.
// real) built from vectors with Schmidt rank <= k; requires 1 <= k < m.
Rational max_bases_bound(int k, int m, Field field);

// Product bases of C^{d_1} (x) ... (x) C^{d_r} are capped by min_j d_j + 1.
int multipartite_product_bound(const std::vector<int>& dims);

BoundComparison bound_comparison(int k, int m, int n);

// Builds the projectors A_j = sum_i |Psi_ji><Psi_ji| (x) conj and checks
// A_j A_k = (1/mn)|Psi><Psi| pairwise plus positivity of the slack operator.
CommutationReport projector_commutation_check(const MubFamily& family, int m, int n,
                                              double tol = 1e-9);

// For a complete family (mn+1 bases): purity_sum == mn(m+n) within 1e-8.
ConservationReport conservation_check(const MubFamily& family, int m, int n);

bool is_prime(int p);
int next_prime_above(int k);

}  // namespace mub
}  // namespace qcert
