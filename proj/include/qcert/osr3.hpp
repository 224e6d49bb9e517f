#pragma once

#include "qcert/ppt.hpp"
#include "qcert/schmidt.hpp"
#include "qcert/types.hpp"

#include <optional>
#include <string>

namespace qcert {
namespace osr3 {

// Hermitian tensor decomposition A = sum_i gamma_i (x) delta_i with gamma_1 =
// Tr_B(A) positive semidefinite and all images inside the leading factors'.
struct NormalForm {
    std::vector<Matrix> gammas;
    std::vector<Matrix> deltas;
    int rank = 0;
    double residual = 0.0;       // || A - sum gamma_i (x) delta_i || / ||A||
    bool delta1_psd = true;      // verified, not constructed
    double range_defect = 0.0;   // worst image-containment violation
    std::string diagnostics;
};

struct InvarianceCheck {
    bool invariant = false;
    double residual = 0.0;  // || A - A^{Gamma_left} || / ||A||
};

struct LocalOp {
    enum Side { left, right } side = left;
    Matrix matrix;       // applied as (M (x) Id) X (M (x) Id)^* or the right analogue
    double cond = 1.0;   // condition number, logged for replay diagnostics
};
using LocalOpChain = std::vector<LocalOp>;

// Apply the chain (forward) or its inverse to an operator on the given shape.
Matrix chain_apply(const LocalOpChain& chain, const Matrix& x, const Shape& shape);
Matrix chain_unapply(const LocalOpChain& chain, const Matrix& x, const Shape& shape);
Vector chain_unapply_ket(const LocalOpChain& chain, const Vector& v, const Shape& shape);

struct CitedBlock {
    Matrix block;            // stored in the final pipeline frame
    std::string citation;
    bool ppt_verified = false;
    int osr = 0;
    std::string embedding;   // "2xk" for the split residual, "full" for whole-state delegation
};

enum class CertStatus { fully_constructive, constructive_plus_cited };

struct SeparabilityCertificate {
    ppt::ProductEnsemble constructive;     // product terms in the original frame
    std::optional<CitedBlock> cited;
    CertStatus status = CertStatus::fully_constructive;
    double reconstruction_residual = 0.0;  // vs the (possibly regularized) input
    LocalOpChain chain;
    double eps_reg = 0.0;
    bool regularized = false;
    double regularization_residual = 0.0;  // || A - A(eps) ||_F when regularized
    std::vector<std::string> notes;        // pipeline branch log
};

InvarianceCheck left_pt_invariance_check(const BipartiteOperator& a, double tol = 1e-9);

// Requires A positive semidefinite with operator Schmidt rank <= 3.
NormalForm normal_form(const BipartiteOperator& a, double tol = kRankTol);

// Constructive separability for PSD left-partial-transpose-invariant states of
// M_3 (x) M_k with operator Schmidt rank <= 3. Singular inputs are first
// regularized; rank <= 2 inputs are delegated to the cited route.
SeparabilityCertificate separate(const BipartiteOperator& a, double eps_reg = 1e-6,
                                 double tol = 1e-8);

// Ensemble with terms (1, mu_i) (x) u_i reconstructing [[Id, L], [L, L^2]] in
// M_2 (x) M_k from the spectral decomposition of Hermitian L.
ppt::ProductEnsemble lblock_ensemble(const Matrix& l);

struct SnBoundReport {
    int k = 0, m = 0;
    int bound = 0;              // k - 2
    std::string provenance;     // "constructive" for k = 3, otherwise a citation
    std::optional<SeparabilityCertificate> certificate;
    std::optional<int> ensemble_upper;  // from a caller-supplied witness ensemble
};

// Schmidt number bound k-2 for PSD left-PT-invariant states of M_k (x) M_m with
// operator Schmidt rank exactly 3 (k <= m). For k = 3 the separability
// certificate is attached; an optional ensemble provides an independent upper
// bound cross-check.
SnBoundReport schmidt_number_report(const BipartiteOperator& a,
                                    const ppt::ProductEnsemble* witness = nullptr,
                                    double eps_reg = 1e-6, double tol = 1e-8);

}  // namespace osr3
}  // namespace qcert
