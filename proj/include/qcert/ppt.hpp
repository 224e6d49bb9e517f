#pragma once

#include "qcert/schmidt.hpp"
#include "qcert/types.hpp"

#include <optional>
#include <string>

namespace qcert {
namespace ppt {

// One pure term of a separability / Schmidt-number witness ensemble. kets may
// be non-unit; weights absorb norms.
struct EnsembleTerm {
    double weight = 0.0;
    Vector ket;
    int sr_tag = 1;  // claimed Schmidt rank upper bound for this term
};

struct ProductEnsemble {
    std::vector<EnsembleTerm> terms;
    Shape target_shape;
};

Matrix ensemble_reconstruct(const ProductEnsemble& e);
double ensemble_residual(const ProductEnsemble& e, const Matrix& target);

// max sr_tag, with every tag re-verified against schmidt_rank of its ket.
int sn_upper_from_ensemble(const ProductEnsemble& e, double tol = kRankTol);

struct PptCertificate {
    double min_eig_state = 0.0;
    double min_eig_pt = 0.0;
    bool ppt = false;
    double gamma_pt_norm = 0.0;  // || |v><v|^Gamma || when a pure addend exists
};

PptCertificate ppt_check(const BipartiteOperator& b, double tol = kPsdTol);

struct SicPovm {
    int d = 0;
    std::vector<Vector> vectors;  // d^2 unit kets
    bool verified = false;
    double max_equiangular_dev = 0.0;  // | |<v_i,v_j>|^2 - 1/(d+1) |
    double resolution_residual = 0.0;  // vs the symmetric projector resolution
};

// Fiducials shipped for d = 2, 3; other dimensions need a data file.
SicPovm sic_builtin(int d);
SicPovm sic_from_fiducial(int d, const Vector& fiducial);
SicPovm sic_load(const std::string& path);
void sic_verify(SicPovm& s, double tol = 1e-8);

struct ResolutionReport {
    int k = 0;
    double residual = 0.0;  // || 2 P_sym - sum |psi><psi|^(x2) ||
    bool pass = false;
};

// Complete prime-dimension MUB family resolves 2 P_sym as a sum of symmetric
// product projectors.
ResolutionReport sym_resolution_check(int k, double tol = 1e-9);

enum class DeflationMode { prime, sic };

// Separable ensemble for P_sym - eps |a><a| (x) |a><a| with unit a in C^k.
// prime mode is valid for eps <= 1/2, sic mode for eps <= (k+1)/(2k).
ProductEnsemble sym_minus_product_ensemble(const Vector& a, double eps, DeflationMode mode);

enum class Sr2Regime { sn2, sep, sep_sic };

// Ensemble for P_sym - eps |s><s|, s = a1 (x) a2 + a2 (x) a1 with orthonormal
// a1, a2. sn2: Schmidt-rank-2 terms, eps <= 1/2; sep / sep_sic: product terms,
// eps <= 1/12 resp. (k+1)/(12k).
ProductEnsemble sym_minus_sr2_ensemble(const Vector& a1, const Vector& a2, double eps,
                                       Sr2Regime regime);

enum class MixRegime { a, b, c };

double regime_limit(MixRegime regime, int k);

struct PureMixture {
    BipartiteOperator b;       // P_sym + eps |v><v|
    ProductEnsemble ensemble;  // certifies the Schmidt-number upper bound
    PptCertificate ppt;
    int sr_v = 0;   // Schmidt rank of v (even)
    double eps = 0.0;
    MixRegime regime = MixRegime::b;
};

// Mixture of the symmetric projector with a pure antisymmetric state. Regime a
// allows eps <= 1 with rank <= max(SR(v)/2, 2) terms; regimes b and c give
// rank <= SR(v)/2 for eps <= 1/6 resp. (k+1)/(6k).
PureMixture antisym_pure_mixture(const Ket& v, double eps, MixRegime regime);

struct SnCertificate {
    int lower = 0;
    bool lower_certified = false;  // true only when gamma is pure
    std::string lower_provenance;  // "computed" or a citation
    int upper = 0;
    double epsilon = 0.0;
    MixRegime regime = MixRegime::b;
    bool interval = false;  // regime a with SN(gamma) = 2: result is 1 or 2
};

struct StateMixture {
    BipartiteOperator b;  // P_sym + eps * gamma
    ProductEnsemble ensemble;
    SnCertificate sn;
    PptCertificate ppt;
    int sn_gamma_proxy = 0;  // max SR over the computed eigenbasis of gamma
    bool gamma_pure = false;
};

// Mixture with an arbitrary trace-one state supported on the antisymmetric
// subspace: eigendecompose, run the pure-state construction per eigenvector
// and merge with the spectral weights.
StateMixture antisym_state_mixture(const BipartiteOperator& gamma, double eps,
                                   MixRegime regime);

// Right side of the algebraic correction-vector identity for
// P_sym + eps |v><v|, assembled as an operator (no separability reasoning);
// used to test the identity directly.
Matrix correction_identity_rhs(const Ket& v, double eps);

}  // namespace ppt
}  // namespace qcert
