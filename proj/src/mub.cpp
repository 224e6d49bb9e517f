#include "qcert/mub.hpp"

#include "qcert/io.hpp"
#include "qcert/schmidt.hpp"
#include "qcert/tensor.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace qcert {
namespace mub {

bool is_prime(int p) {
    if (p < 2) return false;
    for (int q = 2; q * q <= p; ++q)
        if (p % q == 0) return false;
    return true;
}

int next_prime_above(int k) {
    int p = k + 1;
    while (!is_prime(p)) ++p;
    return p;
}

MubFamily mub_prime(int p) {
    if (!is_prime(p))
        throw UnsupportedDimensionError(
            "dimension " + std::to_string(p) +
            " is not prime (prime powers are supported via family data files)");
    if (p > 31) throw UnsupportedDimensionError("prime dimensions above 31 are not supported");

    MubFamily fam;
    fam.d = p;
    Basis canonical;
    canonical.d = p;
    for (int j = 0; j < p; ++j) {
        Vector v = Vector::Zero(p);
        v(j) = 1.0;
        canonical.vectors.push_back(std::move(v));
    }
    fam.bases.push_back(std::move(canonical));

    const double inv = 1.0 / std::sqrt(static_cast<double>(p));
    if (p == 2) {
        Basis x, y;
        x.d = y.d = 2;
        x.vectors = {inv * (Vector(2) << 1, 1).finished(),
                     inv * (Vector(2) << 1, -1).finished()};
        y.vectors = {inv * (Vector(2) << 1, Complex(0, 1)).finished(),
                     inv * (Vector(2) << 1, Complex(0, -1)).finished()};
        fam.bases.push_back(std::move(x));
        fam.bases.push_back(std::move(y));
    } else {
        // Basis a (a = 0..p-1), vector j: entries omega^(a k^2 + j k) / sqrt(p).
        for (int a = 0; a < p; ++a) {
            Basis b;
            b.d = p;
            for (int j = 0; j < p; ++j) {
                Vector v(p);
                for (int k = 0; k < p; ++k) {
                    int ph = (a * k % p * k + j * k) % p;
                    double ang = 2.0 * std::numbers::pi * ph / p;
                    v(k) = inv * Complex(std::cos(ang), std::sin(ang));
                }
                b.vectors.push_back(std::move(v));
            }
            fam.bases.push_back(std::move(b));
        }
    }
    VerifyRecord rec = family_verify(fam);
    if (!rec.verified)
        throw InternalError("generated prime family failed verification: " + rec.failure);
    return fam;
}

VerifyRecord family_verify(MubFamily& family, double tol, bool require_real) {
    VerifyRecord rec;
    const int d = family.d;
    const double target = 1.0 / std::sqrt(static_cast<double>(d));
    for (size_t a = 0; a < family.bases.size(); ++a) {
        const Basis& ba = family.bases[a];
        if (ba.d != d || static_cast<int>(ba.vectors.size()) != d) {
            rec.failure = "basis " + std::to_string(a) + " has wrong size";
            family.verified = false;
            return rec;
        }
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                double dev = std::abs(ba.vectors[i].dot(ba.vectors[j]) -
                                      Complex(i == j ? 1.0 : 0.0));
                if (dev > rec.max_gram_defect) {
                    rec.max_gram_defect = dev;
                    rec.worst_pair[0] = static_cast<int>(a);
                    rec.worst_pair[1] = i;
                    rec.worst_pair[2] = static_cast<int>(a);
                    rec.worst_pair[3] = j;
                }
            }
            if (require_real)
                rec.max_imag_entry =
                    std::max(rec.max_imag_entry, ba.vectors[i].imag().cwiseAbs().maxCoeff());
        }
        for (size_t b = a + 1; b < family.bases.size(); ++b) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double dev =
                        std::abs(std::abs(ba.vectors[i].dot(family.bases[b].vectors[j])) - target);
                    if (dev > rec.max_cross_deviation) {
                        rec.max_cross_deviation = dev;
                        rec.worst_pair[0] = static_cast<int>(a);
                        rec.worst_pair[1] = i;
                        rec.worst_pair[2] = static_cast<int>(b);
                        rec.worst_pair[3] = j;
                    }
                }
        }
    }
    double worst = std::max(rec.max_cross_deviation, rec.max_gram_defect);
    if (require_real) worst = std::max(worst, rec.max_imag_entry);
    rec.verified = worst <= tol;
    if (!rec.verified && rec.failure.empty())
        rec.failure = "deviation " + std::to_string(worst) + " at bases (" +
                      std::to_string(rec.worst_pair[0]) + "," + std::to_string(rec.worst_pair[2]) +
                      "), vectors (" + std::to_string(rec.worst_pair[1]) + "," +
                      std::to_string(rec.worst_pair[3]) + ")";
    family.verified = rec.verified;
    family.max_deviation = worst;
    return rec;
}

MubFamily family_load(const std::string& path) {
    return io::load_mub_family(path);
}

MubFamily product_mub(const MubFamily& fa, const MubFamily& fb,
                      const std::vector<std::pair<int, int>>& pairing) {
    MubFamily out;
    out.d = fa.d * fb.d;
    Shape check({out.d});
    check.total();
    for (auto [i, j] : pairing) {
        if (i < 0 || i >= static_cast<int>(fa.bases.size()) || j < 0 ||
            j >= static_cast<int>(fb.bases.size()))
            throw PreconditionError("pairing index out of range");
        Basis b;
        b.d = out.d;
        for (const Vector& u : fa.bases[i].vectors)
            for (const Vector& v : fb.bases[j].vectors) {
                Vector w(out.d);
                for (int s = 0; s < fa.d; ++s) w.segment(s * fb.d, fb.d) = u(s) * v;
                b.vectors.push_back(std::move(w));
            }
        out.bases.push_back(std::move(b));
    }
    family_verify(out);
    return out;
}

Complex functional_f(const BipartiteOperator& x) {
    if (!x.shape.is_four_site()) throw ShapeError("functional_f requires a four-site operator");
    const int n = x.shape.dims[1];
    Matrix y = partial_trace_sites_13(x);
    Vector phi = max_ent_unnormalized(n).entries;
    return phi.dot(y * phi);  // <Phi| Y |Phi>
}

namespace {

Vector random_unit_ket(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
    return v / v.norm();
}

BipartiteOperator four_site_from_pair(const Matrix& lhs, const Matrix& rhs, int m, int n) {
    BipartiteOperator a = make_operator(lhs, Shape(m, n));
    BipartiteOperator b = make_operator(rhs, Shape(m, n));
    return kron(a, b);
}

}  // namespace

IdentityReport functional_identity_suite(int m, int n, int trials, std::uint64_t seed) {
    Shape full = Shape::four_site(m, n);
    full.total();
    IdentityReport rep;
    rep.m = m;
    rep.n = n;
    rep.trials = trials;
    rep.seed = seed;
    const int d = m * n;

    auto push = [&rep](const std::string& name, double value, double expected) {
        IdentityCheck c;
        c.name = name;
        c.value = value;
        c.expected = expected;
        c.rel_err = std::abs(value - expected) / std::max(std::abs(expected), 1.0);
        c.pass = c.rel_err <= 1e-9;
        rep.checks.push_back(c);
    };

    // f(|w><w| (x) |conj w><conj w|) = purity of the left marginal, on random kets.
    std::mt19937_64 rng(seed);
    double worst_dev = 0.0;
    for (int t = 0; t < trials; ++t) {
        Vector w = random_unit_ket(d, rng);
        Matrix proj = w * w.adjoint();
        BipartiteOperator x = four_site_from_pair(proj, proj.conjugate(), m, n);
        double lhs = functional_f(x).real();
        double rhs = purity(partial_trace_left(make_operator(proj, Shape(m, n))));
        worst_dev = std::max(worst_dev, std::abs(lhs - rhs));
    }
    push("marginal_purity_random", worst_dev, 0.0);

    Vector psi = max_ent_unnormalized(d).entries;
    BipartiteOperator psi_proj = make_operator(psi * psi.adjoint(), Shape::four_site(m, n));
    push("max_ent_witness", functional_f(psi_proj).real(),
         static_cast<double>(m) * n * n);

    BipartiteOperator id4 = make_operator(Matrix::Identity(d * d, d * d), Shape::four_site(m, n));
    push("identity", functional_f(id4).real(), static_cast<double>(m) * m * n);

    BipartiteOperator f_op = flip(d);
    f_op.shape = Shape::four_site(m, n);
    push("flip", functional_f(f_op).real(), static_cast<double>(m) * n);

    BipartiteOperator p_op = sym_projector(d);
    p_op.shape = Shape::four_site(m, n);
    push("sym_projector", functional_f(p_op).real(),
         (static_cast<double>(m) * m * n + m * n) / 2.0);

    rep.all_pass = true;
    for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

double purity_sum(const MubFamily& family, int m, int n) {
    if (m * n != family.d)
        throw ShapeError("factorization " + std::to_string(m) + "x" + std::to_string(n) +
                         " does not match family dimension " + std::to_string(family.d));
    double sum = 0.0;
    for (const Basis& b : family.bases)
        for (const Vector& v : b.vectors) {
            Ket k = make_ket(v, Shape(m, n));
            // P(Tr_A |v><v|) = sum of fourth powers of the Schmidt coefficients.
            RVector c = schmidt_decompose(k).coefficients;
            sum += c.array().square().square().sum();
        }
    return sum;
}

Rational purity_sum_bound(int m, int n, int t, Field field) {
    if (t < 1) throw PreconditionError("at least one basis required");
    if (m < 1 || n < 1) throw ShapeError("dimensions must be >= 1");
    if (field == Field::complex_field)
        return Rational(static_cast<std::int64_t>(m) * m + t - 1) * Rational(n);
    return (Rational(static_cast<std::int64_t>(m) * (m + 1), 2) + Rational(t - 1)) * Rational(n);
}

BoundReport check_bound(const MubFamily& family, int m, int n, Field field) {
    BoundReport rep;
    rep.m = m;
    rep.n = n;
    rep.t = static_cast<int>(family.bases.size());
    rep.field = field;
    rep.purity_sum = purity_sum(family, m, n);
    rep.bound = purity_sum_bound(m, n, rep.t, field);
    rep.slack = rep.bound.value() - rep.purity_sum;
    rep.satisfied = rep.purity_sum <= rep.bound.value() + 1e-8;
    return rep;
}

Rational max_bases_bound(int k, int m, Field field) {
    if (k < 1 || k >= m)
        throw PreconditionError("Schmidt rank cap k must satisfy 1 <= k < m");
    if (field == Field::complex_field)
        return Rational(static_cast<std::int64_t>(k) * (static_cast<std::int64_t>(m) * m - 1),
                        m - k);
    return Rational(k, 2) *
           Rational(static_cast<std::int64_t>(m) * (m + 1) - 2, m - k);
}

int multipartite_product_bound(const std::vector<int>& dims) {
    if (dims.empty()) throw PreconditionError("empty dimension list");
    int mn = dims[0];
    for (int d : dims) {
        if (d < 1) throw ShapeError("dimensions must be >= 1");
        mn = std::min(mn, d);
    }
    return mn + 1;
}

BoundComparison bound_comparison(int k, int m, int n) {
    BoundComparison cmp;
    cmp.k = k;
    cmp.m = m;
    cmp.n = n;
    cmp.bound = max_bases_bound(k, m, Field::complex_field);
    Rational mn1(static_cast<std::int64_t>(m) * n + 1);
    cmp.below_mn_plus_1 = cmp.bound < mn1;
    bool rhs = Rational(k) * Rational(m + n) < mn1;  // k < (mn+1)/(m+n)
    cmp.threshold_equiv = (cmp.below_mn_plus_1 == rhs);
    cmp.half_regime = 2 * k <= m;
    cmp.strict_all = true;
    for (int np = m; np <= n; ++np) {
        Rational ref(static_cast<std::int64_t>(m) * np - 1);
        BoundComparison::Row row;
        row.n = np;
        row.strict = cmp.bound < ref;
        row.equal = cmp.bound == ref;
        cmp.strict_all = cmp.strict_all && row.strict;
        cmp.sweep.push_back(row);
    }
    return cmp;
}

CommutationReport projector_commutation_check(const MubFamily& family, int m, int n,
                                              double tol) {
    if (!family.verified)
        throw PreconditionError("projector_commutation_check requires a verified family");
    const int d = m * n;
    if (d != family.d) throw ShapeError("factorization does not match family dimension");
    Shape full = Shape::four_site(m, n);
    full.total();
    CommutationReport rep;
    rep.m = m;
    rep.n = n;
    rep.t = static_cast<int>(family.bases.size());

    std::vector<Matrix> a_ops;
    for (const Basis& b : family.bases) {
        Matrix a = Matrix::Zero(d * d, d * d);
        for (const Vector& v : b.vectors) {
            Matrix proj = v * v.adjoint();
            Matrix cproj = proj.conjugate();
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    a.block(i * d, j * d, d, d) += proj(i, j) * cproj;
        }
        a_ops.push_back(std::move(a));
    }

    Vector psi = max_ent_unnormalized(d).entries;
    Matrix psi_proj = psi * psi.adjoint();
    for (size_t j = 0; j < a_ops.size(); ++j)
        for (size_t k = j + 1; k < a_ops.size(); ++k) {
            Matrix prod = a_ops[j] * a_ops[k];
            rep.max_product_residual = std::max(
                rep.max_product_residual, operator_norm(prod - psi_proj / static_cast<double>(d)));
            rep.max_product_residual = std::max(
                rep.max_product_residual,
                operator_norm(a_ops[k] * a_ops[j] - psi_proj / static_cast<double>(d)));
        }

    Matrix slack = Matrix::Identity(d * d, d * d) +
                   (static_cast<double>(rep.t - 1) / d) * psi_proj;
    for (const Matrix& a : a_ops) slack -= a;
    SpectralReport sr = psd_check(slack, kPsdTol);
    rep.slack_min_eig = sr.min_eigenvalue;
    rep.slack_psd = sr.psd;
    rep.pass = rep.slack_psd && rep.max_product_residual <= tol;
    return rep;
}

ConservationReport conservation_check(const MubFamily& family, int m, int n) {
    if (static_cast<int>(family.bases.size()) != family.d + 1)
        throw PreconditionError("conservation law requires a complete family of d+1 bases");
    if (!family.verified)
        throw PreconditionError("conservation_check requires a verified family");
    ConservationReport rep;
    rep.m = m;
    rep.n = n;
    rep.t = static_cast<int>(family.bases.size());
    rep.purity_sum = purity_sum(family, m, n);
    rep.target = static_cast<double>(m) * n * (m + n);
    rep.pass = std::abs(rep.purity_sum - rep.target) <= 1e-8;
    return rep;
}

}  // namespace mub
}  // namespace qcert
