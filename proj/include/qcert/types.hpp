#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Default tolerances, relative to the largest singular value of the object
// they are applied to.
inline constexpr double kRankTol = 1e-9;
inline constexpr double kPsdTol = 1e-8;
inline constexpr double kUnbiasedTol = 1e-10;

// Total-dimension cap for Kronecker products and constructions.
inline constexpr int kDimCap = 4096;

// ---------------------------------------------------------------------------
// Error hierarchy. The CLI maps these to exit code 2 (failed verification /
// violated precondition); anything else (usage, IO, malformed JSON) is 1.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct HermiticityError : Error { using Error::Error; };
struct DegenerateInputError : Error { using Error::Error; };
struct UnsupportedDimensionError : Error { using Error::Error; };
struct RegimeError : Error { using Error::Error; };
struct PreconditionError : Error { using Error::Error; };
struct RankError : Error { using Error::Error; };
struct NormalFormError : Error { using Error::Error; };
struct NumericalDegeneracyError : Error { using Error::Error; };
struct InternalError : Error { using Error::Error; };

// Non-antisymmetric input to an antisymmetric-only routine; carries the
// offending symmetric-component norm.
struct SupportError : Error {
    double residual;
    SupportError(const std::string& msg, double res) : Error(msg), residual(res) {}
};

// ---------------------------------------------------------------------------
// Shapes. dims is {d} (unipartite), {m, n} (bipartite) or {m, n, m, n}
// (four sites, stored as one matrix of side m*n*m*n).
// ---------------------------------------------------------------------------

struct Shape {
    std::vector<int> dims;

    Shape() = default;
    explicit Shape(std::vector<int> d) : dims(std::move(d)) { validate(); }
    Shape(int m, int n) : dims{m, n} { validate(); }
    static Shape unipartite(int d) { return Shape(std::vector<int>{d}); }
    static Shape four_site(int m, int n) { return Shape(std::vector<int>{m, n, m, n}); }

    void validate() const {
        if (dims.empty() || (dims.size() != 1 && dims.size() != 2 && dims.size() != 4))
            throw ShapeError("shape must have 1, 2 or 4 factors");
        for (int d : dims)
            if (d < 1) throw ShapeError("shape dimensions must be >= 1");
        if (dims.size() == 4 && (dims[0] != dims[2] || dims[1] != dims[3]))
            throw ShapeError("four-site shape must be (m, n, m, n)");
    }

    int total() const {
        long long t = 1;
        for (int d : dims) t *= d;
        if (t > kDimCap) throw SizeError("total dimension " + std::to_string(t) +
                                         " exceeds cap " + std::to_string(kDimCap));
        return static_cast<int>(t);
    }

    bool is_bipartite() const { return dims.size() == 2; }
    bool is_four_site() const { return dims.size() == 4; }
    int dim_a() const {
        if (!is_bipartite()) throw ShapeError("bipartite shape required");
        return dims[0];
    }
    int dim_b() const {
        if (!is_bipartite()) throw ShapeError("bipartite shape required");
        return dims[1];
    }

    bool operator==(const Shape& o) const { return dims == o.dims; }

    std::string str() const {
        std::string s = "(";
        for (size_t i = 0; i < dims.size(); ++i)
            s += (i ? "," : "") + std::to_string(dims[i]);
        return s + ")";
    }
};

// ---------------------------------------------------------------------------
// Carriers. Plain aggregates; make_* factories validate the invariants.
// ---------------------------------------------------------------------------

struct Ket {
    Vector entries;
    Shape shape;
    bool unit = false;
};

struct BipartiteOperator {
    Matrix mat;
    Shape shape;
    bool hermitian = false;
};

struct SpectralReport {
    RVector eigenvalues;  // descending
    double min_eigenvalue = 0.0;
    bool psd = false;
    double tol = kPsdTol;  // relative tolerance that was applied
    double scale = 0.0;    // largest |eigenvalue|
};

Ket make_ket(Vector entries, Shape shape);
BipartiteOperator make_operator(Matrix mat, Shape shape);

// Largest-entry magnitude, used as the cheap scale proxy for element-wise
// tolerance checks; 0 only for the zero object.
double entry_scale(const Matrix& m);

bool is_hermitian(const Matrix& m, double tol = kRankTol);

}  // namespace qcert
