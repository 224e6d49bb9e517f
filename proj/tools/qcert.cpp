// qcert: construct and independently re-verify certificates for mutually
// unbiased basis purity bounds, PPT mixtures with controlled Schmidt number,
// and constructive separability of low-tensor-rank states.

#include "qcert/io.hpp"
#include "qcert/mub.hpp"
#include "qcert/osr3.hpp"
#include "qcert/ppt.hpp"
#include "qcert/schmidt.hpp"
#include "qcert/tensor.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

using namespace qcert;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailed = 2;

json mat_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

Matrix mat_from_json(const json& rows) {
    const size_t r = rows.size();
    const size_t c = r ? rows[0].size() : 0;
    Matrix m(r, c);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j)
            m(i, j) = Complex(rows[i][j][0].get<double>(), rows[i][j][1].get<double>());
    return m;
}

json vec_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
    return arr;
}

Vector vec_from_json(const json& arr) {
    Vector v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i)
        v(i) = Complex(arr[i][0].get<double>(), arr[i][1].get<double>());
    return v;
}

json input_record(const std::string& path) {
    return {{"path", path}, {"digest", io::digest(io::read_file(path))}};
}

json cert_shell(const std::string& kind) {
    return {{"schema", io::kSchema},
            {"kind", kind},
            {"tool_version", io::kToolVersion},
            {"inputs", json::array()},
            {"payload", json::object()}};
}

void write_cert(const std::string& path, const json& cert) {
    io::write_file(path, cert.dump(2) + "\n");
    std::cout << "certificate written to " << path << "\n";
}

json ensemble_to_json(const ppt::ProductEnsemble& e) {
    json terms = json::array();
    for (const auto& t : e.terms)
        terms.push_back({{"weight", t.weight}, {"sr_tag", t.sr_tag}, {"ket", vec_to_json(t.ket)}});
    return {{"shape", e.target_shape.dims}, {"terms", terms}};
}

ppt::ProductEnsemble ensemble_from_json(const json& j) {
    ppt::ProductEnsemble e;
    std::vector<int> dims;
    for (const auto& d : j.at("shape")) dims.push_back(d.get<int>());
    e.target_shape = Shape(dims);
    for (const auto& t : j.at("terms"))
        e.terms.push_back({t.at("weight").get<double>(), vec_from_json(t.at("ket")),
                           t.at("sr_tag").get<int>()});
    return e;
}

mub::Field parse_field(const std::string& s) {
    if (s == "complex") return mub::Field::complex_field;
    if (s == "real") return mub::Field::real_field;
    throw io::ParseError("field must be 'complex' or 'real'");
}

std::pair<int, int> parse_shape_arg(const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos) throw io::ParseError("shape must look like m,n");
    return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
}

// ---------------------------------------------------------------------------
// verify: re-check a certificate from its file plus the referenced state
// files. Constructions are never re-run; only reconstruction residuals,
// spectral claims and bound arithmetic are examined.
// ---------------------------------------------------------------------------

struct VerifyContext {
    int checks = 0;
    std::string first_failure;

    bool require(bool ok, const std::string& name) {
        ++checks;
        if (!ok && first_failure.empty()) first_failure = name;
        std::cout << (ok ? "  ok: " : "  FAILED: ") << name << "\n";
        return ok;
    }
};

std::string input_path(const json& cert, size_t idx = 0) {
    const auto& inputs = cert.at("inputs");
    if (idx >= inputs.size()) throw io::ParseError("certificate references no input " +
                                                   std::to_string(idx));
    return inputs[idx].at("path").get<std::string>();
}

void check_digest(VerifyContext& ctx, const json& cert) {
    for (const auto& rec : cert.at("inputs")) {
        std::string path = rec.at("path").get<std::string>();
        std::string want = rec.at("digest").get<std::string>();
        ctx.require(io::digest(io::read_file(path)) == want, "input digest of " + path);
    }
}

void verify_mub_bound(VerifyContext& ctx, const json& cert) {
    const json& p = cert.at("payload");
    int m = p.at("m"), n = p.at("n"), t = p.at("t");
    mub::Field field = parse_field(p.at("field"));
    Rational bound = mub::purity_sum_bound(m, n, t, field);
    ctx.require(bound.num == p.at("bound_num").get<std::int64_t>() &&
                    bound.den == p.at("bound_den").get<std::int64_t>(),
                "bound arithmetic");
    if (!cert.at("inputs").empty()) {
        check_digest(ctx, cert);
        mub::MubFamily fam = mub::family_load(input_path(cert));
        mub::family_verify(fam);
        ctx.require(fam.verified, "family verification");
        ctx.require(static_cast<int>(fam.bases.size()) == t, "basis count");
        double sum = mub::purity_sum(fam, m, n);
        ctx.require(std::abs(sum - p.at("purity_sum").get<double>()) < 1e-8,
                    "purity sum recomputation");
        ctx.require((sum <= bound.value() + 1e-8) == p.at("satisfied").get<bool>(),
                    "bound satisfaction flag");
    } else {
        ctx.require(p.at("purity_sum").is_null(), "bound-only certificate has no purity sum");
    }
}

void verify_mub_family(VerifyContext& ctx, const json& cert) {
    check_digest(ctx, cert);
    const json& p = cert.at("payload");
    mub::MubFamily fam = mub::family_load(input_path(cert));
    mub::VerifyRecord rec = mub::family_verify(fam, p.at("tol").get<double>(),
                                               p.value("require_real", false));
    ctx.require(rec.verified == p.at("verified").get<bool>(), "verification flag");
    ctx.require(std::abs(fam.max_deviation - p.at("max_deviation").get<double>()) < 1e-10,
                "deviation recomputation");
}

void verify_conservation(VerifyContext& ctx, const json& cert) {
    check_digest(ctx, cert);
    const json& p = cert.at("payload");
    int m = p.at("m"), n = p.at("n");
    mub::MubFamily fam = mub::family_load(input_path(cert));
    mub::family_verify(fam);
    ctx.require(fam.verified, "family verification");
    mub::ConservationReport rep = mub::conservation_check(fam, m, n);
    ctx.require(std::abs(rep.purity_sum - p.at("purity_sum").get<double>()) < 1e-8,
                "purity sum recomputation");
    ctx.require(rep.target == p.at("target").get<double>(), "conservation target");
    ctx.require(rep.pass == p.at("pass").get<bool>(), "conservation flag");
}

void verify_ppt_mixture(VerifyContext& ctx, const json& cert) {
    check_digest(ctx, cert);
    const json& p = cert.at("payload");
    int k = p.at("k");
    double eps = p.at("eps");
    BipartiteOperator gamma = io::load_operator(input_path(cert));
    ctx.require(gamma.shape.is_bipartite() && gamma.shape.dim_a() == k &&
                    gamma.shape.dim_b() == k,
                "state shape");
    Matrix b = sym_projector(k).mat + eps * gamma.mat;

    ppt::ProductEnsemble ens = ensemble_from_json(p.at("ensemble"));
    double declared = p.at("reconstruction_residual").get<double>();
    double res = ppt::ensemble_residual(ens, b);
    ctx.require(res <= std::max(declared * 1.5, 1e-8), "ensemble reconstruction");

    int upper = 0;
    bool tags_ok = true;
    for (const auto& t : ens.terms) {
        Ket tk = make_ket(t.ket / t.ket.norm(), ens.target_shape);
        tags_ok = tags_ok && schmidt_rank(tk) <= t.sr_tag;
        upper = std::max(upper, t.sr_tag);
    }
    ctx.require(tags_ok, "per-term Schmidt rank tags");
    ctx.require(upper == p.at("sn").at("upper").get<int>(), "Schmidt number upper bound");
    ctx.require(p.at("sn").at("lower").get<int>() <= upper, "lower <= upper");

    SpectralReport sb = psd_check(b);
    SpectralReport sg = psd_check(partial_transpose_right(make_operator(b, Shape(k, k))).mat);
    ctx.require(std::abs(sb.min_eigenvalue - p.at("ppt").at("min_eig_state").get<double>()) < 1e-8,
                "state spectrum log");
    ctx.require(std::abs(sg.min_eigenvalue - p.at("ppt").at("min_eig_pt").get<double>()) < 1e-8,
                "partial transpose spectrum log");
    if (p.at("ppt").contains("eig_state")) {
        const auto& le = p.at("ppt").at("eig_state");
        const auto& lp = p.at("ppt").at("eig_pt");
        bool eig_ok = static_cast<Eigen::Index>(le.size()) == sb.eigenvalues.size() &&
                      static_cast<Eigen::Index>(lp.size()) == sg.eigenvalues.size();
        for (Eigen::Index i = 0; eig_ok && i < sb.eigenvalues.size(); ++i)
            eig_ok = std::abs(le[i].get<double>() - sb.eigenvalues(i)) < 1e-8 &&
                     std::abs(lp[i].get<double>() - sg.eigenvalues(i)) < 1e-8;
        ctx.require(eig_ok, "full eigenvalue logs");
    }
    ctx.require(p.at("ppt").at("ppt").get<bool>() ==
                    (sb.min_eigenvalue >= -1e-8 && sg.min_eigenvalue >= -1e-8),
                "PPT flag");
}

void verify_ppt_state(VerifyContext& ctx, const json& cert) {
    check_digest(ctx, cert);
    const json& p = cert.at("payload");
    BipartiteOperator b = io::load_operator(input_path(cert));
    ppt::PptCertificate pc = ppt::ppt_check(b);
    ctx.require(std::abs(pc.min_eig_state - p.at("min_eig_state").get<double>()) < 1e-8,
                "state spectrum log");
    ctx.require(std::abs(pc.min_eig_pt - p.at("min_eig_pt").get<double>()) < 1e-8,
                "partial transpose spectrum log");
    ctx.require(pc.ppt == p.at("ppt").get<bool>(), "PPT flag");
}

void verify_sic(VerifyContext& ctx, const json& cert) {
    check_digest(ctx, cert);
    const json& p = cert.at("payload");
    int d = p.at("d");
    ppt::SicPovm s;
    s.d = d;
    for (const auto& vj : p.at("vectors")) s.vectors.push_back(vec_from_json(vj));
    ppt::sic_verify(s);
    ctx.require(s.verified == p.at("verified").get<bool>(), "equiangularity flag");
    ctx.require(std::abs(s.max_equiangular_dev - p.at("max_equiangular_dev").get<double>()) <
                    1e-10,
                "equiangularity deviation log");
    ctx.require(std::abs(s.resolution_residual - p.at("resolution_residual").get<double>()) <
                    1e-10,
                "projector resolution residual log");
}

void verify_separability(VerifyContext& ctx, const json& cert) {
    check_digest(ctx, cert);
    const json& p = cert.at("payload");
    BipartiteOperator a = io::load_operator(input_path(cert));
    const Shape& shape = a.shape;
    const int k = shape.dim_b();

    osr3::LocalOpChain chain;
    for (const auto& cj : p.at("chain")) {
        osr3::LocalOp op;
        op.side = cj.at("side") == "left" ? osr3::LocalOp::left : osr3::LocalOp::right;
        op.matrix = mat_from_json(cj.at("matrix"));
        op.cond = cj.at("cond").get<double>();
        chain.push_back(std::move(op));
    }

    ppt::ProductEnsemble ens = ensemble_from_json(p.at("constructive"));
    Matrix rec = ppt::ensemble_reconstruct(ens);
    bool product_terms = true;
    for (const auto& t : ens.terms) {
        Ket tk = make_ket(t.ket / t.ket.norm(), shape);
        product_terms = product_terms && schmidt_rank(tk) == 1;
    }
    ctx.require(product_terms, "constructive terms are products");

    if (!p.at("cited").is_null()) {
        Matrix block = mat_from_json(p.at("cited").at("rows"));
        std::string embedding = p.at("cited").at("embedding");
        if (embedding == "2xk") {
            ctx.require(block.block(0, 0, k, 3 * k).norm() <= 1e-7 * std::max(block.norm(), 1.0),
                        "cited block fits the 2xk embedding");
            Matrix emb(2 * k, 2 * k);
            emb.block(0, 0, k, k) = block.block(k, k, k, k);
            emb.block(0, k, k, k) = block.block(k, 2 * k, k, k);
            emb.block(k, 0, k, k) = block.block(2 * k, k, k, k);
            emb.block(k, k, k, k) = block.block(2 * k, 2 * k, k, k);
            BipartiteOperator emb_op = make_operator(emb, Shape(2, k));
            ctx.require(ppt::ppt_check(emb_op).ppt, "cited block PPT");
            ctx.require(operator_schmidt_rank(emb_op) <= 3, "cited block tensor rank");
            rec += osr3::chain_unapply(chain, block, shape);
        } else {
            BipartiteOperator blk = make_operator(block, shape);
            ctx.require(ppt::ppt_check(blk).ppt, "cited block PPT");
            ctx.require(operator_schmidt_rank(blk) <= 3, "cited block tensor rank");
            rec += block;
        }
    }

    double declared = p.at("reconstruction_residual").get<double>();
    double reg_shift = p.value("regularization_residual", 0.0);
    double bound = 1.5 * (declared * a.mat.norm() + reg_shift) + 1e-9;
    ctx.require((rec - a.mat).norm() <= bound, "reconstruction against the input state");
}

void verify_identity_suite(VerifyContext& ctx, const json& cert) {
    const json& p = cert.at("payload");
    int m = p.at("m"), n = p.at("n");
    bool all = true;
    for (const auto& c : p.at("checks")) {
        std::string name = c.at("name");
        double expected = 0.0;
        if (name == "marginal_purity_random") expected = 0.0;
        else if (name == "max_ent_witness") expected = static_cast<double>(m) * n * n;
        else if (name == "identity") expected = static_cast<double>(m) * m * n;
        else if (name == "flip") expected = static_cast<double>(m) * n;
        else if (name == "sym_projector") expected = (static_cast<double>(m) * m * n + m * n) / 2;
        else {
            ctx.require(false, "known identity name: " + name);
            continue;
        }
        ctx.require(c.at("expected").get<double>() == expected, name + " closed form");
        double rel = std::abs(c.at("value").get<double>() - expected) /
                     std::max(std::abs(expected), 1.0);
        ctx.require(std::abs(rel - c.at("rel_err").get<double>()) < 1e-12,
                    name + " error bookkeeping");
        ctx.require(c.at("pass").get<bool>() == (rel <= 1e-9), name + " pass flag");
        all = all && c.at("pass").get<bool>();
    }
    ctx.require(all == p.at("all_pass").get<bool>(), "aggregate flag");
}

int cmd_verify(const std::string& path) {
    json cert = io::parse_document(path);
    std::string kind = cert.value("kind", "");
    std::cout << "verifying " << path << " (kind: " << kind << ")\n";
    VerifyContext ctx;
    if (kind == "mub_bound") verify_mub_bound(ctx, cert);
    else if (kind == "mub_family") verify_mub_family(ctx, cert);
    else if (kind == "conservation") verify_conservation(ctx, cert);
    else if (kind == "ppt_mixture") verify_ppt_mixture(ctx, cert);
    else if (kind == "ppt_state") verify_ppt_state(ctx, cert);
    else if (kind == "sic") verify_sic(ctx, cert);
    else if (kind == "separability") verify_separability(ctx, cert);
    else if (kind == "identity_suite") verify_identity_suite(ctx, cert);
    else throw io::ParseError(path + ": unknown certificate kind \"" + kind + "\"");
    if (!ctx.first_failure.empty()) {
        std::cout << "FAILED (" << ctx.checks << " checks, first failure: " << ctx.first_failure
                  << ")\n";
        return kExitFailed;
    }
    std::cout << "verified (" << ctx.checks << " checks)\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// construction commands
// ---------------------------------------------------------------------------

int cmd_mub_gen(int prime, const std::string& out) {
    mub::MubFamily fam = mub::mub_prime(prime);
    std::cout << "generated " << fam.bases.size() << " mutually unbiased bases of C^" << prime
              << " (max deviation " << fam.max_deviation << ")\n";
    if (!out.empty()) {
        io::save_mub_family(out, fam);
        std::cout << "family written to " << out << "\n";
    }
    return kExitOk;
}

int cmd_mub_verify(const std::string& path, double tol, bool require_real,
                   const std::string& out) {
    mub::MubFamily fam = mub::family_load(path);
    mub::VerifyRecord rec = mub::family_verify(fam, tol, require_real);
    std::cout << "d = " << fam.d << ", bases = " << fam.bases.size()
              << ", max cross deviation = " << rec.max_cross_deviation
              << ", max gram defect = " << rec.max_gram_defect << "\n";
    if (!rec.verified) std::cout << "verification FAILED: " << rec.failure << "\n";
    else std::cout << "verified\n";
    if (!out.empty()) {
        json cert = cert_shell("mub_family");
        cert["inputs"].push_back(input_record(path));
        cert["payload"] = {{"d", fam.d},
                           {"bases", fam.bases.size()},
                           {"verified", rec.verified},
                           {"max_deviation", fam.max_deviation},
                           {"require_real", require_real},
                           {"tol", tol}};
        write_cert(out, cert);
    }
    return rec.verified ? kExitOk : kExitFailed;
}

int cmd_mub_bound(int m, int n, int t, const std::string& field_s, const std::string& family,
                  const std::string& out) {
    mub::Field field = parse_field(field_s);
    json cert = cert_shell("mub_bound");
    json payload;
    Rational bound = mub::purity_sum_bound(m, n, t, field);
    payload["m"] = m;
    payload["n"] = n;
    payload["t"] = t;
    payload["field"] = field_s;
    payload["bound_num"] = bound.num;
    payload["bound_den"] = bound.den;
    payload["bound"] = bound.value();
    if (family.empty()) {
        payload["purity_sum"] = nullptr;
        payload["satisfied"] = nullptr;
        std::cout << bound.str() << "\n";
    } else {
        mub::MubFamily fam = mub::family_load(family);
        mub::family_verify(fam, kUnbiasedTol, field == mub::Field::real_field);
        if (!fam.verified) {
            std::cout << "family failed verification\n";
            return kExitFailed;
        }
        mub::BoundReport rep = mub::check_bound(fam, m, n, field);
        payload["t"] = rep.t;
        payload["purity_sum"] = rep.purity_sum;
        payload["satisfied"] = rep.satisfied;
        payload["slack"] = rep.slack;
        cert["inputs"].push_back(input_record(family));
        std::cout << "purity sum = " << rep.purity_sum << ", bound = " << rep.bound.str()
                  << ", slack = " << rep.slack << (rep.satisfied ? " (satisfied)" : " (VIOLATED)")
                  << "\n";
        if (!rep.satisfied) return kExitFailed;
    }
    cert["payload"] = payload;
    if (!out.empty()) write_cert(out, cert);
    return kExitOk;
}

int cmd_mub_corollary(int k, int m, const std::string& field_s) {
    Rational bound = mub::max_bases_bound(k, m, parse_field(field_s));
    std::cout << bound.str() << "\n";
    return kExitOk;
}

int cmd_mub_conserve(const std::string& path, const std::string& shape_s,
                     const std::string& out) {
    auto [m, n] = parse_shape_arg(shape_s);
    mub::MubFamily fam = mub::family_load(path);
    mub::family_verify(fam);
    if (!fam.verified) {
        std::cout << "family failed verification\n";
        return kExitFailed;
    }
    mub::ConservationReport rep = mub::conservation_check(fam, m, n);
    std::cout << "purity sum = " << rep.purity_sum << ", target mn(m+n) = " << rep.target
              << (rep.pass ? " (conserved)" : " (VIOLATED)") << "\n";
    if (!out.empty()) {
        json cert = cert_shell("conservation");
        cert["inputs"].push_back(input_record(path));
        cert["payload"] = {{"m", m},
                           {"n", n},
                           {"t", rep.t},
                           {"purity_sum", rep.purity_sum},
                           {"target", rep.target},
                           {"pass", rep.pass}};
        write_cert(out, cert);
    }
    return rep.pass ? kExitOk : kExitFailed;
}

int cmd_ppt_mix(const std::string& gamma_path, double eps, const std::string& regime_s,
                const std::string& out) {
    ppt::MixRegime regime = regime_s == "a"   ? ppt::MixRegime::a
                            : regime_s == "b" ? ppt::MixRegime::b
                                              : ppt::MixRegime::c;
    if (regime_s != "a" && regime_s != "b" && regime_s != "c")
        throw io::ParseError("regime must be a, b or c");
    BipartiteOperator gamma = io::load_operator(gamma_path);
    ppt::StateMixture mix = ppt::antisym_state_mixture(gamma, eps, regime);
    double res = ppt::ensemble_residual(mix.ensemble, mix.b.mat);
    std::cout << "Schmidt number: lower " << mix.sn.lower
              << (mix.sn.lower_certified ? " (certified)" : " (cited)") << ", upper "
              << mix.sn.upper << (mix.sn.interval ? " [interval 1 or 2]" : "") << "\n"
              << "PPT: min eig state " << mix.ppt.min_eig_state << ", min eig PT "
              << mix.ppt.min_eig_pt << (mix.ppt.ppt ? " (PPT)" : " (NOT PPT)") << "\n"
              << "ensemble: " << mix.ensemble.terms.size() << " terms, residual " << res << "\n";
    if (!out.empty()) {
        const int k = gamma.shape.dim_a();
        json eig_state = json::array(), eig_pt = json::array();
        RVector evs = psd_check(mix.b).eigenvalues;
        RVector evp = psd_check(partial_transpose_right(mix.b)).eigenvalues;
        for (Eigen::Index i = 0; i < evs.size(); ++i) eig_state.push_back(evs(i));
        for (Eigen::Index i = 0; i < evp.size(); ++i) eig_pt.push_back(evp(i));
        json cert = cert_shell("ppt_mixture");
        cert["inputs"].push_back(input_record(gamma_path));
        cert["payload"] = {
            {"k", k},
            {"eps", eps},
            {"regime", regime_s},
            {"sn",
             {{"lower", mix.sn.lower},
              {"upper", mix.sn.upper},
              {"lower_certified", mix.sn.lower_certified},
              {"provenance", mix.sn.lower_provenance},
              {"interval", mix.sn.interval}}},
            {"ppt",
             {{"min_eig_state", mix.ppt.min_eig_state},
              {"min_eig_pt", mix.ppt.min_eig_pt},
              {"gamma_pt_norm", mix.ppt.gamma_pt_norm},
              {"ppt", mix.ppt.ppt},
              {"eig_state", eig_state},
              {"eig_pt", eig_pt}}},
            {"ensemble", ensemble_to_json(mix.ensemble)},
            {"reconstruction_residual", res}};
        write_cert(out, cert);
    }
    return mix.ppt.ppt ? kExitOk : kExitFailed;
}

int cmd_ppt_check(const std::string& path, const std::string& out) {
    BipartiteOperator b = io::load_operator(path);
    ppt::PptCertificate pc = ppt::ppt_check(b);
    std::cout << "min eig state = " << pc.min_eig_state << ", min eig PT = " << pc.min_eig_pt
              << (pc.ppt ? " (PPT)" : " (NOT PPT)") << "\n";
    if (!out.empty()) {
        json cert = cert_shell("ppt_state");
        cert["inputs"].push_back(input_record(path));
        cert["payload"] = {{"min_eig_state", pc.min_eig_state},
                           {"min_eig_pt", pc.min_eig_pt},
                           {"ppt", pc.ppt}};
        write_cert(out, cert);
    }
    return pc.ppt ? kExitOk : kExitFailed;
}

int cmd_ppt_sic(int dim, const std::string& fiducial, const std::string& out) {
    ppt::SicPovm s;
    json cert = cert_shell("sic");
    if (fiducial.empty()) {
        s = ppt::sic_builtin(dim);
    } else {
        s = ppt::sic_load(fiducial);
        cert["inputs"].push_back(input_record(fiducial));
    }
    std::cout << "d = " << s.d << ": " << s.vectors.size() << " vectors, equiangular deviation "
              << s.max_equiangular_dev << ", resolution residual " << s.resolution_residual
              << (s.verified ? " (verified)" : " (FAILED)") << "\n";
    if (!out.empty()) {
        json vecs = json::array();
        for (const auto& v : s.vectors) vecs.push_back(vec_to_json(v));
        cert["payload"] = {{"d", s.d},
                           {"source", fiducial.empty() ? "builtin" : "file"},
                           {"max_equiangular_dev", s.max_equiangular_dev},
                           {"resolution_residual", s.resolution_residual},
                           {"verified", s.verified},
                           {"vectors", vecs}};
        write_cert(out, cert);
    }
    return s.verified ? kExitOk : kExitFailed;
}

int cmd_sep_osr3(const std::string& path, double eps_reg, double tol, const std::string& out) {
    BipartiteOperator a = io::load_operator(path);
    osr3::SeparabilityCertificate cert = osr3::separate(a, eps_reg, tol);
    std::cout << "status: "
              << (cert.status == osr3::CertStatus::fully_constructive ? "fully_constructive"
                                                                      : "constructive_plus_cited")
              << ", constructive terms: " << cert.constructive.terms.size()
              << ", reconstruction residual: " << cert.reconstruction_residual << "\n";
    if (cert.regularized)
        std::cout << "regularized input, ||A - A(eps)|| = " << cert.regularization_residual
                  << "\n";
    for (const auto& n : cert.notes) std::cout << "note: " << n << "\n";
    if (!out.empty()) {
        json chain = json::array();
        for (const auto& op : cert.chain)
            chain.push_back({{"side", op.side == osr3::LocalOp::left ? "left" : "right"},
                             {"matrix", mat_to_json(op.matrix)},
                             {"cond", op.cond}});
        json cited = nullptr;
        if (cert.cited)
            cited = {{"rows", mat_to_json(cert.cited->block)},
                     {"citation", cert.cited->citation},
                     {"ppt_verified", cert.cited->ppt_verified},
                     {"osr", cert.cited->osr},
                     {"embedding", cert.cited->embedding}};
        json jcert = cert_shell("separability");
        jcert["inputs"].push_back(input_record(path));
        jcert["payload"] = {{"shape", a.shape.dims},
                            {"eps_reg", cert.eps_reg},
                            {"regularized", cert.regularized},
                            {"regularization_residual", cert.regularization_residual},
                            {"status", cert.status == osr3::CertStatus::fully_constructive
                                           ? "fully_constructive"
                                           : "constructive_plus_cited"},
                            {"reconstruction_residual", cert.reconstruction_residual},
                            {"constructive", ensemble_to_json(cert.constructive)},
                            {"cited", cited},
                            {"chain", chain},
                            {"notes", cert.notes}};
        write_cert(out, jcert);
    }
    return kExitOk;
}

int cmd_suite_identities(int m, int n, int trials, std::uint64_t seed, const std::string& out) {
    mub::IdentityReport rep = mub::functional_identity_suite(m, n, trials, seed);
    for (const auto& c : rep.checks)
        std::printf("  %-24s value %.12g expected %.12g rel_err %.2e %s\n", c.name.c_str(),
                    c.value, c.expected, c.rel_err, c.pass ? "pass" : "FAIL");
    std::cout << (rep.all_pass ? "all identities pass" : "IDENTITY FAILURE") << "\n";
    if (!out.empty()) {
        json checks = json::array();
        for (const auto& c : rep.checks)
            checks.push_back({{"name", c.name},
                              {"value", c.value},
                              {"expected", c.expected},
                              {"rel_err", c.rel_err},
                              {"pass", c.pass}});
        json cert = cert_shell("identity_suite");
        cert["payload"] = {{"m", m},           {"n", n},     {"trials", trials},
                           {"seed", seed},     {"checks", checks},
                           {"all_pass", rep.all_pass}};
        write_cert(out, cert);
    }
    return rep.all_pass ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qcert: certificates for purity bounds, PPT mixtures and separability"};
    app.require_subcommand(1);

    // mub -------------------------------------------------------------------
    auto* mub_cmd = app.add_subcommand("mub", "mutually unbiased basis tools");
    mub_cmd->require_subcommand(1);

    int gen_prime = 2;
    std::string gen_out;
    auto* gen = mub_cmd->add_subcommand("gen", "generate a prime-dimension family");
    gen->add_option("--prime", gen_prime, "prime dimension")->required();
    gen->add_option("--out", gen_out, "write the family as JSON");

    std::string verify_path, verify_out;
    double verify_tol = kUnbiasedTol;
    bool verify_real = false;
    auto* mverify = mub_cmd->add_subcommand("verify", "verify a family file");
    mverify->add_option("family", verify_path, "family JSON file")->required();
    mverify->add_option("--tol", verify_tol, "unbiasedness tolerance");
    mverify->add_flag("--real", verify_real, "also certify realness of all entries");
    mverify->add_option("--out", verify_out, "write a verification certificate");

    int bm = 0, bn = 0, bt = 0;
    std::string bfield = "complex", bfamily, bout;
    auto* bound = mub_cmd->add_subcommand("bound", "purity-sum bound for t bases");
    bound->add_option("--m", bm)->required();
    bound->add_option("--n", bn)->required();
    bound->add_option("--t", bt)->required();
    bound->add_option("--field", bfield, "complex or real");
    bound->add_option("--family", bfamily, "check a family file against the bound");
    bound->add_option("--out", bout, "write a bound certificate");

    int ck = 0, cm = 0;
    std::string cfield = "complex";
    auto* coroll = mub_cmd->add_subcommand(
        "corollary", "cap on the number of bases built from Schmidt-rank <= k vectors");
    coroll->add_option("--k", ck)->required();
    coroll->add_option("--m", cm)->required();
    coroll->add_option("--field", cfield, "complex or real");

    std::string cons_path, cons_shape, cons_out;
    auto* conserve = mub_cmd->add_subcommand("conserve", "conservation law for a complete family");
    conserve->add_option("family", cons_path)->required();
    conserve->add_option("--shape", cons_shape, "factorization m,n")->required();
    conserve->add_option("--out", cons_out, "write a conservation certificate");

    // ppt -------------------------------------------------------------------
    auto* ppt_cmd = app.add_subcommand("ppt", "PPT mixtures and checks");
    ppt_cmd->require_subcommand(1);

    std::string mix_gamma, mix_regime = "b", mix_out;
    double mix_eps = 1.0 / 6.0;
    auto* mix = ppt_cmd->add_subcommand("mix", "mix the symmetric projector with a state");
    mix->add_option("--gamma", mix_gamma, "antisymmetric state JSON")->required();
    mix->add_option("--eps", mix_eps, "mixing weight");
    mix->add_option("--regime", mix_regime, "a, b or c");
    mix->add_option("--out", mix_out, "write a mixture certificate");

    std::string check_path, check_out;
    auto* check = ppt_cmd->add_subcommand("check", "PPT check of a state file");
    check->add_option("state", check_path)->required();
    check->add_option("--out", check_out, "write a check certificate");

    int sic_dim = 2;
    std::string sic_fid, sic_out;
    auto* sic = ppt_cmd->add_subcommand("sic", "equiangular fiducial orbit verification");
    sic->add_option("--dim", sic_dim, "dimension")->required();
    sic->add_option("--fiducial", sic_fid, "fiducial JSON file (built-ins: d = 2, 3)");
    sic->add_option("--out", sic_out, "write a verification certificate");

    // sep -------------------------------------------------------------------
    auto* sep_cmd = app.add_subcommand("sep", "separability pipeline");
    sep_cmd->require_subcommand(1);

    std::string sep_path, sep_out;
    double sep_eps = 1e-6, sep_tol = 1e-8;
    auto* osr3c = sep_cmd->add_subcommand(
        "osr3", "constructive separability for 3xk states with tensor rank <= 3");
    osr3c->add_option("state", sep_path)->required();
    osr3c->add_option("--eps-reg", sep_eps, "regularization for singular inputs");
    osr3c->add_option("--tol", sep_tol, "pipeline verification tolerance");
    osr3c->add_option("--out", sep_out, "write a separability certificate");

    // suite -----------------------------------------------------------------
    auto* suite_cmd = app.add_subcommand("suite", "identity and property suites");
    suite_cmd->require_subcommand(1);

    int sm = 2, sn = 2, strials = 100;
    std::uint64_t sseed = 0;
    std::string suite_out;
    auto* ident = suite_cmd->add_subcommand("identities", "closed-form functional identities");
    ident->add_option("--m", sm)->required();
    ident->add_option("--n", sn)->required();
    ident->add_option("--trials", strials, "random kets for the purity identity");
    ident->add_option("--seed", sseed, "RNG seed");
    ident->add_option("--out", suite_out, "write an identity certificate");

    // verify ----------------------------------------------------------------
    std::string cert_path;
    auto* verify_cmd = app.add_subcommand("verify", "re-verify a certificate file");
    verify_cmd->add_option("certificate", cert_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_mub_gen(gen_prime, gen_out);
        if (mverify->parsed()) return cmd_mub_verify(verify_path, verify_tol, verify_real,
                                                     verify_out);
        if (bound->parsed()) return cmd_mub_bound(bm, bn, bt, bfield, bfamily, bout);
        if (coroll->parsed()) return cmd_mub_corollary(ck, cm, cfield);
        if (conserve->parsed()) return cmd_mub_conserve(cons_path, cons_shape, cons_out);
        if (mix->parsed()) return cmd_ppt_mix(mix_gamma, mix_eps, mix_regime, mix_out);
        if (check->parsed()) return cmd_ppt_check(check_path, check_out);
        if (sic->parsed()) return cmd_ppt_sic(sic_dim, sic_fid, sic_out);
        if (osr3c->parsed()) return cmd_sep_osr3(sep_path, sep_eps, sep_tol, sep_out);
        if (ident->parsed()) return cmd_suite_identities(sm, sn, strials, sseed, suite_out);
        if (verify_cmd->parsed()) return cmd_verify(cert_path);
    } catch (const io::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return kExitFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    std::cerr << "no subcommand executed\n";
    return kExitUsage;
}
