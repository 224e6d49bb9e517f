#include "qcert/io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace qcert {
namespace io {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + path);
    out << content;
}

std::string digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json parse_document(const std::string& path, const std::string& expected_kind) {
    std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": malformed JSON at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
    if (!j.is_object() || !j.contains("schema") || j["schema"] != kSchema)
        throw ParseError(path + ": missing or unknown schema version (expected \"" +
                         std::string(kSchema) + "\")");
    if (!expected_kind.empty() && j.value("kind", "") != expected_kind)
        throw ParseError(path + ": expected kind \"" + expected_kind + "\", found \"" +
                         j.value("kind", "<none>") + "\"");
    return j;
}

namespace {

json complex_pairs(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back({v(i).real(), v(i).imag()});
    return arr;
}

Vector pairs_to_vector(const json& arr) {
    if (!arr.is_array()) throw ParseError("entries must be an array");
    Vector v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_array() || arr[i].size() != 2)
            throw ParseError("each entry must be a [re, im] pair");
        v(i) = Complex(arr[i][0].get<double>(), arr[i][1].get<double>());
    }
    return v;
}

Shape shape_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("shape must be a nonempty array");
    std::vector<int> dims;
    for (const auto& d : j) dims.push_back(d.get<int>());
    return Shape(dims);
}

}  // namespace

json ket_to_json(const Ket& k) {
    return {{"schema", kSchema},
            {"kind", "ket"},
            {"shape", k.shape.dims},
            {"entries", complex_pairs(k.entries)}};
}

Ket ket_from_json(const json& j) {
    return make_ket(pairs_to_vector(j.at("entries")), shape_from_json(j.at("shape")));
}

json operator_to_json(const BipartiteOperator& op) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < op.mat.rows(); ++i)
        rows.push_back(complex_pairs(op.mat.row(i).transpose()));
    return {{"schema", kSchema},
            {"kind", "operator"},
            {"shape", op.shape.dims},
            {"hermitian", op.hermitian},
            {"rows", rows}};
}

BipartiteOperator operator_from_json(const json& j) {
    const json& rows = j.at("rows");
    if (!rows.is_array() || rows.empty()) throw ParseError("rows must be a nonempty array");
    const size_t n = rows.size();
    Matrix m(n, n);
    for (size_t i = 0; i < n; ++i) {
        Vector row = pairs_to_vector(rows[i]);
        if (static_cast<size_t>(row.size()) != n)
            throw ParseError("operator rows must form a square matrix");
        m.row(i) = row.transpose();
    }
    return make_operator(std::move(m), shape_from_json(j.at("shape")));
}

void save_ket(const std::string& path, const Ket& k) {
    write_file(path, ket_to_json(k).dump() + "\n");
}

Ket load_ket(const std::string& path) {
    return ket_from_json(parse_document(path, "ket"));
}

void save_operator(const std::string& path, const BipartiteOperator& op) {
    write_file(path, operator_to_json(op).dump() + "\n");
}

BipartiteOperator load_operator(const std::string& path) {
    return operator_from_json(parse_document(path, "operator"));
}

mub::MubFamily load_mub_family(const std::string& path) {
    json j = parse_document(path, "mub_family");
    mub::MubFamily fam;
    fam.d = j.at("d").get<int>();
    if (fam.d < 1) throw ParseError(path + ": invalid dimension");
    for (const auto& basis_json : j.at("bases")) {
        mub::Basis b;
        b.d = fam.d;
        for (const auto& kj : basis_json) {
            Vector v = pairs_to_vector(kj.at("entries"));
            if (v.size() != fam.d) throw ParseError(path + ": ket length does not match d");
            b.vectors.push_back(std::move(v));
        }
        if (static_cast<int>(b.vectors.size()) != fam.d)
            throw ParseError(path + ": each basis needs exactly d vectors");
        fam.bases.push_back(std::move(b));
    }
    return fam;
}

void save_mub_family(const std::string& path, const mub::MubFamily& family) {
    json bases = json::array();
    for (const auto& b : family.bases) {
        json basis = json::array();
        for (const auto& v : b.vectors)
            basis.push_back({{"shape", {family.d}}, {"entries", complex_pairs(v)}});
        bases.push_back(basis);
    }
    json j = {{"schema", kSchema}, {"kind", "mub_family"}, {"d", family.d}, {"bases", bases}};
    write_file(path, j.dump() + "\n");
}

std::pair<int, Vector> load_sic_fiducial(const std::string& path) {
    json j = parse_document(path, "sic_fiducial");
    int d = j.at("d").get<int>();
    Vector fid = pairs_to_vector(j.at("fiducial").at("entries"));
    if (fid.size() != d) throw ParseError(path + ": fiducial length does not match d");
    return {d, fid};
}

}  // namespace io
}  // namespace qcert
