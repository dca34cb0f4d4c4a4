#include "nepvi/scenario_io.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace nepvi {

using json = nlohmann::json;

namespace {

json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
    return a;
}

Vec vec_from(const json& a, const std::string& what) {
    require(a.is_array(), what + ": array expected");
    Vec v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) v(static_cast<Eigen::Index>(k)) = a[k].get<double>();
    return v;
}

json mat_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
    return a;
}

Mat mat_from(const json& a, Eigen::Index cols, const std::string& what) {
    require(a.is_array(), what + ": array of rows expected");
    Mat m(static_cast<Eigen::Index>(a.size()), cols);
    for (std::size_t r = 0; r < a.size(); ++r) {
        const Vec row = vec_from(a[r], what);
        require(row.size() == cols, what + ": row " + std::to_string(r) + " has the wrong length");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

json cmat_json(const CMat& m) {
    json d = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            d.push_back(m(r, c).real());
            d.push_back(m(r, c).imag());
        }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", d}};
}

CMat cmat_from(const json& j, const std::string& what) {
    require(j.is_object() && j.contains("rows") && j.contains("cols") && j.contains("data"),
            what + ": complex matrix needs rows, cols and data");
    const auto r = j["rows"].get<Eigen::Index>(), c = j["cols"].get<Eigen::Index>();
    const json& d = j["data"];
    require(d.is_array() && static_cast<Eigen::Index>(d.size()) == 2 * r * c,
            what + ": data must hold 2*rows*cols numbers");
    CMat m(r, c);
    std::size_t k = 0;
    for (Eigen::Index a = 0; a < r; ++a)
        for (Eigen::Index b = 0; b < c; ++b, k += 2) m(a, b) = cplx(d[k].get<double>(), d[k + 1].get<double>());
    return m;
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace

std::string siso_to_json(const SisoScenario& s) {
    json j;
    j["kind"] = "siso";
    j["I"] = s.I;
    j["N"] = s.N;
    json g = json::array();
    for (int i = 0; i < s.I; ++i) {
        json row = json::array();
        for (int t = 0; t < s.I; ++t) {
            json ks = json::array();
            for (int k = 0; k < s.N; ++k) ks.push_back(s.g(i, t, k));
            row.push_back(ks);
        }
        g.push_back(row);
    }
    j["gains"] = g;
    j["sigma2"] = mat_json(s.sigma2);
    j["P"] = vec_json(s.P);
    j["pmax"] = mat_json(s.pmax);
    json W = json::array(), A = json::array();
    for (int i = 0; i < s.I; ++i) {
        W.push_back(i < static_cast<int>(s.W.size()) ? mat_json(s.W[i]) : json::array());
        A.push_back(i < static_cast<int>(s.alpha.size()) ? vec_json(s.alpha[i]) : json::array());
    }
    j["W"] = W;
    j["alpha"] = A;
    return j.dump(1);
}

SisoScenario siso_from_json(const std::string& text) {
    const json j = parse(text);
    try {
        SisoScenario s;
        s.I = j.at("I").get<int>();
        s.N = j.at("N").get<int>();
        require(s.I >= 1 && s.N >= 1, "siso scenario: I and N must be positive");
        const json& g = j.at("gains");
        require(g.is_array() && static_cast<int>(g.size()) == s.I, "siso scenario: gains must be [I][I][N]");
        s.gains.assign(s.N, Mat::Zero(s.I, s.I));
        for (int i = 0; i < s.I; ++i) {
            require(static_cast<int>(g[i].size()) == s.I, "siso scenario: gains must be [I][I][N]");
            for (int t = 0; t < s.I; ++t) {
                const Vec ks = vec_from(g[i][t], "siso scenario gains");
                require(ks.size() == s.N, "siso scenario: gains must be [I][I][N]");
                for (int k = 0; k < s.N; ++k) s.gains[k](i, t) = ks(k);
            }
        }
        s.sigma2 = mat_from(j.at("sigma2"), s.N, "siso scenario sigma2");
        s.P = vec_from(j.at("P"), "siso scenario P");
        s.pmax = mat_from(j.at("pmax"), s.N, "siso scenario pmax");
        s.W.assign(s.I, Mat(0, s.N));
        s.alpha.assign(s.I, Vec(0));
        if (j.contains("W")) {
            require(static_cast<int>(j["W"].size()) == s.I, "siso scenario: W must be [I][m][N]");
            for (int i = 0; i < s.I; ++i) s.W[i] = mat_from(j["W"][i], s.N, "siso scenario W");
        }
        if (j.contains("alpha")) {
            require(static_cast<int>(j["alpha"].size()) == s.I, "siso scenario: alpha must be [I][m]");
            for (int i = 0; i < s.I; ++i) s.alpha[i] = vec_from(j["alpha"][i], "siso scenario alpha");
        }
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw Error(std::string("siso scenario: ") + e.what());
    }
}

std::string mimo_to_json(const MimoScenario& s) {
    json j;
    j["kind"] = "mimo";
    j["I"] = s.I;
    j["nT"] = s.nT;
    j["nR"] = s.nR;
    json H = json::array();
    for (int i = 0; i < s.I; ++i) {
        json row = json::array();
        for (int t = 0; t < s.I; ++t) row.push_back(cmat_json(s.H[i][t]));
        H.push_back(row);
    }
    j["H"] = H;
    json Rn = json::array();
    for (const auto& r : s.Rn) Rn.push_back(cmat_json(r));
    j["Rn"] = Rn;
    if (s.w.size() > 0) j["w"] = vec_json(s.w);
    json cons = json::array();
    for (int i = 0; i < s.I; ++i) {
        json blocks = json::array();
        blocks.push_back({{"kind", "budget"}, {"P", s.P(i)}});
        if (!s.U.empty() && s.U[i].cols() > 0) blocks.push_back({{"kind", "null"}, {"U", cmat_json(s.U[i])}});
        if (!s.G.empty())
            for (std::size_t p = 0; p < s.G[i].size(); ++p)
                blocks.push_back({{"kind", "shaping"}, {"G", cmat_json(s.G[i][p])}, {"cap", s.Iave[i](p)}});
        cons.push_back(blocks);
    }
    j["constraints"] = cons;
    return j.dump(1);
}

MimoScenario mimo_from_json(const std::string& text) {
    const json j = parse(text);
    try {
        MimoScenario s;
        s.I = j.at("I").get<int>();
        s.nT = j.at("nT").get<int>();
        s.nR = j.at("nR").get<std::vector<int>>();
        require(s.I >= 1, "mimo scenario: I must be positive");
        const json& H = j.at("H");
        require(H.is_array() && static_cast<int>(H.size()) == s.I, "mimo scenario: H must be [I][I]");
        s.H.resize(s.I);
        for (int i = 0; i < s.I; ++i) {
            require(static_cast<int>(H[i].size()) == s.I, "mimo scenario: H must be [I][I]");
            for (int t = 0; t < s.I; ++t) s.H[i].push_back(cmat_from(H[i][t], "mimo scenario H"));
        }
        for (const auto& r : j.at("Rn")) s.Rn.push_back(cmat_from(r, "mimo scenario Rn"));
        if (j.contains("w")) s.w = vec_from(j["w"], "mimo scenario w");
        const json& cons = j.at("constraints");
        require(cons.is_array() && static_cast<int>(cons.size()) == s.I,
                "mimo scenario: one constraint list per player expected");
        s.P = Vec::Constant(s.I, std::numeric_limits<double>::quiet_NaN());
        s.U.assign(s.I, CMat(s.nT, 0));
        s.G.assign(s.I, {});
        s.Iave.assign(s.I, Vec(0));
        for (int i = 0; i < s.I; ++i) {
            std::vector<double> caps;
            for (const auto& b : cons[i]) {
                const std::string kind = b.at("kind").get<std::string>();
                if (kind == "budget") {
                    s.P(i) = b.at("P").get<double>();
                } else if (kind == "null") {
                    s.U[i] = cmat_from(b.at("U"), "mimo scenario U");
                } else if (kind == "shaping") {
                    if (b.contains("peak"))
                        throw Error("mimo scenario: peak shaping constraints are not supported");
                    s.G[i].push_back(cmat_from(b.at("G"), "mimo scenario G"));
                    caps.push_back(b.at("cap").get<double>());
                } else if (kind == "peak_shaping" || kind == "abstract") {
                    throw Error("mimo scenario: constraint kind '" + kind + "' is not supported");
                } else {
                    throw Error("mimo scenario: unknown constraint kind '" + kind + "'");
                }
            }
            require(std::isfinite(s.P(i)), "mimo scenario: player " + std::to_string(i) + " has no budget block");
            s.Iave[i] = Eigen::Map<const Vec>(caps.data(), static_cast<Eigen::Index>(caps.size()));
        }
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw Error(std::string("mimo scenario: ") + e.what());
    }
}

std::string scenario_kind(const std::string& text) {
    const json j = parse(text);
    if (j.contains("kind")) return j["kind"].get<std::string>();
    if (j.contains("upsilon") || j.contains("beta")) return "condensed";
    if (j.contains("gains")) return "siso";
    if (j.contains("H")) return "mimo";
    throw Error("scenario: cannot tell the scenario kind");
}

CondensedMatrices condensed_from_json(const std::string& text) {
    const json j = parse(text);
    try {
        if (j.contains("upsilon")) {
            const json& u = j["upsilon"];
            require(u.is_array() && !u.empty(), "condensed: upsilon must be a non-empty matrix");
            const Mat U = mat_from(u, static_cast<Eigen::Index>(u[0].size()), "condensed upsilon");
            require(U.rows() == U.cols(), "condensed: upsilon must be square");
            Mat beta = -U;
            beta.diagonal().setZero();
            require((beta.array() >= 0.0).all(), "condensed: off-diagonal upsilon entries must be nonpositive");
            return condensed_from_bounds(U.diagonal(), beta);
        }
        const Vec a = vec_from(j.at("alpha"), "condensed alpha");
        return condensed_from_bounds(a, mat_from(j.at("beta"), a.size(), "condensed beta"));
    } catch (const json::exception& e) {
        throw Error(std::string("condensed: ") + e.what());
    }
}

std::string matrix_to_csv(const Mat& m) {
    std::ostringstream os;
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            os << (c ? "," : "") << buf;
        }
        os << '\n';
    }
    return os.str();
}

Mat matrix_from_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw Error("matrix CSV: cannot parse '" + cell + "'");
            }
        }
        if (!rows.empty()) require(row.size() == rows[0].size(), "matrix CSV: ragged rows");
        rows.push_back(std::move(row));
    }
    require(!rows.empty(), "matrix CSV: empty input");
    Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

std::string complex_matrix_to_csv(const CMat& m) {
    std::ostringstream os;
    char buf[96];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", m(r, c).real(), m(r, c).imag());
            os << (c ? "," : "") << buf;
        }
        os << '\n';
    }
    return os.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

}  // namespace nepvi
