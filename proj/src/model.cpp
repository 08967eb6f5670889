#include "qbd/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "qbd/error.hpp"
#include "qbd/perron.hpp"

namespace qbd {

std::string_view family_name(Family f) {
    switch (f) {
        case Family::Interior: return "A";
        case Family::Face1: return "A1";
        case Family::Face2: return "A2";
        case Family::Origin: return "A0";
    }
    return "?";
}

namespace {

template <std::size_t R, std::size_t C>
void check_shapes(const std::array<std::array<Matrix, C>, R>& blocks, std::size_t s0, std::string_view name) {
    for (std::size_t a = 0; a < R; ++a) {
        for (std::size_t b = 0; b < C; ++b) {
            const Matrix& m = blocks[a][b];
            if (m.rows() != s0 || m.cols() != s0) {
                std::ostringstream msg;
                msg << name << "[" << a << "][" << b << "]: dimension mismatch, block is " << m.rows() << "x"
                    << m.cols() << " but s0=" << s0;
                throw InputError(msg.str());
            }
        }
    }
}

template <std::size_t R, std::size_t C, typename F>
void for_each_block(const std::array<std::array<Matrix, C>, R>& blocks, F&& f) {
    for (std::size_t a = 0; a < R; ++a)
        for (std::size_t b = 0; b < C; ++b) f(a, b, blocks[a][b]);
}

Matrix permute(const Matrix& m, const std::vector<std::size_t>& p) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(p[i], p[j]) = m(i, j);
    return out;
}

}  // namespace

QbdModel::QbdModel(std::size_t s0, InteriorBlocks interior, Face1Blocks face1, Face2Blocks face2,
                   OriginBlocks origin)
    : s0_(s0),
      interior_(std::move(interior)),
      face1_(std::move(face1)),
      face2_(std::move(face2)),
      origin_(std::move(origin)) {
    if (s0_ == 0) throw InputError("s0: number of phases must be positive");
    check_shapes(interior_, s0_, "A");
    check_shapes(face1_, s0_, "A1");
    check_shapes(face2_, s0_, "A2");
    check_shapes(origin_, s0_, "A0");
}

QbdModel QbdModel::swapped() const {
    InteriorBlocks a;
    Face1Blocks f1;
    Face2Blocks f2;
    OriginBlocks o;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) a[i + 1][j + 1] = interior(j, i);
    // New face 1 (x2 = 0) is the old face 2 (x1 = 0) with the jumps exchanged.
    for (int i = -1; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) f1[i + 1][j] = face2(j, i);
    for (int i = 0; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) f2[i][j + 1] = face1(j, i);
    for (int i = 0; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) o[i][j] = origin(j, i);
    return QbdModel(s0_, std::move(a), std::move(f1), std::move(f2), std::move(o));
}

QbdModel QbdModel::permuted(const std::vector<std::size_t>& p) const {
    if (p.size() != s0_) throw InputError("permutation length differs from s0");
    std::vector<bool> seen(s0_, false);
    for (std::size_t v : p) {
        if (v >= s0_ || seen[v]) throw InputError("not a permutation of the phases");
        seen[v] = true;
    }
    InteriorBlocks a;
    Face1Blocks f1;
    Face2Blocks f2;
    OriginBlocks o;
    for_each_block(interior_, [&](std::size_t x, std::size_t y, const Matrix& m) { a[x][y] = permute(m, p); });
    for_each_block(face1_, [&](std::size_t x, std::size_t y, const Matrix& m) { f1[x][y] = permute(m, p); });
    for_each_block(face2_, [&](std::size_t x, std::size_t y, const Matrix& m) { f2[x][y] = permute(m, p); });
    for_each_block(origin_, [&](std::size_t x, std::size_t y, const Matrix& m) { o[x][y] = permute(m, p); });
    return QbdModel(s0_, std::move(a), std::move(f1), std::move(f2), std::move(o));
}

Matrix family_sum(const QbdModel& m, Family f) {
    Matrix s = Matrix::zeros(m.phases());
    switch (f) {
        case Family::Interior:
            for (int i = -1; i <= 1; ++i)
                for (int j = -1; j <= 1; ++j) s += m.interior(i, j);
            break;
        case Family::Face1:
            for (int i = -1; i <= 1; ++i)
                for (int j = 0; j <= 1; ++j) s += m.face1(i, j);
            break;
        case Family::Face2:
            for (int i = 0; i <= 1; ++i)
                for (int j = -1; j <= 1; ++j) s += m.face2(i, j);
            break;
        case Family::Origin:
            for (int i = 0; i <= 1; ++i)
                for (int j = 0; j <= 1; ++j) s += m.origin(i, j);
            break;
    }
    return s;
}

Matrix interior_col_poly(const QbdModel& m, int j, double z) {
    Matrix s = m.interior(0, j);
    s.add_scaled(m.interior(-1, j), 1.0 / z);
    s.add_scaled(m.interior(1, j), z);
    return s;
}

Matrix face1_col_poly(const QbdModel& m, int j, double z) {
    Matrix s = m.face1(0, j);
    s.add_scaled(m.face1(-1, j), 1.0 / z);
    s.add_scaled(m.face1(1, j), z);
    return s;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

constexpr int kWindow = 5;

// Directed graph on (x1, x2, phase) cells of a 5 x 5 window. A free
// coordinate wraps around (an exact quotient of Z); a reflected coordinate
// keeps levels 0..3 exactly and lumps every level >= 4 into cell 4, from
// which a downward jump may land in 3 or stay in 4.
struct WindowGraph {
    std::size_t s0;

    std::size_t node(int x1, int x2, std::size_t ph) const {
        return (static_cast<std::size_t>(x1) * kWindow + static_cast<std::size_t>(x2)) * s0 + ph;
    }
};

std::vector<int> targets(int x, int d, bool free_axis) {
    if (free_axis) return {((x + d) % kWindow + kWindow) % kWindow};
    if (x == kWindow - 1) {
        if (d == -1) return {kWindow - 2, kWindow - 1};
        return {kWindow - 1};
    }
    const int y = x + d;
    if (y < 0) return {};
    return {y};
}

// kind: 0 = both coordinates free, 1 = x2 reflected at 0, 2 = x1 reflected at 0.
Matrix window_adjacency(const QbdModel& m, int kind) {
    const std::size_t s0 = m.phases();
    WindowGraph g{s0};
    const std::size_t n = static_cast<std::size_t>(kWindow * kWindow) * s0;
    Matrix adj(n, n);
    const bool free1 = kind != 2;
    const bool free2 = kind != 1;
    for (int x1 = 0; x1 < kWindow; ++x1) {
        for (int x2 = 0; x2 < kWindow; ++x2) {
            for (int i = -1; i <= 1; ++i) {
                for (int j = -1; j <= 1; ++j) {
                    const Matrix* block = nullptr;
                    if (kind == 1 && x2 == 0) {
                        if (j >= 0) block = &m.face1(i, j);
                    } else if (kind == 2 && x1 == 0) {
                        if (i >= 0) block = &m.face2(i, j);
                    } else {
                        block = &m.interior(i, j);
                    }
                    if (block == nullptr) continue;
                    for (int y1 : targets(x1, i, free1)) {
                        for (int y2 : targets(x2, j, free2)) {
                            for (std::size_t a = 0; a < s0; ++a)
                                for (std::size_t b = 0; b < s0; ++b)
                                    if ((*block)(a, b) > 0.0) adj(g.node(x1, x2, a), g.node(y1, y2, b)) = 1.0;
                        }
                    }
                }
            }
        }
    }
    return adj;
}

}  // namespace

ValidationReport validate(const QbdModel& m, double stochastic_tol) {
    ValidationReport rep;
    const std::size_t s0 = m.phases();
    const Family families[] = {Family::Interior, Family::Face1, Family::Face2, Family::Origin};

    auto check_negative = [&](std::string_view fam, std::size_t a, std::size_t b, const Matrix& blk) {
        for (std::size_t r = 0; r < s0; ++r) {
            for (std::size_t c = 0; c < s0; ++c) {
                const double v = blk(r, c);
                if (!(v >= 0.0) || !std::isfinite(v)) {
                    std::ostringstream msg;
                    msg << "negative or non-finite entry, family " << fam << ", block [" << a << "][" << b
                        << "], entry (" << r << "," << c << ")";
                    rep.violations.push_back(msg.str());
                    return;
                }
            }
        }
    };
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) check_negative("A", i + 1, j + 1, m.interior(i, j));
    for (int i = -1; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) check_negative("A1", i + 1, j, m.face1(i, j));
    for (int i = 0; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) check_negative("A2", i, j + 1, m.face2(i, j));
    for (int i = 0; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) check_negative("A0", i, j, m.origin(i, j));

    for (Family f : families) {
        const Vector rs = family_sum(m, f).row_sums();
        for (std::size_t r = 0; r < s0; ++r) {
            if (!(std::fabs(rs[r] - 1.0) <= stochastic_tol)) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "row-sum violation, family " << family_name(f) << ", row " << r << " (sum " << rs[r] << ")";
                rep.violations.push_back(msg.str());
            }
        }
    }
    if (!rep.ok()) return rep;  // graph checks assume a proper transition structure

    const Matrix total = family_sum(m, Family::Interior);
    if (!is_irreducible(total)) {
        rep.violations.push_back("A_{*,*} reducible");
    } else if (const std::size_t d = period(total); d != 1) {
        rep.violations.push_back("A_{*,*} periodic (period " + std::to_string(d) + ")");
    }

    const char* chains[] = {"boundary-free chain", "chain with only the x1-face (x2 = 0)",
                            "chain with only the x2-face (x1 = 0)"};
    for (int kind = 0; kind < 3; ++kind) {
        // States that can be left but never entered (phases a face never
        // produces) do not matter; the window graph must have exactly one
        // closed class and that class must be aperiodic.
        const Matrix adj = window_adjacency(m, kind);
        const auto comps = strongly_connected_components(adj);
        std::vector<std::size_t> comp_of(adj.rows());
        for (std::size_t c = 0; c < comps.size(); ++c)
            for (std::size_t v : comps[c]) comp_of[v] = c;
        std::vector<std::size_t> closed;
        for (std::size_t c = 0; c < comps.size(); ++c) {
            bool leaves = false;
            for (std::size_t v : comps[c])
                for (std::size_t w = 0; w < adj.cols() && !leaves; ++w)
                    if (adj(v, w) > 0.0 && comp_of[w] != c) leaves = true;
            if (!leaves) closed.push_back(c);
        }
        const std::string name = chains[kind];
        if (closed.size() != 1) {
            rep.violations.push_back(name + " has " + std::to_string(closed.size()) +
                                     " closed classes on the 5x5 window (heuristic)");
            continue;
        }
        const auto& cls = comps[closed.front()];
        Matrix sub(cls.size(), cls.size());
        for (std::size_t a = 0; a < cls.size(); ++a)
            for (std::size_t b = 0; b < cls.size(); ++b) sub(a, b) = adj(cls[a], cls[b]);
        if (period(sub) != 1) {
            rep.violations.push_back(name + " periodic on the 5x5 window (heuristic)");
        }
        if (cls.size() != adj.rows()) {
            rep.notes.push_back(name + ": " + std::to_string(adj.rows() - cls.size()) +
                                " window states are inessential (never re-entered)");
        }
    }
    rep.notes.push_back(
        "boundary-removed chains checked heuristically on a 5x5 lattice window (necessary condition only)");
    rep.notes.push_back("irreducibility of the face rate matrices is assumed, not checked");
    return rep;
}

// ---------------------------------------------------------------------------
// Limited-service generator

QbdModel build_limited_service(const LimitedServiceParams& p) {
    if (p.K < 1) throw InputError("K must be a positive integer");
    for (double r : {p.lambda1, p.lambda2, p.mu1, p.mu2}) {
        if (!(r > 0.0) || !std::isfinite(r)) throw InputError("arrival and service rates must be positive");
    }
    const std::size_t n = static_cast<std::size_t>(p.K) + 1;
    const std::size_t last = n - 1;
    const double lam = p.lambda1 + p.lambda2;
    const double nu = p.uniformization();
    const Matrix I = Matrix::identity(n);
    const Matrix O = Matrix::zeros(n);

    QbdModel::InteriorBlocks a;
    for (auto& row : a) row.fill(O);
    a[2][1] = I * (p.lambda1 / nu);
    a[1][2] = I * (p.lambda2 / nu);
    {
        // Queue-1 service happens in phase 0 and hands the server to queue 2.
        Matrix m = O;
        m(0, last) = p.mu1 / nu;
        a[0][1] = m;
    }
    {
        Matrix m = O;
        for (std::size_t r = 1; r < n; ++r) m(r, r - 1) = p.mu2 / nu;
        a[1][0] = m;
    }
    {
        Matrix m = I;
        m(0, 0) -= (lam + p.mu1) / nu;
        for (std::size_t r = 1; r < n; ++r) m(r, r) -= (lam + p.mu2) / nu;
        a[1][1] = m;
    }

    QbdModel::Face1Blocks f1;
    for (auto& row : f1) row.fill(O);
    f1[0][0] = Matrix(n, n, p.mu1 / (nu * static_cast<double>(n)));
    f1[1][0] = I * (1.0 - (lam + p.mu1) / nu);
    f1[2][0] = I * (p.lambda1 / nu);
    {
        Matrix m = O;
        for (std::size_t r = 0; r < n; ++r) m(r, 0) = p.lambda2 / nu;
        f1[1][1] = m;
    }

    QbdModel::Face2Blocks f2;
    for (auto& row : f2) row.fill(O);
    f2[0][1] = I * (1.0 - (lam + p.mu2) / nu);
    f2[0][2] = I * (p.lambda2 / nu);
    {
        Matrix m = O;
        m(0, 1) = p.lambda1 / nu;
        for (std::size_t r = 1; r < n; ++r) m(r, r) = p.lambda1 / nu;
        f2[1][1] = m;
    }
    {
        Matrix m = O;
        m(0, last) = p.mu2 / nu;
        m(1, last) = p.mu2 / nu;
        if (n > 2) {
            m(2, 0) = 0.5 * p.mu2 / nu;
            m(2, 1) = 0.5 * p.mu2 / nu;
            for (std::size_t r = 3; r < n; ++r) m(r, r - 1) = p.mu2 / nu;
        }
        f2[0][0] = m;
    }

    QbdModel::OriginBlocks o;
    o[0][0] = I * (1.0 - lam / nu);
    o[1][0] = I * (p.lambda1 / nu);
    o[1][1] = O;
    {
        Matrix m = O;
        for (std::size_t r = 0; r < n; ++r) m(r, last) = p.lambda2 / nu;
        o[0][1] = m;
    }
    return QbdModel(n, std::move(a), std::move(f1), std::move(f2), std::move(o));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void write_matrix(std::string& out, const Matrix& m) {
    char buf[40];
    out += '[';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (i) out += ", ";
        out += '[';
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out += ", ";
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out += buf;
        }
        out += ']';
    }
    out += ']';
}

template <std::size_t R, std::size_t C>
void write_family(std::string& out, std::string_view name, const std::array<std::array<Matrix, C>, R>& blocks) {
    out += "  \"";
    out += name;
    out += "\": [\n";
    for (std::size_t a = 0; a < R; ++a) {
        out += "    [\n";
        for (std::size_t b = 0; b < C; ++b) {
            out += "      ";
            write_matrix(out, blocks[a][b]);
            out += b + 1 < C ? ",\n" : "\n";
        }
        out += a + 1 < R ? "    ],\n" : "    ]\n";
    }
    out += "  ]";
}

using json = nlohmann::json;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    throw InputError(path + ": " + what);
}

Matrix read_matrix(const json& j, const std::string& path, std::size_t s0) {
    if (!j.is_array()) field_error(path, "expected an array of rows");
    if (j.size() != s0) {
        field_error(path, "dimension mismatch, " + std::to_string(j.size()) + " rows but s0=" + std::to_string(s0));
    }
    Matrix m(s0, s0);
    for (std::size_t r = 0; r < s0; ++r) {
        const json& row = j[r];
        const std::string rpath = path + "[" + std::to_string(r) + "]";
        if (!row.is_array()) field_error(rpath, "expected an array of numbers");
        if (row.size() != s0) {
            field_error(rpath, "dimension mismatch, " + std::to_string(row.size()) + " columns but s0=" +
                                   std::to_string(s0) + " (blocks must be square)");
        }
        for (std::size_t c = 0; c < s0; ++c) {
            if (!row[c].is_number()) field_error(rpath + "[" + std::to_string(c) + "]", "expected a number");
            m(r, c) = row[c].get<double>();
        }
    }
    return m;
}

template <std::size_t R, std::size_t C>
std::array<std::array<Matrix, C>, R> read_family(const json& root, const std::string& name, std::size_t s0) {
    if (!root.contains(name)) field_error(name, "missing field");
    const json& j = root[name];
    if (!j.is_array() || j.size() != R) {
        field_error(name, "expected " + std::to_string(R) + " i-indices, found " +
                              (j.is_array() ? std::to_string(j.size()) : std::string("a non-array")));
    }
    std::array<std::array<Matrix, C>, R> out;
    for (std::size_t a = 0; a < R; ++a) {
        const std::string p = name + "[" + std::to_string(a) + "]";
        if (!j[a].is_array() || j[a].size() != C) {
            field_error(p, "expected " + std::to_string(C) + " j-indices, found " +
                               (j[a].is_array() ? std::to_string(j[a].size()) : std::string("a non-array")));
        }
        for (std::size_t b = 0; b < C; ++b) out[a][b] = read_matrix(j[a][b], p + "[" + std::to_string(b) + "]", s0);
    }
    return out;
}

}  // namespace

std::string save_model(const QbdModel& m) {
    std::string out = "{\n  \"s0\": " + std::to_string(m.phases()) + ",\n";
    QbdModel::InteriorBlocks a;
    QbdModel::Face1Blocks f1;
    QbdModel::Face2Blocks f2;
    QbdModel::OriginBlocks o;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) a[i + 1][j + 1] = m.interior(i, j);
    for (int i = -1; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) f1[i + 1][j] = m.face1(i, j);
    for (int i = 0; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) f2[i][j + 1] = m.face2(i, j);
    for (int i = 0; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) o[i][j] = m.origin(i, j);
    write_family(out, "A", a);
    out += ",\n";
    write_family(out, "A1", f1);
    out += ",\n";
    write_family(out, "A2", f2);
    out += ",\n";
    write_family(out, "A0", o);
    out += "\n}\n";
    return out;
}

QbdModel load_model(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw InputError(std::string("parse error: ") + e.what());
    }
    if (!root.is_object()) throw InputError("<root>: expected a JSON object");
    if (!root.contains("s0")) field_error("s0", "missing field");
    const json& js0 = root["s0"];
    if (!js0.is_number_integer() || js0.get<long long>() <= 0) field_error("s0", "expected a positive integer");
    const auto s0 = static_cast<std::size_t>(js0.get<long long>());
    return QbdModel(s0, read_family<3, 3>(root, "A", s0), read_family<3, 2>(root, "A1", s0),
                    read_family<2, 3>(root, "A2", s0), read_family<2, 2>(root, "A0", s0));
}

QbdModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_model(ss.str());
}

void save_model_file(const QbdModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write model file '" + path + "'");
    out << save_model(m);
    if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace qbd
