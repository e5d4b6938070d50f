#include "code.hpp"

#include <sstream>
#include <stdexcept>

#include "container.hpp"

namespace toric {

std::size_t Code::qubit_index(int axis, int i, int j, int k) const {
    auto l = static_cast<std::size_t>(L);
    std::size_t pos = dim == 3 ? (static_cast<std::size_t>(i) * l + j) * l + k
                               : static_cast<std::size_t>(i) * l + j;
    return static_cast<std::size_t>(axis) * volume() + pos;
}

BitMat repetition_check(int L) {
    if (L < 2) throw std::invalid_argument("repetition_check: L must be >= 2");
    BitMat h(L, L);
    for (int i = 0; i < L; ++i) {
        h.set(i, i, true);
        h.set(i, (i - 1 + L) % L, true);
    }
    return h;
}

namespace {

BitMat zero(std::size_t r, std::size_t c) { return BitMat(r, c); }

Code build_3d(int L) {
    Code code;
    code.L = L;
    code.dim = 3;
    BitMat h = repetition_check(L);
    BitMat id = BitMat::identity(L);
    BitMat cx = kron(h, kron(id, id));
    BitMat cy = kron(id, kron(h, id));
    BitMat cz = kron(id, kron(id, h));
    std::size_t v = code.volume();

    // block rows pair the two transverse difference operators of each face
    // orientation; block columns run over qubit axes
    BitMat f0 = hstack(hstack(cy, cx), zero(v, v));
    BitMat f1 = hstack(hstack(zero(v, v), cz), cy);
    BitMat f2 = hstack(hstack(cz, zero(v, v)), cx);
    code.face_checks = vstack(vstack(f0, f1), f2);
    code.vertex_checks = hstack(hstack(transpose(cx), transpose(cy)), transpose(cz));

    code.z_logicals = BitMat(3, code.n_qubits());
    code.x_logicals = BitMat(3, code.n_qubits());
    for (int i = 0; i < L; ++i) {
        code.z_logicals.set(0, code.qubit_index(0, i, 0, 0), true);
        code.z_logicals.set(1, code.qubit_index(1, 0, i, 0), true);
        code.z_logicals.set(2, code.qubit_index(2, 0, 0, i), true);
    }
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) {
            code.x_logicals.set(0, code.qubit_index(0, 0, a, b), true);
            code.x_logicals.set(1, code.qubit_index(1, a, 0, b), true);
            code.x_logicals.set(2, code.qubit_index(2, a, b, 0), true);
        }
    return code;
}

Code build_2d(int L) {
    Code code;
    code.L = L;
    code.dim = 2;
    BitMat h = repetition_check(L);
    BitMat id = BitMat::identity(L);
    BitMat cx = kron(h, id);
    BitMat cy = kron(id, h);
    code.face_checks = hstack(cy, cx);
    code.vertex_checks = hstack(transpose(cx), transpose(cy));

    code.z_logicals = BitMat(2, code.n_qubits());
    code.x_logicals = BitMat(2, code.n_qubits());
    for (int i = 0; i < L; ++i) {
        code.z_logicals.set(0, code.qubit_index(0, i, 0), true);
        code.z_logicals.set(1, code.qubit_index(1, 0, i), true);
        code.x_logicals.set(0, code.qubit_index(0, 0, i), true);
        code.x_logicals.set(1, code.qubit_index(1, i, 0), true);
    }
    return code;
}

}  // namespace

Code build_toric(int L, int dim) {
    if (L < 2) throw std::invalid_argument("build_toric: L must be >= 2");
    if (dim == 3) return build_3d(L);
    if (dim == 2) return build_2d(L);
    throw std::invalid_argument("build_toric: dim must be 2 or 3");
}

std::string ValidationReport::summary() const {
    if (ok) return "ok";
    std::ostringstream s;
    s << failures.size() << " failure(s):";
    for (const auto& f : failures) s << "\n  " << f;
    return s.str();
}

ValidationReport validate(const Code& code) {
    ValidationReport rep;
    auto fail = [&rep](const std::string& msg) {
        rep.ok = false;
        rep.failures.push_back(msg);
    };

    std::size_t n = code.n_qubits();
    std::size_t v = code.volume();
    bool d3 = code.dim == 3;
    if (code.L < 2 || (code.dim != 2 && code.dim != 3)) {
        fail("bad lattice parameters");
        return rep;
    }
    if (code.face_checks.cols() != n || code.vertex_checks.cols() != n)
        fail("check matrix width != qubit count");
    if (code.face_checks.rows() != (d3 ? 3 * v : v)) fail("face check count");
    if (code.vertex_checks.rows() != v) fail("vertex check count");

    // stabilizers commute: every X-type row overlaps every Z-type row evenly
    BitMat prod = code.vertex_checks * transpose(code.face_checks);
    for (std::size_t r = 0; r < prod.rows(); ++r)
        if (prod.row(r).any()) {
            fail("vertex and face checks do not commute");
            break;
        }

    std::size_t fw = 4, vw = d3 ? 6 : 4;
    for (std::size_t r = 0; r < code.face_checks.rows(); ++r)
        if (code.face_checks.row(r).popcount() != fw) {
            fail("face row weight != 4");
            break;
        }
    for (std::size_t r = 0; r < code.vertex_checks.rows(); ++r)
        if (code.vertex_checks.row(r).popcount() != vw) {
            fail("vertex row weight != " + std::to_string(vw));
            break;
        }

    std::size_t f_col = d3 ? 4 : 2, v_col = 2;
    for (std::size_t c = 0; c < n; ++c) {
        if (code.face_checks.column(c).popcount() != f_col) {
            fail("qubit face degree != " + std::to_string(f_col));
            break;
        }
        if (code.vertex_checks.column(c).popcount() != v_col) {
            fail("qubit vertex degree != 2");
            break;
        }
    }

    std::size_t rf = rank(code.face_checks), rv = rank(code.vertex_checks);
    std::size_t rf_want = d3 ? 2 * v - 2 : v - 1;
    if (rf != rf_want) fail("face rank " + std::to_string(rf) + " != " + std::to_string(rf_want));
    if (rv != v - 1) fail("vertex rank " + std::to_string(rv) + " != " + std::to_string(v - 1));
    if (n - rf - rv != static_cast<std::size_t>(code.n_logical_pairs()))
        fail("logical pair count");

    if (code.x_logicals.rows() != static_cast<std::size_t>(code.dim) ||
        code.z_logicals.rows() != static_cast<std::size_t>(code.dim) ||
        code.x_logicals.cols() != n || code.z_logicals.cols() != n) {
        fail("logical operator shapes");
        return rep;
    }

    BitMat xf = code.face_checks * transpose(code.x_logicals);
    BitMat zv = code.vertex_checks * transpose(code.z_logicals);
    for (std::size_t r = 0; r < xf.rows(); ++r)
        if (xf.row(r).any()) {
            fail("x logicals do not commute with face checks");
            break;
        }
    for (std::size_t r = 0; r < zv.rows(); ++r)
        if (zv.row(r).any()) {
            fail("z logicals do not commute with vertex checks");
            break;
        }

    for (int t = 0; t < code.dim; ++t) {
        if (in_rowspace(code.vertex_checks, code.x_logicals.row(t)))
            fail("x logical lies in the stabilizer group");
        if (in_rowspace(code.face_checks, code.z_logicals.row(t)))
            fail("z logical lies in the stabilizer group");
    }

    for (int s = 0; s < code.dim; ++s)
        for (int t = 0; t < code.dim; ++t)
            if (code.x_logicals.row(s).dot(code.z_logicals.row(t)) != (s == t)) {
                fail("logical pairing is not the identity");
                s = t = code.dim;
            }

    std::size_t zl_w = static_cast<std::size_t>(code.L);
    std::size_t xl_w = d3 ? static_cast<std::size_t>(code.L) * code.L : code.L;
    for (int t = 0; t < code.dim; ++t) {
        if (code.z_logicals.row(t).popcount() != zl_w) fail("z logical weight");
        if (code.x_logicals.row(t).popcount() != xl_w) fail("x logical weight");
    }
    return rep;
}

namespace {

Tensor mat_to_tensor(const BitMat& m) {
    Tensor t({m.rows(), m.cols()});
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            t[r * m.cols() + c] = m.get(r, c) ? 1.0f : 0.0f;
    return t;
}

BitMat tensor_to_mat(const Tensor& t, const std::string& name) {
    if (t.rank() != 2) throw std::runtime_error("code file: " + name + " is not a matrix");
    BitMat m(t.dim(0), t.dim(1));
    for (std::size_t r = 0; r < t.dim(0); ++r)
        for (std::size_t c = 0; c < t.dim(1); ++c) {
            float x = t[r * t.dim(1) + c];
            if (x != 0.0f && x != 1.0f)
                throw std::runtime_error("code file: " + name + " has non-binary entries");
            if (x == 1.0f) m.set(r, c, true);
        }
    return m;
}

}  // namespace

void save_code(const Code& code, const std::string& path) {
    NamedTensors ts;
    ts.emplace_back("code.L", Tensor::scalar(static_cast<float>(code.L)));
    ts.emplace_back("code.dim", Tensor::scalar(static_cast<float>(code.dim)));
    ts.emplace_back("code.face_checks", mat_to_tensor(code.face_checks));
    ts.emplace_back("code.vertex_checks", mat_to_tensor(code.vertex_checks));
    ts.emplace_back("code.x_logicals", mat_to_tensor(code.x_logicals));
    ts.emplace_back("code.z_logicals", mat_to_tensor(code.z_logicals));
    write_tensor_file(path, ts);
}

Code load_code(const std::string& path) {
    NamedTensors ts = read_tensor_file(path);
    Code code;
    code.L = static_cast<int>(must_tensor(ts, "code.L")[0]);
    code.dim = static_cast<int>(must_tensor(ts, "code.dim")[0]);
    code.face_checks = tensor_to_mat(must_tensor(ts, "code.face_checks"), "face_checks");
    code.vertex_checks = tensor_to_mat(must_tensor(ts, "code.vertex_checks"), "vertex_checks");
    code.x_logicals = tensor_to_mat(must_tensor(ts, "code.x_logicals"), "x_logicals");
    code.z_logicals = tensor_to_mat(must_tensor(ts, "code.z_logicals"), "z_logicals");
    ValidationReport rep = validate(code);
    if (!rep.ok) throw std::runtime_error("code file: validation failed: " + rep.summary());
    return code;
}

}  // namespace toric
