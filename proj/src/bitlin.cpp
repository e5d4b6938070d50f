#include "bitlin.hpp"

#include <bit>
#include <stdexcept>

namespace toric {

BitVec BitVec::unit(std::size_t n, std::size_t i) {
    if (i >= n) throw std::invalid_argument("unit: index out of range");
    BitVec v(n);
    v.set(i, true);
    return v;
}

BitVec& BitVec::operator^=(const BitVec& o) {
    if (n_ != o.n_) throw std::invalid_argument("xor: size mismatch");
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
    return *this;
}

std::size_t BitVec::popcount() const {
    std::size_t c = 0;
    for (auto w : w_) c += std::popcount(w);
    return c;
}

bool BitVec::any() const {
    for (auto w : w_)
        if (w) return true;
    return false;
}

bool BitVec::dot(const BitVec& o) const {
    if (n_ != o.n_) throw std::invalid_argument("dot: size mismatch");
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < w_.size(); ++i) acc ^= w_[i] & o.w_[i];
    return std::popcount(acc) & 1;
}

std::vector<std::size_t> BitVec::support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n_; ++i)
        if (get(i)) s.push_back(i);
    return s;
}

BitMat BitMat::identity(std::size_t n) {
    BitMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

BitVec BitMat::column(std::size_t c) const {
    BitVec v(rows());
    for (std::size_t r = 0; r < rows(); ++r)
        if (get(r, c)) v.set(r, true);
    return v;
}

void BitMat::append_row(const BitVec& v) {
    if (rows_.empty() && cols_ == 0) cols_ = v.size();
    if (v.size() != cols_) throw std::invalid_argument("append_row: size mismatch");
    rows_.push_back(v);
}

BitMat operator*(const BitMat& a, const BitMat& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("mul: shape mismatch");
    BitMat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto& words = a.row(i).words();
        for (std::size_t wi = 0; wi < words.size(); ++wi) {
            std::uint64_t w = words[wi];
            while (w) {
                std::size_t j = wi * 64 + std::countr_zero(w);
                c.row(i) ^= b.row(j);
                w &= w - 1;
            }
        }
    }
    return c;
}

BitVec operator*(const BitMat& m, const BitVec& v) {
    if (m.cols() != v.size()) throw std::invalid_argument("matvec: shape mismatch");
    BitVec y(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (m.row(i).dot(v)) y.set(i, true);
    return y;
}

BitMat operator^(const BitMat& a, const BitMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("xor: shape mismatch");
    BitMat c = a;
    for (std::size_t i = 0; i < c.rows(); ++i) c.row(i) ^= b.row(i);
    return c;
}

BitMat transpose(const BitMat& m) {
    BitMat t(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto& words = m.row(r).words();
        for (std::size_t wi = 0; wi < words.size(); ++wi) {
            std::uint64_t w = words[wi];
            while (w) {
                std::size_t c = wi * 64 + std::countr_zero(w);
                t.set(c, r, true);
                w &= w - 1;
            }
        }
    }
    return t;
}

BitMat kron(const BitMat& a, const BitMat& b) {
    if (a.rows() == 0 || b.rows() == 0 || a.cols() == 0 || b.cols() == 0)
        throw std::invalid_argument("kron: empty factor");
    BitMat c(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar)
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            if (!a.get(ar, ac)) continue;
            for (std::size_t br = 0; br < b.rows(); ++br)
                for (std::size_t bc = 0; bc < b.cols(); ++bc)
                    if (b.get(br, bc))
                        c.set(ar * b.rows() + br, ac * b.cols() + bc, true);
        }
    return c;
}

BitMat vstack(const BitMat& a, const BitMat& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("vstack: width mismatch");
    BitMat c = a;
    for (std::size_t r = 0; r < b.rows(); ++r) c.append_row(b.row(r));
    return c;
}

BitMat hstack(const BitMat& a, const BitMat& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("hstack: height mismatch");
    BitMat c(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t i = 0; i < a.cols(); ++i)
            if (a.get(r, i)) c.set(r, i, true);
        for (std::size_t i = 0; i < b.cols(); ++i)
            if (b.get(r, i)) c.set(r, a.cols() + i, true);
    }
    return c;
}

Rref rref(const BitMat& m) {
    Rref out;
    out.r = m;
    out.e = BitMat::identity(m.rows());
    std::size_t pr = 0;  // next pivot row
    for (std::size_t c = 0; c < m.cols() && pr < m.rows(); ++c) {
        std::size_t sel = pr;
        while (sel < m.rows() && !out.r.get(sel, c)) ++sel;
        if (sel == m.rows()) continue;
        std::swap(out.r.row(pr), out.r.row(sel));
        std::swap(out.e.row(pr), out.e.row(sel));
        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (r != pr && out.r.get(r, c)) {
                out.r.row(r) ^= out.r.row(pr);
                out.e.row(r) ^= out.e.row(pr);
            }
        }
        out.pivots.push_back(c);
        ++pr;
    }
    return out;
}

std::size_t rank(const BitMat& m) { return rref(m).pivots.size(); }

BitMat right_pseudo_inverse(const BitMat& m) {
    Rref f = rref(m);
    BitMat d(m.cols(), m.rows());
    // row c_i of d picks up row i of the elimination transform, so d*s is
    // supported on pivot columns and m*(d*s) reproduces any s in the span
    for (std::size_t i = 0; i < f.pivots.size(); ++i) d.row(f.pivots[i]) = f.e.row(i);
    return d;
}

BitMat nullspace(const BitMat& m) {
    Rref f = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto c : f.pivots) is_pivot[c] = true;
    BitMat basis(0, m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        if (is_pivot[c]) continue;
        BitVec v(m.cols());
        v.set(c, true);
        for (std::size_t i = 0; i < f.pivots.size(); ++i)
            if (f.r.get(i, c)) v.set(f.pivots[i], true);
        basis.append_row(v);
    }
    return basis;
}

bool in_rowspace(const BitMat& m, const BitVec& v) {
    if (v.size() != m.cols()) throw std::invalid_argument("in_rowspace: size mismatch");
    Rref f = rref(m);
    BitVec w = v;
    for (std::size_t i = 0; i < f.pivots.size(); ++i)
        if (w.get(f.pivots[i])) w ^= f.r.row(i);
    return !w.any();
}

}  // namespace toric
