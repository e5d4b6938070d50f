#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace toric {

// Dense GF(2) vectors / matrices, 64-bit packed. Everything here is small
// (a few thousand bits per row), so the layout is plain row-major with no
// sparsity tricks.

class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}
    static BitVec unit(std::size_t n, std::size_t i);

    std::size_t size() const { return n_; }
    bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
    void set(std::size_t i, bool v) {
        std::uint64_t m = std::uint64_t(1) << (i & 63);
        if (v) w_[i >> 6] |= m; else w_[i >> 6] &= ~m;
    }
    void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t(1) << (i & 63); }

    BitVec& operator^=(const BitVec& o);
    friend BitVec operator^(BitVec a, const BitVec& b) { a ^= b; return a; }
    bool operator==(const BitVec& o) const = default;

    std::size_t popcount() const;
    bool any() const;
    // parity of the overlap |supp(a) & supp(b)|
    bool dot(const BitVec& o) const;
    std::vector<std::size_t> support() const;

    const std::vector<std::uint64_t>& words() const { return w_; }
    std::vector<std::uint64_t>& words() { return w_; }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

class BitMat {
public:
    BitMat() = default;
    BitMat(std::size_t rows, std::size_t cols)
        : cols_(cols), rows_(rows, BitVec(cols)) {}
    static BitMat identity(std::size_t n);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_; }
    bool get(std::size_t r, std::size_t c) const { return rows_[r].get(c); }
    void set(std::size_t r, std::size_t c, bool v) { rows_[r].set(c, v); }
    BitVec& row(std::size_t r) { return rows_[r]; }
    const BitVec& row(std::size_t r) const { return rows_[r]; }
    BitVec column(std::size_t c) const;
    void append_row(const BitVec& v);
    bool operator==(const BitMat& o) const = default;

private:
    std::size_t cols_ = 0;
    std::vector<BitVec> rows_;
};

BitMat operator*(const BitMat& a, const BitMat& b);
BitVec operator*(const BitMat& m, const BitVec& v);
BitMat operator^(const BitMat& a, const BitMat& b);
BitMat transpose(const BitMat& m);
BitMat kron(const BitMat& a, const BitMat& b);
BitMat vstack(const BitMat& a, const BitMat& b);
BitMat hstack(const BitMat& a, const BitMat& b);

// Row-reduced echelon form r = e * m with e invertible, pivot columns listed
// in row order. rank(m) == pivots.size().
struct Rref {
    BitMat r;
    BitMat e;
    std::vector<std::size_t> pivots;
};
Rref rref(const BitMat& m);
std::size_t rank(const BitMat& m);

// d with m * d * s == s for every s in the column span of m, and d * s
// supported only on the pivot columns of m.
BitMat right_pseudo_inverse(const BitMat& m);

// rows span ker(m) = { v : m * v == 0 }
BitMat nullspace(const BitMat& m);
bool in_rowspace(const BitMat& m, const BitVec& v);

}  // namespace toric
