#pragma once

#include <cstdint>
#include <vector>

#include "bitlin.hpp"
#include "code.hpp"
#include "noise.hpp"

namespace toric {

// Periodic lattice translation. Composition is coordinate-wise addition
// mod L; index order matches lattice position order (i*L^2 + j*L + k).
struct Translation {
    int d[3] = {0, 0, 0};
};

std::size_t translation_count(const Code& code);  // L^dim
std::size_t translation_index(const Code& code, const Translation& t);
Translation translation_at(const Code& code, std::size_t idx);
// apply b first, then a
Translation compose(const Code& code, const Translation& a, const Translation& b);
Translation inverse(const Code& code, const Translation& t);

// shift the lattice content by t: support at position u moves to u + t
BitVec translate_qubits(const Code& code, const BitVec& v, const Translation& t);
PauliError translate_error(const Code& code, const PauliError& e, const Translation& t);
BitVec translate_syndrome(const Code& code, const BitVec& s, const Translation& t);

// Canonical error for a syndrome, built from right pseudo-inverses of the
// two check blocks. For any achievable s, apply(s) reproduces s exactly;
// the x part answers the face bits, the z part the vertex bits.
class Destabilizer {
public:
    explicit Destabilizer(const Code& code);
    PauliError apply(const BitVec& syndrome) const;
    const BitMat& dx() const { return dx_; }
    const BitMat& dz() const { return dz_; }

private:
    std::size_t n_face_, n_qubits_;
    BitMat dx_;  // n_qubits x n_face
    BitMat dz_;  // n_qubits x n_vertex
};

// Label corrections under translation. delta_bits(g, s) is the 2*dim-bit
// mask with label(g.e) = label(e) ^ delta_bits(g, syndrome(e)) for every
// error e; bit order matches logical_label. Valid on syndromes of actual
// errors (the achievable space); tables are linear in s by construction.
//
// Tables per group element are kept for L <= 9; larger lattices store only
// the per-axis generator powers and compose on demand. The per-position
// tables used by equivariant pooling are always precomputed: the pooling
// mask at position q is delta_bits(q, q^{-1}.s), reindexed so no syndrome
// translation happens at decode time.
class FlipTables {
public:
    explicit FlipTables(const Code& code);

    int mask_bits() const { return 2 * dim_; }
    unsigned delta_bits(std::size_t g, const BitVec& syndrome) const;
    unsigned delta_bits(const Translation& t, const BitVec& syndrome) const;

    // masks for all positions at once, out must hold translation_count bytes
    void pooling_masks(const BitVec& syndrome, std::uint8_t* out) const;

private:
    // rows of the 2*dim x syndrome_bits table for one group element
    using Table = std::vector<BitVec>;

    Table direct_table(const Code& code, const Destabilizer& d, const Translation& t) const;
    Table compose_tables(const Code& code, const Table& a, const Table& b,
                         const Translation& tb) const;
    unsigned eval(const Table& w, const BitVec& s) const;
    Table table_chain(std::size_t g) const;

    int L_, dim_;
    Code shell_;  // geometry-only copy used for translations
    std::vector<Table> full_;             // all group elements, L <= 9
    std::vector<std::vector<Table>> axis_;  // [axis][shift]
    std::vector<Table> position_;         // pooling tables, all positions
};

// permute a class-probability vector by xor-ing class indices with mask
template <class T>
void flip_classes(const T* in, T* out, unsigned mask, unsigned n_classes) {
    for (unsigned c = 0; c < n_classes; ++c) out[c] = in[c ^ mask];
}
std::vector<double> flip_classes(const std::vector<double>& dist, unsigned mask);

}  // namespace toric
