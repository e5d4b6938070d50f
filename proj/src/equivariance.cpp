#include "equivariance.hpp"

#include <stdexcept>

namespace toric {

namespace {

int mod(int a, int L) {
    int r = a % L;
    return r < 0 ? r + L : r;
}

// perm[old position] = translated position
std::vector<std::size_t> position_perm(const Code& code, const Translation& t) {
    int L = code.L;
    std::vector<std::size_t> perm(code.volume());
    if (code.dim == 3) {
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j)
                for (int k = 0; k < L; ++k) {
                    std::size_t from = (static_cast<std::size_t>(i) * L + j) * L + k;
                    std::size_t to = (static_cast<std::size_t>(mod(i + t.d[0], L)) * L +
                                      mod(j + t.d[1], L)) * L + mod(k + t.d[2], L);
                    perm[from] = to;
                }
    } else {
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j)
                perm[static_cast<std::size_t>(i) * L + j] =
                    static_cast<std::size_t>(mod(i + t.d[0], L)) * L + mod(j + t.d[1], L);
    }
    return perm;
}

BitVec translate_blocks(const BitVec& v, std::size_t block, const std::vector<std::size_t>& perm) {
    BitVec out(v.size());
    for (auto i : v.support()) out.set((i / block) * block + perm[i % block], true);
    return out;
}

}  // namespace

std::size_t translation_count(const Code& code) { return code.volume(); }

std::size_t translation_index(const Code& code, const Translation& t) {
    int L = code.L;
    std::size_t idx = 0;
    for (int a = 0; a < code.dim; ++a) idx = idx * L + mod(t.d[a], L);
    return idx;
}

Translation translation_at(const Code& code, std::size_t idx) {
    if (idx >= code.volume()) throw std::invalid_argument("translation_at: index out of range");
    int L = code.L;
    Translation t;
    for (int a = code.dim - 1; a >= 0; --a) {
        t.d[a] = static_cast<int>(idx % L);
        idx /= L;
    }
    return t;
}

Translation compose(const Code& code, const Translation& a, const Translation& b) {
    Translation t;
    for (int i = 0; i < code.dim; ++i) t.d[i] = mod(a.d[i] + b.d[i], code.L);
    return t;
}

Translation inverse(const Code& code, const Translation& t) {
    Translation r;
    for (int i = 0; i < code.dim; ++i) r.d[i] = mod(-t.d[i], code.L);
    return r;
}

BitVec translate_qubits(const Code& code, const BitVec& v, const Translation& t) {
    if (v.size() != code.n_qubits()) throw std::invalid_argument("translate_qubits: size mismatch");
    return translate_blocks(v, code.volume(), position_perm(code, t));
}

PauliError translate_error(const Code& code, const PauliError& e, const Translation& t) {
    auto perm = position_perm(code, t);
    return {translate_blocks(e.x, code.volume(), perm),
            translate_blocks(e.z, code.volume(), perm)};
}

BitVec translate_syndrome(const Code& code, const BitVec& s, const Translation& t) {
    if (s.size() != code.syndrome_bits())
        throw std::invalid_argument("translate_syndrome: size mismatch");
    return translate_blocks(s, code.volume(), position_perm(code, t));
}

Destabilizer::Destabilizer(const Code& code)
    : n_face_(code.n_face()),
      n_qubits_(code.n_qubits()),
      dx_(right_pseudo_inverse(code.face_checks)),
      dz_(right_pseudo_inverse(code.vertex_checks)) {}

PauliError Destabilizer::apply(const BitVec& syndrome) const {
    if (syndrome.size() != n_face_ + dz_.cols())
        throw std::invalid_argument("destabilizer: syndrome size mismatch");
    BitVec sf(n_face_), sv(dz_.cols());
    for (auto i : syndrome.support()) {
        if (i < n_face_) sf.set(i, true);
        else sv.set(i - n_face_, true);
    }
    return {dx_ * sf, dz_ * sv};
}

FlipTables::FlipTables(const Code& code) : L_(code.L), dim_(code.dim), shell_(code) {
    Destabilizer d(code);
    std::size_t vol = code.volume();

    // per-axis generator powers, composed up from the unit shift
    axis_.assign(dim_, {});
    for (int a = 0; a < dim_; ++a) {
        axis_[a].resize(L_);
        axis_[a][0] = Table(mask_bits(), BitVec(code.syndrome_bits()));
        Translation unit;
        unit.d[a] = 1;
        axis_[a][1] = direct_table(code, d, unit);
        Translation acc = unit;
        for (int s = 2; s < L_; ++s) {
            axis_[a][s] = compose_tables(code, axis_[a][1], axis_[a][s - 1], acc);
            acc = compose(code, unit, acc);
        }
    }

    bool cache_all = L_ <= 9;
    if (cache_all) full_.reserve(vol);
    position_.reserve(vol);
    for (std::size_t g = 0; g < vol; ++g) {
        Table w = table_chain(g);
        Translation t = translation_at(code, g);
        Table v(mask_bits(), BitVec(code.syndrome_bits()));
        for (int r = 0; r < mask_bits(); ++r) v[r] = translate_syndrome(code, w[r], t);
        position_.push_back(std::move(v));
        if (cache_all) full_.push_back(std::move(w));
    }
}

FlipTables::Table FlipTables::direct_table(const Code& code, const Destabilizer& d,
                                           const Translation& t) const {
    Table rows(mask_bits(), BitVec(code.syndrome_bits()));
    for (std::size_t j = 0; j < code.syndrome_bits(); ++j) {
        PauliError u = d.apply(BitVec::unit(code.syndrome_bits(), j));
        PauliError gu = translate_error(code, u, t);
        unsigned mask = logical_label(code, {gu.x ^ u.x, gu.z ^ u.z});
        for (int r = 0; r < mask_bits(); ++r)
            if ((mask >> r) & 1) rows[r].set(j, true);
    }
    return rows;
}

FlipTables::Table FlipTables::compose_tables(const Code& code, const Table& a, const Table& b,
                                             const Translation& tb) const {
    // cocycle: the combined correction reads a's table through b's shift
    Translation tb_inv = inverse(code, tb);
    Table rows(mask_bits(), BitVec(code.syndrome_bits()));
    for (int r = 0; r < mask_bits(); ++r)
        rows[r] = translate_syndrome(code, a[r], tb_inv) ^ b[r];
    return rows;
}

unsigned FlipTables::eval(const Table& w, const BitVec& s) const {
    unsigned mask = 0;
    for (int r = 0; r < mask_bits(); ++r)
        if (w[r].dot(s)) mask |= 1u << r;
    return mask;
}

FlipTables::Table FlipTables::table_chain(std::size_t g) const {
    // chain the axis tables: x applied after y applied after z
    Translation t = translation_at(shell_, g);
    Table w = axis_[dim_ - 1][t.d[dim_ - 1]];
    Translation acc;
    acc.d[dim_ - 1] = t.d[dim_ - 1];
    for (int a = dim_ - 2; a >= 0; --a) {
        w = compose_tables(shell_, axis_[a][t.d[a]], w, acc);
        acc.d[a] = t.d[a];
    }
    return w;
}

unsigned FlipTables::delta_bits(std::size_t g, const BitVec& syndrome) const {
    if (g >= translation_count(shell_))
        throw std::invalid_argument("delta_bits: group index out of range");
    if (syndrome.size() != shell_.syndrome_bits())
        throw std::invalid_argument("delta_bits: syndrome size mismatch");
    if (!full_.empty()) return eval(full_[g], syndrome);
    // large lattice: evaluate through the axis decomposition
    Translation t = translation_at(shell_, g);
    BitVec s = syndrome;
    unsigned mask = 0;
    for (int a = dim_ - 1; a >= 0; --a) {
        mask ^= eval(axis_[a][t.d[a]], s);
        if (a > 0) {
            Translation step;
            step.d[a] = t.d[a];
            s = translate_syndrome(shell_, s, step);
        }
    }
    return mask;
}

unsigned FlipTables::delta_bits(const Translation& t, const BitVec& syndrome) const {
    return delta_bits(translation_index(shell_, t), syndrome);
}

void FlipTables::pooling_masks(const BitVec& syndrome, std::uint8_t* out) const {
    for (std::size_t q = 0; q < position_.size(); ++q)
        out[q] = static_cast<std::uint8_t>(eval(position_[q], syndrome));
}

std::vector<double> flip_classes(const std::vector<double>& dist, unsigned mask) {
    std::vector<double> out(dist.size());
    flip_classes(dist.data(), out.data(), mask, static_cast<unsigned>(dist.size()));
    return out;
}

}  // namespace toric
