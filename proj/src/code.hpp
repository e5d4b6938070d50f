#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bitlin.hpp"

namespace toric {

// CSS toric code on a periodic cubic (dim 3) or square (dim 2) lattice.
// Qubits sit on edges: axis a and position (i,j,k) map to index
// a*L^3 + i*L^2 + j*L + k (drop the k term for dim 2). face_checks rows are
// Z-type stabilizers (they see the X part of an error), vertex_checks rows
// are X-type (they see the Z part). Syndromes are laid out as
// [face bits ; vertex bits].
struct Code {
    int L = 0;
    int dim = 3;
    BitMat face_checks;
    BitMat vertex_checks;
    BitMat x_logicals;  // row per axis: membrane (3D) or loop (2D)
    BitMat z_logicals;  // row per axis: loop of weight L

    std::size_t volume() const {
        std::size_t v = 1;
        for (int i = 0; i < dim; ++i) v *= static_cast<std::size_t>(L);
        return v;
    }
    std::size_t n_qubits() const { return static_cast<std::size_t>(dim) * volume(); }
    std::size_t n_face() const { return face_checks.rows(); }
    std::size_t n_vertex() const { return vertex_checks.rows(); }
    std::size_t syndrome_bits() const { return n_face() + n_vertex(); }
    int n_logical_pairs() const { return dim; }
    int n_classes() const { return 1 << (2 * dim); }
    std::size_t qubit_index(int axis, int i, int j, int k = 0) const;
};

// cyclic difference operator of the length-L repetition code:
// row i has ones at columns i and (i-1+L)%L
BitMat repetition_check(int L);

Code build_toric(int L, int dim = 3);

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> failures;
    std::string summary() const;
};
ValidationReport validate(const Code& code);

void save_code(const Code& code, const std::string& path);
Code load_code(const std::string& path);

}  // namespace toric
