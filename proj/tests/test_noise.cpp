#include "doctest.h"

#include <array>
#include <cmath>
#include <sstream>

#include "code.hpp"
#include "noise.hpp"

using namespace toric;

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool same_c = true, same_d = true;
    for (int i = 0; i < 256; ++i) {
        auto va = a.bits();
        CHECK(va == b.bits());
        same_c = same_c && (va == c.bits());
        same_d = same_d && (va == d.bits());
    }
    CHECK(!same_c);
    CHECK(!same_d);

    Rng u(1, 0);
    for (int i = 0; i < 10000; ++i) {
        double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("gaussian moments") {
    Rng rng(5, 0);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        double g = rng.gaussian();
        s += g;
        s2 += g * g;
    }
    double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("depolarizing marginals") {
    Code code = build_toric(3, 3);
    const double p = 0.1;
    Rng rng(11, 1);
    long n_i = 0, n_x = 0, n_z = 0, n_xz = 0;
    const int shots = 3000;
    for (int t = 0; t < shots; ++t) {
        PauliError e = sample_error(code, p, rng);
        for (std::size_t q = 0; q < code.n_qubits(); ++q) {
            bool x = e.x.get(q), z = e.z.get(q);
            n_i += !x && !z;
            n_x += x && !z;
            n_z += !x && z;
            n_xz += x && z;
        }
    }
    double total = static_cast<double>(shots) * code.n_qubits();
    std::array<double, 4> obs{double(n_i), double(n_x), double(n_z), double(n_xz)};
    std::array<double, 4> want{(1.0 - p) * total, p / 3 * total, p / 3 * total, p / 3 * total};
    double chi2 = 0;
    for (int i = 0; i < 4; ++i) chi2 += (obs[i] - want[i]) * (obs[i] - want[i]) / want[i];
    CHECK(chi2 < 16.27);  // 3 dof, far tail

    Rng r0(11, 2);
    PauliError none = sample_error(code, 0.0, r0);
    CHECK(!none.x.any());
    CHECK(!none.z.any());
    PauliError all = sample_error(code, 1.0, r0);
    for (std::size_t q = 0; q < code.n_qubits(); ++q)
        CHECK((all.x.get(q) || all.z.get(q)));
}

TEST_CASE("stabilizers and logicals have the expected syndromes and labels") {
    for (int dim : {2, 3}) {
        Code code = build_toric(dim == 3 ? 2 : 3, dim);
        std::size_t n = code.n_qubits();

        PauliError none{BitVec(n), BitVec(n)};
        CHECK(logical_label(code, none) == 0);
        CHECK(!extract_syndrome(code, none).any());

        // face rows are Z-type stabilizers, vertex rows X-type: silent, class 0
        for (std::size_t r = 0; r < code.n_face(); r += 3) {
            PauliError e{BitVec(n), code.face_checks.row(r)};
            CHECK(!extract_syndrome(code, e).any());
            CHECK(logical_label(code, e) == 0);
        }
        for (std::size_t r = 0; r < code.n_vertex(); r += 2) {
            PauliError e{code.vertex_checks.row(r), BitVec(n)};
            CHECK(!extract_syndrome(code, e).any());
            CHECK(logical_label(code, e) == 0);
        }

        // each logical representative lands in its own class
        for (int t = 0; t < dim; ++t) {
            PauliError ez{BitVec(n), code.z_logicals.row(t)};
            CHECK(!extract_syndrome(code, ez).any());
            CHECK(logical_label(code, ez) == (1u << t));
            PauliError ex{code.x_logicals.row(t), BitVec(n)};
            CHECK(!extract_syndrome(code, ex).any());
            CHECK(logical_label(code, ex) == (1u << (dim + t)));
        }
    }
}

TEST_CASE("labels add over error composition") {
    Code code = build_toric(2, 3);
    Rng rng(3, 3);
    for (int t = 0; t < 50; ++t) {
        PauliError a = sample_error(code, 0.3, rng);
        PauliError b = sample_error(code, 0.3, rng);
        PauliError ab{a.x ^ b.x, a.z ^ b.z};
        CHECK(logical_label(code, ab) == (logical_label(code, a) ^ logical_label(code, b)));
        CHECK(extract_syndrome(code, ab) ==
              (extract_syndrome(code, a) ^ extract_syndrome(code, b)));
    }
}

TEST_CASE("syndrome channels mirror the bit layout") {
    Code code = build_toric(3, 3);
    Rng rng(9, 4);
    PauliError e = sample_error(code, 0.2, rng);
    BitVec s = extract_syndrome(code, e);
    Tensor ch = to_channels(code, s);
    std::size_t v = code.volume();
    REQUIRE(ch.shape() == std::vector<std::size_t>{4, 3, 3, 3});
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < v; ++i) {
            std::size_t bit = c < 3 ? c * v + i : code.n_face() + i;
            CHECK(ch[c * v + i] == (s.get(bit) ? 1.0f : 0.0f));
        }

    Code c2 = build_toric(4, 2);
    BitVec s2(c2.syndrome_bits());
    s2.set(0, true);
    s2.set(c2.n_face() + 5, true);
    Tensor ch2 = to_channels(c2, s2);
    REQUIRE(n_channels(c2) == 2);
    REQUIRE(ch2.shape() == std::vector<std::size_t>{2, 4, 4});
    CHECK(ch2[0] == 1.0f);
    CHECK(ch2[16 + 5] == 1.0f);
}

TEST_CASE("dataset dump is deterministic and well formed") {
    Code code = build_toric(2, 3);
    std::ostringstream a, b;
    dump_dataset_csv(code, 0.05, 20, 123, 9, a);
    dump_dataset_csv(code, 0.05, 20, 123, 9, b);
    CHECK(a.str() == b.str());

    std::istringstream in(a.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "seed,stream,sample_idx,p,label_index,syndrome_hex");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        auto last = line.rfind(',');
        std::string hex = line.substr(last + 1);
        CHECK(hex.size() == (code.syndrome_bits() + 7) / 8 * 2);
        CHECK(line.substr(0, 6) == "123,9,");
    }
    CHECK(rows == 20);

    // hex packing is little-endian within bytes
    BitVec s(12);
    s.set(0, true);
    s.set(9, true);
    CHECK(syndrome_hex(s) == "0102");
}
