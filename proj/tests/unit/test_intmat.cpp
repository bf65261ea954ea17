#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <vector>

#include "oracles.hpp"
#include "specpos/intmat.hpp"

using namespace specpos;
using oracles::det_rec;
using oracles::elementary_divisors_via_minors;

namespace {

void check_snf(const IMat& a) {
    std::size_t m = a.size(), n = m ? a[0].size() : 0;
    SnfResult s = smith_normal_form_int(a);
    REQUIRE(imat_mul(imat_mul(s.u, a), s.v) == s.d);
    Int du = det_rec(s.u), dv = det_rec(s.v);
    REQUIRE((du == 1 || du == -1));
    REQUIRE((dv == 1 || dv == -1));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) REQUIRE(s.d[i][j] == 0);
    for (std::size_t i = 0; i + 1 < s.diag.size(); ++i) {
        REQUIRE(s.diag[i] >= 0);
        if (s.diag[i] == 0) REQUIRE(s.diag[i + 1] == 0);
        else REQUIRE(s.diag[i + 1] % s.diag[i] == 0);
    }
    REQUIRE(s.diag == elementary_divisors_via_minors(a));
}

} // namespace

TEST_CASE("smith normal form on pinned matrices") {
    check_snf({{4, 0}, {0, 6}});
    SnfResult s = smith_normal_form_int({{4, 0}, {0, 6}});
    CHECK(s.diag == std::vector<Int>{2, 12});

    check_snf({{2, 4, 4}, {-6, 6, 12}, {10, 4, 16}});
    check_snf({{1, 2, 3}, {4, 5, 6}});
    check_snf({{0, 0}, {0, 0}});
    check_snf({{5}});
    check_snf(IMat{});
}

TEST_CASE("smith normal form on deterministic random matrices") {
    std::srand(12345);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t m = 1 + std::rand() % 4, n = 1 + std::rand() % 4;
        IMat a(m, std::vector<Int>(n));
        for (auto& row : a)
            for (auto& x : row) x = std::rand() % 21 - 10;
        check_snf(a);
    }
}

TEST_CASE("integer left kernel is the full kernel lattice") {
    IMat a = {{2, 0}, {0, 3}, {2, 3}}; // row0 + row1 - row2 = 0
    IMat ker = int_left_kernel(a);
    REQUIRE(ker.size() == 1);
    for (const auto& row : ker) {
        std::vector<Int> prod = ivec_mat(row, a);
        for (const auto& x : prod) REQUIRE(x == 0);
    }
    // every small integral kernel vector must be an integer combination
    for (long c = -5; c <= 5; ++c) {
        std::vector<Int> v = {c, c, -c};
        std::vector<Int> comb;
        REQUIRE(int_solve_left(ker, v, comb));
    }
}

TEST_CASE("integer linear solve") {
    IMat a = {{2, 0}, {0, 3}};
    std::vector<Int> x;
    REQUIRE(int_solve_left(a, {4, 9}, x));
    CHECK(ivec_mat(x, a) == std::vector<Int>{4, 9});
    CHECK_FALSE(int_solve_left(a, {1, 0}, x));
    CHECK_FALSE(int_solve_left(a, {0, 1}, x));
}

TEST_CASE("lattice intersection against brute force membership") {
    IMat g1 = {{2, 0}, {0, 1}};
    IMat g2 = {{1, 1}, {0, 3}};
    IMat inter = lattice_intersection(g1, g2);
    auto member = [](const IMat& g, const std::vector<Int>& v) {
        std::vector<Int> c;
        return int_solve_left(g, v, c);
    };
    for (long x = -6; x <= 6; ++x)
        for (long y = -6; y <= 6; ++y) {
            std::vector<Int> v = {x, y};
            bool in_both = member(g1, v) && member(g2, v);
            CHECK(member(inter, v) == in_both);
        }
}

TEST_CASE("rational rref, kernel, solve, inverse") {
    RMat a = rmat_from_int({{1, 2}, {2, 4}, {0, 1}});
    CHECK(rmat_rank(a) == 2);

    RMat ker = rmat_left_kernel(a);
    REQUIRE(ker.size() == 1);
    RMat prod = rmat_mul(ker, a);
    for (const auto& row : prod)
        for (const auto& x : row) CHECK(x.is_zero());

    std::vector<Rat> x;
    REQUIRE(rmat_solve_left(a, {Rat(1), Rat(3)}, x));
    RMat xa = rmat_mul({x}, a);
    CHECK(xa[0][0] == Rat(1));
    CHECK(xa[0][1] == Rat(3));

    RMat b = rmat_from_int({{2, 1}, {1, 1}});
    RMat inv;
    REQUIRE(rmat_inverse(b, inv));
    RMat id = rmat_mul(b, inv);
    CHECK(id == rmat_identity(2));

    RMat sing = rmat_from_int({{1, 2}, {2, 4}});
    CHECK_FALSE(rmat_inverse(sing, inv));
}

TEST_CASE("solving with denominators kept away from fixed primes") {
    IMat a = {{5, 0}, {0, 12}};
    std::vector<Rat> x;

    REQUIRE(semilocal_solve_left(a, {1, 12}, {2, 3}, x));
    CHECK(x[0] == Rat(1, 5));
    CHECK(x[1] == Rat(1));

    // needs 1/2, which a {2,3}-avoiding denominator cannot supply
    CHECK_FALSE(semilocal_solve_left(a, {1, 6}, {2, 3}, x));
    REQUIRE(semilocal_solve_left(a, {1, 6}, {5}, x));
    CHECK(x[1] == Rat(1, 2));

    // inconsistent over Q: no x with (2x, 4x) = (2, 2)
    CHECK_FALSE(semilocal_solve_left({{2, 4}}, {2, 2}, {2}, x));

    // non-diagonal system, answer verified by substitution
    IMat b = {{2, 1, 0}, {1, 0, 3}, {0, 0, 2}};
    std::vector<Int> rhs{7, 2, 5};
    REQUIRE(semilocal_solve_left(b, rhs, {3}, x));
    for (std::size_t i = 0; i < 3; ++i) CHECK(valuation(x[i].den, 3) == 0);
    for (std::size_t j = 0; j < 3; ++j) {
        Rat acc(0);
        for (std::size_t i = 0; i < 3; ++i) acc = acc + x[i] * Rat(b[i][j]);
        CHECK(acc == Rat(rhs[j]));
    }

    // degenerate shapes
    REQUIRE(semilocal_solve_left({}, {}, {2}, x));
    CHECK(x.empty());
    CHECK_FALSE(semilocal_solve_left({}, {1}, {2}, x));
    REQUIRE(semilocal_solve_left({{}, {}}, {}, {2}, x));
    CHECK(x == std::vector<Rat>{Rat(0), Rat(0)});
    CHECK_THROWS_AS(semilocal_solve_left(a, {1}, {2}, x), input_error);
}
