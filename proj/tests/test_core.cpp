#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace szbp;

TEST_SUITE("core") {
    TEST_CASE("mix64 matches the splitmix64 reference output") {
        CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
        CHECK(mix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
    }

    TEST_CASE("derived seeds are distinct and stable") {
        std::set<std::uint64_t> seen;
        for (std::uint64_t s = 0; s < 20; ++s)
            for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(s, i));
        CHECK(seen.size() == 1000);
        CHECK(derive_seed(3, 7) == derive_seed(3, 7));
    }

    TEST_CASE("rng streams are reproducible and in range") {
        Rng a(42), b(42), c(43);
        bool differs = false;
        for (int i = 0; i < 1000; ++i) {
            const double u = a.uniform();
            CHECK(u == b.uniform());
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            differs |= u != c.uniform();
        }
        CHECK(differs);
        for (int i = 0; i < 1000; ++i) CHECK(a.below(7) < 7);
        CHECK_THROWS(a.below(0));
    }

    TEST_CASE("property: normal variates have zero mean and unit variance") {
        Rng rng(1);
        double s = 0, ss = 0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double z = rng.normal();
            s += z, ss += z * z;
        }
        CHECK(std::abs(s / n) < 0.01);
        CHECK(std::abs(ss / n - 1.0) < 0.02);
    }

    TEST_CASE("property: shuffle is a permutation and below is roughly uniform") {
        Rng rng(2);
        std::vector<int> v(100);
        for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i;
        auto w = v;
        rng.shuffle(w);
        CHECK(w != v);
        std::sort(w.begin(), w.end());
        CHECK(w == v);
        std::vector<int> counts(5, 0);
        for (int i = 0; i < 50000; ++i) ++counts[rng.below(5)];
        for (int k : counts) CHECK(std::abs(k - 10000) < 500);
    }

    TEST_CASE("labels parse and print") {
        CHECK(parse_label("SZ") == Label::SZ);
        CHECK(parse_label("BP") == Label::BP);
        CHECK_FALSE(parse_label("").has_value());
        CHECK_THROWS_AS(parse_label("sz"), DataError);
        CHECK(to_string(Label::SZ) == "SZ");
        CHECK(to_int(Label::BP) == 0);
    }

    TEST_CASE("matrix row and column selection") {
        Matrix m(3, 4);
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 4; ++c) m(r, c) = 10.0 * r + c;
        const std::vector<std::size_t> rows{2, 0}, cols{3, 1};
        const auto sr = m.select_rows(rows);
        CHECK(sr.rows() == 2);
        CHECK(sr(0, 1) == 21.0);
        CHECK(sr(1, 3) == 3.0);
        const auto sc = m.select_cols(cols);
        CHECK(sc.cols() == 2);
        CHECK(sc(1, 0) == 13.0);
        CHECK(sc(2, 1) == 21.0);
        const std::vector<std::size_t> bad{3};
        CHECK_THROWS_AS(m.select_rows(bad), std::out_of_range);
    }

    TEST_CASE("make_icn enforces its invariants") {
        Matrix m(2, 5, 1.0);
        const auto icn = make_icn(m, 2.0);
        CHECK(icn.original_length == 5);
        CHECK(icn.channels() == 2);
        CHECK_THROWS_AS(make_icn(m, 0.0), ConfigError);
        CHECK_THROWS_AS(make_icn(Matrix(2, 1), 2.0), DataError);
        m(1, 3) = INFINITY;
        CHECK_THROWS_AS(make_icn(m, 2.0), DataError);
    }

    TEST_CASE("error types nest as documented") {
        CHECK_THROWS_AS(throw FeatureMismatchError("x"), DataError);
        CHECK_THROWS_AS(throw NumericError("x"), Error);
        CHECK_THROWS_AS(throw ConfigError("x"), std::runtime_error);
    }
}
