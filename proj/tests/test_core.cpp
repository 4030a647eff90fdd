#include <doctest.h>

#include "oracles.hpp"
#include "pdl/core.hpp"
#include "pdl/engine.hpp"

using namespace pdl;

namespace {
Configuration random_torus(int n, double p, Rng& rng) {
    std::vector<Strategy> cells(static_cast<std::size_t>(n * n));
    for (auto& s : cells) s = rng.unit() < p ? Strategy::Cooperate : Strategy::Defect;
    return Configuration(Topology::torus(n), cells);
}
}  // namespace

TEST_SUITE("core") {

TEST_CASE("cheat advantage is a reduced fraction above one") {
    CheatAdvantage T(14, 12);
    CHECK(T.num() == 7);
    CHECK(T.den() == 6);
    CHECK(T.main_regime());
    CHECK_FALSE(CheatAdvantage(4, 3).main_regime());
    CHECK_THROWS_AS(CheatAdvantage(1, 1), InvalidParams);
    CHECK_THROWS_AS(CheatAdvantage(-3, 2), InvalidParams);
    CHECK(CheatAdvantage::parse("1.25") == CheatAdvantage(5, 4));
    CHECK(CheatAdvantage::parse("7/6") == CheatAdvantage(7, 6));
    CHECK_THROWS(CheatAdvantage::parse("abc"));
}

TEST_CASE("payoff table") {
    CheatAdvantage T(7, 6);
    CHECK(payoff(Strategy::Defect, Strategy::Cooperate, T) == Rational(7, 6));
    CHECK(payoff(Strategy::Cooperate, Strategy::Cooperate, T) == 1);
    CHECK(payoff(Strategy::Cooperate, Strategy::Defect, T) == 0);
    CHECK(payoff(Strategy::Defect, Strategy::Defect, T) == 0);
}

TEST_CASE("rationals print reduced") {
    CHECK(to_string(Rational(2, 4)) == "1/2");
    CHECK(to_string(Rational(3)) == "3");
    CHECK(parse_rational("0.125") == Rational(1, 8));
    CHECK(parse_rational("-3/6") == Rational(-1, 2));
}

TEST_CASE("isolated defector outranks everything") {
    CheatAdvantage T(7, 6);
    Configuration c(Topology::torus(5), Strategy::Cooperate);
    c.set(12, Strategy::Defect);
    auto s = score(c, 12, T);
    CHECK(s.value(T) == Rational(4) * T.value());
    CHECK(compare(s, ScoreRank{Strategy::Cooperate, 4}, T) > 0);
    // its four neighbours are weak, the defector itself is not
    auto w = weak_set(c, T);
    CHECK(w == std::vector<int>{7, 11, 13, 17});
}

TEST_CASE("three cooperating neighbours lose to a full cooperator") {
    CheatAdvantage T(7, 6);
    CHECK(compare(ScoreRank{Strategy::Defect, 3}, ScoreRank{Strategy::Cooperate, 4}, T) < 0);
    CHECK(compare(ScoreRank{Strategy::Defect, 1}, ScoreRank{Strategy::Cooperate, 1}, T) > 0);
    // equal value at T=4/3: defector ranks first
    CheatAdvantage edge(4, 3);
    CHECK(compare(ScoreRank{Strategy::Defect, 3}, ScoreRank{Strategy::Cooperate, 4}, edge) > 0);
}

TEST_CASE("mixed tie at the top is reported outside the main regime") {
    // defector with 3 cooperating neighbours next to a cooperator with 4: both score 4 at T=4/3
    CheatAdvantage T(4, 3);
    Configuration c(Topology::torus(6), Strategy::Cooperate);
    c.set(c.topology().index(2, 2), Strategy::Defect);
    c.set(c.topology().index(1, 2), Strategy::Defect);   // the first defector now has 3 C neighbours
    int probe = c.topology().index(3, 2);                 // cooperator between the defector and a full cooperator
    CHECK_THROWS_AS(is_weak(c, probe, T), UnresolvedTie);
}

TEST_CASE("torus and cycle neighbourhoods wrap") {
    auto t = Topology::torus(4);
    std::array<int, 4> nb{};
    t.neighbors(0, nb);
    CHECK(nb == std::array<int, 4>{12, 4, 3, 1});
    CHECK(t.distance(0, 15) == 2);
    auto cy = Topology::cycle(10);
    cy.neighbors(0, nb);
    CHECK(nb[0] == 9);
    CHECK(nb[1] == 1);
    CHECK(cy.distance(1, 9) == 2);
    auto w = Topology::window(3, 3);
    w.neighbors(0, nb);
    CHECK(nb == std::array<int, 4>{-1, 3, -1, 1});
}

TEST_CASE("weak set matches the payoff-sum oracle") {
    CheatAdvantage T(7, 6);
    Rng rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        double p = 0.1 + 0.8 * rng.unit();
        auto c = random_torus(7, p, rng);
        CHECK(weak_set(c, T) == oracle::weak_set(c, T));
        for (int v = 0; v < c.size(); ++v) CHECK(score(c, v, T).value(T) == oracle::score_of(c, v, T));
    }
    for (int trial = 0; trial < 40; ++trial) {
        int n = 5 + static_cast<int>(rng.below(20));
        std::vector<Strategy> cells(static_cast<std::size_t>(n));
        for (auto& s : cells) s = rng.unit() < 0.5 ? Strategy::Cooperate : Strategy::Defect;
        Configuration c(Topology::cycle(n), cells);
        CHECK(weak_set(c, T) == oracle::weak_set(c, T));
    }
}

TEST_CASE("weak sets do not depend on T inside (1, 4/3)") {
    const CheatAdvantage Ts[] = {CheatAdvantage(21, 20), CheatAdvantage(7, 6), CheatAdvantage(13, 10)};
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        auto c = random_torus(9, 0.1 + 0.8 * rng.unit(), rng);
        auto w = weak_set(c, Ts[1]);
        CHECK(weak_set(c, Ts[0]) == w);
        CHECK(weak_set(c, Ts[2]) == w);
    }
}

TEST_CASE("defector with k outranks cooperator with m exactly when k >= m") {
    for (auto T : {CheatAdvantage(21, 20), CheatAdvantage(7, 6), CheatAdvantage(13, 10)})
        for (int k = 0; k <= 4; ++k)
            for (int m = 0; m <= 4; ++m) {
                bool outranks = compare(ScoreRank{Strategy::Defect, k}, ScoreRank{Strategy::Cooperate, m}, T) > 0;
                CHECK(outranks == (k >= m));
                // and by the rationals directly
                CHECK((Rational(k) * T.value() >= Rational(m)) == (k >= m));
            }
}

TEST_CASE("window exterior reads as field") {
    CheatAdvantage T(7, 6);
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        Strategy field = trial % 2 ? Strategy::Cooperate : Strategy::Defect;
        std::vector<Strategy> cells(36);
        for (auto& s : cells) s = rng.unit() < 0.5 ? Strategy::Cooperate : Strategy::Defect;
        Configuration c(Topology::window(6, 6), cells, field);
        CHECK(weak_set(c, T) == oracle::weak_set(c, T));
    }
}

TEST_CASE("density is exact") {
    Configuration c(Topology::torus(4), Strategy::Defect);
    c.set(0, Strategy::Cooperate);
    c.set(5, Strategy::Cooperate);
    CHECK(density(c) == Rational(1, 8));
    CHECK(c.cooperators() == 2);
}

TEST_CASE("fixture round trip") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        Configuration c;
        switch (trial % 3) {
        case 0: c = random_torus(3 + static_cast<int>(rng.below(6)), 0.5, rng); break;
        case 1: {
            std::vector<Strategy> cells(9);
            for (auto& s : cells) s = rng.unit() < 0.5 ? Strategy::Cooperate : Strategy::Defect;
            c = Configuration(Topology::cycle(9), cells);
            break;
        }
        default: {
            std::vector<Strategy> cells(12);
            for (auto& s : cells) s = rng.unit() < 0.5 ? Strategy::Cooperate : Strategy::Defect;
            c = Configuration(Topology::window(3, 4), cells, rng.unit() < 0.5 ? Strategy::Cooperate : Strategy::Defect);
        }
        }
        auto text = to_fixture(c);
        auto back = parse_fixture(text);
        CHECK(back == c);
        CHECK(to_fixture(back) == text);
    }
}

TEST_CASE("fixture errors") {
    CHECK_THROWS_AS(parse_fixture(""), ParseError);
    CHECK_THROWS_AS(parse_fixture("topology=torus field=-\nCC\nC\n"), ParseError);
    CHECK_THROWS_AS(parse_fixture("topology=torus field=-\nCCC\nCCC\n"), ParseError);
    CHECK_THROWS_AS(parse_fixture("topology=window field=-\nCD\n"), ParseError);
    CHECK_THROWS_AS(parse_fixture("topology=hex field=-\nCD\n"), ParseError);
    CHECK_THROWS_AS(parse_fixture("topology=cycle field=-\nCDX\n"), ParseError);
    CHECK_NOTHROW(parse_fixture("topology=cycle field=-\nCDC\n"));
}

}  // TEST_SUITE
