#include "doctest.h"

#include "fermidark/angular.hpp"
#include "fermidark/halfint.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace fermidark;

namespace {
HalfInt ht(int twice) { return HalfInt::from_twice(twice); }
HalfInt hw(int whole) { return HalfInt::whole(whole); }
}  // namespace

TEST_CASE("half-integer arithmetic and parsing") {
  CHECK(HalfInt::parse("9/2").twice() == 9);
  CHECK(HalfInt::parse("-3/2").twice() == -3);
  CHECK(HalfInt::parse("2").twice() == 4);
  CHECK(HalfInt::parse("+1/2").twice() == 1);
  CHECK(ht(7).str() == "7/2");
  CHECK(hw(3).str() == "3");
  CHECK(ht(-1).str() == "-1/2");
  CHECK((ht(3) + ht(1)).twice() == 4);
  CHECK((ht(3) - hw(1)).twice() == 1);
  CHECK((-ht(5)).twice() == -5);
  CHECK(ht(-5).abs().twice() == 5);

  // Round trip over a range.
  for (int t = -9; t <= 9; ++t) CHECK(HalfInt::parse(ht(t).str()) == ht(t));

  CHECK_THROWS_AS((void)HalfInt::parse("1/3"), std::invalid_argument);
  CHECK_THROWS_AS((void)HalfInt::parse("x"), std::invalid_argument);
  CHECK_THROWS_AS((void)HalfInt::parse(""), std::invalid_argument);

  CHECK(HalfInt::valid_projection(ht(3), ht(-3)));
  CHECK(HalfInt::valid_projection(ht(3), ht(1)));
  CHECK_FALSE(HalfInt::valid_projection(ht(3), hw(1)));   // parity mismatch
  CHECK_FALSE(HalfInt::valid_projection(ht(3), ht(5)));   // out of range
}

TEST_CASE("Clebsch-Gordan pinned table values (Condon-Shortley)") {
  const double is2 = 1.0 / std::sqrt(2.0);
  const double is3 = 1.0 / std::sqrt(3.0);

  // Two spin-1/2: singlet and triplet.
  CHECK(clebsch_gordan(ht(1), ht(1), ht(1), ht(-1), hw(0), hw(0)) ==
        doctest::Approx(is2).epsilon(1e-14));
  CHECK(clebsch_gordan(ht(1), ht(-1), ht(1), ht(1), hw(0), hw(0)) ==
        doctest::Approx(-is2).epsilon(1e-14));
  CHECK(clebsch_gordan(ht(1), ht(1), ht(1), ht(-1), hw(1), hw(0)) ==
        doctest::Approx(is2).epsilon(1e-14));
  CHECK(clebsch_gordan(ht(1), ht(1), ht(1), ht(1), hw(1), hw(1)) ==
        doctest::Approx(1.0).epsilon(1e-14));

  // 1 x 1 -> 0: <1 m; 1 -m|00> = (-1)^(1-m)/sqrt(3).
  CHECK(clebsch_gordan(hw(1), hw(1), hw(1), hw(-1), hw(0), hw(0)) ==
        doctest::Approx(is3).epsilon(1e-14));
  CHECK(clebsch_gordan(hw(1), hw(0), hw(1), hw(0), hw(0), hw(0)) ==
        doctest::Approx(-is3).epsilon(1e-14));

  // <j m; 1 0 | j m> = m / sqrt(j(j+1)).
  for (int tj : {1, 3, 9}) {
    const double j = tj / 2.0;
    for (int tm = -tj; tm <= tj; tm += 2) {
      const double m = tm / 2.0;
      CHECK(clebsch_gordan(ht(tj), ht(tm), hw(1), hw(0), ht(tj), ht(tm)) ==
            doctest::Approx(m / std::sqrt(j * (j + 1.0))).epsilon(1e-13));
    }
  }

  // Highest-weight positivity: <j1 j1; j2 (J-j1) | J J> > 0.
  for (int tj1 : {1, 2, 3, 5}) {
    for (int tj2 : {1, 2}) {
      for (int tJ = std::abs(tj1 - tj2); tJ <= tj1 + tj2; tJ += 2) {
        if (tJ < std::abs(tj1 - tj2)) continue;
        const double c = clebsch_gordan(ht(tj1), ht(tj1), ht(tj2),
                                        ht(tJ - tj1), ht(tJ), ht(tJ));
        if (std::abs(tJ - tj1) <= tj2)  // projection in range
          CHECK(c > 0.0);
      }
    }
  }

  // Selection-rule zeros (not errors).
  CHECK(clebsch_gordan(ht(1), ht(1), ht(1), ht(1), hw(0), hw(0)) == 0.0);
  CHECK(clebsch_gordan(ht(1), ht(1), ht(1), ht(-1), hw(3), hw(0)) == 0.0);
  CHECK(clebsch_gordan(ht(1), ht(1), ht(1), ht(1), hw(1), hw(0)) == 0.0);

  // Malformed (j, m) pairs throw.
  CHECK_THROWS_AS((void)clebsch_gordan(ht(1), hw(0), ht(1), ht(1), hw(1), hw(0)),
                  std::domain_error);
  CHECK_THROWS_AS((void)clebsch_gordan(ht(-1), ht(1), ht(1), ht(1), hw(1), hw(1)),
                  std::domain_error);
}

TEST_CASE("Clebsch-Gordan orthogonality and completeness") {
  struct Pair {
    HalfInt j1, j2;
  };
  const std::vector<Pair> pairs = {{ht(1), ht(1)},
                                   {hw(1), ht(1)},
                                   {ht(3), hw(1)},
                                   {ht(9), hw(1)}};
  for (const auto& [j1, j2] : pairs) {
    // Orthogonality in (J, M): sum over m1, m2 of products = delta.
    for (int tJ = std::abs(j1.twice() - j2.twice());
         tJ <= j1.twice() + j2.twice(); tJ += 2) {
      for (int tJp = std::abs(j1.twice() - j2.twice());
           tJp <= j1.twice() + j2.twice(); tJp += 2) {
        for (int tM = -tJ; tM <= tJ; tM += 2) {
          if (std::abs(tM) > tJp) continue;
          double s = 0;
          for (int tm1 = -j1.twice(); tm1 <= j1.twice(); tm1 += 2) {
            const int tm2 = tM - tm1;
            if (std::abs(tm2) > j2.twice()) continue;
            s += clebsch_gordan(j1, ht(tm1), j2, ht(tm2), ht(tJ), ht(tM)) *
                 clebsch_gordan(j1, ht(tm1), j2, ht(tm2), ht(tJp), ht(tM));
          }
          const double want = (tJ == tJp) ? 1.0 : 0.0;
          CHECK(std::abs(s - want) < 1e-12);
        }
      }
    }
    // Completeness in (m1, m2): sum over J of products = delta.
    for (int tm1 = -j1.twice(); tm1 <= j1.twice(); tm1 += 2) {
      for (int tm2 = -j2.twice(); tm2 <= j2.twice(); tm2 += 2) {
        for (int tm1p = -j1.twice(); tm1p <= j1.twice(); tm1p += 2) {
          const int tm2p = tm1 + tm2 - tm1p;  // same M only
          if (std::abs(tm2p) > j2.twice()) continue;
          double s = 0;
          const int tM = tm1 + tm2;
          for (int tJ = std::abs(j1.twice() - j2.twice());
               tJ <= j1.twice() + j2.twice(); tJ += 2) {
            if (std::abs(tM) > tJ) continue;
            s += clebsch_gordan(j1, ht(tm1), j2, ht(tm2), ht(tJ), ht(tM)) *
                 clebsch_gordan(j1, ht(tm1p), j2, ht(tm2p), ht(tJ), ht(tM));
          }
          const double want = (tm1 == tm1p && tm2 == tm2p) ? 1.0 : 0.0;
          CHECK(std::abs(s - want) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("dipole transition coefficients") {
  const auto sq = LevelStructure::make(ht(1), ht(1));

  // C^0_m = <1/2 m; 1 0 | 1/2 m> = ±1/sqrt(3).
  CHECK(cq(sq, 0, ht(1)) == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(cq(sq, 0, ht(-1)) == doctest::Approx(-1.0 / std::sqrt(3.0)));

  // Identity with the generic coefficient for several structures.
  for (const auto& ls : {LevelStructure::make(ht(1), ht(1)),
                         LevelStructure::make(ht(3), ht(5)),
                         LevelStructure::make(ht(9), ht(7))}) {
    for (int q = -1; q <= 1; ++q) {
      for (int tm = -ls.f_g.twice(); tm <= ls.f_g.twice(); tm += 2) {
        const HalfInt m = ht(tm);
        CHECK(cq(ls, q, m) ==
              doctest::Approx(clebsch_gordan(ls.f_g, m, hw(1), hw(q), ls.f_e,
                                             m + hw(q)))
                  .epsilon(1e-14));
      }
    }
    // Branching: every excited sublevel decays with unit total weight.
    for (int tme = -ls.f_e.twice(); tme <= ls.f_e.twice(); tme += 2) {
      double total = 0;
      for (int q = -1; q <= 1; ++q) {
        const int tmg = tme - 2 * q;
        if (std::abs(tmg) > ls.f_g.twice()) continue;
        const double c = cq(ls, q, ht(tmg));
        total += c * c;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  CHECK(cq(sq, 1, ht(1)) == 0.0);  // m + q beyond f_e
  CHECK_THROWS_AS((void)cq(sq, 2, ht(1)), std::domain_error);
  CHECK_THROWS_AS((void)cq(sq, 0, ht(3)), std::domain_error);
}

TEST_CASE("level structure classification") {
  CHECK(LevelStructure::make(ht(3), ht(1)).cls == StructureClass::MultiLambda);
  CHECK(LevelStructure::make(ht(3), ht(3)).cls == StructureClass::MultiSquare);
  CHECK(LevelStructure::make(ht(3), ht(5)).cls == StructureClass::MultiV);
  CHECK(LevelStructure::make(ht(9), ht(9)).levels_per_site() == 20);
  CHECK_THROWS_AS((void)LevelStructure::make(ht(1), ht(5)), std::domain_error);
  CHECK_THROWS_AS((void)LevelStructure::make(ht(5), ht(1)), std::domain_error);
  CHECK_THROWS_AS((void)LevelStructure::make(ht(-1), ht(1)), std::domain_error);
}

TEST_CASE("identical-fermion multiplet decomposition") {
  auto ms = identical_fermion_multiplets(ht(3), 2);
  REQUIRE(ms.entries.size() == 2);
  CHECK(ms.entries[0].first == hw(0));
  CHECK(ms.entries[0].second == 1);
  CHECK(ms.entries[1].first == hw(2));
  CHECK(ms.entries[1].second == 1);

  ms = identical_fermion_multiplets(ht(5), 2);
  REQUIRE(ms.entries.size() == 3);
  CHECK(ms.multiplicity_of(hw(0)) == 1);
  CHECK(ms.multiplicity_of(hw(2)) == 1);
  CHECK(ms.multiplicity_of(hw(4)) == 1);
  CHECK(ms.multiplicity_of(hw(1)) == 0);

  ms = identical_fermion_multiplets(ht(5), 3);
  CHECK(ms.multiplicity_of(ht(3)) == 1);
  CHECK(ms.multiplicity_of(ht(5)) == 1);
  CHECK(ms.multiplicity_of(ht(9)) == 1);
  CHECK(ms.total_dimension() == 20);  // C(6,3)

  ms = identical_fermion_multiplets(ht(9), 2);
  REQUIRE(ms.entries.size() == 5);
  for (int F : {0, 2, 4, 6, 8}) CHECK(ms.multiplicity_of(hw(F)) == 1);

  // Trivial sectors.
  CHECK(identical_fermion_multiplets(ht(3), 0).multiplicity_of(hw(0)) == 1);
  CHECK(identical_fermion_multiplets(ht(3), 1).multiplicity_of(ht(3)) == 1);
  CHECK(identical_fermion_multiplets(ht(3), 4).multiplicity_of(hw(0)) == 1);
  CHECK(identical_fermion_multiplets(ht(3), 4).total_dimension() == 1);

  CHECK_THROWS_AS((void)identical_fermion_multiplets(ht(1), 3),
                  std::domain_error);
  CHECK_THROWS_AS((void)identical_fermion_multiplets(ht(3), -1),
                  std::domain_error);
}

TEST_CASE("multiplet dimension bookkeeping across f and n") {
  // Total dimension of the Pauli-allowed decomposition equals C(2f+1, n).
  auto binom = [](int a, int b) {
    long r = 1;
    for (int k = 0; k < b; ++k) r = r * (a - k) / (k + 1);
    return r;
  };
  for (int tf = 1; tf <= 9; tf += 2) {
    const int levels = tf + 1;
    for (int n = 0; n <= std::min(4, levels); ++n) {
      CHECK(identical_fermion_multiplets(ht(tf), n).total_dimension() ==
            binom(levels, n));
    }
  }
}

TEST_CASE("coupling a multiplet set to an extra spin") {
  auto a = identical_fermion_multiplets(ht(3), 2);  // {0, 2}
  auto c = couple_sectors(a, ht(5));
  // 0 x 5/2 -> 5/2; 2 x 5/2 -> 1/2..9/2.
  CHECK(c.multiplicity_of(ht(5)) == 2);
  CHECK(c.multiplicity_of(ht(1)) == 1);
  CHECK(c.multiplicity_of(ht(9)) == 1);
  CHECK(c.total_dimension() == a.total_dimension() * 6);
}
