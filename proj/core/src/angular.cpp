#include "fermidark/angular.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fermidark {

namespace mp = boost::multiprecision;
using BigInt = mp::cpp_int;
using BigRational = mp::cpp_rational;
using BigFloat = mp::cpp_bin_float_100;

std::string HalfInt::str() const {
  if (twice_ % 2 == 0) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

HalfInt HalfInt::parse(const std::string& text) {
  std::string s = text;
  if (!s.empty() && s.front() == '+') s.erase(s.begin());
  if (s.empty()) throw std::invalid_argument("empty half-integer literal");
  std::size_t slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      std::size_t used = 0;
      int whole = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(text);
      return HalfInt::whole(whole);
    }
    std::size_t used = 0;
    int num = std::stoi(s.substr(0, slash), &used);
    if (used != slash) throw std::invalid_argument(text);
    const std::string den = s.substr(slash + 1);
    if (den != "2") throw std::invalid_argument(text);
    return HalfInt::from_twice(num);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed half-integer literal: '" + text + "'");
  }
}

const char* to_string(StructureClass c) {
  switch (c) {
    case StructureClass::MultiLambda: return "multi-Lambda";
    case StructureClass::MultiSquare: return "multi-square";
    case StructureClass::MultiV: return "multi-V";
  }
  return "?";
}

LevelStructure LevelStructure::make(HalfInt f_g, HalfInt f_e) {
  if (f_g.is_negative() || f_e.is_negative())
    throw std::domain_error("level spins must be non-negative");
  const int diff = f_e.twice() - f_g.twice();
  StructureClass cls;
  if (diff == -2) cls = StructureClass::MultiLambda;
  else if (diff == 0) cls = StructureClass::MultiSquare;
  else if (diff == 2) cls = StructureClass::MultiV;
  else
    throw std::domain_error("level structure requires |f_e - f_g| <= 1, got f_g=" +
                            f_g.str() + ", f_e=" + f_e.str());
  return LevelStructure{f_g, f_e, cls};
}

namespace {

// Factorial of a half-integer-doubled argument t (t must be even and >= 0);
// callers pass sums of twice-values that are guaranteed even.
BigInt factorial_twice(int t) {
  if (t < 0 || t % 2 != 0) throw std::logic_error("factorial of non-integer");
  BigInt r = 1;
  for (int k = 2; k <= t / 2; ++k) r *= k;
  return r;
}

double sqrt_of_rational(const BigRational& r, int sign) {
  if (r == 0) return 0.0;
  const BigFloat num(mp::numerator(r));
  const BigFloat den(mp::denominator(r));
  const BigFloat value = sqrt(num / den);
  return sign * value.convert_to<double>();
}

// Uncached Racah-sum evaluation; all arguments are twice-values.
double cg_racah(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  // Triangle and projection screening (returns exact zero, never throws).
  if (tM != tm1 + tm2) return 0.0;
  if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2) return 0.0;
  if ((tj1 + tj2 + tJ) % 2 != 0) return 0.0;  // spins must couple to an integer chain
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ) return 0.0;

  // Racah sum S = sum_k (-1)^k / (k! (j1+j2-J-k)! (j1-m1-k)! (j2+m2-k)!
  //                              (J-j2+m1+k)! (J-j1-m2+k)!)
  const int t_a = tj1 + tj2 - tJ;   // 2(j1+j2-J)
  const int t_b = tj1 - tm1;        // 2(j1-m1)
  const int t_c = tj2 + tm2;        // 2(j2+m2)
  const int t_d = tJ - tj2 + tm1;   // 2(J-j2+m1), may be negative
  const int t_e = tJ - tj1 - tm2;   // 2(J-j1-m2), may be negative

  const int k_min = std::max({0, -t_d / 2, -t_e / 2});
  const int k_max = std::min({t_a / 2, t_b / 2, t_c / 2});
  if (k_min > k_max) return 0.0;

  BigRational sum = 0;
  for (int k = k_min; k <= k_max; ++k) {
    BigInt den = factorial_twice(2 * k) * factorial_twice(t_a - 2 * k) *
                 factorial_twice(t_b - 2 * k) * factorial_twice(t_c - 2 * k) *
                 factorial_twice(t_d + 2 * k) * factorial_twice(t_e + 2 * k);
    BigRational term(1, den);
    if (k % 2 != 0) term = -term;
    sum += term;
  }
  if (sum == 0) return 0.0;

  // Prefactor N (under the square root):
  //   (2J+1) * (j1+j2-J)! (j1-j2+J)! (-j1+j2+J)! / (j1+j2+J+1)!
  //   * (j1+m1)! (j1-m1)! (j2+m2)! (j2-m2)! (J+M)! (J-M)!
  BigRational pref(tJ + 1, 1);  // 2J+1
  pref *= BigRational(factorial_twice(tj1 + tj2 - tJ));
  pref *= BigRational(factorial_twice(tj1 - tj2 + tJ));
  pref *= BigRational(factorial_twice(-tj1 + tj2 + tJ));
  pref /= BigRational(factorial_twice(tj1 + tj2 + tJ + 2));
  pref *= BigRational(factorial_twice(tj1 + tm1));
  pref *= BigRational(factorial_twice(tj1 - tm1));
  pref *= BigRational(factorial_twice(tj2 + tm2));
  pref *= BigRational(factorial_twice(tj2 - tm2));
  pref *= BigRational(factorial_twice(tJ + tM));
  pref *= BigRational(factorial_twice(tJ - tM));

  const int sign = sum > 0 ? 1 : -1;
  return sqrt_of_rational(pref * sum * sum, sign);
}

struct CgKey {
  std::array<int, 6> v;
  friend auto operator<=>(const CgKey&, const CgKey&) = default;
};

double cg_cached(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  static std::map<CgKey, double> cache;
  static std::mutex mutex;
  const CgKey key{{tj1, tm1, tj2, tm2, tJ, tM}};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const double value = cg_racah(tj1, tm1, tj2, tm2, tJ, tM);
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, value);
  return value;
}

void require_spin_pair(HalfInt j, HalfInt m, const char* what) {
  if (j.is_negative())
    throw std::domain_error(std::string(what) + ": negative spin magnitude");
  if ((j.twice() - m.twice()) % 2 != 0)
    throw std::domain_error(std::string(what) + ": projection parity mismatch (j=" +
                            j.str() + ", m=" + m.str() + ")");
}

}  // namespace

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2,
                      HalfInt J, HalfInt M) {
  require_spin_pair(j1, m1, "clebsch_gordan j1");
  require_spin_pair(j2, m2, "clebsch_gordan j2");
  require_spin_pair(J, M, "clebsch_gordan J");
  return cg_cached(j1.twice(), m1.twice(), j2.twice(), m2.twice(),
                   J.twice(), M.twice());
}

double cq(const LevelStructure& ls, int q, HalfInt m) {
  if (q < -1 || q > 1) throw std::domain_error("cq: q must be -1, 0, or +1");
  if (m.abs() > ls.f_g) throw std::domain_error("cq: |m| exceeds f_g");
  const HalfInt me = m + HalfInt::whole(q);
  if (me.abs() > ls.f_e) return 0.0;
  return clebsch_gordan(ls.f_g, m, HalfInt::whole(1), HalfInt::whole(q), ls.f_e, me);
}

long MultipletSet::total_dimension() const {
  long dim = 0;
  for (const auto& [F, mult] : entries) dim += static_cast<long>(F.twice() + 1) * mult;
  return dim;
}

int MultipletSet::multiplicity_of(HalfInt F) const {
  for (const auto& [f, mult] : entries)
    if (f == F) return mult;
  return 0;
}

MultipletSet identical_fermion_multiplets(HalfInt f, int n) {
  const int levels = f.twice() + 1;
  if (n < 0) throw std::domain_error("identical_fermion_multiplets: n < 0");
  if (n > levels)
    throw std::domain_error("identical_fermion_multiplets: n = " + std::to_string(n) +
                            " fermions cannot occupy " + std::to_string(levels) +
                            " sublevels");
  MultipletSet out;
  if (n == 0 || n == levels) {
    out.entries.emplace_back(HalfInt::whole(0), 1);
    return out;
  }

  // Histogram the total projection 2M over all C(levels, n) occupation
  // patterns, then peel multiplets from the top: a multiplet with total
  // momentum F contributes one state at every |M| <= F.
  std::map<int, long> histogram;  // 2M -> count
  std::vector<int> pattern(n);
  std::iota(pattern.begin(), pattern.end(), 0);
  while (true) {
    int tM = 0;
    for (int idx : pattern) tM += -f.twice() + 2 * idx;
    ++histogram[tM];
    // next combination
    int i = n - 1;
    while (i >= 0 && pattern[i] == levels - n + i) --i;
    if (i < 0) break;
    ++pattern[i];
    for (int k = i + 1; k < n; ++k) pattern[k] = pattern[k - 1] + 1;
  }

  std::vector<std::pair<HalfInt, int>> found;
  for (auto it = histogram.rbegin(); it != histogram.rend(); ++it) {
    const int tM = it->first;
    if (tM < 0) break;  // profile is symmetric; everything was peeled at tM >= 0
    const long here = it->second;
    const auto above = histogram.find(tM + 2);
    const long mult = here - (above == histogram.end() ? 0 : above->second);
    if (mult > 0) found.emplace_back(HalfInt::from_twice(tM), static_cast<int>(mult));
  }
  std::sort(found.begin(), found.end());
  out.entries = std::move(found);
  return out;
}

MultipletSet couple_sectors(const MultipletSet& a, HalfInt f2) {
  std::map<int, long> result;  // 2F -> multiplicity
  for (const auto& [F1, mult] : a.entries) {
    const int lo = std::abs(F1.twice() - f2.twice());
    const int hi = F1.twice() + f2.twice();
    for (int tF = lo; tF <= hi; tF += 2) result[tF] += mult;
  }
  MultipletSet out;
  for (const auto& [tF, mult] : result)
    out.entries.emplace_back(HalfInt::from_twice(tF), static_cast<int>(mult));
  return out;
}

}  // namespace fermidark
