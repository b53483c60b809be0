#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "refspect/diversity.hpp"
#include "refspect/error.hpp"

using namespace refspect;

namespace {

struct Instance {
  JournalMap map;
  JournalFrequencies freqs;
  std::vector<std::string> names;
  std::vector<oracle::Point> all;
  std::vector<oracle::Point> used;
  std::vector<double> p;
};

Instance RandomInstance(Gen& g, bool grid = false) {
  Instance in;
  const int n = g.Int(2, 40);
  for (int i = 0; i < n; ++i) {
    const double x = grid ? g.Int(-50, 50) : g.Real(-10, 10);
    const double y = grid ? g.Int(-50, 50) : g.Real(-10, 10);
    const std::string name = "J" + std::to_string(i);
    in.map.Add(name, {x, y, {}});
    in.names.push_back(name);
    in.all.push_back({x, y});
  }
  double total = 0;
  std::vector<std::pair<int, double>> picks;
  for (int i = 0; i < n; ++i) {
    if (g.Coin(0.6)) {
      picks.emplace_back(i, g.Real(0.01, 1.0));
      total += picks.back().second;
    }
  }
  if (picks.empty()) {
    picks.emplace_back(0, 1.0);
    total = 1.0;
  }
  for (auto [i, w] : picks) {
    in.freqs.p[in.names[static_cast<std::size_t>(i)]] = w / total;
    in.used.push_back(in.all[static_cast<std::size_t>(i)]);
    in.p.push_back(w / total);
  }
  return in;
}

JournalMap Transform(const JournalMap& m, auto&& f) {
  JournalMap out;
  for (const auto& [k, pt] : m.entries()) {
    auto [x, y] = f(pt.x, pt.y);
    out.Add(k, {x, y, pt.profile});
  }
  return out;
}

}  // namespace

TEST_CASE("single journal has zero diversity") {
  JournalMap m;
  m.Add("A", {0, 0, {}});
  m.Add("B", {1, 1, {}});
  JournalFrequencies f;
  f.p["A"] = 1.0;
  CHECK(RaoStirling(f, m, DistanceMode::kMapDistance) == 0.0);
}

TEST_CASE("two journals at half each") {
  JournalMap m;
  m.Add("A", {0, 0, {}});
  m.Add("B", {3, 4, {}});
  JournalFrequencies f;
  f.p = {{"A", 0.5}, {"B", 0.5}};
  CHECK(RaoStirling(f, m, DistanceMode::kMapDistance) == 0.5);
  CHECK(RaoStirlingSerial(f, m, DistanceMode::kMapDistance) == 0.5);
}

TEST_CASE("errors") {
  JournalMap m;
  m.Add("A", {1, 1, {}});
  m.Add("B", {1, 1, {}});
  JournalFrequencies f;
  f.p = {{"A", 0.5}, {"B", 0.5}};
  CHECK_THROWS_AS(RaoStirling(f, m, DistanceMode::kMapDistance), Error);
  f.p = {{"A", 0.5}, {"C", 0.5}};
  try {
    RaoStirling(f, m, DistanceMode::kMapDistance);
    FAIL("expected missing journal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingJournal);
  }
  f.p = {{"A", 0.5}, {"B", 0.5}};
  try {
    RaoStirling(f, m, DistanceMode::kOneMinusCosine);
    FAIL("expected missing profiles");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("Rao-Stirling equals the naive double sum") {
  Gen g(2024);
  for (int t = 0; t < 500; ++t) {
    const auto in = RandomInstance(g);
    const double full = oracle::RaoStirling(in.p, in.used, in.all);
    CHECK(std::abs(RaoStirling(in.freqs, in.map, DistanceMode::kMapDistance) - full) <= 1e-12);
    CHECK(RaoStirlingSerial(in.freqs, in.map, DistanceMode::kMapDistance) ==
          RaoStirling(in.freqs, in.map, DistanceMode::kMapDistance));
    if (in.used.size() > 1) {
      const double set = oracle::RaoStirling(in.p, in.used, in.used);
      CHECK(std::abs(RaoStirling(in.freqs, in.map, DistanceMode::kMapDistance, NormalizeOver::kSet) - set) <=
            1e-12);
    }
    CHECK(full >= 0.0);
    CHECK(full < 1.0);
  }
}

TEST_CASE("one-minus-cosine mode") {
  Gen g(5);
  for (int t = 0; t < 100; ++t) {
    JournalMap m;
    std::vector<std::vector<double>> prof;
    const int n = g.Int(1, 12);
    for (int i = 0; i < n; ++i) {
      std::vector<double> v;
      for (int k = 0; k < 6; ++k) v.push_back(g.Real(0, 5));
      prof.push_back(v);
      m.Add("J" + std::to_string(i), {0, 0, v});
    }
    JournalFrequencies f;
    std::vector<double> p;
    double total = 0;
    for (int i = 0; i < n; ++i) total += (p.emplace_back(g.Real(0.1, 1)));
    for (int i = 0; i < n; ++i) f.p["J" + std::to_string(i)] = p[static_cast<std::size_t>(i)] / total;
    double want = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        want += p[static_cast<std::size_t>(i)] / total * p[static_cast<std::size_t>(j)] / total *
                oracle::CosineDistance(prof[static_cast<std::size_t>(i)], prof[static_cast<std::size_t>(j)]);
      }
    }
    CHECK(std::abs(RaoStirling(f, m, DistanceMode::kOneMinusCosine) - want) <= 1e-12);
  }
}

TEST_CASE("relabeling invariance") {
  Gen g(8);
  for (int t = 0; t < 200; ++t) {
    const auto in = RandomInstance(g);
    std::vector<std::string> perm = in.names;
    std::shuffle(perm.begin(), perm.end(), g.engine());
    std::map<std::string, std::string> rename;
    for (std::size_t i = 0; i < perm.size(); ++i) rename[in.names[i]] = "K" + perm[i];
    JournalMap m2;
    for (const auto& [k, pt] : in.map.entries()) m2.Add(rename.at(k), pt);
    JournalFrequencies f2;
    for (const auto& [k, p] : in.freqs.p) f2.p[rename.at(k)] = p;
    CHECK(RaoStirling(f2, m2, DistanceMode::kMapDistance) == RaoStirling(in.freqs, in.map, DistanceMode::kMapDistance));
  }
}

TEST_CASE("rigid motion and scaling invariance") {
  Gen g(9);
  for (int t = 0; t < 200; ++t) {
    const auto in = RandomInstance(g);
    const double base = RaoStirling(in.freqs, in.map, DistanceMode::kMapDistance);
    const double th = g.Real(0, 2 * std::numbers::pi);
    const double dx = g.Real(-100, 100);
    const double dy = g.Real(-100, 100);
    const auto moved = Transform(in.map, [&](double x, double y) {
      return std::pair{std::cos(th) * x - std::sin(th) * y + dx, std::sin(th) * x + std::cos(th) * y + dy};
    });
    CHECK(std::abs(RaoStirling(in.freqs, moved, DistanceMode::kMapDistance) - base) <= 1e-12);
    const double k = g.Real(0.01, 100);
    const auto scaled = Transform(in.map, [&](double x, double y) { return std::pair{k * x, k * y}; });
    CHECK(std::abs(RaoStirling(in.freqs, scaled, DistanceMode::kMapDistance) - base) <= 1e-12);
  }
}

TEST_CASE("grid motions are exact") {
  Gen g(10);
  for (int t = 0; t < 200; ++t) {
    const auto in = RandomInstance(g, true);
    const double base = RaoStirling(in.freqs, in.map, DistanceMode::kMapDistance);
    const double dx = g.Int(-1000, 1000);
    const double dy = g.Int(-1000, 1000);
    const auto shifted = Transform(in.map, [&](double x, double y) { return std::pair{x + dx, y + dy}; });
    const auto rot90 = Transform(in.map, [&](double x, double y) { return std::pair{-y, x}; });
    const auto mirror = Transform(in.map, [&](double x, double y) { return std::pair{-x, y}; });
    CHECK(RaoStirling(in.freqs, shifted, DistanceMode::kMapDistance) == base);
    CHECK(RaoStirling(in.freqs, rot90, DistanceMode::kMapDistance) == base);
    CHECK(RaoStirling(in.freqs, mirror, DistanceMode::kMapDistance) == base);
  }
}

// Moving mass e from journal f to journal m changes the sum by
// 2e(D_m - D_f) - 2e^2 d_mf, where D_k = sum_j p_j d_kj. It cannot grow when
// D_m <= D_f, but a peripheral modal journal can make it grow.
TEST_CASE("mass transfer toward a journal") {
  Gen g(12);
  std::size_t conditional = 0;
  for (int t = 0; t < 300; ++t) {
    auto in = RandomInstance(g);
    if (in.p.size() < 2) continue;
    const auto modal = std::max_element(in.freqs.p.begin(), in.freqs.p.end(),
                                        [](const auto& a, const auto& b) { return a.second < b.second; })->first;
    double dmax = 0;
    for (const auto& a : in.all) {
      for (const auto& b : in.all) dmax = std::max(dmax, std::hypot(a.x - b.x, a.y - b.y));
    }
    auto dist = [&](const std::string& a, const std::string& b) {
      const auto* pa = in.map.Find(a);
      const auto* pb = in.map.Find(b);
      return std::hypot(pa->x - pb->x, pa->y - pb->y) / dmax;
    };
    auto mean_dist = [&](const std::string& k) {
      double s = 0;
      for (const auto& [j, p] : in.freqs.p) s += p * dist(k, j);
      return s;
    };
    std::string far;
    double best = -1;
    for (const auto& [k, p] : in.freqs.p) {
      if (k != modal && dist(k, modal) > best) best = dist(k, modal), far = k;
    }
    const double before = RaoStirling(in.freqs, in.map, DistanceMode::kMapDistance);
    const double dm = mean_dist(modal);
    const double df = mean_dist(far);
    const double e = in.freqs.p[far] * g.Real(0, 1);
    in.freqs.p[far] -= e;
    in.freqs.p[modal] += e;
    const double after = RaoStirling(in.freqs, in.map, DistanceMode::kMapDistance);
    CHECK(after - before == doctest::Approx(2 * e * (dm - df) - 2 * e * e * best).epsilon(1e-9));
    if (dm <= df) {
      ++conditional;
      CHECK(after <= before + 1e-12);
    }
  }
  CHECK(conditional > 50);
}

TEST_CASE("a peripheral modal journal gains diversity from concentration") {
  JournalMap m;
  m.Add("A", {0, 0, {}});
  m.Add("B", {10, 0, {}});
  m.Add("C", {10, 1, {}});
  JournalFrequencies f;
  f.p = {{"A", 0.4}, {"B", 0.3}, {"C", 0.3}};
  const double before = RaoStirling(f, m, DistanceMode::kMapDistance);
  f.p = {{"A", 0.5}, {"B", 0.3}, {"C", 0.2}};
  CHECK(RaoStirling(f, m, DistanceMode::kMapDistance) > before);
}

TEST_CASE("journal frequencies") {
  JournalMap m;
  m.Add("Nano Letters", {0, 0, {}});
  m.Add("CARBON", {1, 0, {}});
  std::vector<CitingRecord> recs;
  for (int i = 0; i < 10; ++i) {
    CitingRecord r;
    r.record_id = std::to_string(i);
    r.journal = i < 6 ? "NANO LETTERS" : i < 8 ? "carbon" : "UNKNOWN";
    recs.push_back(r);
  }
  auto [f, rep] = ComputeJournalFrequencies(recs, m);
  CHECK(f.p.at("NANO LETTERS") == doctest::Approx(0.75));
  CHECK(f.p.at("CARBON") == doctest::Approx(0.25));
  CHECK(rep.matched_journals == 2);
  CHECK(rep.included_records == 8);
  CHECK(rep.inclusion_pct == doctest::Approx(80.0));
  const auto j = DiversityJson(0.375, DistanceMode::kMapDistance, rep);
  CHECK(j.dump() == R"({"delta":0.375,"mode":"map-distance","matched_journals":2,"inclusion_pct":80.0})");

  recs.resize(0);
  CitingRecord lone;
  lone.journal = "NOWHERE";
  recs.push_back(lone);
  CHECK_THROWS_AS(ComputeJournalFrequencies(recs, m), Error);
}

TEST_CASE("journal frequencies match a naive count") {
  Gen g(13);
  JournalMap m;
  for (int i = 0; i < 20; ++i) m.Add("J" + std::to_string(i), {g.Real(0, 1), g.Real(0, 1), {}});
  std::vector<CitingRecord> recs(1000);
  std::map<std::string, double> count;
  double included = 0;
  for (auto& r : recs) {
    const int j = g.Int(0, 24);
    r.journal = "J" + std::to_string(j);
    if (j < 20) {
      count[r.journal] += 1;
      included += 1;
    }
  }
  auto [f, rep] = ComputeJournalFrequencies(recs, m);
  CHECK(f.p.size() == count.size());
  double sum = 0;
  for (const auto& [k, c] : count) {
    CHECK(f.p.at(k) == doctest::Approx(c / included));
    sum += f.p.at(k);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.included_records == static_cast<std::size_t>(included));
}

TEST_CASE("map csv") {
  const auto m = JournalMap::FromCsv("journal,x,y,c1,c2\n\"J AM CHEM SOC\",0.5,1,3,4\nCARBON,2,-1,0,1\n");
  CHECK(m.size() == 2);
  CHECK(m.has_profiles());
  CHECK(m.Find("j am chem soc")->x == 0.5);
  CHECK(m.Find("CARBON")->profile == std::vector<double>{0, 1});
  CHECK_THROWS_AS(JournalMap::FromCsv("name,x,y\nA,1,2\n"), Error);
  CHECK_THROWS_AS(JournalMap::FromCsv("journal,x,y\nA,1,zz\n"), Error);
  CHECK_THROWS_AS(JournalMap::FromCsv("journal,x,y\nA,1,2\nA,3,4\n"), Error);
  CHECK_THROWS_AS(JournalMap::FromCsv("journal,x,y\nA,1,inf\n"), Error);
}
