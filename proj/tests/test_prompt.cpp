#include <doctest.h>

#include <cmath>
#include <sstream>

#include "januslab/config.hpp"
#include "januslab/errors.hpp"
#include "januslab/prompt.hpp"
#include "support.hpp"

using namespace januslab;

namespace {

constexpr double kDeg = M_PI / 180.0;

const char* kExample =
    "word,view,p_given_present,p_given_absent,prior\n"
    "smiling,front view,0.70,0.25,0.5\n"
    "smiling,side view,0.15,0.25,0.5\n"
    "smiling,back view,0.05,0.25,0.5\n"
    "smiling,top view,0.10,0.25,0.5\n"
    "a,front view,0.25,0.25,0.5\n"
    "a,side view,0.25,0.25,0.5\n"
    "a,back view,0.25,0.25,0.5\n"
    "a,top view,0.25,0.25,0.5\n"
    "dog,front view,0.30,0.22,0.5\n"
    "dog,side view,0.30,0.28,0.5\n"
    "dog,back view,0.25,0.28,0.5\n"
    "dog,top view,0.15,0.22,0.5\n";

CondProbTable table_from(const std::string& text) {
  std::istringstream in(text);
  return parse_table(in);
}

// Brute-force Eq.-style ratio: sum over u' in {present, absent}.
double brute_pmi(const CondProbTable& t, const std::string& view, const std::string& word) {
  const double prior = t.prior(word);
  const auto& e = t.entry(word, view);
  const double p_v = e.p_present * prior + e.p_absent * (1.0 - prior);
  return e.p_present / p_v;
}

CondProbTable random_table(jltest::Gen& gen, const std::vector<std::string>& words) {
  const std::vector<std::string> views{"front view", "back view", "side view", "top view"};
  CondProbTable t;
  for (const auto& w : words) {
    std::vector<double> pp(4), pa(4);
    double sp = 0, sa = 0;
    for (int v = 0; v < 4; ++v) {
      pp[v] = gen.uniform(0.01, 1.0);
      pa[v] = gen.uniform(0.01, 1.0);
      sp += pp[v];
      sa += pa[v];
    }
    for (int v = 0; v < 4; ++v) t.set(w, views[v], {pp[v] / sp, pa[v] / sa});
    t.set_prior(w, gen.uniform(0.05, 0.95));
  }
  return t;
}

}  // namespace

TEST_CASE("assign_view_prompt") {
  const ViewBinConfig cfg = ViewBinConfig::standard();
  CHECK(assign_view_prompt(0.0, 0.1, cfg) == "front view");
  CHECK(assign_view_prompt(20 * kDeg, 0.1, cfg) == "front view");
  CHECK(assign_view_prompt(30 * kDeg, 0.1, cfg) == "side view");
  CHECK(assign_view_prompt(180 * kDeg, 0.1, cfg) == "back view");
  CHECK(assign_view_prompt(340 * kDeg, 0.1, cfg) == "front view");
  CHECK(assign_view_prompt(-10 * kDeg, 0.1, cfg) == "front view");
  for (double az : {0.0, 1.0, 3.0, 5.0}) CHECK(assign_view_prompt(az, 80 * kDeg, cfg) == "top view");
  CHECK_THROWS_AS(assign_view_prompt(NAN, 0.0, cfg), InvalidArgument);
}

TEST_CASE("property: azimuth bins tile the circle exactly once") {
  for (double half : {10.0, 22.5, 45.0, 60.0}) {
    const ViewBinConfig cfg = ViewBinConfig::standard(half);
    for (int k = 0; k < 3600; ++k) {
      const double az = k * 0.1;
      int hits = 0;
      for (const auto& b : cfg.bins) {
        for (const auto& iv : b.intervals) {
          // open interiors only, so shared boundaries are not double counted
          double a = az;
          while (a < iv.lo_deg) a += 360.0;
          while (a >= iv.lo_deg + 360.0) a -= 360.0;
          if (a > iv.lo_deg && a < iv.hi_deg) ++hits;
        }
      }
      const bool boundary = std::abs(std::remainder(az - half, 180.0)) < 1e-9 ||
                            std::abs(std::remainder(az + half, 180.0)) < 1e-9;
      if (!boundary) CHECK(hits == 1);
      CHECK_NOTHROW(assign_view_prompt(az * kDeg, 0.0, cfg));
    }
  }
}

TEST_CASE("pmi on the example table") {
  const CondProbTable t = table_from(kExample);
  CHECK(pmi("back view", "smiling", t) == doctest::Approx(0.3333).epsilon(1e-4));
  CHECK(pmi("front view", "smiling", t) == doctest::Approx(1.4737).epsilon(1e-4));
  for (const auto& w : t.words()) {
    for (const auto& v : t.views()) CHECK(std::abs(pmi(v, w, t) - brute_pmi(t, v, w)) <= 1e-12);
  }
  CHECK(pmi("side view", "a", t) == 1.0);
  CHECK(pmi("back view", "smiling", t, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pmi("back view", "cat", t), LookupError);
}

TEST_CASE("pmi against a uniform table is exactly one") {
  jltest::Gen gen(3);
  CondProbTable t;
  for (const char* w : {"x", "y", "z"}) {
    for (const char* v : {"front view", "back view", "side view", "top view"}) t.set(w, v, {0.25, 0.25});
    t.set_prior(w, gen.uniform(0.1, 0.9));
  }
  for (const auto& w : t.words())
    for (const auto& v : t.views()) CHECK(pmi(v, w, t) == 1.0);
  const Prompt p = Prompt::parse("x y z");
  CHECK(debias_prompt(p, "back view", t, PMIConfig{}) == p);
}

TEST_CASE("debias_prompt") {
  const CondProbTable t = table_from(kExample);
  const Prompt p = Prompt::parse("a smiling dog", {"dog"});
  const PMIConfig cfg;
  CHECK(debias_prompt(p, "back view", t, cfg).text() == "a dog");
  CHECK(debias_prompt(p, "front view", t, cfg).text() == "a smiling dog");
  const auto why = explain_debias(p, "back view", t, cfg);
  REQUIRE(why.size() == 3);
  CHECK(why[1].removed);
  CHECK(why[1].normalized == doctest::Approx(0.3333 / 1.4737).epsilon(1e-3));
  CHECK(why[2].is_protected);
  CHECK_THROWS_AS(debias_prompt(Prompt::parse("a purple dog"), "back view", t, cfg), LookupError);
}

TEST_CASE("property: debias is idempotent, keeps protected words and order, and is monotone in threshold") {
  const std::vector<std::string> vocab{"red", "big", "smiling", "furry", "tiny", "old"};
  const std::vector<std::string> views{"front view", "back view", "side view", "top view"};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    jltest::Gen gen(seed);
    const CondProbTable t = random_table(gen, vocab);
    std::vector<std::string> words;
    std::vector<std::string> protect;
    for (const auto& w : vocab) {
      if (gen.coin()) words.push_back(w);
      if (gen.integer(0, 3) == 0) protect.push_back(w);
    }
    std::string text;
    for (const auto& w : words) text += w + " ";
    const Prompt p = Prompt::parse(text, protect);
    const std::string view = views[gen.integer(0, 3)];
    PMIConfig cfg;
    cfg.threshold = gen.uniform(0.3, 1.2);
    cfg.normalizer = gen.coin() ? PmiNormalizer::max : PmiNormalizer::mean;

    const Prompt once = debias_prompt(p, view, t, cfg);
    CHECK(debias_prompt(once, view, t, cfg) == once);
    for (const auto& w : p.protected_words) {
      if (p.contains(w)) CHECK(once.contains(w));
    }
    // survivors keep order
    std::size_t pos = 0;
    for (const auto& w : once.words) {
      while (pos < p.words.size() && p.words[pos] != w) ++pos;
      CHECK(pos < p.words.size());
    }
    PMIConfig higher = cfg;
    higher.threshold += gen.uniform(0.0, 0.5);
    const Prompt stricter = debias_prompt(p, view, t, higher);
    for (const auto& w : stricter.words) CHECK(once.contains(w));
  }
}

TEST_CASE("table IO") {
  const CondProbTable t = table_from(kExample);
  SUBCASE("round trip") {
    std::ostringstream out;
    write_table(t, out);
    CHECK(table_from(out.str()) == t);
  }
  SUBCASE("normalization violation") {
    CondProbTable bad = t;
    bad.set("smiling", "back view", {0.05, 0.05});
    const auto v = validate_table(bad);
    REQUIRE(!v.empty());
    CHECK(v.front().message.find("smiling") != std::string::npos);
  }
  SUBCASE("violation reports the row") {
    const std::string text = std::string(kExample) + "odd,front view,0.5,0.25,0.5\nodd,side view,0.3,0.25,0.5\n"
                                                     "odd,back view,0.0,0.25,0.5\nodd,top view,0.0,0.25,0.5\n";
    const auto v = validate_table(table_from(text));
    REQUIRE(!v.empty());
    CHECK(v.front().line == 14);
  }
  SUBCASE("missing column") {
    try {
      table_from("word,view,p_given_present,prior\nx,front view,1,0.5\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("p_given_absent") != std::string::npos);
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("bad number") {
    CHECK_THROWS_AS(table_from("word,view,p_given_present,p_given_absent,prior\nx,front view,abc,0.2,0.5\n"), ParseError);
  }
  SUBCASE("shipped example table matches the built-in one") {
    CHECK(load_table(JANUSLAB_DATA_DIR "/example_table.csv") == example_table());
    CHECK(validate_table(example_table()).empty());
  }
}

TEST_CASE("render_view_prompt") {
  CHECK(render_view_prompt("back view", Prompt::parse("a dog")) == "back view, a dog");
  CHECK(render_view_prompt("back view", Prompt{}) == "back view,");
  CHECK(render_view_prompt("front view", Prompt::parse("A Smiling  dog")) == "front view, a smiling dog");
}
