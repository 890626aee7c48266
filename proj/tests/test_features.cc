#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "test_util.h"
#include "tdparse/features.h"
#include "tdparse/parser.h"

using namespace tdparse;
using testutil::geo;

namespace {

std::string value(const AtomicValues& v, Atomic a) { return v[static_cast<int>(a)]; }

// State after the first `n` actions of the running example.
StatePtr running_prefix(std::size_t n, const Sentence& x, const Model* m = nullptr) {
  TransitionSystem ts(geo(), m);
  auto actions = testutil::running_example_actions(geo());
  actions.resize(n);
  return ts.replay(actions, x);
}

}  // namespace

TEST_CASE("default template set: 84 templates within budget") {
  auto set = FeatureTemplateSet::default_set();
  CHECK(set.size() == 84);
  CHECK(set.within_budget());
  int unigrams = 0, pairs = 0, triples = 0;
  for (const auto& t : set.templates()) {
    CHECK(FeatureTemplateSet::cost(t) <= 5);
    unigrams += t.atoms.size() == 1;
    pairs += t.atoms.size() == 2;
    triples += t.atoms.size() == 3;
  }
  CHECK(unigrams == 14);
  CHECK(pairs == 3 + 27 + 6);
  CHECK(triples == 1 + 27 + 6);
  CHECK(set == FeatureTemplateSet::default_set());
  CHECK(set.templates().front().name == "S0T");
  CHECK(set.templates().back().name == "S1T+S2T+TID");
}

TEST_CASE("template files round-trip and reject bad input") {
  auto set = FeatureTemplateSet::default_set();
  auto back = FeatureTemplateSet::parse(set.save());
  CHECK(back == set);
  CHECK(back.save() == set.save());
  auto custom = FeatureTemplateSet::parse("# comment\nwords: Q0,Q1\nact: ACT\n");
  REQUIRE(custom.size() == 2);
  CHECK(custom.templates()[1].atoms.empty());
  CHECK_THROWS_AS(FeatureTemplateSet::parse("x Q0"), ParseError);
  CHECK_THROWS_AS(FeatureTemplateSet::parse("x: Q9"), ParseError);
  CHECK_THROWS_AS(FeatureTemplateSet::parse("x: Q0,Q0"), ParseError);
  CHECK_THROWS_AS(FeatureTemplateSet::parse("x: Q0\nx: Q1"), ParseError);
  CHECK_FALSE(FeatureTemplateSet::parse("w: S0L,S1L").within_budget());
}

TEST_CASE("atomic features after step 8 of the running example") {
  Sentence x = make_sentence(testutil::kRunningExample);
  StatePtr s = running_prefix(8, x);
  auto v = atomic_features(*s, Action::reduce_right(), x, geo());
  CHECK(value(v, Atomic::kS0T) == "st->t");
  CHECK(value(v, Atomic::kS1T) == "('a->t)->('a->i)->'a");
  CHECK(value(v, Atomic::kS2T) == "st->ct");
  CHECK(value(v, Atomic::kS0L) == "state");
  CHECK(value(v, Atomic::kS1R) == "largest");
  CHECK(value(v, Atomic::kS2L) == "capital");
  CHECK(value(v, Atomic::kQ0) == "by");
  CHECK(value(v, Atomic::kQ1) == "area");
  CHECK(value(v, Atomic::kQ2) == "?");
  CHECK(value(v, Atomic::kPred) == kNoneValue);
  CHECK(value(v, Atomic::kAct) == "reR");
}

TEST_CASE("atomic features of the empty state") {
  Sentence x = make_sentence(testutil::kRunningExample);
  TransitionSystem ts(geo());
  auto v = atomic_features(*ts.initial(), Action::skip(), x, geo());
  for (Atomic a : {Atomic::kS0T, Atomic::kS1T, Atomic::kS2T, Atomic::kS0L, Atomic::kS2R})
    CHECK(value(v, a) == kNoneValue);
  CHECK(value(v, Atomic::kQ0) == "what");
  CHECK(value(v, Atomic::kAct) == "sk");
}

TEST_CASE("shift features carry the template id and grounded names") {
  Sentence x = make_sentence(testutil::kRunningExample);
  StatePtr s = running_prefix(6, x);
  int id = testutil::template_for(geo(), "largest");
  auto v = atomic_features(*s, Action::shift(1, id), x, geo());
  CHECK(value(v, Atomic::kTid) == std::to_string(id));
  CHECK(value(v, Atomic::kPred) == "argmax");
  int longest = testutil::template_for(geo(), "longest");
  auto w = atomic_features(*s, Action::shift(1, longest), x, geo());
  CHECK(value(w, Atomic::kPred) == "argmax+len");
}

TEST_CASE("extract: one string per template, deterministic") {
  Sentence x = make_sentence(testutil::kRunningExample);
  Model m;
  StatePtr s = running_prefix(8, x);
  auto f = m.features(*s, Action::reduce_right(), x, geo());
  CHECK(f.size() == 84);
  CHECK(f[0] == "S0T=st->t|reR");
  StatePtr t = running_prefix(8, x);
  CHECK(m.extract(*s, Action::reduce_right(), x, geo()) ==
        m.extract(*t, Action::reduce_right(), x, geo()));
  FeatureVector d = derivation_features(*s, x, geo(), m);
  CHECK((d - d).empty());
}

TEST_CASE("score arithmetic") {
  FeatureVector v;
  v.add("f", 2);
  WeightVector w;
  CHECK(score(v, w) == 0.0);
  w.set("f", 0.5);
  CHECK(score(v, w) == 1.0);
  v.add("f", -2);
  CHECK(v.empty());
  FeatureVector a, b;
  a.add("x");
  a.add("y", 3);
  b.add("y", 3);
  b.add("z");
  auto delta = a - b;
  CHECK(delta.size() == 2);
  CHECK(delta.get("x") == 1);
  CHECK(delta.get("z") == -1);
  CHECK(delta.squared_norm() == 2);
}

TEST_CASE("derivation score equals the sum of per-action scores") {
  Sentence x = make_sentence(testutil::kRunningExample);
  // Collect the features of the derivation, then weight them randomly.
  Model probe;
  StatePtr s0 = running_prefix(13, x);
  FeatureVector phi = derivation_features(*s0, x, geo(), probe);
  std::mt19937 rng(3);
  Model dyadic, real;
  std::uniform_int_distribution<int> num(-64, 64);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& [f, c] : phi.sorted()) {
    dyadic.weights.set(f, num(rng) / 8.0);
    real.weights.set(f, u(rng));
  }
  StatePtr a = running_prefix(13, x, &dyadic);
  CHECK(a->score == score(phi, dyadic.weights));
  StatePtr b = running_prefix(13, x, &real);
  CHECK(std::abs(b->score - score(phi, real.weights)) < 1e-12);
}

TEST_CASE("model files round-trip byte for byte") {
  Model m;
  m.meta["seed"] = "7";
  m.weights.set("S0T=st->t|reR", 0.1 + 0.2);
  m.weights.set("Q0=by|sh", -3.0);
  m.weights.set("zero", 0.0);
  std::string text = m.save();
  Model back = Model::parse(text);
  CHECK(back.save() == text);
  CHECK(back.weights.get("S0T=st->t|reR") == 0.1 + 0.2);
  CHECK(back.weights.size() == 2);
  CHECK(back.meta.at("seed") == "7");
  CHECK(back.templates == m.templates);
  CHECK_THROWS_AS(Model::parse("garbage\n"), ParseError);
  CHECK_THROWS_AS(Model::parse("tdparse-model v1\nfeature-without-weight\n"), ParseError);
}
