// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tdparse/dataset.h"
#include "tdparse/evalkit.h"
#include "tdparse/learner.h"
#include "tdparse/parser.h"

using namespace tdparse;

namespace {

std::string data_path(const std::string& file) {
  return std::string(TDPARSE_DATA_DIR) + "/" + file;
}

const Domain& geo() {
  static const Domain d = load_domain_file(data_path("geo_mini.dom"));
  return d;
}

std::vector<Example> corpus_split(const char* file) {
  return read_dataset_file(data_path(file), geo());
}

std::vector<Example> whole_corpus() {
  auto a = corpus_split("geo_train.tsv");
  auto b = corpus_split("geo_test.tsv");
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Collects failure messages; a criterion passes when none were recorded and
// it finished within its time limit.
struct Check {
  std::vector<std::string> failures;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() == 5) failures.push_back("...");
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int failed_criteria = 0;

void run(int id, const char* title, double limit_seconds, const std::function<void(Check&)>& body) {
  Check c;
  auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  double t = seconds_since(start);
  if (t > limit_seconds) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "took %.3f s, limit %.0f s", t, limit_seconds);
    c.failures.push_back(buf);
  }
  bool ok = c.failures.empty();
  failed_criteria += !ok;
  std::printf("%s criterion %2d: %s (%.3f s)%s%s\n", ok ? "PASS" : "FAIL", id, title, t,
              c.detail.empty() ? "" : " ", c.detail.c_str());
  for (const auto& f : c.failures) std::printf("       %s\n", f.c_str());
  std::fflush(stdout);
}

std::vector<Action> running_actions(const Domain& d) {
  auto id = [&](const std::string& phrase) {
    for (const auto& e : d.entries())
      if (e.phrase == tokenize(phrase)) return e.template_id;
    throw std::runtime_error("no lexicon entry for " + phrase);
  };
  auto sh = [&](const char* w) { return Action::shift(1, id(w)); };
  return {Action::skip(), Action::skip(), Action::skip(), sh("capital"),
          Action::skip(), Action::skip(), sh("largest"),  sh("state"),
          Action::reduce_right(), Action::skip(), sh("area"), Action::reduce_right(),
          Action::reduce_right()};
}

std::string joined_types(const ParserState& s) {
  std::string out;
  for (const auto* item : s.items_bottom_up())
    out += (out.empty() ? "" : "  ") + item_type_string(*item);
  return out;
}

void golden_replay(Check& c, const Domain& d, const std::vector<std::pair<int, std::string>>& want,
                   const std::string& final_type) {
  Sentence x = make_sentence("what is the capital of the largest state by area ?");
  TransitionSystem ts(d);
  std::vector<StatePtr> states{ts.initial()};
  for (const auto& a : running_actions(d)) states.push_back(ts.step(states.back(), a, x));
  for (const auto& [step, types] : want) {
    std::string got = joined_types(*states[step]);
    c.expect(got == types, "step " + std::to_string(step) + ": got '" + got + "', want '" +
                               types + "'");
  }
  const StackItem& top = states.back()->stack->item;
  c.expect(d.print(top.value.expr) == "(capital (argmax state size))",
           "final MR " + d.print(top.value.expr));
  c.expect(item_type_string(top) == final_type, "final type " + item_type_string(top));
  StatePtr done = ts.step(states.back(), Action::skip(), x);
  c.expect(ts.is_final(*done, x), "derivation with the trailing skip is not final");
  if (&d == &geo()) {
    c.expect(states[9]->typing == "binding: 'a=st", "step 9 note: " + states[9]->typing);
    c.expect(states[12]->typing == "st<:lo => (lo->i)<:(st->i)",
             "step 12 note: " + states[12]->typing);
  }
}

// Criterion 3 helpers.
TypeHierarchy random_hierarchy(std::mt19937& rng, int declared) {
  TypeHierarchy h;
  std::vector<std::string> names{TypeHierarchy::kTop};
  for (int k = 0; k < declared; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
    std::string name = "n" + std::to_string(k);
    h.add(name, names[pick(rng)]);
    names.push_back(name);
  }
  return h;
}

Type random_type(std::mt19937& rng, const std::vector<std::string>& nodes, int depth) {
  std::uniform_int_distribution<int> coin(0, 2);
  if (depth == 0 || coin(rng) != 0) {
    std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
    return Type::base(nodes[pick(rng)]);
  }
  return Type::arrow(random_type(rng, nodes, depth - 1), random_type(rng, nodes, depth - 1));
}

// Uniform random weights in [-1, 1] on every feature of every reachable
// transition of `x`.
void randomize(Model& m, const Sentence& x, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  m.weights = WeightVector();
  TransitionSystem probe(geo(), &m);
  for_each_reachable_state(probe, x, [&](const StatePtr& s) {
    if (!s->prev) return;
    for (const auto& f : m.features(*s->prev, s->last, x, geo()))
      if (m.weights.get(f) == 0.0) m.weights.set(f, u(rng));
  });
}

// Least-squares fit of t = a + b n + c n^2.
std::array<double, 3> quadratic_fit(const std::vector<double>& n, const std::vector<double>& t) {
  double m[3][4] = {};
  for (std::size_t k = 0; k < n.size(); ++k) {
    double row[3] = {1.0, n[k], n[k] * n[k]};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += row[i] * row[j];
      m[i][3] += row[i] * t[k];
    }
  }
  for (int i = 0; i < 3; ++i) {
    int p = i;
    for (int r = i + 1; r < 3; ++r)
      if (std::abs(m[r][i]) > std::abs(m[p][i])) p = r;
    std::swap(m[i], m[p]);
    for (int r = 0; r < 3; ++r) {
      if (r == i) continue;
      double f = m[r][i] / m[i][i];
      for (int j = i; j < 4; ++j) m[r][j] -= f * m[i][j];
    }
  }
  return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

}  // namespace

int main() {
  TrainerConfig train_cfg;  // 20 iterations, beam 16, 60 s pass-1 limit
  Model trained;

  run(1, "running example replays with subtyping and polymorphism", 1.0, [](Check& c) {
    golden_replay(c, geo(),
                  {{4, "st->ct"},
                   {7, "st->ct  ('a->t)->('a->i)->'a"},
                   {8, "st->ct  ('a->t)->('a->i)->'a  st->t"},
                   {9, "st->ct  (st->i)->st"},
                   {11, "st->ct  (st->i)->st  lo->i"},
                   {12, "st->ct  st"}},
                  "ct");
  });

  run(2, "running example replays with simple types", 1.0, [](Check& c) {
    static const Domain simple = geo().simplified();
    golden_replay(c, simple,
                  {{4, "e->e"},
                   {7, "e->e  (e->t)->(e->i)->e"},
                   {8, "e->e  (e->t)->(e->i)->e  e->t"},
                   {9, "e->e  (e->i)->e"},
                   {11, "e->e  (e->i)->e  e->i"},
                   {12, "e->e  e"}},
                  "e");
  });

  run(3, "subtyping properties and contravariance", 10.0, [](Check& c) {
    std::mt19937 rng(20240);
    std::uniform_int_distribution<int> size(0, 28);  // plus the two roots
    std::size_t checks = 0;
    for (int tree = 0; tree < 1000; ++tree) {
      TypeHierarchy h = random_hierarchy(rng, size(rng));
      auto nodes = h.nodes();
      for (int k = 0; k < 30; ++k) {
        Type a = random_type(rng, nodes, 3), b = random_type(rng, nodes, 3),
             d = random_type(rng, nodes, 3);
        c.expect(is_subtype(a, a, h), "reflexivity fails for " + a.str());
        if (is_subtype(a, b, h) && is_subtype(b, d, h))
          c.expect(is_subtype(a, d, h), "transitivity fails for " + a.str() + ", " + b.str() +
                                            ", " + d.str());
        if (is_subtype(a, b, h) && is_subtype(b, a, h))
          c.expect(a == b, "antisymmetry fails for " + a.str() + ", " + b.str());
        checks += 3;
      }
    }
    const TypeHierarchy& h = geo().hierarchy();
    auto nodes = h.nodes();
    for (const auto& x : nodes)
      for (const auto& y : nodes)
        for (const auto& z : nodes) {
          Type X = Type::base(x), Y = Type::base(y), Z = Type::base(z);
          c.expect(is_subtype(Type::arrow(X, Z), Type::arrow(Y, Z), h) ==
                       h.is_base_subtype(y, x),
                   "contravariance fails for " + x + ", " + y + ", " + z);
          c.expect(is_subtype(Type::arrow(Z, X), Type::arrow(Z, Y), h) ==
                       h.is_base_subtype(x, y),
                   "covariance fails for " + x + ", " + y + ", " + z);
          checks += 2;
        }
    c.detail = std::to_string(checks) + " checks";
  });

  run(4, "at most one directional reduce in every reachable state", 60.0, [](Check& c) {
    TransitionSystem ts(geo());
    std::size_t states = 0;
    int longest = 0;
    for (const auto& ex : whole_corpus()) {
      longest = std::max(longest, ex.sentence.size());
      for_each_reachable_state(ts, ex.sentence, [&](const StatePtr& s) {
        ++states;
        int directional = 0;
        for (const auto& a : ts.legal_actions(s, ex.sentence))
          directional += a.kind == ActionKind::kReduceLeft || a.kind == ActionKind::kReduceRight;
        c.expect(directional <= 1, "both reduces legal in '" + ex.question + "' at " +
                                       actions_to_string(s->actions()));
      });
    }
    c.expect(longest <= 8, "corpus has a sentence longer than 8 tokens");
    c.detail = std::to_string(states) + " states";
  });

  run(5, "unbounded beam finds the exhaustive maximum", 120.0, [](Check& c) {
    std::mt19937 rng(99);
    std::size_t sentences = 0, decodes = 0;
    for (const auto& ex : whole_corpus()) {
      if (ex.sentence.size() > 6) continue;
      ++sentences;
      for (int trial = 0; trial < 20; ++trial) {
        Model m;
        randomize(m, ex.sentence, rng);
        TransitionSystem ts(geo(), &m);
        auto all = enumerate_derivations(ts, ex.sentence, nullptr, 0);
        SearchOptions opts;
        opts.beam_width = kUnbounded;
        auto beam = beam_search(ts, ex.sentence, opts);
        ++decodes;
        if (all.finals.empty()) {
          c.expect(!beam.best, "beam found a parse exhaustive search did not");
          continue;
        }
        double best = -1e300;
        for (const auto& s : all.finals) best = std::max(best, s->score);
        c.expect(beam.best && std::abs(beam.best->score - best) <= 1e-9,
                 "score mismatch on '" + ex.question + "'");
      }
    }
    c.expect(sentences > 0, "no sentence of at most 6 tokens");
    c.detail = std::to_string(sentences) + " sentences, " + std::to_string(decodes) + " decodes";
  });

  run(6, "forced decoding covers the corpus", 120.0, [&](Check& c) {
    auto data = make_training_set(whole_corpus());
    auto report = forced_decode_pass1(data, geo(), train_cfg);
    c.expect(report.covered == report.total, "covered " + std::to_string(report.covered) +
                                                  "/" + std::to_string(report.total));
    TransitionSystem ts(geo());
    std::size_t refs = 0;
    for (const auto& ex : data)
      for (const auto& r : ex.references) {
        ++refs;
        StatePtr s = ts.replay(r, ex.example.sentence);
        c.expect(ts.is_final(*s, ex.example.sentence) &&
                     mr_equal(s->stack->item.value.expr, ex.example.gold),
                 "reference of '" + ex.example.question + "' does not replay to gold");
      }
    c.detail = std::to_string(report.covered) + "/" + std::to_string(report.total) +
               " covered, " + std::to_string(refs) + " derivations";
  });

  run(7, "training converges and is reproducible", 300.0, [&](Check& c) {
    auto data = make_training_set(corpus_split("geo_train.tsv"));
    forced_decode_pass1(data, geo(), train_cfg);
    EpochStats last;
    trained = train(data, geo(), train_cfg, [&](const EpochStats& s) { last = s; });
    Model again = train(data, geo(), train_cfg);
    c.expect(trained.save() == again.save(), "same-seed models differ");

    std::vector<Example> train_examples;
    for (const auto& ex : data) train_examples.push_back(ex.example);
    EvalOptions opts;
    opts.beam_width = train_cfg.beam_width;
    EvalReport on_train = evaluate(trained, train_examples, geo(), opts);
    EvalReport held_out = evaluate(trained, corpus_split("geo_test.tsv"), geo(), opts);
    c.expect(on_train.correct == on_train.total,
             "training exact match " + std::to_string(on_train.correct) + "/" +
                 std::to_string(on_train.total));
    c.expect(held_out.correct * 10 >= held_out.total * 9,
             "held-out exact match " + std::to_string(held_out.correct) + "/" +
                 std::to_string(held_out.total));
    char buf[128];
    std::snprintf(buf, sizeof buf, "train %zu/%zu, held-out %zu/%zu, last epoch updates %zu",
                  on_train.correct, on_train.total, held_out.correct, held_out.total,
                  last.updates);
    c.detail = buf;
  });

  run(8, "max-violation update arithmetic", 1.0, [](Check& c) {
    std::istringstream in("mississippi\tmississippi:st\n");
    auto data = make_training_set(read_dataset(in, geo()));
    TrainerConfig cfg;
    cfg.templates = FeatureTemplateSet::parse("tid: TID\n");
    forced_decode_pass1(data, geo(), cfg);
    c.expect(data[0].references.size() == 1, "expected exactly one reference");
    int st = -1, rv = -1;
    const std::vector<std::string> words{"mississippi"};
    for (const auto& cand : geo().lookup_shifts(words, {})) {
      if (cand.entry->tmpl.type.str() == "st") st = cand.entry->template_id;
      if (cand.entry->tmpl.type.str() == "rv") rv = cand.entry->template_id;
    }
    const std::string good = "tid=" + std::to_string(st) + "|sh";
    const std::string bad = "tid=" + std::to_string(rv) + "|sh";
    Model m;
    m.templates = cfg.templates;
    m.weights.set("tid=-NONE-|sk", -10.0);  // the skip prefix is not a competitor
    auto margin = [&] { return m.weights.get(good) - m.weights.get(bad); };
    double before = margin();
    UpdateRecord rec = max_violation_update(data[0], geo(), m, cfg);
    c.expect(rec.updated, "no update");
    c.expect(m.weights.get(good) == 1.0, "reference feature weight is not +1");
    double gain = margin() - before;
    c.expect(std::abs(gain - rec.delta.squared_norm()) <= 1e-12, "margin identity fails");
    UpdateRecord again = max_violation_update(data[0], geo(), m, cfg);
    c.expect(!again.updated, "second update on a separated example");
    char buf[96];
    std::snprintf(buf, sizeof buf, "margin gain %.17g, |dPhi|^2 %lld", gain,
                  rec.delta.squared_norm());
    c.detail = buf;
  });

  run(9, "decoding takes at most 2n-1 actions and linear time", 120.0, [&](Check& c) {
    TransitionSystem ts(geo(), &trained);
    SearchOptions opts;
    opts.beam_width = train_cfg.beam_width;
    std::size_t decoded = 0;
    for (const auto& ex : whole_corpus()) {
      auto r = beam_search(ts, ex.sentence, opts);
      if (!r.best) continue;
      ++decoded;
      c.expect(r.best->n_actions <= 2 * ex.sentence.size() - 1,
               "too many actions on '" + ex.question + "'");
    }

    // Decode-time fit over synthetic sentences of 4..16 words drawn from
    // `vocab`; returns the superlinear residual and fills the coefficients.
    std::mt19937 rng(4);
    auto residual_of = [&](const std::vector<std::string>& vocab, std::array<double, 3>& fit) {
      std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
      // The sentences of length n are the n-word prefixes of one fixed set
      // of 16-word draws, so lengths differ only in how far they reach.
      std::vector<std::vector<std::string>> draws(60);
      for (auto& words : draws)
        for (int w = 0; w < 16; ++w) words.push_back(vocab[pick(rng)]);
      std::vector<double> ns;
      std::vector<std::vector<Sentence>> batches;
      for (int n = 4; n <= 16; ++n) {
        std::vector<Sentence> batch;
        for (const auto& words : draws) {
          std::string text;
          for (int w = 0; w < n; ++w) text += (w ? " " : "") + words[w];
          batch.push_back(make_sentence(text));
        }
        ns.push_back(n);
        batches.push_back(std::move(batch));
      }
      // Processor time, lengths interleaved within each repetition so that
      // drift touches every length alike; the minimum is kept.
      std::vector<double> times(ns.size(), 1e300);
      for (int rep = 0; rep < 5; ++rep) {
        for (std::size_t i = 0; i < batches.size(); ++i) {
          std::clock_t start = std::clock();
          for (const auto& x : batches[i]) {
            auto r = beam_search(ts, x, opts);
            c.expect(r.expanded <= opts.beam_width * (2 * x.size() - 1) + 1,
                     "expanded states exceed the beam bound");
            if (r.best)
              c.expect(r.best->n_actions <= 2 * x.size() - 1,
                       "too many actions on a synthetic sentence");
          }
          double cpu = static_cast<double>(std::clock() - start) / CLOCKS_PER_SEC;
          times[i] = std::min(times[i], cpu / batches[i].size());
        }
      }
      fit = quadratic_fit(ns, times);
      double t16 = fit[0] + 16 * fit[1] + 256 * fit[2];
      return std::max(0.0, fit[2]) * 256.0 / t16;
    };

    // Every word triggers a lexicon entry, so each step branches as much as
    // the lexicon allows and the beam is full from the first few tokens.
    std::vector<std::string> triggering, corpus_words;
    for (const auto& ex : whole_corpus())
      for (const auto& w : ex.sentence.tokens) {
        corpus_words.push_back(w);
        if (!geo().lookup_shifts(std::vector<std::string>{w}, {}).empty())
          triggering.push_back(w);
      }
    std::array<double, 3> fit{}, corpus_fit{};
    double residual = residual_of(triggering, fit);
    // Mostly function words: the beam is still filling at these lengths.
    double corpus_residual = residual_of(corpus_words, corpus_fit);
    c.expect(residual < 0.2, "superlinear residual " + std::to_string(residual));
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "%zu corpus decodes, t(n)=%.3g+%.3gn+%.3gn^2 s, superlinear residual %.3f "
                  "(corpus-word sentences with an unfilled beam: %.3f)",
                  decoded, fit[0], fit[1], fit[2], residual, corpus_residual);
    c.detail = buf;
  });

  run(10, "evaluation arithmetic", 1.0, [](Check& c) {
    EvalReport r = make_report(10, 8, 6);
    c.expect(std::abs(r.precision - 0.75) <= 1e-12, "precision");
    c.expect(std::abs(r.recall - 0.6) <= 1e-12, "recall");
    c.expect(std::abs(r.f1 - 2.0 / 3.0) <= 1e-12, "f1");
    char buf[96];
    std::snprintf(buf, sizeof buf, "P=%.12g R=%.12g F1=%.12g", r.precision, r.recall, r.f1);
    c.detail = buf;
  });

  std::printf("%d of 10 criteria failed\n", failed_criteria);
  return failed_criteria == 0 ? 0 : 1;
}
