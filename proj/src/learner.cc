#include "tdparse/learner.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tdparse {

namespace {

constexpr const char* kReferenceHeader = "tdparse-references v1";

std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

// Runs job(k) for k in [0, n) on up to `workers` threads. Jobs write to
// distinct slots, so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
  const std::size_t threads =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < n;) {
        try {
          job(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

const StatePtr* best_outside(const std::vector<StatePtr>& beam, const PrefixTrie& trie) {
  for (const auto& s : beam)
    if (trie.find(s->actions()) < 0) return &s;
  return nullptr;
}

}  // namespace

PrefixTrie TrainingExample::reference_trie() const {
  PrefixTrie trie;
  for (const auto& r : references) trie.insert(r);
  return trie;
}

std::vector<TrainingExample> make_training_set(std::vector<Example> examples) {
  std::vector<TrainingExample> out;
  out.reserve(examples.size());
  for (auto& e : examples) out.push_back({std::move(e), {}});
  return out;
}

// ---------------------------------------------------------------------------
// Forced decoding

CoverageReport forced_decode_pass1(std::vector<TrainingExample>& data,
                                   const Domain& d, const TrainerConfig& cfg) {
  TransitionSystem ts(d, nullptr, cfg.goal_type);
  std::vector<char> timed_out(data.size(), 0);
  parallel_for(data.size(), cfg.workers, [&](std::size_t k) {
    TrainingExample& ex = data[k];
    Pruner pruner(ex.example.gold);
    auto r = enumerate_derivations(ts, ex.example.sentence, &pruner,
                                   cfg.pass1_time_limit);
    ex.references.clear();
    for (const auto& s : r.finals) ex.references.push_back(s->actions());
    timed_out[k] = !r.complete;
  });
  CoverageReport report;
  report.total = data.size();
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (data[k].covered()) {
      ++report.covered;
      ++report.newly_covered;
    } else {
      report.uncovered.push_back(data[k].example.id);
    }
    report.timed_out += timed_out[k];
  }
  return report;
}

CoverageReport forced_decode_pass2(std::vector<TrainingExample>& data,
                                   const Domain& d, const Model& model,
                                   const TrainerConfig& cfg) {
  TransitionSystem ts(d, &model, cfg.goal_type);
  std::vector<char> fresh(data.size(), 0);
  parallel_for(data.size(), cfg.workers, [&](std::size_t k) {
    TrainingExample& ex = data[k];
    if (ex.covered()) return;
    Pruner pruner(ex.example.gold);
    SearchOptions opts;
    opts.beam_width = cfg.pass2_beam;
    opts.pruner = &pruner;
    auto r = beam_search(ts, ex.example.sentence, opts);
    std::set<std::vector<Action>> seen;
    for (const auto& s : r.finals) {
      auto actions = s->actions();
      if (seen.insert(actions).second) ex.references.push_back(std::move(actions));
    }
    fresh[k] = ex.covered();
  });
  CoverageReport report;
  report.total = data.size();
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (data[k].covered())
      ++report.covered;
    else
      report.uncovered.push_back(data[k].example.id);
    report.newly_covered += fresh[k];
  }
  return report;
}

// ---------------------------------------------------------------------------
// Updates

UpdateRecord max_violation_update(const TrainingExample& ex, const Domain& d,
                                  Model& model, const TrainerConfig& cfg,
                                  WeightVector* accumulated, double counter) {
  if (!ex.covered())
    throw std::invalid_argument("max-violation update needs reference derivations");
  const Sentence& x = ex.example.sentence;
  const PrefixTrie trie = ex.reference_trie();
  TransitionSystem ts(d, &model, cfg.goal_type);

  SearchOptions opts;
  opts.beam_width = cfg.beam_width;
  opts.keep_history = true;
  SearchResult minus = beam_search(ts, x, opts);
  opts.constraint = &trie;
  SearchResult plus = beam_search(ts, x, opts);

  UpdateRecord rec;
  rec.decoded_correct =
      minus.best && mr_equal(minus.best->stack->item.value.expr, ex.example.gold);

  const std::size_t steps = std::min(plus.beams.size(), minus.beams.size());
  const ParserState* best_plus = nullptr;
  const ParserState* best_minus = nullptr;
  double best_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < steps; ++i) {
    if (plus.beams[i].empty()) continue;
    const StatePtr* bad = best_outside(minus.beams[i], trie);
    if (!bad) continue;
    const ParserState& good = *plus.beams[i][0];
    double violation = (*bad)->score - good.score;
    FeatureVector delta = derivation_features(good, x, d, model) -
                          derivation_features(**bad, x, d, model);
    if (delta.empty()) continue;
    bool reference_lost = std::none_of(
        minus.beams[i].begin(), minus.beams[i].end(),
        [&](const StatePtr& s) { return trie.find(s->actions()) >= 0; });
    if (violation >= best_violation || (cfg.early_update && reference_lost)) {
      best_violation = violation;
      best_plus = &good;
      best_minus = bad->get();
      rec.step = static_cast<int>(i) + 1;
      rec.violation = violation;
      rec.delta = std::move(delta);
      if (cfg.early_update && reference_lost) break;
    }
  }
  if (!best_plus || best_violation < 0) {
    rec.delta = FeatureVector();
    rec.step = -1;
    return rec;
  }
  rec.good = best_plus->actions();
  rec.bad = best_minus->actions();
  for (const auto& [f, c] : rec.delta.counts()) {
    model.weights.add(f, c);
    if (accumulated) accumulated->add(f, counter * c);
  }
  rec.updated = true;
  return rec;
}

// ---------------------------------------------------------------------------
// Training

void record_config(Model& m, const TrainerConfig& cfg) {
  m.meta["iterations"] = std::to_string(cfg.iterations);
  m.meta["beam"] = std::to_string(cfg.beam_width);
  m.meta["pass1_time_limit"] = format_number(cfg.pass1_time_limit);
  m.meta["pass2_beam"] = std::to_string(cfg.pass2_beam);
  m.meta["averaging"] = cfg.averaging ? "on" : "off";
  m.meta["early_update"] = cfg.early_update ? "on" : "off";
  m.meta["seed"] = std::to_string(cfg.seed);
  if (cfg.goal_type) m.meta["goal_type"] = cfg.goal_type->str();
  m.meta["templates"] = std::to_string(m.templates.size());
}

Model train(const std::vector<TrainingExample>& data, const Domain& d,
            const TrainerConfig& cfg, const EpochCallback& on_epoch) {
  std::vector<std::size_t> covered;
  for (std::size_t k = 0; k < data.size(); ++k)
    if (data[k].covered()) covered.push_back(k);
  if (covered.empty())
    throw std::runtime_error("no training example has a reference derivation");

  TransitionSystem check(d, nullptr, cfg.goal_type);
  for (std::size_t k : covered) {
    const auto& ex = data[k];
    for (const auto& r : ex.references) {
      StatePtr s = check.replay(r, ex.example.sentence);
      if (!check.is_final(*s, ex.example.sentence) ||
          !mr_equal(s->stack->item.value.expr, ex.example.gold))
        throw std::logic_error("reference derivation of example " +
                               std::to_string(ex.example.id) +
                               " does not reproduce its gold MR");
    }
  }

  Model model;
  model.templates = cfg.templates;
  record_config(model, cfg);
  WeightVector accumulated;
  double counter = 1.0;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order = covered;
  for (int epoch = 1; epoch <= cfg.iterations; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t k : order) {
      UpdateRecord rec = max_violation_update(data[k], d, model, cfg,
                                              &accumulated, counter);
      counter += 1.0;
      ++stats.examples;
      stats.updates += rec.updated;
      stats.correct += rec.decoded_correct;
    }
    if (on_epoch) on_epoch(stats);
  }
  if (cfg.averaging) {
    WeightVector averaged;
    for (const auto& [f, w] : model.weights.weights()) {
      double v = w - accumulated.get(f) / counter;
      if (v != 0.0) averaged.set(f, v);
    }
    model.weights = std::move(averaged);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Reference cache

std::string save_references(const std::vector<TrainingExample>& data) {
  std::string out = std::string(kReferenceHeader) + "\n";
  for (const auto& ex : data) {
    out += "example\t" + std::to_string(ex.example.id) + "\t" + ex.example.question + "\n";
    for (const auto& r : ex.references) out += actions_to_string(r) + "\n";
  }
  return out;
}

void load_references(std::string_view text, std::vector<TrainingExample>& data) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kReferenceHeader)
    throw ParseError("not a reference cache (missing '" +
                     std::string(kReferenceHeader) + "' header)");
  std::vector<std::vector<std::vector<Action>>> loaded(data.size());
  std::vector<char> seen(data.size(), 0);
  TrainingExample* current = nullptr;
  std::size_t current_index = 0;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    if (line.rfind("example\t", 0) == 0) {
      auto tab = line.find('\t', 8);
      if (tab == std::string::npos)
        throw ParseError("reference line " + std::to_string(n) + ": bad example header");
      int id = std::stoi(line.substr(8, tab - 8));
      std::string question = line.substr(tab + 1);
      if (id < 0 || id >= static_cast<int>(data.size()) ||
          data[id].example.question != question)
        throw ParseError("reference line " + std::to_string(n) +
                         ": example does not match the dataset");
      current = &data[id];
      current_index = static_cast<std::size_t>(id);
      seen[current_index] = 1;
      continue;
    }
    if (!current)
      throw ParseError("reference line " + std::to_string(n) + ": derivation before example");
    loaded[current_index].push_back(actions_from_string(line));
  }
  for (std::size_t k = 0; k < data.size(); ++k)
    if (!seen[k])
      throw ParseError("reference cache has no record for example " + std::to_string(k));
  for (std::size_t k = 0; k < data.size(); ++k) data[k].references = std::move(loaded[k]);
}

}  // namespace tdparse
