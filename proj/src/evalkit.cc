#include "tdparse/evalkit.h"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <thread>

namespace tdparse {

EvalReport make_report(std::size_t total, std::size_t parsed, std::size_t correct) {
  EvalReport r;
  r.total = total;
  r.parsed = parsed;
  r.correct = correct;
  if (parsed > 0) {
    r.precision = static_cast<double>(correct) / static_cast<double>(parsed);
  } else {
    r.warnings.push_back("no question was parsed; precision set to 0");
  }
  if (total > 0) {
    r.recall = static_cast<double>(correct) / static_cast<double>(total);
  } else {
    r.warnings.push_back("empty test set; recall set to 0");
  }
  if (r.precision + r.recall > 0.0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

EvalReport evaluate(const Model& model, const std::vector<Example>& data,
                    const Domain& d, const EvalOptions& opts) {
  TransitionSystem ts(d, &model, opts.goal_type);
  std::vector<SentenceOutcome> outcomes(data.size());
  auto run = [&](std::size_t k) {
    const Example& ex = data[k];
    SearchOptions so;
    so.beam_width = opts.beam_width;
    auto start = std::chrono::steady_clock::now();
    SearchResult r = beam_search(ts, ex.sentence, so);
    auto stop = std::chrono::steady_clock::now();
    SentenceOutcome& o = outcomes[k];
    o.id = ex.id;
    o.tokens = ex.sentence.size();
    o.seconds = std::chrono::duration<double>(stop - start).count();
    if (r.best) {
      const Expr& e = r.best->stack->item.value.expr;
      o.parsed = true;
      o.correct = mr_equal(e, ex.gold);
      o.predicted = d.print(e);
      o.actions = r.best->n_actions;
    }
  };
  auto start = std::chrono::steady_clock::now();
  const std::size_t threads = std::min<std::size_t>(
      data.size(), static_cast<std::size_t>(std::max(1, opts.workers)));
  if (threads <= 1) {
    for (std::size_t k = 0; k < data.size(); ++k) run(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < data.size();) run(k);
      });
    for (auto& th : pool) th.join();
  }
  auto stop = std::chrono::steady_clock::now();

  std::size_t parsed = 0, correct = 0;
  for (const auto& o : outcomes) {
    parsed += o.parsed;
    correct += o.correct;
  }
  EvalReport r = make_report(data.size(), parsed, correct);
  r.outcomes = std::move(outcomes);
  r.seconds_total = std::chrono::duration<double>(stop - start).count();
  r.seconds_per_sentence = data.empty() ? 0.0 : r.seconds_total / data.size();
  return r;
}

std::string format_table(const EvalReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-10s %8s %8s %8s %10s %10s %10s %12s\n"
                "%-10s %8zu %8zu %8zu %10.4f %10.4f %10.4f %12.6f\n",
                "", "total", "parsed", "correct", "precision", "recall", "f1",
                "sec/sent", "result", r.total, r.parsed, r.correct, r.precision,
                r.recall, r.f1, r.seconds_per_sentence);
  return buf;
}

std::string format_key_values(const EvalReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "total=%zu\nparsed=%zu\ncorrect=%zu\nprecision=%.12g\n"
                "recall=%.12g\nf1=%.12g\nseconds_total=%.6f\n"
                "seconds_per_sentence=%.6f\n",
                r.total, r.parsed, r.correct, r.precision, r.recall, r.f1,
                r.seconds_total, r.seconds_per_sentence);
  return buf;
}

}  // namespace tdparse
