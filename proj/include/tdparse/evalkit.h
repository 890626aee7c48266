#ifndef TDPARSE_EVALKIT_H_
#define TDPARSE_EVALKIT_H_

// Exact-match evaluation: precision over parsed questions, recall over all
// questions, their harmonic mean, and decoding time.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tdparse/dataset.h"
#include "tdparse/features.h"
#include "tdparse/parser.h"

namespace tdparse {

struct SentenceOutcome {
  int id = 0;
  bool parsed = false;
  bool correct = false;
  std::string predicted;  // printed MR, empty when not parsed
  double seconds = 0.0;
  int actions = 0;
  int tokens = 0;
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t parsed = 0;
  std::size_t correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double seconds_total = 0.0;
  double seconds_per_sentence = 0.0;
  std::vector<SentenceOutcome> outcomes;
  std::vector<std::string> warnings;
};

// Fills precision, recall and F1 from the three counts; 0/0 is 0 (with a
// warning).
EvalReport make_report(std::size_t total, std::size_t parsed, std::size_t correct);

struct EvalOptions {
  std::size_t beam_width = 16;
  std::optional<Type> goal_type;
  int workers = 1;
};

EvalReport evaluate(const Model& model, const std::vector<Example>& data,
                    const Domain& d, const EvalOptions& opts);

std::string format_table(const EvalReport& r);
std::string format_key_values(const EvalReport& r);

}  // namespace tdparse

#endif  // TDPARSE_EVALKIT_H_
