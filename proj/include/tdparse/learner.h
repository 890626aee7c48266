#ifndef TDPARSE_LEARNER_H_
#define TDPARSE_LEARNER_H_

// Latent-variable max-violation perceptron. Reference derivations come from
// forced decoding: an exhaustive pruned search under a time limit, then a
// model-guided beam search for the examples the first pass missed.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdparse/dataset.h"
#include "tdparse/features.h"
#include "tdparse/parser.h"

namespace tdparse {

struct TrainingExample {
  Example example;
  std::vector<std::vector<Action>> references;  // full derivations of gold

  bool covered() const { return !references.empty(); }
  PrefixTrie reference_trie() const;
};

std::vector<TrainingExample> make_training_set(std::vector<Example> examples);

struct TrainerConfig {
  int iterations = 20;
  std::size_t beam_width = 16;
  double pass1_time_limit = 60.0;  // seconds per example
  std::size_t pass2_beam = 1024;
  bool averaging = true;
  bool early_update = false;
  std::uint64_t seed = 1;
  int workers = 1;
  std::optional<Type> goal_type;
  FeatureTemplateSet templates = FeatureTemplateSet::default_set();
};

struct CoverageReport {
  std::size_t total = 0;
  std::size_t covered = 0;
  std::size_t newly_covered = 0;
  std::size_t timed_out = 0;
  std::vector<int> uncovered;  // example ids

  double coverage() const {
    return total ? static_cast<double>(covered) / total : 0.0;
  }
};

// Fills reference sets by pruned exhaustive search toward each gold MR.
// Examples are independent, so `workers` threads share the work.
CoverageReport forced_decode_pass1(std::vector<TrainingExample>& data,
                                   const Domain& d, const TrainerConfig& cfg);

// Beam search guided by `model` (same pruning) for still-uncovered examples.
CoverageReport forced_decode_pass2(std::vector<TrainingExample>& data,
                                   const Domain& d, const Model& model,
                                   const TrainerConfig& cfg);

struct UpdateRecord {
  bool updated = false;
  int step = -1;              // i*, number of actions in the compared prefixes
  double violation = 0.0;     // score(d-) - score(d+) at i*
  FeatureVector delta;        // Phi(d+) - Phi(d-)
  std::vector<Action> good;   // d+ at i*
  std::vector<Action> bad;    // d- at i*
  bool decoded_correct = false;  // unconstrained best equals gold
};

// Decodes with `model`, picks the step with the largest violation and adds
// Phi(d+) - Phi(d-) there to `model.weights` (and to `accumulated` scaled by
// `counter` when averaging). Ties between steps go to the later step; steps
// where both prefixes have identical features are never chosen.
UpdateRecord max_violation_update(const TrainingExample& ex, const Domain& d,
                                  Model& model, const TrainerConfig& cfg,
                                  WeightVector* accumulated = nullptr,
                                  double counter = 1.0);

struct EpochStats {
  int epoch = 0;
  std::size_t examples = 0;
  std::size_t updates = 0;
  std::size_t correct = 0;  // unconstrained best equals gold while training
};

using EpochCallback = std::function<void(const EpochStats&)>;

// `iterations` epochs over the covered examples in seeded shuffled order.
// Throws std::runtime_error when nothing is covered.
Model train(const std::vector<TrainingExample>& data, const Domain& d,
            const TrainerConfig& cfg, const EpochCallback& on_epoch = {});

// Configuration echo stored in model files.
void record_config(Model& m, const TrainerConfig& cfg);

// Reference cache: header line, then per example `example<TAB>id<TAB>question`
// followed by one action-code line per derivation.
std::string save_references(const std::vector<TrainingExample>& data);
// Restores references into examples matched by id and question text.
void load_references(std::string_view text, std::vector<TrainingExample>& data);

}  // namespace tdparse

#endif  // TDPARSE_LEARNER_H_
