#ifndef TDPARSE_FEATURES_H_
#define TDPARSE_FEATURES_H_

// Word-edge style features over (state, action) pairs, budgeted template
// combinations, sparse vectors and the linear model.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tdparse/lexicon.h"
#include "tdparse/state.h"

namespace tdparse {

enum class Atomic : int {
  kS0T, kS1T, kS2T,  // printed types of the top three stack items
  kS0L, kS0R, kS1L, kS1R, kS2L, kS2R,  // leftmost/rightmost span words
  kQ0, kQ1, kQ2,     // queue words
  kPred,             // grounded names of a shifted template
  kTid,              // shifted template id
  kAct,              // action name
};
inline constexpr int kNumAtomic = 15;

enum class FeatureClass { kType, kWord, kGrounding, kAction };

std::string_view atomic_name(Atomic a);
std::optional<Atomic> atomic_from_name(std::string_view name);
FeatureClass feature_class(Atomic a);

inline const std::string kNoneValue = "-NONE-";

using AtomicValues = std::array<std::string, kNumAtomic>;

AtomicValues atomic_features(const ParserState& s, const Action& a,
                             const Sentence& x, const Domain& d);

struct FeatureTemplate {
  std::string name;
  std::vector<Atomic> atoms;  // ACT is always conjoined
};

// Per-combination budget: each type atom costs `type_cost`, each word or
// grounding atom `other_cost`; a combination may spend at most `limit`.
struct FeatureBudget {
  int type_cost = 1;
  int other_cost = 3;
  int limit = 5;
};

class FeatureTemplateSet {
 public:
  // Every 1-, 2- and 3-way combination of non-action atoms within budget
  // (84 templates), in combination order.
  static FeatureTemplateSet default_set(const FeatureBudget& budget = {});
  // One template per line: `name: CLASS[,CLASS]*`.
  static FeatureTemplateSet parse(std::string_view text);

  std::string save() const;
  const std::vector<FeatureTemplate>& templates() const { return templates_; }
  std::size_t size() const { return templates_.size(); }

  static int cost(const FeatureTemplate& t, const FeatureBudget& budget = {});
  bool within_budget(const FeatureBudget& budget = {}) const;

  bool operator==(const FeatureTemplateSet& o) const;

 private:
  std::vector<FeatureTemplate> templates_;
};

// Sparse integer counts; zero entries are never stored.
class FeatureVector {
 public:
  void add(const std::string& feature, int count = 1);
  void add(const FeatureVector& other, int scale = 1);
  int get(const std::string& feature) const;
  bool empty() const { return counts_.empty(); }
  std::size_t size() const { return counts_.size(); }
  long long squared_norm() const;
  const std::unordered_map<std::string, int>& counts() const { return counts_; }
  // Sorted copy for printing and comparisons.
  std::map<std::string, int> sorted() const;

  bool operator==(const FeatureVector& o) const { return counts_ == o.counts_; }

 private:
  std::unordered_map<std::string, int> counts_;
};

class WeightVector {
 public:
  double get(const std::string& feature) const;
  void add(const std::string& feature, double value);
  void set(const std::string& feature, double value);
  std::size_t size() const { return weights_.size(); }
  const std::unordered_map<std::string, double>& weights() const {
    return weights_;
  }

 private:
  std::unordered_map<std::string, double> weights_;
};

double score(const FeatureVector& v, const WeightVector& w);
FeatureVector operator-(const FeatureVector& a, const FeatureVector& b);

class Model {
 public:
  FeatureTemplateSet templates = FeatureTemplateSet::default_set();
  WeightVector weights;
  std::map<std::string, std::string> meta;  // training configuration echo

  // One feature string per template: `<name>=<v1>|<v2>|...|<action>`.
  std::vector<std::string> features(const ParserState& s, const Action& a,
                                    const Sentence& x, const Domain& d) const;
  FeatureVector extract(const ParserState& s, const Action& a,
                        const Sentence& x, const Domain& d) const;
  double score(const ParserState& s, const Action& a, const Sentence& x,
               const Domain& d) const;

  // Versioned text format: header, `@meta`, `@template` lines, then
  // `feature<TAB>weight` sorted by feature.
  std::string save() const;
  static Model parse(std::string_view text);
  void save_file(const std::string& path) const;
  static Model load_file(const std::string& path);
};

// Sum of per-action features along a state's history.
FeatureVector derivation_features(const ParserState& s, const Sentence& x,
                                  const Domain& d, const Model& m);

}  // namespace tdparse

#endif  // TDPARSE_FEATURES_H_
