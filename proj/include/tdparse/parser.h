#ifndef TDPARSE_PARSER_H_
#define TDPARSE_PARSER_H_

// The skip/shift/reduce transition system over typed stack items, beam
// search bucketed by action count, exhaustive enumeration, and the pruning
// used when a derivation must produce a known target expression.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tdparse/features.h"
#include "tdparse/lexicon.h"
#include "tdparse/state.h"

namespace tdparse {

inline constexpr std::size_t kUnbounded = SIZE_MAX;

Sentence make_sentence(std::string_view text);

// Restricts search to states that can still grow into `target`: every atom
// shifted must occur in the target (no more often than it does there) and
// every stack item must be a subterm of it, or, for abstractions built by
// union, use only the target's atoms.
class Pruner {
 public:
  explicit Pruner(const Expr& target);

  const Expr& target() const { return target_; }
  bool allow_shift(const ParserState& s, const LexiconEntry& e) const;
  bool allow_item(const Expr& e) const;
  bool accepts_final(const Expr& e) const { return mr_equal(e, target_); }

 private:
  Expr target_;
  std::map<std::string, int> atom_counts_;
  std::set<std::string> subterms_;
};

class TransitionSystem {
 public:
  TransitionSystem(const Domain& d, const Model* model = nullptr,
                   std::optional<Type> goal_type = std::nullopt);

  const Domain& domain() const { return *domain_; }
  const Model* model() const { return model_; }

  StatePtr initial() const;

  // Every legal successor in canonical action order: skip, shifts (lookup
  // order), reduce-right, reduce-left, union. A pruner drops successors that
  // cannot reach its target.
  std::vector<StatePtr> successors(const StatePtr& s, const Sentence& x,
                                   const Pruner* pruner = nullptr) const;
  std::vector<Action> legal_actions(const StatePtr& s, const Sentence& x) const;

  // Successor for one action; nullptr when the action is illegal.
  StatePtr try_step(const StatePtr& s, const Action& a, const Sentence& x) const;
  // Throws ParseError when the action is illegal.
  StatePtr step(const StatePtr& s, const Action& a, const Sentence& x) const;
  StatePtr replay(const std::vector<Action>& actions, const Sentence& x) const;

  // Queue exhausted, one stack item, base type (below the goal type if set).
  bool is_final(const ParserState& s, const Sentence& x) const;

 private:
  StatePtr make_shift(const StatePtr& s, const ShiftCandidate& c,
                      const Sentence& x) const;
  StatePtr make_reduce(const StatePtr& s, const Action& a, const Sentence& x) const;
  double action_score(const ParserState& s, const Action& a,
                      const Sentence& x) const;

  const Domain* domain_;
  const Model* model_;
  std::optional<Type> goal_;
};

// Prefix-closed set of action sequences.
class PrefixTrie {
 public:
  PrefixTrie();
  void insert(const std::vector<Action>& actions);
  bool empty() const { return sequences_ == 0; }
  std::size_t sequences() const { return sequences_; }
  // Node reached by following `actions` from the root; -1 if absent.
  int find(const std::vector<Action>& actions) const;
  int child(int node, const Action& a) const;
  bool contains_prefix(const ParserState& s) const;
  bool contains_full(const ParserState& s) const;

 private:
  struct Node {
    std::map<Action, int> next;
    bool terminal = false;
  };
  std::vector<Node> nodes_;
  std::size_t sequences_ = 0;
};

struct SearchOptions {
  std::size_t beam_width = 16;
  const Pruner* pruner = nullptr;       // forced decoding toward a target
  const PrefixTrie* constraint = nullptr;  // keep reference prefixes only
  bool keep_history = false;            // record the beam of every step
};

struct SearchResult {
  StatePtr best;                 // highest-scoring final state, or null
  std::vector<StatePtr> finals;  // every final state that survived
  // beams[i] holds the surviving states after i+1 actions (sorted by score).
  std::vector<std::vector<StatePtr>> beams;
  std::size_t expanded = 0;
};

// States are bucketed by number of actions; each bucket keeps its top
// `beam_width` states by score (stable, so ties keep insertion order).
SearchResult beam_search(const TransitionSystem& ts, const Sentence& x,
                         const SearchOptions& opts);

struct EnumerationResult {
  std::vector<StatePtr> finals;  // in depth-first order
  bool complete = true;          // false when the time limit cut it short
  std::size_t visited = 0;
};

// Depth-first enumeration of full derivations. With a pruner only
// derivations whose result equals the pruner's target are kept.
EnumerationResult enumerate_derivations(const TransitionSystem& ts,
                                        const Sentence& x,
                                        const Pruner* pruner,
                                        double time_limit_seconds);

// Visits every reachable state (including the initial one).
void for_each_reachable_state(const TransitionSystem& ts, const Sentence& x,
                              const std::function<void(const StatePtr&)>& visit);

// One tab-separated line per action: step, action, stack after the action
// (`expr:type` items), queue head, typing judgement.
std::vector<std::string> trace_lines(const ParserState& s, const Sentence& x,
                                     const Domain& d);
std::string stack_string(const ParserState& s, const Domain& d);
std::string item_type_string(const StackItem& item);
std::string action_label(const Action& a, const Sentence& x, int queue_pos);

}  // namespace tdparse

#endif  // TDPARSE_PARSER_H_
