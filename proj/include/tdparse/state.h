#ifndef TDPARSE_STATE_H_
#define TDPARSE_STATE_H_

// Parser configurations. States are immutable and share their stack and
// history with the state they were derived from, so a beam of hypotheses is
// a tree of persistent states.

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tdparse/expr.h"

namespace tdparse {

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;  // empty, or one tag per token

  int size() const { return static_cast<int>(tokens.size()); }
};

enum class ActionKind : std::uint8_t {
  kSkip,
  kShift,
  kReduceRight,  // second-from-top applied to top
  kReduceLeft,   // top applied to second-from-top
  kUnion,
};

struct Action {
  ActionKind kind = ActionKind::kSkip;
  int tokens = 0;        // shift only
  int template_id = -1;  // shift only

  static Action skip() { return {ActionKind::kSkip}; }
  static Action shift(int tokens, int template_id) {
    return {ActionKind::kShift, tokens, template_id};
  }
  static Action reduce_right() { return {ActionKind::kReduceRight}; }
  static Action reduce_left() { return {ActionKind::kReduceLeft}; }
  static Action conjoin() { return {ActionKind::kUnion}; }

  bool is_reduce() const {
    return kind == ActionKind::kReduceRight || kind == ActionKind::kReduceLeft ||
           kind == ActionKind::kUnion;
  }

  // Short name used in features: sk, sh, reR, reL, un.
  std::string_view name() const;
  // Replayable code: sk, sh:<tokens>:<template>, reR, reL, un.
  std::string code() const;
  static Action parse(std::string_view code);

  auto operator<=>(const Action&) const = default;
};

std::string actions_to_string(const std::vector<Action>& actions);
std::vector<Action> actions_from_string(std::string_view text);

struct StackItem {
  TypedResult value;
  int left = 0;   // first token of the span
  int right = 0;  // last token of the span
};

struct StackNode {
  StackItem item;
  std::shared_ptr<const StackNode> below;
  int size = 1;
};

class ParserState;
using StatePtr = std::shared_ptr<const ParserState>;

class ParserState {
 public:
  int queue_pos = 0;
  int n_actions = 0;
  double score = 0.0;
  std::uint32_t next_instance = 1;  // fresh type-variable instances
  std::shared_ptr<const StackNode> stack;
  StatePtr prev;
  Action last;
  std::string typing;  // judgement made by the last action, for traces

  int stack_size() const { return stack ? stack->size : 0; }
  // 0 is the top; nullptr past the bottom.
  const StackItem* at(int depth) const;
  std::vector<const StackItem*> items_bottom_up() const;
  std::vector<Action> actions() const;
  // States from the initial one up to this one.
  std::vector<const ParserState*> path() const;
};

}  // namespace tdparse

#endif  // TDPARSE_STATE_H_
