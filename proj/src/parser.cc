#include "tdparse/parser.h"

#include <algorithm>
#include <chrono>
#include <span>

namespace tdparse {

Sentence make_sentence(std::string_view text) { return {tokenize(text), {}}; }

// ---------------------------------------------------------------------------
// Pruner

namespace {

std::map<std::string, int> count_atoms(const Expr& e) {
  std::vector<std::string> atoms;
  e.collect_atoms(atoms);
  std::map<std::string, int> out;
  for (const auto& a : atoms) ++out[a];
  return out;
}

}  // namespace

Pruner::Pruner(const Expr& target)
    : target_(target), atom_counts_(count_atoms(target)),
      subterms_(subterm_keys(target)) {}

bool Pruner::allow_item(const Expr& e) const {
  if (e.is_lam()) {
    std::vector<std::string> atoms;
    e.collect_atoms(atoms);
    return std::all_of(atoms.begin(), atoms.end(), [&](const std::string& a) {
      return atom_counts_.count(a) > 0;
    });
  }
  if (e.is_atom() || (e.is_app() && e.head().is_atom()))
    return subterms_.count(canonical_key(e, false)) > 0;
  return true;
}

bool Pruner::allow_shift(const ParserState& s, const LexiconEntry& e) const {
  std::map<std::string, int> used = count_atoms(e.tmpl.expr);
  for (const StackNode* n = s.stack.get(); n; n = n->below.get()) {
    std::vector<std::string> atoms;
    n->item.value.expr.collect_atoms(atoms);
    for (const auto& a : atoms)
      if (auto it = used.find(a); it != used.end()) ++it->second;
  }
  for (const auto& [name, count] : used) {
    auto it = atom_counts_.find(name);
    if (it == atom_counts_.end() || count > it->second) return false;
  }
  return allow_item(e.tmpl.expr);
}

// ---------------------------------------------------------------------------
// Transition system

namespace {

void collect_expr_vars(const Expr& e, std::vector<TypeVar>& out) {
  e.type().collect_vars(out);
  switch (e.kind()) {
    case Expr::Kind::kLam: collect_expr_vars(e.body(), out); break;
    case Expr::Kind::kApp:
      collect_expr_vars(e.fun(), out);
      collect_expr_vars(e.arg(), out);
      break;
    default: break;
  }
}

std::string paren(const Type& t) {
  return t.is_arrow() ? "(" + t.str() + ")" : t.str();
}

// Bindings made by a reduce plus the subtyping judgement it relied on.
std::string application_note(const TypedResult& fun, const TypedResult& arg,
                             const TypedResult& result) {
  std::vector<std::string> notes;
  Binding fresh;
  auto before = Binding::merge(fun.binding, arg.binding);
  for (const auto& [v, t] : result.binding.assignments())
    if (!before || !before->find(v)) fresh.assign(v, resolve(t, result.binding));
  if (!fresh.empty()) notes.push_back("binding: " + fresh.str());
  Type param = resolve(resolve(fun.type, result.binding).input(), result.binding);
  Type given = resolve(arg.type, result.binding);
  if (param != given) {
    std::string note;
    if (param.is_arrow() && given.is_arrow() && param.input() != given.input())
      note = paren(param.input()) + "<:" + paren(given.input()) + " => ";
    notes.push_back(note + paren(given) + "<:" + paren(param));
  }
  std::string out;
  for (const auto& n : notes) out += (out.empty() ? "" : "; ") + n;
  return out;
}

}  // namespace

TransitionSystem::TransitionSystem(const Domain& d, const Model* model,
                                   std::optional<Type> goal_type)
    : domain_(&d), model_(model), goal_(std::move(goal_type)) {
  if (goal_) d.hierarchy().check_known(*goal_);
}

StatePtr TransitionSystem::initial() const {
  return std::make_shared<const ParserState>();
}

double TransitionSystem::action_score(const ParserState& s, const Action& a,
                                      const Sentence& x) const {
  return model_ ? model_->score(s, a, x, *domain_) : 0.0;
}

StatePtr TransitionSystem::make_shift(const StatePtr& s, const ShiftCandidate& c,
                                      const Sentence& x) const {
  auto next = std::make_shared<ParserState>(*s);
  const LexiconEntry& e = *c.entry;
  std::vector<TypeVar> vars;
  collect_expr_vars(e.tmpl.expr, vars);
  std::map<TypeVar, Type> renaming;
  for (const auto& v : vars)
    if (!renaming.count(v)) renaming.emplace(v, Type::var(v.name, next->next_instance++));
  Expr value = renaming.empty() ? e.tmpl.expr : map_types(e.tmpl.expr, renaming);
  Type type = value.type();
  Action a = Action::shift(c.tokens_consumed, e.template_id);
  StackItem item{TypedResult{std::move(value), std::move(type), {}}, s->queue_pos,
                 s->queue_pos + c.tokens_consumed - 1};
  next->stack = std::make_shared<const StackNode>(
      StackNode{std::move(item), s->stack, s->stack_size() + 1});
  next->queue_pos += c.tokens_consumed;
  next->n_actions += 1;
  next->score = s->score + action_score(*s, a, x);
  next->prev = s;
  next->last = a;
  next->typing.clear();
  return next;
}

StatePtr TransitionSystem::make_reduce(const StatePtr& s, const Action& a,
                                       const Sentence& x) const {
  if (s->stack_size() < 2) return nullptr;
  const StackItem& top = s->stack->item;
  const StackItem& second = s->stack->below->item;
  const TypeHierarchy& h = domain_->hierarchy();
  std::optional<TypedResult> r;
  std::string note;
  switch (a.kind) {
    case ActionKind::kReduceRight:
      r = apply(second.value, top.value, h);
      if (r) note = application_note(second.value, top.value, *r);
      break;
    case ActionKind::kReduceLeft:
      r = apply(top.value, second.value, h);
      if (r) note = application_note(top.value, second.value, *r);
      break;
    case ActionKind::kUnion:
      r = conjoin(second.value, top.value, h);
      if (r)
        note = "glb(" + resolve(second.value.type, r->binding).input().str() + "," +
               resolve(top.value.type, r->binding).input().str() + ")=" +
               r->type.input().str();
      break;
    default: return nullptr;
  }
  if (!r) return nullptr;
  auto next = std::make_shared<ParserState>(*s);
  StackItem item{std::move(*r), second.left, top.right};
  next->stack = std::make_shared<const StackNode>(
      StackNode{std::move(item), s->stack->below->below, s->stack_size() - 1});
  next->n_actions += 1;
  next->score = s->score + action_score(*s, a, x);
  next->prev = s;
  next->last = a;
  next->typing = std::move(note);
  return next;
}

std::vector<StatePtr> TransitionSystem::successors(const StatePtr& s,
                                                   const Sentence& x,
                                                   const Pruner* pruner) const {
  std::vector<StatePtr> out;
  if (s->queue_pos < x.size()) {
    auto next = std::make_shared<ParserState>(*s);
    next->queue_pos += 1;
    next->n_actions += 1;
    next->score = s->score + action_score(*s, Action::skip(), x);
    next->prev = s;
    next->last = Action::skip();
    next->typing.clear();
    out.push_back(std::move(next));

    std::span<const std::string> queue(x.tokens.data() + s->queue_pos,
                                       x.tokens.size() - s->queue_pos);
    std::span<const std::string> tags;
    if (!x.tags.empty())
      tags = std::span<const std::string>(x.tags.data() + s->queue_pos,
                                          x.tags.size() - s->queue_pos);
    for (const auto& c : domain_->lookup_shifts(queue, tags)) {
      if (pruner && !pruner->allow_shift(*s, *c.entry)) continue;
      out.push_back(make_shift(s, c, x));
    }
  }
  if (s->stack_size() >= 2) {
    for (Action a : {Action::reduce_right(), Action::reduce_left(), Action::conjoin()}) {
      StatePtr next = make_reduce(s, a, x);
      if (!next) continue;
      if (pruner && !pruner->allow_item(next->stack->item.value.expr)) continue;
      out.push_back(std::move(next));
    }
  }
  return out;
}

std::vector<Action> TransitionSystem::legal_actions(const StatePtr& s,
                                                    const Sentence& x) const {
  std::vector<Action> out;
  for (const auto& n : successors(s, x)) out.push_back(n->last);
  return out;
}

StatePtr TransitionSystem::try_step(const StatePtr& s, const Action& a,
                                    const Sentence& x) const {
  switch (a.kind) {
    case ActionKind::kSkip:
    case ActionKind::kShift:
      for (auto& n : successors(s, x))
        if (n->last == a) return n;
      return nullptr;
    default:
      return make_reduce(s, a, x);
  }
}

StatePtr TransitionSystem::step(const StatePtr& s, const Action& a,
                                const Sentence& x) const {
  StatePtr next = try_step(s, a, x);
  if (!next)
    throw ParseError("illegal action " + a.code() + " at step " +
                     std::to_string(s->n_actions + 1));
  return next;
}

StatePtr TransitionSystem::replay(const std::vector<Action>& actions,
                                  const Sentence& x) const {
  StatePtr s = initial();
  for (const auto& a : actions) s = step(s, a, x);
  return s;
}

bool TransitionSystem::is_final(const ParserState& s, const Sentence& x) const {
  if (s.queue_pos < x.size() || s.stack_size() != 1) return false;
  const Type& t = s.stack->item.value.type;
  if (!t.is_base()) return false;
  return !goal_ || is_subtype(t, *goal_, domain_->hierarchy());
}

// ---------------------------------------------------------------------------
// Prefix trie

PrefixTrie::PrefixTrie() : nodes_(1) {}

void PrefixTrie::insert(const std::vector<Action>& actions) {
  int node = 0;
  for (const auto& a : actions) {
    auto it = nodes_[node].next.find(a);
    if (it == nodes_[node].next.end()) {
      int id = static_cast<int>(nodes_.size());
      nodes_[node].next.emplace(a, id);
      nodes_.emplace_back();
      node = id;
    } else {
      node = it->second;
    }
  }
  if (!nodes_[node].terminal) {
    nodes_[node].terminal = true;
    ++sequences_;
  }
}

int PrefixTrie::child(int node, const Action& a) const {
  if (node < 0) return -1;
  auto it = nodes_[node].next.find(a);
  return it == nodes_[node].next.end() ? -1 : it->second;
}

int PrefixTrie::find(const std::vector<Action>& actions) const {
  int node = 0;
  for (const auto& a : actions) {
    node = child(node, a);
    if (node < 0) return -1;
  }
  return node;
}

bool PrefixTrie::contains_prefix(const ParserState& s) const {
  return find(s.actions()) >= 0;
}

bool PrefixTrie::contains_full(const ParserState& s) const {
  int node = find(s.actions());
  return node >= 0 && nodes_[node].terminal;
}

// ---------------------------------------------------------------------------
// Search

SearchResult beam_search(const TransitionSystem& ts, const Sentence& x,
                         const SearchOptions& opts) {
  SearchResult result;
  if (opts.beam_width == 0) return result;
  // Trie node of each state in the current beam (constrained search only).
  std::vector<StatePtr> beam{ts.initial()};
  std::vector<int> nodes{0};
  while (!beam.empty()) {
    std::vector<StatePtr> next;
    std::vector<int> next_nodes;
    for (std::size_t k = 0; k < beam.size(); ++k) {
      ++result.expanded;
      for (auto& n : ts.successors(beam[k], x, opts.pruner)) {
        int node = 0;
        if (opts.constraint) {
          node = opts.constraint->child(nodes[k], n->last);
          if (node < 0) continue;
        }
        next.push_back(std::move(n));
        next_nodes.push_back(node);
      }
    }
    if (next.empty()) break;
    std::vector<std::size_t> order(next.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return next[a]->score > next[b]->score;
    });
    if (order.size() > opts.beam_width) order.resize(opts.beam_width);
    beam.clear();
    nodes.clear();
    for (std::size_t k : order) {
      beam.push_back(next[k]);
      nodes.push_back(next_nodes[k]);
    }
    if (opts.keep_history) result.beams.push_back(beam);
    std::vector<StatePtr> live;
    std::vector<int> live_nodes;
    for (std::size_t k = 0; k < beam.size(); ++k) {
      const StatePtr& s = beam[k];
      if (ts.is_final(*s, x)) {
        bool accept = !opts.pruner ||
                      opts.pruner->accepts_final(s->stack->item.value.expr);
        if (accept) {
          result.finals.push_back(s);
          if (!result.best || s->score > result.best->score) result.best = s;
        }
        continue;
      }
      live.push_back(s);
      live_nodes.push_back(nodes[k]);
    }
    beam = std::move(live);
    nodes = std::move(live_nodes);
  }
  return result;
}

namespace {

struct Enumerator {
  const TransitionSystem& ts;
  const Sentence& x;
  const Pruner* pruner;
  std::chrono::steady_clock::time_point deadline;
  bool timed = true;
  EnumerationResult result;

  bool out_of_time() {
    if (!timed || (result.visited & 255) != 0) return !result.complete;
    if (std::chrono::steady_clock::now() > deadline) result.complete = false;
    return !result.complete;
  }

  void visit(const StatePtr& s) {
    ++result.visited;
    if (out_of_time()) return;
    if (ts.is_final(*s, x)) {
      if (!pruner || pruner->accepts_final(s->stack->item.value.expr))
        result.finals.push_back(s);
      return;
    }
    for (const auto& n : ts.successors(s, x, pruner)) {
      visit(n);
      if (!result.complete) return;
    }
  }
};

}  // namespace

EnumerationResult enumerate_derivations(const TransitionSystem& ts,
                                        const Sentence& x, const Pruner* pruner,
                                        double time_limit_seconds) {
  Enumerator e{ts, x, pruner, {}};
  e.timed = time_limit_seconds > 0;
  if (e.timed)
    e.deadline = std::chrono::steady_clock::now() +
                 std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                     std::chrono::duration<double>(time_limit_seconds));
  e.visit(ts.initial());
  return std::move(e.result);
}

void for_each_reachable_state(const TransitionSystem& ts, const Sentence& x,
                              const std::function<void(const StatePtr&)>& visit) {
  std::vector<StatePtr> todo{ts.initial()};
  while (!todo.empty()) {
    StatePtr s = std::move(todo.back());
    todo.pop_back();
    visit(s);
    auto next = ts.successors(s, x);
    for (auto it = next.rbegin(); it != next.rend(); ++it) todo.push_back(std::move(*it));
  }
}

// ---------------------------------------------------------------------------
// Traces

std::string item_type_string(const StackItem& item) {
  return resolve(item.value.type, item.value.binding).str();
}

std::string stack_string(const ParserState& s, const Domain& d) {
  auto items = s.items_bottom_up();
  if (items.empty()) return "(empty)";
  std::string out;
  for (const StackItem* item : items) {
    if (!out.empty()) out += "  ";
    out += d.print(item->value.expr) + ":" + item_type_string(*item);
  }
  return out;
}

std::string action_label(const Action& a, const Sentence& x, int queue_pos) {
  if (a.kind != ActionKind::kShift) return std::string(a.name());
  std::string out = "sh_";
  for (int k = 0; k < a.tokens; ++k) {
    if (k) out += "_";
    out += x.tokens[queue_pos + k];
  }
  return out;
}

namespace {

std::string queue_head(const ParserState& s, const Sentence& x) {
  int left = x.size() - s.queue_pos;
  if (left <= 0) return "-";
  return x.tokens[s.queue_pos] + (left > 1 ? "..." : "");
}

}  // namespace

std::vector<std::string> trace_lines(const ParserState& s, const Sentence& x,
                                     const Domain& d) {
  std::vector<std::string> out;
  auto path = s.path();
  for (std::size_t k = 1; k < path.size(); ++k) {
    const ParserState& cur = *path[k];
    std::string line = std::to_string(k) + "\t" +
                       action_label(cur.last, x, path[k - 1]->queue_pos) + "\t" +
                       stack_string(cur, d) + "\t" + queue_head(cur, x);
    if (!cur.typing.empty()) line += "\t" + cur.typing;
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace tdparse
