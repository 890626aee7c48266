#include "tdparse/state.h"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace tdparse {

std::string_view Action::name() const {
  switch (kind) {
    case ActionKind::kSkip: return "sk";
    case ActionKind::kShift: return "sh";
    case ActionKind::kReduceRight: return "reR";
    case ActionKind::kReduceLeft: return "reL";
    case ActionKind::kUnion: return "un";
  }
  return "?";
}

std::string Action::code() const {
  if (kind == ActionKind::kShift)
    return "sh:" + std::to_string(tokens) + ":" + std::to_string(template_id);
  return std::string(name());
}

namespace {

int to_int(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError("bad action code '" + std::string(whole) + "'");
  return v;
}

}  // namespace

Action Action::parse(std::string_view code) {
  if (code == "sk") return skip();
  if (code == "reR") return reduce_right();
  if (code == "reL") return reduce_left();
  if (code == "un") return conjoin();
  if (code.substr(0, 3) == "sh:") {
    auto rest = code.substr(3);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos)
      throw ParseError("bad action code '" + std::string(code) + "'");
    int tokens = to_int(rest.substr(0, colon), code);
    int id = to_int(rest.substr(colon + 1), code);
    if (tokens < 1 || id < 0)
      throw ParseError("bad action code '" + std::string(code) + "'");
    return shift(tokens, id);
  }
  throw ParseError("bad action code '" + std::string(code) + "'");
}

std::string actions_to_string(const std::vector<Action>& actions) {
  std::string out;
  for (const auto& a : actions) {
    if (!out.empty()) out += ' ';
    out += a.code();
  }
  return out;
}

std::vector<Action> actions_from_string(std::string_view text) {
  std::vector<Action> out;
  std::istringstream in{std::string(text)};
  std::string code;
  while (in >> code) out.push_back(Action::parse(code));
  return out;
}

const StackItem* ParserState::at(int depth) const {
  const StackNode* n = stack.get();
  for (int k = 0; n && k < depth; ++k) n = n->below.get();
  return n ? &n->item : nullptr;
}

std::vector<const StackItem*> ParserState::items_bottom_up() const {
  std::vector<const StackItem*> out;
  for (const StackNode* n = stack.get(); n; n = n->below.get()) out.push_back(&n->item);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<Action> ParserState::actions() const {
  std::vector<Action> out;
  for (const ParserState* s = this; s->prev; s = s->prev.get()) out.push_back(s->last);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<const ParserState*> ParserState::path() const {
  std::vector<const ParserState*> out;
  for (const ParserState* s = this; s; s = s->prev.get()) out.push_back(s);
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace tdparse
