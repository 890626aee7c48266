#include "tdparse/lexicon.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace tdparse {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
  // `#` inside a quoted phrase is not a comment.
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') quoted = !quoted;
    if (line[k] == '#' && !quoted) return trim(line.substr(0, k));
  }
  return trim(line);
}

bool is_punct_token(char c) {
  switch (c) {
    case '?': case '!': case '.': case ',': case ';': case ':':
    case '"': case '(': case ')':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      flush();
    } else if (is_punct_token(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur += static_cast<char>(std::tolower(u));
    }
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------

Domain::Domain() = default;

const LexiconEntry& Domain::entry(int template_id) const {
  if (template_id < 0 || template_id >= static_cast<int>(entries_.size()))
    throw ParseError("unknown template id " + std::to_string(template_id));
  return entries_[template_id];
}

void Domain::add_type(const std::string& child, const std::string& parent) {
  symbols_.mutable_hierarchy().add(child, parent);
}

void Domain::add_atom(const std::string& name, const Type& declared,
                      bool is_constant) {
  Type t = symbols_.normalize(declared);
  hierarchy().check_known(t);
  for (const Atom* a : symbols_.lookup(name))
    if (a->type == t && simple_types_) return;  // collapsed duplicates merge
  symbols_.add(Atom{name, t, is_constant});
  finish_atoms();
}

void Domain::finish_atoms() { overloaded_ = symbols_.overloaded_names(); }

void Domain::add_rule(Rule rule) {
  std::vector<TypedResult> readings = parse_expression_all(rule.mr_text, symbols_);
  const int rule_index = static_cast<int>(rules_.size());
  std::set<std::string> seen;
  for (auto& r : readings) {
    if (!seen.insert(canonical_key(r.expr, true)).second) continue;
    LexiconEntry e{rule.phrase, rule.pos_tag, std::move(r)};
    e.template_id = static_cast<int>(entries_.size());
    e.rule = rule_index;
    std::vector<std::string> atoms;
    e.tmpl.expr.collect_atoms(atoms);
    for (const auto& a : atoms)
      if (std::find(e.atoms.begin(), e.atoms.end(), a) == e.atoms.end())
        e.atoms.push_back(a);
    for (const auto& a : e.atoms) {
      if (!e.atoms_label.empty()) e.atoms_label += "+";
      e.atoms_label += a;
    }
    if (e.phrase.empty())
      by_tag_[e.pos_tag].push_back(e.template_id);
    else
      by_first_word_[e.phrase.front()].push_back(e.template_id);
    entries_.push_back(std::move(e));
  }
  rules_.push_back(std::move(rule));
}

std::vector<ShiftCandidate> Domain::lookup_shifts(
    std::span<const std::string> queue, std::span<const std::string> tags) const {
  std::vector<ShiftCandidate> out;
  if (queue.empty()) return out;
  if (auto it = by_first_word_.find(queue.front()); it != by_first_word_.end()) {
    for (int id : it->second) {
      const auto& e = entries_[id];
      if (e.phrase.size() > queue.size()) continue;
      if (std::equal(e.phrase.begin(), e.phrase.end(), queue.begin()))
        out.push_back({static_cast<int>(e.phrase.size()), &e});
    }
  }
  if (!tags.empty()) {
    if (auto it = by_tag_.find(tags.front()); it != by_tag_.end())
      for (int id : it->second) out.push_back({1, &entries_[id]});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ShiftCandidate& a, const ShiftCandidate& b) {
                     if (a.tokens_consumed != b.tokens_consumed)
                       return a.tokens_consumed > b.tokens_consumed;
                     return a.entry->template_id < b.entry->template_id;
                   });
  return out;
}

Domain Domain::simplified() const {
  Domain d;
  d.simple_types_ = true;
  const TypeHierarchy& h = hierarchy();
  const bool has_int = h.contains("i");
  std::map<std::string, std::string> alias;
  alias[TypeHierarchy::kTop] = "e";
  for (const auto& name : h.declared())
    alias[name] = has_int && h.is_base_subtype(name, "i") ? "i" : "e";
  d.add_type("e", TypeHierarchy::kTop);
  d.add_type("i", TypeHierarchy::kTop);
  d.symbols_.set_alias(std::move(alias), Type::base("e"));
  for (const Atom& a : symbols_.atoms()) d.add_atom(a.name, a.type, a.is_constant);
  for (const Rule& r : rules_) d.add_rule(r);
  return d;
}

std::string Domain::save() const {
  std::ostringstream out;
  const TypeHierarchy& h = hierarchy();
  for (const auto& name : h.declared())
    out << "type " << name << " <: " << *h.parent(name) << "\n";
  for (const Atom& a : symbols_.atoms())
    out << (a.is_constant ? "const " : "pred ") << a.name << " : " << a.type.str()
        << "\n";
  for (const Rule& r : rules_) {
    if (r.phrase.empty()) {
      out << "lexpos " << r.pos_tag;
    } else {
      out << "lex \"";
      for (std::size_t k = 0; k < r.phrase.size(); ++k)
        out << (k ? " " : "") << r.phrase[k];
      out << "\"";
    }
    out << " => " << r.mr_text << "\n";
  }
  return out.str();
}

TypedResult Domain::parse_mr(std::string_view text) const {
  return parse_expression(text, symbols_);
}

std::string Domain::print(const Expr& e) const {
  PrintOptions opts;
  opts.overloaded = &overloaded_;
  return to_string(e, opts);
}

bool Domain::operator==(const Domain& o) const {
  if (!(hierarchy() == o.hierarchy()) || simple_types_ != o.simple_types_)
    return false;
  const auto& a = symbols_.atoms();
  const auto& b = o.symbols_.atoms();
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].name != b[k].name || a[k].type != b[k].type ||
        a[k].is_constant != b[k].is_constant)
      return false;
  if (entries_.size() != o.entries_.size()) return false;
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const auto& x = entries_[k];
    const auto& y = o.entries_[k];
    if (x.phrase != y.phrase || x.pos_tag != y.pos_tag ||
        x.template_id != y.template_id ||
        canonical_key(x.tmpl.expr, true) != canonical_key(y.tmpl.expr, true))
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

template <typename E>
[[noreturn]] void rethrow_at(int line, const E& e) {
  throw E("line " + std::to_string(line) + ": " + e.what());
}

// `<name> : <type>` after the keyword.
std::pair<std::string, Type> read_signature(const std::string& rest) {
  auto colon = rest.find(':');
  if (colon == std::string::npos) throw ParseError("expected '<name> : <type>'");
  std::string name = trim(rest.substr(0, colon));
  if (name.empty() || name.find(' ') != std::string::npos)
    throw ParseError("bad symbol name '" + name + "'");
  return {name, parse_type(rest.substr(colon + 1))};
}

Domain::Rule read_rule(const std::string& keyword, const std::string& rest) {
  Domain::Rule rule;
  auto arrow = rest.find("=>");
  if (arrow == std::string::npos) throw ParseError("expected '=>'");
  std::string trigger = trim(rest.substr(0, arrow));
  rule.mr_text = normalize_sexp_text(rest.substr(arrow + 2));
  if (rule.mr_text.empty()) throw ParseError("missing expression after '=>'");
  if (keyword == "lex") {
    if (trigger.size() < 2 || trigger.front() != '"' || trigger.back() != '"')
      throw ParseError("lex trigger must be a quoted phrase");
    rule.phrase = tokenize(trigger.substr(1, trigger.size() - 2));
    if (rule.phrase.empty()) throw ParseError("empty lex phrase");
  } else {
    if (trigger.empty() || trigger.find_first_of(" \t") != std::string::npos)
      throw ParseError("lexpos expects a single tag");
    rule.pos_tag = trigger;
  }
  return rule;
}

}  // namespace

Domain load_domain(std::istream& in) {
  struct Pending {
    int line;
    std::string keyword, rest;
  };
  std::vector<std::string> type_lines;
  std::vector<int> type_line_numbers;
  std::vector<Pending> atoms, rules;
  std::string raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    std::string line = strip_comment(raw);
    if (line.empty()) continue;
    auto sp = line.find_first_of(" \t");
    std::string kw = line.substr(0, sp);
    std::string rest = sp == std::string::npos ? "" : trim(line.substr(sp));
    if (kw == "type") {
      type_lines.push_back(line);
      type_line_numbers.push_back(n);
    } else if (kw == "const" || kw == "pred") {
      atoms.push_back({n, kw, rest});
    } else if (kw == "lex" || kw == "lexpos") {
      rules.push_back({n, kw, rest});
    } else {
      throw ParseError("line " + std::to_string(n) + ": unknown directive '" +
                       kw + "'");
    }
  }

  Domain d;
  TypeHierarchy h;
  try {
    h = load_hierarchy(type_lines);
  } catch (const TypeError& e) {
    throw TypeError(std::string("type declarations: ") + e.what());
  }
  for (const auto& name : h.declared()) d.add_type(name, *h.parent(name));

  for (const auto& p : atoms) {
    try {
      auto [name, type] = read_signature(p.rest);
      d.add_atom(name, type, p.keyword == "const");
    } catch (const TypeError& e) {
      rethrow_at(p.line, e);
    } catch (const ParseError& e) {
      rethrow_at(p.line, e);
    }
  }
  for (const auto& p : rules) {
    try {
      d.add_rule(read_rule(p.keyword, p.rest));
    } catch (const TypeError& e) {
      rethrow_at(p.line, e);
    } catch (const ParseError& e) {
      rethrow_at(p.line, e);
    }
  }
  return d;
}

Domain load_domain_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_domain(in);
}

Domain load_domain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open domain file '" + path + "'");
  return load_domain(in);
}

}  // namespace tdparse
