#include "tdparse/expr.h"

#include <algorithm>
#include <cctype>

namespace tdparse {

namespace {

const char* const kAnd = "and";

Type bool_type() { return Type::base(TypeHierarchy::kBool); }

}  // namespace

Expr Expr::constant(std::string name, Type type) {
  return Expr(std::make_shared<const Node>(
      Node{Kind::kConst, std::move(name), std::move(type)}));
}

Expr Expr::predicate(std::string name, Type type) {
  return Expr(std::make_shared<const Node>(
      Node{Kind::kPred, std::move(name), std::move(type)}));
}

Expr Expr::var(int index, Type type) {
  return Expr(
      std::make_shared<const Node>(Node{Kind::kVar, "", std::move(type), index}));
}

Expr Expr::lam(Type binder, Expr body) {
  Type t = Type::arrow(std::move(binder), body.type());
  return Expr(std::make_shared<const Node>(
      Node{Kind::kLam, "", std::move(t), 0,
           std::make_shared<const Expr>(std::move(body))}));
}

Expr Expr::app(Expr fun, Expr arg, Type type) {
  return Expr(std::make_shared<const Node>(
      Node{Kind::kApp, "", std::move(type), 0,
           std::make_shared<const Expr>(std::move(fun)),
           std::make_shared<const Expr>(std::move(arg))}));
}

const Expr& Expr::head() const {
  const Expr* cur = this;
  while (cur->is_app()) cur = &cur->fun();
  return *cur;
}

std::vector<Expr> Expr::spine_args() const {
  std::vector<Expr> args;
  const Expr* cur = this;
  while (cur->is_app()) {
    args.push_back(cur->arg());
    cur = &cur->fun();
  }
  std::reverse(args.begin(), args.end());
  return args;
}

void Expr::collect_atoms(std::vector<std::string>& out) const {
  switch (kind()) {
    case Kind::kConst:
    case Kind::kPred: out.push_back(name()); break;
    case Kind::kVar: break;
    case Kind::kLam: body().collect_atoms(out); break;
    case Kind::kApp:
      fun().collect_atoms(out);
      arg().collect_atoms(out);
      break;
  }
}

std::size_t Expr::size() const {
  switch (kind()) {
    case Kind::kLam: return 1 + body().size();
    case Kind::kApp: return 1 + fun().size() + arg().size();
    default: return 1;
  }
}

TypedResult make_typed(Expr e) {
  Type t = e.type();
  return TypedResult{std::move(e), std::move(t), {}};
}

// ---------------------------------------------------------------------------
// Term operations

Expr shift_free(const Expr& e, int by, int cutoff) {
  switch (e.kind()) {
    case Expr::Kind::kVar:
      return e.index() >= cutoff ? Expr::var(e.index() + by, e.type()) : e;
    case Expr::Kind::kLam:
      return Expr::lam(e.binder_type(), shift_free(e.body(), by, cutoff + 1));
    case Expr::Kind::kApp:
      return Expr::app(shift_free(e.fun(), by, cutoff),
                       shift_free(e.arg(), by, cutoff), e.type());
    default: return e;
  }
}

Expr substitute(const Expr& e, int index, const Expr& value) {
  switch (e.kind()) {
    case Expr::Kind::kVar: return e.index() == index ? value : e;
    case Expr::Kind::kLam:
      return Expr::lam(e.binder_type(),
                       substitute(e.body(), index + 1, shift_free(value, 1)));
    case Expr::Kind::kApp:
      return Expr::app(substitute(e.fun(), index, value),
                       substitute(e.arg(), index, value), e.type());
    default: return e;
  }
}

Expr beta(const Expr& lam, const Expr& arg) {
  if (!lam.is_lam()) throw TypeError("beta on a non-abstraction");
  return shift_free(substitute(lam.body(), 0, shift_free(arg, 1)), -1);
}

Expr normalize(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::kLam: return Expr::lam(e.binder_type(), normalize(e.body()));
    case Expr::Kind::kApp: {
      Expr f = normalize(e.fun());
      Expr a = normalize(e.arg());
      if (f.is_lam()) return normalize(beta(f, a));
      Type t = f.type().is_arrow() ? f.type().output() : e.type();
      return Expr::app(std::move(f), std::move(a), std::move(t));
    }
    default: return e;
  }
}

Expr resolve_types(const Expr& e, const Binding& b) {
  if (b.empty()) return e;
  switch (e.kind()) {
    case Expr::Kind::kConst: return Expr::constant(e.name(), resolve(e.type(), b));
    case Expr::Kind::kPred: return Expr::predicate(e.name(), resolve(e.type(), b));
    case Expr::Kind::kVar: return Expr::var(e.index(), resolve(e.type(), b));
    case Expr::Kind::kLam:
      return Expr::lam(resolve(e.binder_type(), b), resolve_types(e.body(), b));
    case Expr::Kind::kApp:
      return Expr::app(resolve_types(e.fun(), b), resolve_types(e.arg(), b),
                       resolve(e.type(), b));
  }
  return e;
}

Expr map_types(const Expr& e, const std::map<TypeVar, Type>& renaming) {
  Binding b;
  for (const auto& [v, t] : renaming) b.assign(v, t);
  return resolve_types(e, b);
}

Type infer_type(const Expr& e, const TypeHierarchy& h) {
  switch (e.kind()) {
    case Expr::Kind::kConst:
    case Expr::Kind::kPred:
    case Expr::Kind::kVar: return e.type();
    case Expr::Kind::kLam:
      return Type::arrow(e.binder_type(), infer_type(e.body(), h));
    case Expr::Kind::kApp: {
      Type ft = infer_type(e.fun(), h);
      Type at = infer_type(e.arg(), h);
      if (!ft.is_arrow())
        throw TypeError("applying non-function of type " + ft.str());
      auto b = match_argument(ft.input(), at, h);
      if (!b)
        throw TypeError("argument of type " + at.str() +
                        " does not fit parameter " + ft.input().str());
      return resolve(ft.output(), *b);
    }
  }
  return e.type();
}

std::optional<TypedResult> apply(const TypedResult& fun, const TypedResult& arg,
                                 const TypeHierarchy& h) {
  auto merged = Binding::merge(fun.binding, arg.binding);
  if (!merged) return std::nullopt;
  Type ft = resolve(fun.type, *merged);
  if (!ft.is_arrow()) return std::nullopt;
  auto b = match_argument(ft.input(), resolve(arg.type, *merged), h, *merged);
  if (!b) return std::nullopt;
  Expr f = resolve_types(fun.expr, *b);
  Expr a = resolve_types(arg.expr, *b);
  Expr result = f.is_lam()
                    ? normalize(beta(f, a))
                    : Expr::app(std::move(f), std::move(a), resolve(ft.output(), *b));
  Type t = result.type();
  return TypedResult{std::move(result), std::move(t), std::move(*b)};
}

Expr and_predicate() {
  Type t = bool_type();
  return Expr::predicate(kAnd, Type::arrow(t, Type::arrow(t, t)));
}

std::optional<TypedResult> conjoin(const TypedResult& a, const TypedResult& b,
                                   const TypeHierarchy& h) {
  auto merged = Binding::merge(a.binding, b.binding);
  if (!merged) return std::nullopt;
  Type ta = resolve(a.type, *merged);
  Type tb = resolve(b.type, *merged);
  const Type t = bool_type();
  if (!ta.is_arrow() || !tb.is_arrow()) return std::nullopt;
  if (ta.output() != t || tb.output() != t) return std::nullopt;
  if (!ta.input().is_base() || !tb.input().is_base()) return std::nullopt;
  auto glb = greatest_lower_bound(ta.input(), tb.input(), h);
  if (!glb) return std::nullopt;

  Expr x = Expr::var(0, *glb);
  Expr lhs = Expr::app(shift_free(resolve_types(a.expr, *merged), 1), x, t);
  Expr rhs = Expr::app(shift_free(resolve_types(b.expr, *merged), 1), x, t);
  Expr conj = Expr::app(Expr::app(and_predicate(), lhs, Type::arrow(t, t)), rhs, t);
  Expr result = normalize(Expr::lam(*glb, conj));
  Type rt = result.type();
  return TypedResult{std::move(result), std::move(rt), std::move(*merged)};
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string binder_name(int depth) {
  static const char* const kNames[] = {"x", "y", "z", "w", "v", "u"};
  if (depth < 6) return kNames[depth];
  return "x" + std::to_string(depth);
}

void print(const Expr& e, int depth, const PrintOptions& opts, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::kConst:
    case Expr::Kind::kPred:
      out += e.name();
      if (opts.annotate_all_atoms ||
          (opts.overloaded && opts.overloaded->count(e.name())))
        out += ":" + e.type().str();
      break;
    case Expr::Kind::kVar: out += binder_name(depth - 1 - e.index()); break;
    case Expr::Kind::kLam:
      out += "(lambda (" + binder_name(depth) + " : " + e.binder_type().str() +
             ") ";
      print(e.body(), depth + 1, opts, out);
      out += ")";
      break;
    case Expr::Kind::kApp: {
      out += "(";
      print(e.head(), depth, opts, out);
      for (const Expr& a : e.spine_args()) {
        out += " ";
        print(a, depth, opts, out);
      }
      out += ")";
      break;
    }
  }
}

bool is_conjunction(const Expr& e) {
  if (!e.is_app()) return false;
  const Expr& h = e.head();
  return h.kind() == Expr::Kind::kPred && h.name() == kAnd &&
         e.fun().is_app() && e.fun().fun().same_node(h);
}

void collect_conjuncts(const Expr& e, std::vector<Expr>& out) {
  if (is_conjunction(e)) {
    collect_conjuncts(e.fun().arg(), out);
    collect_conjuncts(e.arg(), out);
  } else {
    out.push_back(e);
  }
}

std::string atom_key(const Expr& e, bool with_types) {
  return with_types ? e.name() + ":" + e.type().str() : e.name();
}

std::string key_of(const Expr& e, bool with_types, std::set<std::string>* sink) {
  std::string k;
  switch (e.kind()) {
    case Expr::Kind::kConst:
    case Expr::Kind::kPred: k = atom_key(e, with_types); break;
    case Expr::Kind::kVar: k = "#" + std::to_string(e.index()); break;
    case Expr::Kind::kLam:
      k = "(lambda";
      if (with_types) k += ":" + e.binder_type().str();
      k += " " + key_of(e.body(), with_types, sink) + ")";
      break;
    case Expr::Kind::kApp: {
      if (is_conjunction(e)) {
        std::vector<Expr> parts;
        collect_conjuncts(e, parts);
        std::vector<std::string> keys;
        for (const Expr& p : parts) keys.push_back(key_of(p, with_types, sink));
        std::sort(keys.begin(), keys.end());
        k = "(" + atom_key(e.head(), with_types);
        for (const auto& s : keys) k += " " + s;
        k += ")";
      } else {
        k = "(" + key_of(e.head(), with_types, sink);
        for (const Expr& a : e.spine_args()) {
          k += " " + key_of(a, with_types, sink);
          if (sink) sink->insert(k + ")");
        }
        k += ")";
      }
      break;
    }
  }
  if (sink) sink->insert(k);
  return k;
}

}  // namespace

std::string to_string(const Expr& e, const PrintOptions& opts) {
  std::string out;
  print(e, 0, opts, out);
  return out;
}

std::string canonical_key(const Expr& e, bool with_types) {
  return key_of(e, with_types, nullptr);
}

bool mr_equal(const Expr& a, const Expr& b) {
  return canonical_key(a, true) == canonical_key(b, true);
}

std::set<std::string> subterm_keys(const Expr& e) {
  std::set<std::string> keys;
  key_of(e, false, &keys);
  return keys;
}

// ---------------------------------------------------------------------------
// Symbols

void Symbols::add(Atom atom) {
  for (const Atom* existing : lookup(atom.name))
    if (existing->type == atom.type)
      throw ParseError("conflicting redefinition of '" + atom.name + " : " +
                       atom.type.str() + "'");
  index_.emplace(atom.name, atoms_.size());
  atoms_.push_back(std::move(atom));
}

std::vector<const Atom*> Symbols::lookup(const std::string& name) const {
  std::vector<const Atom*> out;
  auto [lo, hi] = index_.equal_range(name);
  for (auto it = lo; it != hi; ++it) out.push_back(&atoms_[it->second]);
  return out;
}

bool Symbols::overloaded(const std::string& name) const {
  return index_.count(name) > 1;
}

std::set<std::string> Symbols::overloaded_names() const {
  std::set<std::string> out;
  for (const auto& [name, idx] : index_)
    if (overloaded(name)) out.insert(name);
  return out;
}

void Symbols::set_alias(std::map<std::string, std::string> base_alias,
                        std::optional<Type> var_replacement) {
  alias_ = std::move(base_alias);
  var_replacement_ = std::move(var_replacement);
}

Type Symbols::normalize(const Type& t) const {
  switch (t.kind()) {
    case Type::Kind::kBase: {
      auto it = alias_.find(t.name());
      return it == alias_.end() ? t : Type::base(it->second);
    }
    case Type::Kind::kVar: return var_replacement_ ? *var_replacement_ : t;
    case Type::Kind::kArrow:
      return Type::arrow(normalize(t.input()), normalize(t.output()));
  }
  return t;
}

// ---------------------------------------------------------------------------
// S-expression reading

namespace {

struct SNode {
  bool is_list = false;
  std::string atom;
  std::vector<SNode> items;
};

std::vector<std::string> sexp_tokens(std::string_view text) {
  std::vector<std::string> toks;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) toks.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : text) {
    if (c == '(' || c == ')') {
      flush();
      toks.emplace_back(1, c);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return toks;
}

SNode read_node(const std::vector<std::string>& toks, std::size_t& pos,
                std::string_view text) {
  if (pos >= toks.size())
    throw ParseError("unexpected end of expression: " + std::string(text));
  const std::string& t = toks[pos++];
  if (t == ")") throw ParseError("unbalanced ')' in: " + std::string(text));
  if (t != "(") return SNode{false, t, {}};
  SNode list{true, "", {}};
  while (true) {
    if (pos >= toks.size())
      throw ParseError("missing ')' in: " + std::string(text));
    if (toks[pos] == ")") {
      ++pos;
      return list;
    }
    list.items.push_back(read_node(toks, pos, text));
  }
}

std::string node_text(const SNode& n) {
  if (!n.is_list) return n.atom;
  std::string s = "(";
  for (std::size_t k = 0; k < n.items.size(); ++k) {
    if (k) s += " ";
    s += node_text(n.items[k]);
  }
  return s + ")";
}

struct Builder {
  const Symbols& symbols;
  std::string_view text;
  std::uint32_t next_instance = 1;
  std::vector<std::pair<std::string, Type>> env;  // innermost last

  Type fresh(const Type& t) {
    std::vector<TypeVar> vars;
    t.collect_vars(vars);
    if (vars.empty()) return t;
    Binding rename;
    for (const auto& v : vars) rename.assign(v, Type::var(v.name, next_instance++));
    return resolve(t, rename);
  }

  std::vector<TypedResult> atom(const std::string& s) {
    for (std::size_t k = env.size(); k-- > 0;)
      if (env[k].first == s)
        return {make_typed(Expr::var(static_cast<int>(env.size() - 1 - k),
                                     env[k].second))};
    std::string name = s;
    std::optional<Type> annot;
    auto colon = s.find(':');
    if (colon != std::string::npos && colon > 0) {
      name = s.substr(0, colon);
      annot = symbols.normalize(parse_type(s.substr(colon + 1)));
    }
    std::vector<TypedResult> out;
    for (const Atom* a : symbols.lookup(name)) {
      if (annot && a->type != *annot) continue;
      Type t = fresh(a->type);
      out.push_back(make_typed(a->is_constant ? Expr::constant(name, t)
                                              : Expr::predicate(name, t)));
    }
    if (out.empty() && name == kAnd && !annot) out.push_back(make_typed(and_predicate()));
    if (out.empty())
      throw ParseError("unknown atom '" + s + "' in: " + std::string(text));
    return out;
  }

  std::vector<TypedResult> lambda(const SNode& n) {
    if (n.items.size() != 3 || !n.items[1].is_list ||
        n.items[1].items.size() < 3 || n.items[1].items[0].is_list ||
        n.items[1].items[1].is_list || n.items[1].items[1].atom != ":")
      throw ParseError("expected (lambda (x : T) body) in: " + std::string(text));
    const auto& decl = n.items[1].items;
    std::string type_text;
    for (std::size_t k = 2; k < decl.size(); ++k) type_text += node_text(decl[k]) + " ";
    Type binder = symbols.normalize(parse_type(type_text));
    symbols.hierarchy().check_known(binder);
    env.emplace_back(decl[0].atom, binder);
    std::vector<TypedResult> bodies = build(n.items[2]);
    env.pop_back();
    std::vector<TypedResult> out;
    for (auto& b : bodies) {
      Expr lam = Expr::lam(resolve(binder, b.binding),
                           resolve_types(b.expr, b.binding));
      Type t = lam.type();
      out.push_back(TypedResult{std::move(lam), std::move(t), b.binding});
    }
    return out;
  }

  std::vector<TypedResult> build(const SNode& n) {
    if (!n.is_list) return atom(n.atom);
    if (n.items.empty()) throw ParseError("empty list in: " + std::string(text));
    if (!n.items[0].is_list && n.items[0].atom == "lambda") return lambda(n);
    std::vector<TypedResult> cur = build(n.items[0]);
    for (std::size_t k = 1; k < n.items.size(); ++k) {
      std::vector<TypedResult> args = build(n.items[k]);
      std::vector<TypedResult> next;
      for (const auto& f : cur)
        for (const auto& a : args)
          if (auto r = apply(f, a, symbols.hierarchy())) next.push_back(std::move(*r));
      if (next.empty()) {
        std::string what = "type error applying " + to_string(cur.front().expr) +
                           " : " + cur.front().type.str() + " to " +
                           to_string(args.front().expr) + " : " +
                           args.front().type.str();
        if (cur.size() > 1 || args.size() > 1) what += " (no reading fits)";
        throw TypeError(what + " in: " + std::string(text));
      }
      cur = std::move(next);
    }
    return cur;
  }
};

}  // namespace

std::vector<TypedResult> parse_expression_all(std::string_view text,
                                              const Symbols& symbols) {
  auto toks = sexp_tokens(text);
  if (toks.empty()) throw ParseError("empty expression");
  std::size_t pos = 0;
  SNode root = read_node(toks, pos, text);
  if (pos != toks.size())
    throw ParseError("trailing tokens in: " + std::string(text));
  Builder b{symbols, text};
  return b.build(root);
}

TypedResult parse_expression(std::string_view text, const Symbols& symbols) {
  auto all = parse_expression_all(text, symbols);
  if (all.size() > 1) {
    std::string msg = "ambiguous expression (" + std::to_string(all.size()) +
                      " readings; annotate overloaded atoms as name:type): " +
                      std::string(text);
    throw ParseError(msg);
  }
  return std::move(all.front());
}

std::string normalize_sexp_text(std::string_view text) {
  std::string out;
  std::string prev;
  for (const auto& t : sexp_tokens(text)) {
    if (!out.empty() && prev != "(" && t != ")") out += " ";
    out += t;
    prev = t;
  }
  return out;
}

}  // namespace tdparse
