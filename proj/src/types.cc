#include "tdparse/types.h"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace tdparse {

Type::Type() : Type(base(TypeHierarchy::kTop)) {}

Type Type::base(std::string name) {
  return Type(std::make_shared<const Node>(Node{Kind::kBase, std::move(name)}));
}

Type Type::arrow(Type input, Type output) {
  return Type(std::make_shared<const Node>(
      Node{Kind::kArrow, "", 0, std::make_shared<const Type>(std::move(input)),
           std::make_shared<const Type>(std::move(output))}));
}

Type Type::var(std::string name, std::uint32_t instance) {
  return Type(std::make_shared<const Node>(
      Node{Kind::kVar, std::move(name), instance}));
}

const Type& Type::input() const {
  if (!is_arrow()) throw TypeError("input() of non-arrow type " + str());
  return *node_->input;
}

const Type& Type::output() const {
  if (!is_arrow()) throw TypeError("output() of non-arrow type " + str());
  return *node_->output;
}

bool Type::is_ground() const {
  switch (kind()) {
    case Kind::kBase: return true;
    case Kind::kVar: return false;
    case Kind::kArrow: return input().is_ground() && output().is_ground();
  }
  return false;
}

bool Type::occurs(const TypeVar& v) const {
  switch (kind()) {
    case Kind::kBase: return false;
    case Kind::kVar: return type_var() == v;
    case Kind::kArrow: return input().occurs(v) || output().occurs(v);
  }
  return false;
}

void Type::collect_vars(std::vector<TypeVar>& out) const {
  if (is_var()) {
    if (std::find(out.begin(), out.end(), type_var()) == out.end())
      out.push_back(type_var());
  } else if (is_arrow()) {
    input().collect_vars(out);
    output().collect_vars(out);
  }
}

std::string Type::str() const {
  switch (kind()) {
    case Kind::kBase: return name();
    case Kind::kVar: return "'" + name();
    case Kind::kArrow: {
      std::string in = input().str();
      if (input().is_arrow()) in = "(" + in + ")";
      return in + "->" + output().str();
    }
  }
  return {};
}

bool operator==(const Type& a, const Type& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Type::Kind::kBase: return a.name() == b.name();
    case Type::Kind::kVar: return a.type_var() == b.type_var();
    case Type::Kind::kArrow:
      return a.input() == b.input() && a.output() == b.output();
  }
  return false;
}

bool operator<(const Type& a, const Type& b) {
  if (a.kind() != b.kind()) return a.kind() < b.kind();
  switch (a.kind()) {
    case Type::Kind::kBase: return a.name() < b.name();
    case Type::Kind::kVar: return a.type_var() < b.type_var();
    case Type::Kind::kArrow:
      if (a.input() != b.input()) return a.input() < b.input();
      return a.output() < b.output();
  }
  return false;
}

// ---------------------------------------------------------------------------
// Type syntax

namespace {

class TypeReader {
 public:
  explicit TypeReader(std::string_view s) : s_(s) {}

  Type read_all() {
    Type t = read_arrow();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return t;
  }

 private:
  Type read_arrow() {
    Type lhs = read_atom();
    skip_ws();
    if (s_.compare(pos_, 2, "->") == 0) {
      pos_ += 2;
      return Type::arrow(lhs, read_arrow());
    }
    return lhs;
  }

  Type read_atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of type");
    if (s_[pos_] == '(') {
      ++pos_;
      Type t = read_arrow();
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return t;
    }
    bool is_var = false;
    if (s_[pos_] == '\'') {
      is_var = true;
      ++pos_;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected a type name");
    std::string name(s_.substr(start, pos_ - start));
    return is_var ? Type::var(name) : Type::base(name);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw TypeError("cannot parse type '" + std::string(s_) + "': " + what);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Type parse_type(std::string_view text) { return TypeReader(text).read_all(); }

// ---------------------------------------------------------------------------
// Hierarchy

TypeHierarchy::TypeHierarchy() = default;

void TypeHierarchy::add(const std::string& child, const std::string& parent) {
  if (child == kTop || child == kBool)
    throw TypeError("root type '" + child + "' cannot have a parent");
  if (parent == kBool)
    throw TypeError("boolean type 't' cannot have subtypes (declaring '" +
                    child + "')");
  if (contains(child)) throw TypeError("duplicate type name '" + child + "'");
  if (!contains(parent))
    throw TypeError("undeclared parent type '" + parent + "' for '" + child +
                    "'");
  parent_.emplace(child, parent);
  order_.push_back(child);
}

bool TypeHierarchy::contains(const std::string& name) const {
  return name == kTop || name == kBool || parent_.count(name) != 0;
}

std::optional<std::string> TypeHierarchy::parent(const std::string& name) const {
  auto it = parent_.find(name);
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> TypeHierarchy::nodes() const {
  std::vector<std::string> out{kTop, kBool};
  out.insert(out.end(), order_.begin(), order_.end());
  return out;
}

int TypeHierarchy::depth(const std::string& name) const {
  int d = 0;
  for (auto p = parent(name); p; p = parent(*p)) ++d;
  return d;
}

bool TypeHierarchy::is_base_subtype(const std::string& sub,
                                    const std::string& super) const {
  if (!contains(sub)) throw TypeError("unknown type '" + sub + "'");
  if (!contains(super)) throw TypeError("unknown type '" + super + "'");
  std::optional<std::string> cur = sub;
  while (cur) {
    if (*cur == super) return true;
    cur = parent(*cur);
  }
  return false;
}

void TypeHierarchy::check_known(const Type& t) const {
  switch (t.kind()) {
    case Type::Kind::kBase:
      if (!contains(t.name())) throw TypeError("unknown type '" + t.name() + "'");
      break;
    case Type::Kind::kVar: break;
    case Type::Kind::kArrow:
      check_known(t.input());
      check_known(t.output());
      break;
  }
}

namespace {

std::string strip_comment(const std::string& line) {
  auto hash = line.find('#');
  std::string s = hash == std::string::npos ? line : line.substr(0, hash);
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

TypeHierarchy load_hierarchy(const std::vector<std::string>& lines) {
  std::vector<std::pair<std::string, std::string>> decls;
  std::set<std::string> seen;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string line = strip_comment(lines[n]);
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string kw, child, op, parent, extra;
    in >> kw >> child >> op >> parent;
    if (kw != "type" || op != "<:" || parent.empty() || (in >> extra))
      throw TypeError("line " + std::to_string(n + 1) +
                      ": expected 'type <name> <: <name>'");
    if (child == TypeHierarchy::kTop || child == TypeHierarchy::kBool)
      throw TypeError("root type '" + child + "' cannot have a parent");
    if (!seen.insert(child).second)
      throw TypeError("duplicate type name '" + child + "'");
    decls.emplace_back(child, parent);
  }

  // Insert in dependency order so forward references resolve.
  TypeHierarchy h;
  std::vector<bool> done(decls.size(), false);
  std::size_t remaining = decls.size();
  while (remaining > 0) {
    bool progress = false;
    for (std::size_t k = 0; k < decls.size(); ++k) {
      if (done[k]) continue;
      const auto& [child, parent] = decls[k];
      if (parent == TypeHierarchy::kBool || h.contains(parent)) {
        h.add(child, parent);
        done[k] = true;
        --remaining;
        progress = true;
      }
    }
    if (!progress) {
      for (std::size_t k = 0; k < decls.size(); ++k) {
        if (done[k]) continue;
        if (!seen.count(decls[k].second))
          throw TypeError("undeclared parent type '" + decls[k].second +
                          "' for '" + decls[k].first + "'");
      }
      throw TypeError("cycle in type hierarchy");
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Bindings

const Type* Binding::find(const TypeVar& v) const {
  auto it = map_.find(v);
  return it == map_.end() ? nullptr : &it->second;
}

bool Binding::assign(const TypeVar& v, const Type& t) {
  if (resolve(t, *this).occurs(v)) return false;
  map_.insert_or_assign(v, t);
  return true;
}

std::optional<Binding> Binding::merge(const Binding& a, const Binding& b) {
  Binding out = a;
  for (const auto& [v, t] : b.map_) {
    if (const Type* existing = out.find(v)) {
      if (resolve(*existing, out) != resolve(t, out)) return std::nullopt;
    } else if (!out.assign(v, t)) {
      return std::nullopt;
    }
  }
  return out;
}

std::string Binding::str() const {
  std::string out;
  for (const auto& [v, t] : map_) {
    if (!out.empty()) out += ", ";
    out += "'" + v.name + "=" + resolve(t, *this).str();
  }
  return out;
}

Type resolve(const Type& t, const Binding& b) {
  switch (t.kind()) {
    case Type::Kind::kBase: return t;
    case Type::Kind::kVar: {
      const Type* bound = b.find(t.type_var());
      return bound ? resolve(*bound, b) : t;
    }
    case Type::Kind::kArrow: {
      Type in = resolve(t.input(), b);
      Type out = resolve(t.output(), b);
      if (in == t.input() && out == t.output()) return t;
      return Type::arrow(in, out);
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Subtyping

bool is_subtype(const Type& sub, const Type& super, const TypeHierarchy& h) {
  if (sub.is_var() || super.is_var())
    throw TypeError("subtype check on unbound type variable (" + sub.str() +
                    " <: " + super.str() + ")");
  if (sub.is_base() && super.is_base())
    return h.is_base_subtype(sub.name(), super.name());
  if (sub.is_arrow() && super.is_arrow())
    return is_subtype(super.input(), sub.input(), h) &&
           is_subtype(sub.output(), super.output(), h);
  return false;
}

namespace {

// Follows variable links without rebuilding arrows.
Type shallow(const Type& t, const Binding& b) {
  Type cur = t;
  while (cur.is_var()) {
    const Type* next = b.find(cur.type_var());
    if (!next) break;
    cur = *next;
  }
  return cur;
}

bool relate(const Type& sub_in, const Type& super_in, const TypeHierarchy& h,
            Binding& b) {
  Type sub = shallow(sub_in, b);
  Type super = shallow(super_in, b);
  if (super.is_var()) {
    if (sub.is_var() && sub.type_var() == super.type_var()) return true;
    return b.assign(super.type_var(), resolve(sub, b));
  }
  if (sub.is_var()) return b.assign(sub.type_var(), resolve(super, b));
  if (sub.is_base() && super.is_base())
    return h.is_base_subtype(sub.name(), super.name());
  if (sub.is_arrow() && super.is_arrow())
    return relate(super.input(), sub.input(), h, b) &&
           relate(sub.output(), super.output(), h, b);
  return false;
}

}  // namespace

std::optional<Binding> match_argument(const Type& param, const Type& arg,
                                      const TypeHierarchy& h, const Binding& b) {
  Binding out = b;
  if (!relate(arg, param, h, out)) return std::nullopt;
  return out;
}

std::optional<Type> greatest_lower_bound(const Type& a, const Type& b,
                                         const TypeHierarchy& h) {
  if (!a.is_base() || !b.is_base())
    throw TypeError("greatest_lower_bound expects base types, got " + a.str() +
                    " and " + b.str());
  if (h.is_base_subtype(a.name(), b.name())) return a;
  if (h.is_base_subtype(b.name(), a.name())) return b;
  return std::nullopt;
}

}  // namespace tdparse
