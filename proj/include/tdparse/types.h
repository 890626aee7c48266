#ifndef TDPARSE_TYPES_H_
#define TDPARSE_TYPES_H_

// Base types, curried function types and type variables, plus the domain
// type hierarchy that decides subtyping.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tdparse {

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A type variable is identified by its surface name plus an instance number.
// Instances keep the variables of different stack items apart; only the name
// is ever printed.
struct TypeVar {
  std::string name;
  std::uint32_t instance = 0;

  auto operator<=>(const TypeVar&) const = default;
};

class Type {
 public:
  enum class Kind { kBase, kArrow, kVar };

  Type();  // the base type `top`

  static Type base(std::string name);
  static Type arrow(Type input, Type output);
  static Type var(std::string name, std::uint32_t instance = 0);

  Kind kind() const { return node_->kind; }
  bool is_base() const { return kind() == Kind::kBase; }
  bool is_arrow() const { return kind() == Kind::kArrow; }
  bool is_var() const { return kind() == Kind::kVar; }

  // Base name or variable name (without the quote).
  const std::string& name() const { return node_->name; }
  TypeVar type_var() const { return {node_->name, node_->instance}; }
  const Type& input() const;
  const Type& output() const;

  bool is_ground() const;
  bool occurs(const TypeVar& v) const;
  void collect_vars(std::vector<TypeVar>& out) const;

  // Textual form: `st`, `'a`, `('a->t)->('a->i)->'a`.
  std::string str() const;

  friend bool operator==(const Type& a, const Type& b);
  friend bool operator!=(const Type& a, const Type& b) { return !(a == b); }
  // Total order used for deterministic containers only.
  friend bool operator<(const Type& a, const Type& b);

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::uint32_t instance = 0;
    std::shared_ptr<const Type> input, output;
  };
  explicit Type(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Parses `A -> B -> C` (right associative), `'a`, parentheses.
// Variables get instance 0.
Type parse_type(std::string_view text);

class TypeHierarchy {
 public:
  static constexpr const char* kTop = "top";
  static constexpr const char* kBool = "t";

  TypeHierarchy();  // roots only

  // Adds `child <: parent`. Throws TypeError on duplicates, cycles, unknown
  // parents, roots given parents or children of `t`.
  void add(const std::string& child, const std::string& parent);

  bool contains(const std::string& name) const;
  // nullopt for roots.
  std::optional<std::string> parent(const std::string& name) const;
  // Declared (non-root) names in declaration order.
  const std::vector<std::string>& declared() const { return order_; }
  // All names including the two roots.
  std::vector<std::string> nodes() const;
  std::size_t size() const { return parent_.size() + 2; }
  int depth(const std::string& name) const;

  // Reflexive-transitive closure of the parent relation on base names.
  bool is_base_subtype(const std::string& sub, const std::string& super) const;
  // Throws TypeError if the name is unknown.
  void check_known(const Type& t) const;

  bool operator==(const TypeHierarchy& o) const {
    return parent_ == o.parent_ && order_ == o.order_;
  }

 private:
  std::map<std::string, std::string> parent_;
  std::vector<std::string> order_;
};

// Reads `type <child> <: <parent>` lines; `#` starts a comment. Parents may be
// declared after their children.
TypeHierarchy load_hierarchy(const std::vector<std::string>& lines);

class Binding {
 public:
  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }
  const Type* find(const TypeVar& v) const;
  // Occurs check included; returns false when v already occurs in t.
  bool assign(const TypeVar& v, const Type& t);
  const std::map<TypeVar, Type>& assignments() const { return map_; }

  // Union of two bindings; nullopt when they disagree on a variable.
  static std::optional<Binding> merge(const Binding& a, const Binding& b);

  // `'a=st, 'b=ct`
  std::string str() const;

  bool operator==(const Binding& o) const { return map_ == o.map_; }

 private:
  std::map<TypeVar, Type> map_;
};

// Substitutes assigned variables until fixpoint.
Type resolve(const Type& t, const Binding& b);

// Subtyping on ground types: base closure, every hierarchy node below `top`,
// contravariant input and covariant output for arrows. Throws TypeError on an
// unbound variable.
bool is_subtype(const Type& sub, const Type& super, const TypeHierarchy& h);

// Extends `b` so that `arg <: resolve(param)`. Each unbound variable is bound
// to the exact type it is first compared against; later occurrences are
// checked by subtyping. Variables on the argument side are bound the same way.
std::optional<Binding> match_argument(const Type& param, const Type& arg,
                                      const TypeHierarchy& h,
                                      const Binding& b = {});

// Most specific common subtype of two ground base types (tree hierarchy).
std::optional<Type> greatest_lower_bound(const Type& a, const Type& b,
                                         const TypeHierarchy& h);

}  // namespace tdparse

#endif  // TDPARSE_TYPES_H_
