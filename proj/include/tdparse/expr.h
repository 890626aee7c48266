#ifndef TDPARSE_EXPR_H_
#define TDPARSE_EXPR_H_

// Typed lambda-calculus meaning representations.
//
// Bound variables use de Bruijn indices, so alpha-equivalent terms are
// structurally identical and substitution never captures. Every node caches
// its type; application nodes are only built after the argument type-checks.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tdparse/types.h"

namespace tdparse {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Expr {
 public:
  enum class Kind { kConst, kPred, kVar, kLam, kApp };

  static Expr constant(std::string name, Type type);
  static Expr predicate(std::string name, Type type);
  static Expr var(int index, Type type);
  static Expr lam(Type binder, Expr body);
  // Caller guarantees the application type-checks; `type` is its result.
  static Expr app(Expr fun, Expr arg, Type type);

  Kind kind() const { return node_->kind; }
  bool is_atom() const {
    return kind() == Kind::kConst || kind() == Kind::kPred;
  }
  bool is_lam() const { return kind() == Kind::kLam; }
  bool is_app() const { return kind() == Kind::kApp; }

  const std::string& name() const { return node_->name; }
  const Type& type() const { return node_->type; }
  int index() const { return node_->index; }
  const Type& binder_type() const { return node_->type.input(); }
  const Expr& body() const { return *node_->a; }
  const Expr& fun() const { return *node_->a; }
  const Expr& arg() const { return *node_->b; }

  // Head of an application spine and its arguments in order.
  const Expr& head() const;
  std::vector<Expr> spine_args() const;

  // Names of every constant/predicate occurrence, in preorder.
  void collect_atoms(std::vector<std::string>& out) const;
  std::size_t size() const;

  bool same_node(const Expr& o) const { return node_ == o.node_; }

 private:
  struct Node {
    Kind kind;
    std::string name;
    Type type;
    int index = 0;
    std::shared_ptr<const Expr> a, b;
  };
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// An expression with its (resolved) type and the bindings made while
// building it.
struct TypedResult {
  Expr expr;
  Type type;
  Binding binding;
};

TypedResult make_typed(Expr e);

// ---------------------------------------------------------------------------
// Term operations

Expr shift_free(const Expr& e, int by, int cutoff = 0);
// Replaces variable `index` by `value` (indices of `value` are shifted under
// binders).
Expr substitute(const Expr& e, int index, const Expr& value);
Expr beta(const Expr& lam, const Expr& arg);
// Beta-normal form; application result types are recomputed.
Expr normalize(const Expr& e);
// Applies a binding to every type annotation in the term.
Expr resolve_types(const Expr& e, const Binding& b);
// Renames type variables (as in a shifted lexicon template).
Expr map_types(const Expr& e, const std::map<TypeVar, Type>& renaming);

// Re-derives the type bottom-up, checking every application. Throws
// TypeError on a failed check.
Type infer_type(const Expr& e, const TypeHierarchy& h);

// Function application with subtyping and variable binding; beta-reduces
// when `fun` is an abstraction. nullopt when the argument does not fit.
std::optional<TypedResult> apply(const TypedResult& fun, const TypedResult& arg,
                                 const TypeHierarchy& h);

// lambda x:X . (and (a x) (b x)) where X is the glb of the two input types.
std::optional<TypedResult> conjoin(const TypedResult& a, const TypedResult& b,
                                   const TypeHierarchy& h);

// The reserved conjunction predicate `and : t->t->t`.
Expr and_predicate();

// ---------------------------------------------------------------------------
// Printing and equality

struct PrintOptions {
  // Atoms whose names are overloaded get a `:type` suffix.
  const std::set<std::string>* overloaded = nullptr;
  bool annotate_all_atoms = false;
};

// Canonical s-expression: `(capital (argmax state size))`,
// `(lambda (x : ct) (and (major x) (city x)))`.
std::string to_string(const Expr& e, const PrintOptions& opts = {});

// Alpha-invariant key with `and` conjuncts flattened and sorted; bound
// variables are rendered by de Bruijn index so closed subterms print the same
// wherever they occur.
std::string canonical_key(const Expr& e, bool with_types);

// Equality up to alpha-renaming and and-commutativity/associativity. Atom
// and binder types take part, which keeps same-named constants of different
// types apart.
bool mr_equal(const Expr& a, const Expr& b);

// Untyped canonical keys of every subterm, including partial applications
// `(f a1 .. ak)` of longer spines.
std::set<std::string> subterm_keys(const Expr& e);

// ---------------------------------------------------------------------------
// Reading meaning representations

struct Atom {
  std::string name;
  Type type;
  bool is_constant = false;
};

// Constants and predicates of a domain plus the type normalisation used when
// all domain types are collapsed to simple types.
class Symbols {
 public:
  Symbols() = default;
  explicit Symbols(TypeHierarchy h) : hierarchy_(std::move(h)) {}

  const TypeHierarchy& hierarchy() const { return hierarchy_; }
  TypeHierarchy& mutable_hierarchy() { return hierarchy_; }

  // Throws ParseError on an identical redefinition.
  void add(Atom atom);
  std::vector<const Atom*> lookup(const std::string& name) const;
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool overloaded(const std::string& name) const;
  std::set<std::string> overloaded_names() const;

  // Maps annotation types (binder types, `name:type` suffixes) into this
  // symbol table's type universe.
  void set_alias(std::map<std::string, std::string> base_alias,
                 std::optional<Type> var_replacement);
  Type normalize(const Type& t) const;

 private:
  TypeHierarchy hierarchy_;
  std::vector<Atom> atoms_;
  std::multimap<std::string, std::size_t> index_;
  std::map<std::string, std::string> alias_;
  std::optional<Type> var_replacement_;
};

// Every well-typed reading (overloaded atoms multiply readings). Throws
// ParseError on malformed text or unknown atoms and TypeError when no reading
// type-checks.
std::vector<TypedResult> parse_expression_all(std::string_view text,
                                              const Symbols& symbols);
// Exactly one reading; ambiguity is a ParseError.
TypedResult parse_expression(std::string_view text, const Symbols& symbols);

// Whitespace-normalised copy of an s-expression (for storing source text).
std::string normalize_sexp_text(std::string_view text);

}  // namespace tdparse

#endif  // TDPARSE_EXPR_H_
