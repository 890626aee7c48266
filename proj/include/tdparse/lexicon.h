#ifndef TDPARSE_LEXICON_H_
#define TDPARSE_LEXICON_H_

// Domain files: the type hierarchy, typed constants and predicates, and the
// phrase- or tag-triggered expression templates consulted at shift time.
//
//   type <name> <: <name>
//   const <name> : <type>
//   pred <name> : <type>
//   lex "<phrase>" => <mr>
//   lexpos <TAG> => <mr>
//
// A lex rule whose expression has several well-typed readings (an overloaded
// constant such as `mississippi`) yields one entry per reading.

#include <cstddef>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdparse/expr.h"
#include "tdparse/types.h"

namespace tdparse {

struct LexiconEntry {
  std::vector<std::string> phrase;  // empty for tag-triggered entries
  std::string pos_tag;              // set for tag-triggered entries
  TypedResult tmpl;
  int template_id = 0;
  int rule = 0;                    // source rule index
  std::vector<std::string> atoms;  // grounded constant/predicate names
  std::string atoms_label;         // atoms joined with '+'

  int length() const { return phrase.empty() ? 1 : static_cast<int>(phrase.size()); }
};

struct ShiftCandidate {
  int tokens_consumed;
  const LexiconEntry* entry;
};

class Domain {
 public:
  struct Rule {
    std::vector<std::string> phrase;
    std::string pos_tag;
    std::string mr_text;  // whitespace-normalised source
  };

  Domain();

  const Symbols& symbols() const { return symbols_; }
  const TypeHierarchy& hierarchy() const { return symbols_.hierarchy(); }
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const LexiconEntry& entry(int template_id) const;
  const std::set<std::string>& overloaded() const { return overloaded_; }
  bool simple_types() const { return simple_types_; }

  // Entries whose trigger matches a prefix of `queue` (tokens from the queue
  // head on; `tags` aligned the same way, possibly empty). Ordered by tokens
  // consumed (longest first), then template id.
  std::vector<ShiftCandidate> lookup_shifts(
      std::span<const std::string> queue,
      std::span<const std::string> tags) const;

  // Copy where every domain base type collapses to `e` (`i` and `t` kept)
  // and type variables become `e`.
  Domain simplified() const;

  // Canonical text form; loading it back yields an equal domain.
  std::string save() const;

  // Parses a meaning representation against this domain.
  TypedResult parse_mr(std::string_view text) const;
  std::string print(const Expr& e) const;

  bool operator==(const Domain& o) const;

  // Building blocks used by the loader.
  void add_type(const std::string& child, const std::string& parent);
  void add_atom(const std::string& name, const Type& type, bool is_constant);
  void add_rule(Rule rule);

 private:
  void finish_atoms();

  Symbols symbols_;
  std::vector<Rule> rules_;
  std::vector<LexiconEntry> entries_;
  std::map<std::string, std::vector<int>> by_first_word_;
  std::map<std::string, std::vector<int>> by_tag_;
  std::set<std::string> overloaded_;
  bool simple_types_ = false;
};

// Throws ParseError/TypeError with the offending line number.
Domain load_domain(std::istream& in);
Domain load_domain_text(std::string_view text);
Domain load_domain_file(const std::string& path);

// Lowercases and splits on whitespace with punctuation detached:
// "area?" -> "area", "?".
std::vector<std::string> tokenize(std::string_view text);

}  // namespace tdparse

#endif  // TDPARSE_LEXICON_H_
