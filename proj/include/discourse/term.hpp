#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace discourse {

/// A node of the s-expression-like content language shared by acts, rules
/// and world files.
///
/// Atoms come in three flavours: plain symbols (`ORANGES`, `:AT`), pattern
/// variables (`?A`) and act references (`[INFORM-1]`). Lists hold any terms.
class Term {
 public:
  enum class Kind { Symbol, Variable, ActRef, List };

  Term() : kind_(Kind::List) {}

  static Term symbol(std::string name);
  static Term variable(std::string name);
  static Term act_ref(std::string id);
  static Term list(std::vector<Term> items);

  /// Parses exactly one term; trailing non-whitespace is an error.
  static Term parse(std::string_view text);
  /// Parses a sequence of terms (used for rule and world files).
  /// `;` starts a comment that runs to end of line.
  static std::vector<Term> parse_all(std::string_view text);

  Kind kind() const { return kind_; }
  bool is_symbol() const { return kind_ == Kind::Symbol; }
  bool is_variable() const { return kind_ == Kind::Variable; }
  bool is_act_ref() const { return kind_ == Kind::ActRef; }
  bool is_list() const { return kind_ == Kind::List; }
  bool is_symbol(std::string_view name) const { return is_symbol() && text_ == name; }

  /// Symbol name, variable name (without `?`) or referenced act id.
  const std::string& text() const { return text_; }
  const std::vector<Term>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  const Term& operator[](std::size_t i) const { return items_.at(i); }

  /// Head symbol of a list, or empty when this is not a list headed by a symbol.
  std::string_view head() const;

  bool is_ground() const;
  void collect_variables(std::vector<std::string>& out) const;

  std::string str() const;

  friend bool operator==(const Term& a, const Term& b) = default;
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  Kind kind_;
  std::string text_;
  std::vector<Term> items_;
};

using Bindings = std::map<std::string, Term>;

/// One-way unification of `pattern` against `term`. Variables in `term` are
/// treated as opaque atoms. Extends `b` on success; leaves it untouched on
/// failure.
bool match(const Term& pattern, const Term& term, Bindings& b);

/// Replaces bound variables in `templ`; unbound variables are kept.
Term substitute(const Term& templ, const Bindings& b);

}  // namespace discourse
