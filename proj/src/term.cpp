#include "discourse/term.hpp"

#include <cctype>

#include "discourse/errors.hpp"

namespace discourse {

Term Term::symbol(std::string name) {
  Term t;
  t.kind_ = Kind::Symbol;
  t.text_ = std::move(name);
  return t;
}

Term Term::variable(std::string name) {
  Term t;
  t.kind_ = Kind::Variable;
  t.text_ = std::move(name);
  return t;
}

Term Term::act_ref(std::string id) {
  Term t;
  t.kind_ = Kind::ActRef;
  t.text_ = std::move(id);
  return t;
}

Term Term::list(std::vector<Term> items) {
  Term t;
  t.kind_ = Kind::List;
  t.items_ = std::move(items);
  return t;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  bool at_end() {
    skip();
    return pos_ >= s_.size();
  }

  Term term() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      std::vector<Term> items;
      for (;;) {
        skip();
        if (pos_ >= s_.size()) fail("unterminated list");
        if (s_[pos_] == ')') {
          ++pos_;
          break;
        }
        items.push_back(term());
      }
      return Term::list(std::move(items));
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '[') {
      auto end = s_.find(']', pos_);
      if (end == std::string_view::npos) fail("unterminated act reference");
      std::string id(s_.substr(pos_ + 1, end - pos_ - 1));
      if (id.empty()) fail("empty act reference");
      pos_ = end + 1;
      return Term::act_ref(std::move(id));
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != '(' && s_[pos_] != ')' && s_[pos_] != '[' && s_[pos_] != ';')
      ++pos_;
    std::string tok(s_.substr(start, pos_ - start));
    if (tok.empty()) fail("unexpected character");
    if (tok[0] == '?') {
      if (tok.size() == 1) fail("bare '?' is not a variable");
      return Term::variable(tok.substr(1));
    }
    return Term::symbol(std::move(tok));
  }

 private:
  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at offset " + std::to_string(pos_));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Term Term::parse(std::string_view text) {
  Parser p(text);
  Term t = p.term();
  if (!p.at_end()) throw ParseError("trailing input after term");
  return t;
}

std::vector<Term> Term::parse_all(std::string_view text) {
  Parser p(text);
  std::vector<Term> out;
  while (!p.at_end()) out.push_back(p.term());
  return out;
}

std::string_view Term::head() const {
  if (kind_ != Kind::List || items_.empty() || !items_[0].is_symbol()) return {};
  return items_[0].text_;
}

bool Term::is_ground() const {
  if (kind_ == Kind::Variable) return false;
  for (const auto& i : items_)
    if (!i.is_ground()) return false;
  return true;
}

void Term::collect_variables(std::vector<std::string>& out) const {
  if (kind_ == Kind::Variable) {
    for (const auto& v : out)
      if (v == text_) return;
    out.push_back(text_);
    return;
  }
  for (const auto& i : items_) i.collect_variables(out);
}

std::string Term::str() const {
  switch (kind_) {
    case Kind::Symbol:
      return text_;
    case Kind::Variable:
      return "?" + text_;
    case Kind::ActRef:
      return "[" + text_ + "]";
    case Kind::List: {
      std::string s = "(";
      for (std::size_t i = 0; i < items_.size(); ++i) {
        if (i) s += ' ';
        s += items_[i].str();
      }
      return s + ")";
    }
  }
  return {};
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
  if (auto c = a.text_ <=> b.text_; c != 0) return c;
  return std::lexicographical_compare_three_way(a.items_.begin(), a.items_.end(),
                                                b.items_.begin(), b.items_.end());
}

bool match(const Term& pattern, const Term& term, Bindings& b) {
  Bindings local = b;
  auto rec = [&](auto& self, const Term& p, const Term& t) -> bool {
    if (p.is_variable()) {
      auto it = local.find(p.text());
      if (it != local.end()) return it->second == t;
      local.emplace(p.text(), t);
      return true;
    }
    if (p.kind() != t.kind() || p.text() != t.text() || p.size() != t.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!self(self, p[i], t[i])) return false;
    return true;
  };
  if (!rec(rec, pattern, term)) return false;
  b = std::move(local);
  return true;
}

Term substitute(const Term& templ, const Bindings& b) {
  if (templ.is_variable()) {
    auto it = b.find(templ.text());
    return it == b.end() ? templ : it->second;
  }
  if (!templ.is_list()) return templ;
  std::vector<Term> items;
  items.reserve(templ.size());
  for (const auto& i : templ.items()) items.push_back(substitute(i, b));
  return Term::list(std::move(items));
}

}  // namespace discourse
