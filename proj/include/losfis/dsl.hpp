#pragma once

// Line-oriented text format for complete Sugeno systems (`.fis`):
//
//   # comment
//   set and_operator min
//   variable input Speed [km/h] domain 0 80
//     mf Low trap 16 28 34 40
//   variable output LoS domain 0 6
//   rule IF TrafficFlow IS Low AND Speed IS High THEN LoS = 1
//
// Identifiers are case-sensitive. Numbers are plain decimals with an optional
// sign and fraction. `mf` lines attach to the most recent input variable.

#include <array>
#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "fis.hpp"

namespace losfis::dsl {

  struct ParseError {
    std::size_t line{1};
    std::size_t column{1};
    std::string message;
    std::string token;

    [[nodiscard]] std::string to_string() const {
      auto out = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
      if (!token.empty()) {
        out += " (at '" + token + "')";
      }
      return out;
    }
  };

  inline std::ostream& operator<<(std::ostream& os, ParseError const& e) { return os << e.to_string(); }

  struct ParseResult {
    std::optional<SugenoFis> fis;
    std::vector<ParseError> errors;

    [[nodiscard]] bool ok() const noexcept { return fis.has_value(); }
    explicit operator bool() const noexcept { return ok(); }
  };

  /// Shortest decimal text that reads back as exactly `value`, never in exponent form.
  [[nodiscard]] inline std::string format_number(double value) {
    std::array<char, 400> buf{};
    auto const [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
    if (ec != std::errc{}) {
      return "nan";
    }
    return std::string(buf.data(), end);
  }

  namespace detail {

    enum class Tok { Ident, Number, Unit, Equals, Newline, End };

    struct Token {
      Tok kind{Tok::End};
      std::string text;
      double number{0.0};
      std::size_t line{1};
      std::size_t column{1};
    };

    inline bool ident_start(char c) noexcept {
      return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    }
    inline bool ident_char(char c) noexcept { return ident_start(c) || (c >= '0' && c <= '9'); }
    inline bool digit(char c) noexcept { return c >= '0' && c <= '9'; }

    class Lexer {
      std::string_view m_src;
      std::size_t m_pos{0};
      std::size_t m_line{1};
      std::size_t m_col{1};

    public:
      explicit Lexer(std::string_view src) : m_src{src} {}

      std::vector<Token> run(std::optional<ParseError>& error) {
        std::vector<Token> out;
        while (m_pos < m_src.size()) {
          char const c = m_src[m_pos];
          if (c == ' ' || c == '\t' || c == '\r') {
            advance();
          } else if (c == '#') {
            while (m_pos < m_src.size() && m_src[m_pos] != '\n') advance();
          } else if (c == '\n') {
            out.push_back(Token{Tok::Newline, "\\n", 0.0, m_line, m_col});
            advance();
          } else if (c == '=') {
            out.push_back(Token{Tok::Equals, "=", 0.0, m_line, m_col});
            advance();
          } else if (c == '[') {
            auto tok = Token{Tok::Unit, "", 0.0, m_line, m_col};
            advance();
            while (m_pos < m_src.size() && m_src[m_pos] != ']' && m_src[m_pos] != '\n' &&
                   m_src[m_pos] != ' ' && m_src[m_pos] != '\t' && m_src[m_pos] != '\r') {
              tok.text += m_src[m_pos];
              advance();
            }
            if (m_pos >= m_src.size() || m_src[m_pos] != ']') {
              error = ParseError{tok.line, tok.column, "unterminated unit, expected ']'", "[" + tok.text};
              return out;
            }
            if (tok.text.empty()) {
              error = ParseError{tok.line, tok.column, "empty unit", "[]"};
              return out;
            }
            advance();
            out.push_back(std::move(tok));
          } else if (ident_start(c)) {
            auto tok = Token{Tok::Ident, "", 0.0, m_line, m_col};
            while (m_pos < m_src.size() && ident_char(m_src[m_pos])) {
              tok.text += m_src[m_pos];
              advance();
            }
            out.push_back(std::move(tok));
          } else if (digit(c) || c == '-' || c == '+') {
            auto tok = Token{Tok::Number, "", 0.0, m_line, m_col};
            if (!lex_number(tok)) {
              error = ParseError{tok.line, tok.column, "malformed number", tok.text};
              return out;
            }
            out.push_back(std::move(tok));
          } else {
            auto const byte = static_cast<unsigned char>(c);
            std::string shown = (byte >= 0x20 && byte < 0x7f) ? std::string(1, c) : hex_byte(byte);
            error = ParseError{m_line, m_col, "unexpected character", shown};
            return out;
          }
        }
        out.push_back(Token{Tok::End, "end of input", 0.0, m_line, m_col});
        return out;
      }

    private:
      void advance() noexcept {
        if (m_src[m_pos] == '\n') {
          ++m_line;
          m_col = 1;
        } else {
          ++m_col;
        }
        ++m_pos;
      }

      static std::string hex_byte(unsigned char b) {
        constexpr char digits[] = "0123456789abcdef";
        return std::string{"\\x"} + digits[b >> 4] + digits[b & 0xf];
      }

      // sign? digits ('.' digits)?
      bool lex_number(Token& tok) {
        auto const start = m_pos;
        if (m_src[m_pos] == '-' || m_src[m_pos] == '+') advance();
        std::size_t int_digits = 0;
        while (m_pos < m_src.size() && digit(m_src[m_pos])) {
          advance();
          ++int_digits;
        }
        bool ok = int_digits > 0;
        if (m_pos < m_src.size() && m_src[m_pos] == '.') {
          advance();
          std::size_t frac_digits = 0;
          while (m_pos < m_src.size() && digit(m_src[m_pos])) {
            advance();
            ++frac_digits;
          }
          ok = ok && frac_digits > 0;
        }
        // a number glued to letters ("12ab") is not a number
        while (m_pos < m_src.size() && (ident_char(m_src[m_pos]) || m_src[m_pos] == '.')) {
          advance();
          ok = false;
        }
        tok.text = std::string{m_src.substr(start, m_pos - start)};
        if (!ok) {
          return false;
        }
        auto const* first = tok.text.data() + (tok.text.front() == '+' ? 1 : 0);
        auto const [ptr, ec] = std::from_chars(first, tok.text.data() + tok.text.size(), tok.number);
        return ec == std::errc{} && ptr == tok.text.data() + tok.text.size();
      }
    };

    struct Pos {
      std::size_t line{1};
      std::size_t column{1};
      std::string token;
    };

    struct VarDecl {
      bool is_input{true};
      std::string name;
      std::string unit;
      Interval domain;
      std::vector<Term> terms;
      Pos pos;
      std::vector<Pos> term_pos;
    };

    struct RuleDecl {
      Rule rule;
      std::string target;
      Pos pos;
      Pos target_pos;
      Pos value_pos;
      std::vector<Pos> clause_pos;  // position of the term name in each clause
      std::vector<Pos> clause_var_pos;
    };

    class Parser {
      std::vector<Token> m_toks;
      std::size_t m_i{0};

    public:
      explicit Parser(std::vector<Token> toks) : m_toks{std::move(toks)} {}

      std::vector<VarDecl> vars;
      std::vector<RuleDecl> rules;
      AndOperator and_op{AndOperator::Min};

      std::optional<ParseError> run() {
        while (peek().kind != Tok::End) {
          if (peek().kind == Tok::Newline) {
            ++m_i;
            continue;
          }
          auto const& head = peek();
          std::optional<ParseError> err;
          if (head.kind != Tok::Ident) {
            err = error_at(head, "expected 'variable', 'mf', 'rule' or 'set'");
          } else if (head.text == "variable") {
            err = variable();
          } else if (head.text == "mf") {
            err = mf();
          } else if (head.text == "rule") {
            err = rule();
          } else if (head.text == "set") {
            err = directive();
          } else {
            err = error_at(head, "expected 'variable', 'mf', 'rule' or 'set'");
          }
          if (err) {
            return err;
          }
        }
        return std::nullopt;
      }

    private:
      Token const& peek() const { return m_toks[m_i]; }
      Token const& take() { return m_toks[m_i < m_toks.size() - 1 ? m_i++ : m_i]; }

      static ParseError error_at(Token const& t, std::string msg) {
        return ParseError{t.line, t.column, std::move(msg), t.text};
      }
      static Pos pos_of(Token const& t) { return Pos{t.line, t.column, t.text}; }

      std::optional<ParseError> keyword(std::string_view kw) {
        auto const& t = peek();
        if (t.kind != Tok::Ident || t.text != kw) {
          return error_at(t, "expected '" + std::string{kw} + "'");
        }
        ++m_i;
        return std::nullopt;
      }
      std::optional<ParseError> ident(std::string& out, std::string_view what) {
        auto const& t = peek();
        if (t.kind != Tok::Ident) {
          return error_at(t, "expected " + std::string{what});
        }
        out = t.text;
        ++m_i;
        return std::nullopt;
      }
      std::optional<ParseError> number(double& out) {
        auto const& t = peek();
        if (t.kind != Tok::Number) {
          return error_at(t, "expected a number");
        }
        out = t.number;
        ++m_i;
        return std::nullopt;
      }
      std::optional<ParseError> end_of_statement() {
        auto const& t = peek();
        if (t.kind == Tok::Newline) {
          ++m_i;
          return std::nullopt;
        }
        if (t.kind == Tok::End) {
          return std::nullopt;
        }
        return error_at(t, "expected end of line");
      }

      // "variable" ("input"|"output") IDENT unit? "domain" NUM NUM mf*
      std::optional<ParseError> variable() {
        VarDecl decl;
        decl.pos = pos_of(peek());
        ++m_i;
        auto const& kind = peek();
        if (kind.kind != Tok::Ident || (kind.text != "input" && kind.text != "output")) {
          return error_at(kind, "expected 'input' or 'output'");
        }
        decl.is_input = kind.text == "input";
        ++m_i;
        decl.pos = pos_of(peek());
        if (auto e = ident(decl.name, "a variable name")) return e;
        if (peek().kind == Tok::Unit) {
          decl.unit = take().text;
        }
        if (auto e = keyword("domain")) return e;
        if (auto e = number(decl.domain.lo)) return e;
        if (auto e = number(decl.domain.hi)) return e;
        vars.push_back(std::move(decl));
        // inline mf clauses on the declaration line
        while (peek().kind == Tok::Ident && peek().text == "mf") {
          if (auto e = mf_body()) return e;
        }
        return end_of_statement();
      }

      std::optional<ParseError> mf() {
        if (auto e = mf_body()) return e;
        return end_of_statement();
      }

      // "mf" IDENT "trap" NUM NUM NUM NUM
      std::optional<ParseError> mf_body() {
        auto const& head = peek();
        if (vars.empty()) {
          return error_at(head, "'mf' must follow a variable declaration");
        }
        if (!vars.back().is_input) {
          return error_at(head, "output variables take constant consequents, not membership functions");
        }
        ++m_i;
        Term term;
        auto const name_pos = pos_of(peek());
        if (auto e = ident(term.name, "a term name")) return e;
        if (auto e = keyword("trap")) return e;
        for (double* p : {&term.mf.a, &term.mf.b, &term.mf.c, &term.mf.d}) {
          if (auto e = number(*p)) return e;
        }
        vars.back().terms.push_back(std::move(term));
        vars.back().term_pos.push_back(name_pos);
        return std::nullopt;
      }

      // "rule" "IF" clause ("AND" clause)* "THEN" IDENT "=" NUM
      std::optional<ParseError> rule() {
        RuleDecl decl;
        decl.pos = pos_of(peek());
        ++m_i;
        if (auto e = keyword("IF")) return e;
        while (true) {
          Clause clause;
          decl.clause_var_pos.push_back(pos_of(peek()));
          if (auto e = ident(clause.variable, "a variable name")) return e;
          if (auto e = keyword("IS")) return e;
          decl.clause_pos.push_back(pos_of(peek()));
          if (auto e = ident(clause.term, "a term name")) return e;
          decl.rule.antecedent.push_back(std::move(clause));
          if (peek().kind == Tok::Ident && peek().text == "AND") {
            ++m_i;
            continue;
          }
          break;
        }
        if (auto e = keyword("THEN")) return e;
        decl.target_pos = pos_of(peek());
        if (auto e = ident(decl.target, "the output variable name")) return e;
        if (peek().kind != Tok::Equals) {
          return error_at(peek(), "expected '='");
        }
        ++m_i;
        decl.value_pos = pos_of(peek());
        if (auto e = number(decl.rule.consequent)) return e;
        rules.push_back(std::move(decl));
        return end_of_statement();
      }

      // "set" "and_operator" ("min"|"product")
      std::optional<ParseError> directive() {
        ++m_i;
        if (auto e = keyword("and_operator")) return e;
        auto const& t = peek();
        auto const op = t.kind == Tok::Ident ? parse_and_operator(t.text) : std::nullopt;
        if (!op) {
          return error_at(t, "expected 'min' or 'product'");
        }
        and_op = *op;
        ++m_i;
        return end_of_statement();
      }
    };

    inline ParseError error_at(Pos const& p, std::string msg) {
      return ParseError{p.line, p.column, std::move(msg), p.token};
    }

    // Name resolution and invariant checks over a syntactically valid document.
    inline ParseResult validate(Parser& p) {
      ParseResult out;
      auto& errs = out.errors;

      if (p.vars.empty()) {
        errs.push_back(ParseError{1, 1, "no variables declared", ""});
        return out;
      }

      std::map<std::string, std::size_t> seen;
      std::vector<FuzzyVariable> inputs;
      std::optional<OutputVariable> output;
      std::vector<VarDecl const*> input_decls;
      for (std::size_t i = 0; i < p.vars.size(); ++i) {
        auto const& v = p.vars[i];
        if (auto [it, fresh] = seen.emplace(v.name, i); !fresh) {
          errs.push_back(error_at(v.pos, "duplicate declaration of variable '" + v.name + "'"));
          continue;
        }
        if (!v.is_input) {
          if (output) {
            errs.push_back(error_at(v.pos, "more than one output variable declared"));
          } else if (!(v.domain.lo < v.domain.hi)) {
            errs.push_back(error_at(v.pos, "output domain must satisfy lo < hi"));
          } else {
            output = OutputVariable{v.name, v.domain, v.unit};
          }
          continue;
        }
        bool fine = true;
        if (!(v.domain.lo < v.domain.hi)) {
          errs.push_back(error_at(v.pos, "variable '" + v.name + "': domain must satisfy lo < hi"));
          fine = false;
        }
        for (std::size_t t = 0; t < v.terms.size(); ++t) {
          auto const& term = v.terms[t];
          auto const& at = v.term_pos[t];
          if (!term.mf.valid()) {
            errs.push_back(error_at(at, "term '" + term.name + "': breakpoints must satisfy a <= b <= c <= d"));
            fine = false;
          } else if (v.domain.lo < v.domain.hi && (term.mf.a < v.domain.lo || term.mf.d > v.domain.hi)) {
            errs.push_back(error_at(at, "term '" + term.name + "': support lies outside the domain"));
            fine = false;
          }
          for (std::size_t q = 0; q < t; ++q) {
            if (v.terms[q].name == term.name) {
              errs.push_back(error_at(at, "duplicate term '" + term.name + "' in variable '" + v.name + "'"));
              fine = false;
              break;
            }
          }
        }
        if (fine) {
          inputs.emplace_back(v.name, v.unit, v.domain, v.terms);
          input_decls.push_back(&v);
        }
      }
      bool any_input = std::ranges::any_of(p.vars, [](VarDecl const& v) { return v.is_input; });
      if (!any_input) {
        errs.push_back(ParseError{1, 1, "no input variables declared", ""});
      }
      if (!output) {
        if (std::ranges::none_of(p.vars, [](VarDecl const& v) { return !v.is_input; })) {
          errs.push_back(ParseError{1, 1, "no output variable declared", ""});
        }
      }

      auto const find_input = [&](std::string const& name) -> FuzzyVariable const* {
        for (auto const& v : inputs) {
          if (v.name() == name) return &v;
        }
        return nullptr;
      };
      auto const declared_input = [&](std::string const& name) {
        return std::ranges::any_of(p.vars, [&](VarDecl const& v) { return v.is_input && v.name == name; });
      };

      std::vector<std::vector<std::pair<std::string, std::string>>> keys;
      std::vector<Rule> rules;
      for (auto const& r : p.rules) {
        bool fine = true;
        for (std::size_t k = 0; k < r.rule.antecedent.size(); ++k) {
          auto const& clause = r.rule.antecedent[k];
          auto const* var = find_input(clause.variable);
          if (!var) {
            if (!declared_input(clause.variable)) {
              errs.push_back(error_at(r.clause_var_pos[k], "unresolved variable '" + clause.variable + "'"));
            }
            fine = false;
          } else if (!var->find_term(clause.term)) {
            errs.push_back(error_at(r.clause_pos[k], "unresolved term '" + clause.term + "' for variable '" +
                                                         clause.variable + "'"));
            fine = false;
          }
          for (std::size_t j = 0; j < k; ++j) {
            if (r.rule.antecedent[j].variable == clause.variable) {
              errs.push_back(error_at(r.clause_var_pos[k], "variable '" + clause.variable +
                                                               "' appears twice in one antecedent"));
              fine = false;
              break;
            }
          }
        }
        if (output) {
          if (r.target != output->name) {
            errs.push_back(error_at(r.target_pos, "rule must assign the output variable '" + output->name + "'"));
            fine = false;
          } else if (!output->domain.contains(r.rule.consequent)) {
            errs.push_back(error_at(r.value_pos, "consequent lies outside the domain of '" + output->name + "'"));
            fine = false;
          }
        }
        if (!fine) {
          continue;
        }
        std::vector<std::pair<std::string, std::string>> key;
        for (auto const& c : r.rule.antecedent) key.emplace_back(c.variable, c.term);
        std::ranges::sort(key);
        if (std::ranges::find(keys, key) != keys.end()) {
          errs.push_back(error_at(r.pos, "duplicate antecedent"));
          continue;
        }
        keys.push_back(std::move(key));
        rules.push_back(r.rule);
      }

      if (!errs.empty()) {
        return out;
      }
      try {
        out.fis.emplace(std::move(inputs), *output, std::move(rules), p.and_op);
      } catch (ConfigError const& e) {
        errs.push_back(ParseError{1, 1, e.what(), ""});
      }
      return out;
    }

  }  // namespace detail

  /// Parse and validate a `.fis` document. Syntax errors stop at the first
  /// offending token; validation then reports every violation it finds.
  [[nodiscard]] inline ParseResult parse(std::string_view source) {
    std::optional<ParseError> err;
    auto tokens = detail::Lexer{source}.run(err);
    if (err) {
      return ParseResult{std::nullopt, {*err}};
    }
    detail::Parser parser{std::move(tokens)};
    if (auto e = parser.run()) {
      return ParseResult{std::nullopt, {*e}};
    }
    return detail::validate(parser);
  }

  /// Canonical text form. parse(serialize(fis)) reproduces `fis` exactly.
  [[nodiscard]] inline std::string serialize(SugenoFis const& fis) {
    std::ostringstream os;
    os << "set and_operator " << to_string(fis.and_operator()) << "\n";
    for (auto const& v : fis.inputs()) {
      os << "\nvariable input " << v.name();
      if (!v.unit().empty()) os << " [" << v.unit() << "]";
      os << " domain " << format_number(v.domain().lo) << " " << format_number(v.domain().hi) << "\n";
      for (auto const& t : v.terms()) {
        os << "  mf " << t.name << " trap " << format_number(t.mf.a) << " " << format_number(t.mf.b) << " "
           << format_number(t.mf.c) << " " << format_number(t.mf.d) << "\n";
      }
    }
    auto const& out = fis.output();
    os << "\nvariable output " << out.name;
    if (!out.unit.empty()) os << " [" << out.unit << "]";
    os << " domain " << format_number(out.domain.lo) << " " << format_number(out.domain.hi) << "\n";
    if (!fis.rules().empty()) {
      os << "\n";
    }
    for (auto const& r : fis.rules()) {
      os << "rule IF ";
      for (std::size_t k = 0; k < r.antecedent.size(); ++k) {
        if (k > 0) os << " AND ";
        os << r.antecedent[k].variable << " IS " << r.antecedent[k].term;
      }
      os << " THEN " << out.name << " = " << format_number(r.consequent) << "\n";
    }
    return os.str();
  }

}  // namespace losfis::dsl
