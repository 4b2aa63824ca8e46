#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trapezoid.hpp"

namespace losfis {

  /// Raised for structurally invalid systems: bad breakpoints, unknown names,
  /// duplicate rules, consequents outside the output domain.
  class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
  };

  /// Raised when a crisp input lies outside its variable's domain (or is not finite).
  class DomainError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
  };

  struct Interval {
    double lo{0.0};
    double hi{0.0};

    bool operator==(Interval const&) const = default;
    [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    [[nodiscard]] double width() const noexcept { return hi - lo; }
  };

  struct Term {
    std::string name;
    TrapezoidMF mf;

    bool operator==(Term const&) const = default;
  };

  /// A named crisp input partitioned into ordered linguistic terms.
  class FuzzyVariable {
    std::string m_name;
    std::string m_unit;
    Interval m_domain;
    std::vector<Term> m_terms;

  public:
    FuzzyVariable(std::string name, std::string unit, Interval domain, std::vector<Term> terms)
        : m_name{std::move(name)}, m_unit{std::move(unit)}, m_domain{domain}, m_terms{std::move(terms)} {
      if (auto const issues = problems(m_name, m_domain, m_terms); !issues.empty()) {
        throw ConfigError(issues.front());
      }
    }

    /// Every invariant violation of a prospective variable, in declaration order.
    [[nodiscard]] static std::vector<std::string> problems(std::string_view name,
                                                           Interval domain,
                                                           std::span<Term const> terms) {
      std::vector<std::string> out;
      auto const prefix = "variable '" + std::string{name} + "': ";
      if (!(std::isfinite(domain.lo) && std::isfinite(domain.hi) && domain.lo < domain.hi)) {
        out.push_back(prefix + "domain must satisfy lo < hi");
      }
      for (std::size_t i = 0; i < terms.size(); ++i) {
        auto const& t = terms[i];
        auto const& mf = t.mf;
        if (!mf.valid()) {
          out.push_back(prefix + "term '" + t.name + "' breakpoints must satisfy a <= b <= c <= d");
        } else if (mf.a < domain.lo || mf.d > domain.hi) {
          out.push_back(prefix + "term '" + t.name + "' support lies outside the domain");
        }
        for (std::size_t j = 0; j < i; ++j) {
          if (terms[j].name == t.name) {
            out.push_back(prefix + "duplicate term '" + t.name + "'");
            break;
          }
        }
      }
      return out;
    }

    [[nodiscard]] std::string const& name() const noexcept { return m_name; }
    [[nodiscard]] std::string const& unit() const noexcept { return m_unit; }
    [[nodiscard]] Interval domain() const noexcept { return m_domain; }
    [[nodiscard]] std::vector<Term> const& terms() const noexcept { return m_terms; }
    [[nodiscard]] Term const& term(std::size_t i) const { return m_terms.at(i); }

    [[nodiscard]] std::optional<std::size_t> find_term(std::string_view term) const noexcept {
      for (std::size_t i = 0; i < m_terms.size(); ++i) {
        if (m_terms[i].name == term) {
          return i;
        }
      }
      return std::nullopt;
    }

    /// True when some term has a positive degree at x.
    [[nodiscard]] bool covers(double x) const noexcept {
      return std::ranges::any_of(m_terms, [x](Term const& t) { return membership_degree(t.mf, x) > 0.0; });
    }

    bool operator==(FuzzyVariable const&) const = default;
  };

  struct Clause {
    std::string variable;
    std::string term;

    bool operator==(Clause const&) const = default;
  };

  /// Conjunctive IF-THEN rule with a constant consequent.
  struct Rule {
    std::vector<Clause> antecedent;
    double consequent{0.0};

    bool operator==(Rule const&) const = default;
  };

  enum class AndOperator { Min, Product };

  [[nodiscard]] constexpr std::string_view to_string(AndOperator op) noexcept {
    return op == AndOperator::Min ? "min" : "product";
  }

  [[nodiscard]] inline std::optional<AndOperator> parse_and_operator(std::string_view s) noexcept {
    if (s == "min") return AndOperator::Min;
    if (s == "product") return AndOperator::Product;
    return std::nullopt;
  }

  struct OutputVariable {
    std::string name;
    Interval domain;
    std::string unit{};

    bool operator==(OutputVariable const&) const = default;
  };

  struct InferenceResult {
    double raw{0.0};
    std::size_t fired_rules{0};
    double total_strength{0.0};

    [[nodiscard]] bool anomalous() const noexcept { return fired_rules == 0; }
  };

  namespace detail {
    // (input index, term index) per clause, sorted by input index
    using ResolvedRule = std::vector<std::pair<std::size_t, std::size_t>>;

    inline double conjoin(AndOperator op, double acc, double degree) noexcept {
      return op == AndOperator::Min ? std::min(acc, degree) : acc * degree;
    }
  }  // namespace detail

  /// Zeroth-order Takagi-Sugeno system. Immutable once built; all queries are const
  /// and thread-safe.
  class SugenoFis {
    std::vector<FuzzyVariable> m_inputs;
    OutputVariable m_output;
    std::vector<Rule> m_rules;
    AndOperator m_and{AndOperator::Min};
    std::vector<detail::ResolvedRule> m_resolved;
    // Rules are accumulated in antecedent order so that the sums do not depend
    // on the order the rules were declared in.
    std::vector<std::size_t> m_order;

  public:
    SugenoFis(std::vector<FuzzyVariable> inputs,
              OutputVariable output,
              std::vector<Rule> rules,
              AndOperator and_op = AndOperator::Min)
        : m_inputs{std::move(inputs)}, m_output{std::move(output)}, m_rules{std::move(rules)}, m_and{and_op} {
      if (m_inputs.empty()) {
        throw ConfigError("a fuzzy system needs at least one input variable");
      }
      for (std::size_t i = 0; i < m_inputs.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          if (m_inputs[i].name() == m_inputs[j].name()) {
            throw ConfigError("duplicate input variable '" + m_inputs[i].name() + "'");
          }
        }
        if (m_inputs[i].name() == m_output.name) {
          throw ConfigError("output variable '" + m_output.name + "' clashes with an input");
        }
      }
      if (!(std::isfinite(m_output.domain.lo) && std::isfinite(m_output.domain.hi) &&
            m_output.domain.lo < m_output.domain.hi)) {
        throw ConfigError("output variable '" + m_output.name + "': domain must satisfy lo < hi");
      }
      m_resolved.reserve(m_rules.size());
      for (std::size_t r = 0; r < m_rules.size(); ++r) {
        if (auto const issues = rule_problems(m_rules[r]); !issues.empty()) {
          throw ConfigError("rule " + std::to_string(r + 1) + ": " + issues.front());
        }
        m_resolved.push_back(resolve(m_rules[r]));
        for (std::size_t q = 0; q < r; ++q) {
          if (m_resolved[q] == m_resolved[r]) {
            throw ConfigError("rule " + std::to_string(r + 1) + " repeats the antecedent of rule " +
                              std::to_string(q + 1));
          }
        }
      }
      m_order.resize(m_rules.size());
      std::iota(m_order.begin(), m_order.end(), std::size_t{0});
      std::ranges::sort(m_order, [this](std::size_t l, std::size_t r) { return m_resolved[l] < m_resolved[r]; });
    }

    [[nodiscard]] std::vector<FuzzyVariable> const& inputs() const noexcept { return m_inputs; }
    [[nodiscard]] OutputVariable const& output() const noexcept { return m_output; }
    [[nodiscard]] std::vector<Rule> const& rules() const noexcept { return m_rules; }
    [[nodiscard]] AndOperator and_operator() const noexcept { return m_and; }

    [[nodiscard]] std::optional<std::size_t> input_index(std::string_view name) const noexcept {
      for (std::size_t i = 0; i < m_inputs.size(); ++i) {
        if (m_inputs[i].name() == name) {
          return i;
        }
      }
      return std::nullopt;
    }

    /// Everything wrong with `rule` relative to this system's variables and output.
    [[nodiscard]] std::vector<std::string> rule_problems(Rule const& rule) const {
      std::vector<std::string> out;
      for (std::size_t k = 0; k < rule.antecedent.size(); ++k) {
        auto const& clause = rule.antecedent[k];
        auto const idx = input_index(clause.variable);
        if (!idx) {
          out.push_back("unknown variable '" + clause.variable + "'");
          continue;
        }
        if (!m_inputs[*idx].find_term(clause.term)) {
          out.push_back("variable '" + clause.variable + "' has no term '" + clause.term + "'");
        }
        for (std::size_t j = 0; j < k; ++j) {
          if (rule.antecedent[j].variable == clause.variable) {
            out.push_back("variable '" + clause.variable + "' appears twice in one antecedent");
            break;
          }
        }
      }
      if (!std::isfinite(rule.consequent) || !m_output.domain.contains(rule.consequent)) {
        out.push_back("consequent lies outside the domain of '" + m_output.name + "'");
      }
      return out;
    }

    [[nodiscard]] SugenoFis with_rules(std::vector<Rule> rules) const {
      return SugenoFis{m_inputs, m_output, std::move(rules), m_and};
    }
    [[nodiscard]] SugenoFis with_and_operator(AndOperator op) const {
      return SugenoFis{m_inputs, m_output, m_rules, op};
    }

    /// Throws DomainError unless `input` holds one finite in-domain value per input variable.
    void check_input(std::span<double const> input) const {
      if (input.size() != m_inputs.size()) {
        throw DomainError("expected " + std::to_string(m_inputs.size()) + " input values, got " +
                          std::to_string(input.size()));
      }
      for (std::size_t i = 0; i < input.size(); ++i) {
        auto const& v = m_inputs[i];
        if (!std::isfinite(input[i]) || !v.domain().contains(input[i])) {
          throw DomainError("value " + std::to_string(input[i]) + " for '" + v.name() + "' lies outside [" +
                            std::to_string(v.domain().lo) + ", " + std::to_string(v.domain().hi) + "]");
        }
      }
    }

    /// Firing strength of the i-th rule; input must already be checked.
    [[nodiscard]] double strength_of(std::size_t rule, std::span<double const> input) const {
      double w = 1.0;
      for (auto const& [var, term] : m_resolved[rule]) {
        w = detail::conjoin(m_and, w, membership_degree(m_inputs[var].term(term).mf, input[var]));
      }
      return w;
    }

    [[nodiscard]] InferenceResult infer(std::span<double const> input) const {
      if (m_rules.empty()) {
        throw ConfigError("cannot infer with an empty rule base");
      }
      check_input(input);
      InferenceResult result;
      double weighted = 0.0;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (auto const r : m_order) {
        auto const w = strength_of(r, input);
        if (w > 0.0) {
          auto const c = m_rules[r].consequent;
          ++result.fired_rules;
          result.total_strength += w;
          weighted += w * c;
          lo = std::min(lo, c);
          hi = std::max(hi, c);
        }
      }
      if (result.fired_rules > 0) {
        // a convex combination, but rounding can step an ulp past the fired consequents
        result.raw = std::clamp(weighted / result.total_strength, lo, hi);
      }
      return result;
    }

    bool operator==(SugenoFis const& other) const {
      return m_inputs == other.m_inputs && m_output == other.m_output && m_rules == other.m_rules &&
             m_and == other.m_and;
    }

  private:
    [[nodiscard]] detail::ResolvedRule resolve(Rule const& rule) const {
      detail::ResolvedRule out;
      for (auto const& clause : rule.antecedent) {
        auto const var = *input_index(clause.variable);
        out.emplace_back(var, *m_inputs[var].find_term(clause.term));
      }
      std::ranges::sort(out);
      return out;
    }
  };

  /// Conjunction of the clause degrees of `rule` at `input` (inputs in the system's order).
  /// An empty antecedent fires with strength 1. Unknown names raise ConfigError.
  [[nodiscard]] inline double firing_strength(SugenoFis const& fis, Rule const& rule, std::span<double const> input) {
    double w = 1.0;
    for (auto const& clause : rule.antecedent) {
      auto const var = fis.input_index(clause.variable);
      if (!var) {
        throw ConfigError("unknown variable '" + clause.variable + "'");
      }
      auto const term = fis.inputs()[*var].find_term(clause.term);
      if (!term) {
        throw ConfigError("variable '" + clause.variable + "' has no term '" + clause.term + "'");
      }
      if (*var >= input.size()) {
        throw DomainError("no input value supplied for '" + clause.variable + "'");
      }
      w = detail::conjoin(fis.and_operator(), w,
                          membership_degree(fis.inputs()[*var].term(*term).mf, input[*var]));
    }
    return w;
  }

  /// Weighted-average defuzzification over rules with positive strength.
  /// No fired rule yields raw == 0, which marks the input as anomalous.
  [[nodiscard]] inline InferenceResult infer(SugenoFis const& fis, std::span<double const> input) {
    return fis.infer(input);
  }

}  // namespace losfis
