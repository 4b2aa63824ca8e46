#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dsl.hpp"
#include "fis.hpp"

namespace losfis {

  inline constexpr int kMinLevel = 1;
  inline constexpr int kMaxLevel = 6;

  /// Level of service, 1 (free flow) through 6 (congested).
  class LosLevel {
    int m_value;

  public:
    explicit LosLevel(int value) : m_value{value} {
      if (value < kMinLevel || value > kMaxLevel) {
        throw std::out_of_range("LoS level must lie in 1..6, got " + std::to_string(value));
      }
    }

    [[nodiscard]] int value() const noexcept { return m_value; }

    [[nodiscard]] std::string_view description() const noexcept {
      static constexpr std::array<std::string_view, 6> kText{
          "The traffic flow is free.",
          "Traffic flow is almost continuous.",
          "The traffic situation is stable.",
          "The traffic situation is still stable.",
          "The lane capacity is full.",
          "The section is congested.",
      };
      return kText[static_cast<std::size_t>(m_value - 1)];
    }

    auto operator<=>(LosLevel const&) const = default;
  };

  inline std::ostream& operator<<(std::ostream& os, LosLevel l) { return os << "LoS " << l.value(); }

  /// Axis-aligned box in (flow, speed) space. Containment is half-open, closed on
  /// the low edges; see LosRegionModel::contains for the domain-edge exception.
  struct Rect {
    Interval flow;
    Interval speed;

    bool operator==(Rect const&) const = default;
    [[nodiscard]] double area() const noexcept { return flow.width() * speed.width(); }
  };

  struct Region {
    LosLevel level;
    Rect rect;

    bool operator==(Region const&) const = default;
  };

  /// Flow capacity per lane used to derive the default flow axis.
  inline constexpr double kFlowPerLane = 2000.0;
  inline constexpr Interval kDefaultSpeedDomain{0.0, 80.0};

  /// Expert LoS areas: disjoint rectangles mapped to levels. This is the
  /// ground-truth labelling used to build and score the fuzzy system.
  class LosRegionModel {
    std::vector<Region> m_regions;
    int m_lanes{1};
    Interval m_flow;
    Interval m_speed;

  public:
    LosRegionModel(std::vector<Region> regions, int lanes, std::optional<Interval> flow_domain = std::nullopt,
                   std::optional<Interval> speed_domain = std::nullopt)
        : m_regions{std::move(regions)}, m_lanes{lanes} {
      if (lanes <= 0) {
        throw ConfigError("lane count must be positive");
      }
      m_flow = flow_domain.value_or(Interval{0.0, kFlowPerLane * lanes});
      m_speed = speed_domain.value_or(kDefaultSpeedDomain);
      if (auto const issues = problems(); !issues.empty()) {
        throw ConfigError(issues.front());
      }
    }

    [[nodiscard]] std::vector<Region> const& regions() const noexcept { return m_regions; }
    [[nodiscard]] int lanes() const noexcept { return m_lanes; }
    [[nodiscard]] Interval flow_domain() const noexcept { return m_flow; }
    [[nodiscard]] Interval speed_domain() const noexcept { return m_speed; }

    [[nodiscard]] bool in_domain(double flow, double speed) const noexcept {
      return std::isfinite(flow) && std::isfinite(speed) && m_flow.contains(flow) && m_speed.contains(speed);
    }

    /// Half-open containment [lo, hi), except that an upper edge lying on the
    /// domain's upper bound is closed so the domain corner stays labelled.
    [[nodiscard]] bool contains(Rect const& r, double flow, double speed) const noexcept {
      auto const within = [](Interval iv, Interval domain, double x) {
        return iv.lo <= x && (x < iv.hi || (x == iv.hi && iv.hi == domain.hi));
      };
      return within(r.flow, m_flow, flow) && within(r.speed, m_speed, speed);
    }

    bool operator==(LosRegionModel const&) const = default;

  private:
    [[nodiscard]] std::vector<std::string> problems() const {
      std::vector<std::string> out;
      if (!(m_flow.lo < m_flow.hi) || !(m_speed.lo < m_speed.hi)) {
        out.emplace_back("domains must satisfy lo < hi");
      }
      for (std::size_t i = 0; i < m_regions.size(); ++i) {
        auto const& r = m_regions[i].rect;
        auto const name = "region " + std::to_string(i + 1) + ": ";
        if (!(r.flow.lo < r.flow.hi) || !(r.speed.lo < r.speed.hi)) {
          out.push_back(name + "rectangle must have positive extent");
        }
        if (r.flow.lo < m_flow.lo || r.flow.hi > m_flow.hi || r.speed.lo < m_speed.lo || r.speed.hi > m_speed.hi) {
          out.push_back(name + "rectangle leaves the flow/speed domain");
        }
        for (std::size_t j = 0; j < i; ++j) {
          auto const& q = m_regions[j].rect;
          bool const overlap = r.flow.lo < q.flow.hi && q.flow.lo < r.flow.hi && r.speed.lo < q.speed.hi &&
                               q.speed.lo < r.speed.hi;
          if (overlap) {
            out.push_back(name + "overlaps region " + std::to_string(j + 1));
          }
        }
      }
      return out;
    }
  };

  /// Ground-truth level at (flow, speed), or nullopt when no region contains it.
  [[nodiscard]] inline std::optional<LosLevel> oracle_label(LosRegionModel const& model, double flow, double speed) {
    if (!model.in_domain(flow, speed)) {
      throw DomainError("point (flow " + std::to_string(flow) + ", speed " + std::to_string(speed) +
                        ") lies outside the region model's domain");
    }
    for (auto const& r : model.regions()) {
      if (model.contains(r.rect, flow, speed)) {
        return r.level;
      }
    }
    return std::nullopt;
  }

  // ---------------------------------------------------------------------------
  // `.los` region files
  //
  //   lanes 3
  //   domain flow 0 6000        # optional; defaults to [0, 2000 * lanes]
  //   domain speed 0 80         # optional; defaults to [0, 80]
  //   region 1 flow 0 1500 speed 50 80

  struct RegionParseResult {
    std::optional<LosRegionModel> model;
    std::vector<dsl::ParseError> errors;

    [[nodiscard]] bool ok() const noexcept { return model.has_value(); }
    explicit operator bool() const noexcept { return ok(); }
  };

  [[nodiscard]] inline RegionParseResult parse_regions(std::string_view source) {
    using dsl::detail::Tok;
    using dsl::detail::Token;
    RegionParseResult out;
    std::optional<dsl::ParseError> err;
    auto const toks = dsl::detail::Lexer{source}.run(err);
    if (err) {
      out.errors.push_back(*err);
      return out;
    }

    std::optional<int> lanes;
    std::optional<Interval> flow_dom;
    std::optional<Interval> speed_dom;
    std::vector<Region> regions;
    std::size_t i = 0;
    auto const fail = [&](Token const& t, std::string msg) {
      out.errors.push_back(dsl::ParseError{t.line, t.column, std::move(msg), t.text});
      return out;
    };
    auto const number = [&](double& v) -> bool {
      if (toks[i].kind != Tok::Number) return false;
      v = toks[i++].number;
      return true;
    };
    auto const keyword = [&](std::string_view kw) -> bool {
      if (toks[i].kind != Tok::Ident || toks[i].text != kw) return false;
      ++i;
      return true;
    };

    while (toks[i].kind != Tok::End) {
      auto const& head = toks[i];
      if (head.kind == Tok::Newline) {
        ++i;
        continue;
      }
      if (keyword("lanes")) {
        double n = 0;
        if (!number(n) || n != std::floor(n) || n < 1 || n > 64) {
          return fail(toks[i], "expected a positive whole lane count");
        }
        if (lanes) {
          return fail(head, "duplicate 'lanes' line");
        }
        lanes = static_cast<int>(n);
      } else if (keyword("domain")) {
        auto const& axis = toks[i];
        Interval iv;
        if (!(keyword("flow") || keyword("speed"))) {
          return fail(axis, "expected 'flow' or 'speed'");
        }
        if (!number(iv.lo) || !number(iv.hi)) {
          return fail(toks[i], "expected a number");
        }
        auto& slot = axis.text == "flow" ? flow_dom : speed_dom;
        if (slot) {
          return fail(axis, "duplicate domain for '" + axis.text + "'");
        }
        slot = iv;
      } else if (keyword("region")) {
        double level = 0;
        auto const& level_tok = toks[i];
        if (!number(level) || level != std::floor(level) || level < kMinLevel || level > kMaxLevel) {
          return fail(level_tok, "expected a level between 1 and 6");
        }
        Rect r;
        if (!keyword("flow")) return fail(toks[i], "expected 'flow'");
        if (!number(r.flow.lo) || !number(r.flow.hi)) return fail(toks[i], "expected a number");
        if (!keyword("speed")) return fail(toks[i], "expected 'speed'");
        if (!number(r.speed.lo) || !number(r.speed.hi)) return fail(toks[i], "expected a number");
        regions.push_back(Region{LosLevel{static_cast<int>(level)}, r});
      } else {
        return fail(head, "expected 'lanes', 'domain' or 'region'");
      }
      if (toks[i].kind != Tok::Newline && toks[i].kind != Tok::End) {
        return fail(toks[i], "expected end of line");
      }
    }
    if (!lanes) {
      out.errors.push_back(dsl::ParseError{1, 1, "missing 'lanes' line", ""});
      return out;
    }
    if (regions.empty()) {
      out.errors.push_back(dsl::ParseError{1, 1, "no regions declared", ""});
      return out;
    }
    try {
      out.model.emplace(std::move(regions), *lanes, flow_dom, speed_dom);
    } catch (ConfigError const& e) {
      out.errors.push_back(dsl::ParseError{1, 1, e.what(), ""});
    }
    return out;
  }

  [[nodiscard]] inline std::string serialize_regions(LosRegionModel const& model) {
    using dsl::format_number;
    std::ostringstream os;
    os << "lanes " << model.lanes() << "\n";
    os << "domain flow " << format_number(model.flow_domain().lo) << " " << format_number(model.flow_domain().hi)
       << "\n";
    os << "domain speed " << format_number(model.speed_domain().lo) << " "
       << format_number(model.speed_domain().hi) << "\n";
    for (auto const& r : model.regions()) {
      os << "region " << r.level.value() << " flow " << format_number(r.rect.flow.lo) << " "
         << format_number(r.rect.flow.hi) << " speed " << format_number(r.rect.speed.lo) << " "
         << format_number(r.rect.speed.hi) << "\n";
    }
    return os.str();
  }

  // ---------------------------------------------------------------------------
  // Rule generation

  /// A term pair whose labelled samples do not agree on one level.
  struct RuleConflict {
    std::string flow_term;
    std::string speed_term;
    std::map<int, std::size_t> counts;  // level -> labelled samples

    [[nodiscard]] std::string describe() const {
      std::string out = "(" + flow_term + ", " + speed_term + "):";
      for (auto const& [level, n] : counts) {
        out += " LoS" + std::to_string(level) + "=" + std::to_string(n);
      }
      return out;
    }
  };

  class RuleConflictError : public ConfigError {
    std::vector<RuleConflict> m_conflicts;

    static std::string message(std::vector<RuleConflict> const& cs) {
      std::string out = "conflicting term pairs:";
      for (auto const& c : cs) out += " " + c.describe();
      return out;
    }

  public:
    explicit RuleConflictError(std::vector<RuleConflict> conflicts)
        : ConfigError(message(conflicts)), m_conflicts{std::move(conflicts)} {}

    [[nodiscard]] std::vector<RuleConflict> const& conflicts() const noexcept { return m_conflicts; }
  };

  /// Membership degree a sample must reach in both terms to count for a pair.
  inline constexpr double kRuleSampleAlpha = 0.5;
  inline constexpr std::size_t kDefaultRuleGrid = 201;
  inline constexpr double kDefaultAgreement = 0.9;

  /// Builds one rule per (flow term, speed term) pair by sampling a grid x grid
  /// lattice over both domains. A pair sees the samples where both of its terms
  /// reach degree 0.5; if at least `agreement` of its oracle-labelled samples
  /// share a level, the pair gets a rule with that level as consequent. Pairs
  /// without labelled samples get no rule. Disagreeing pairs are collected and
  /// reported together through RuleConflictError.
  [[nodiscard]] inline std::vector<Rule> generate_rules(LosRegionModel const& model,
                                                        FuzzyVariable const& flow_var,
                                                        FuzzyVariable const& speed_var,
                                                        std::size_t grid = kDefaultRuleGrid,
                                                        double agreement = kDefaultAgreement) {
    if (grid < 2) {
      throw ConfigError("rule grid needs at least 2 samples per axis");
    }
    if (!(agreement > 0.5 && agreement <= 1.0)) {
      throw ConfigError("agreement must lie in (0.5, 1]");
    }
    auto const axis = [grid](Interval iv) {
      std::vector<double> xs(grid);
      for (std::size_t k = 0; k < grid; ++k) {
        xs[k] = iv.lo + iv.width() * static_cast<double>(k) / static_cast<double>(grid - 1);
      }
      xs.back() = iv.hi;
      return xs;
    };
    auto const flows = axis(flow_var.domain());
    auto const speeds = axis(speed_var.domain());

    // Oracle labels are shared by every pair, so compute them once.
    std::vector<int> labels(grid * grid, 0);
    for (std::size_t i = 0; i < grid; ++i) {
      for (std::size_t j = 0; j < grid; ++j) {
        if (model.in_domain(flows[i], speeds[j])) {
          if (auto const l = oracle_label(model, flows[i], speeds[j])) {
            labels[i * grid + j] = l->value();
          }
        }
      }
    }

    std::vector<Rule> rules;
    std::vector<RuleConflict> conflicts;
    for (auto const& ft : flow_var.terms()) {
      for (auto const& st : speed_var.terms()) {
        std::map<int, std::size_t> counts;
        std::size_t labelled = 0;
        for (std::size_t i = 0; i < grid; ++i) {
          if (membership_degree(ft.mf, flows[i]) < kRuleSampleAlpha) continue;
          for (std::size_t j = 0; j < grid; ++j) {
            if (membership_degree(st.mf, speeds[j]) < kRuleSampleAlpha) continue;
            if (auto const l = labels[i * grid + j]; l != 0) {
              ++counts[l];
              ++labelled;
            }
          }
        }
        if (labelled == 0) {
          continue;
        }
        auto const best = std::ranges::max_element(counts, {}, [](auto const& kv) { return kv.second; });
        if (static_cast<double>(best->second) < agreement * static_cast<double>(labelled)) {
          conflicts.push_back(RuleConflict{ft.name, st.name, std::move(counts)});
          continue;
        }
        rules.push_back(Rule{{{flow_var.name(), ft.name}, {speed_var.name(), st.name}},
                             static_cast<double>(best->first)});
      }
    }
    if (!conflicts.empty()) {
      throw RuleConflictError(std::move(conflicts));
    }
    return rules;
  }

  // ---------------------------------------------------------------------------
  // Classification

  inline constexpr double kDefaultBoundaryEpsilon = 0.05;

  struct Classification {
    double raw{0.0};
    std::optional<LosLevel> level;  // nullopt: anomaly
    bool boundary{false};
    std::size_t fired_rules{0};

    [[nodiscard]] bool anomaly() const noexcept { return !level.has_value(); }
  };

  /// Round half up, then clamp into 1..6.
  [[nodiscard]] inline int round_level(double raw) noexcept {
    auto const r = static_cast<int>(std::floor(raw + 0.5));
    return std::clamp(r, kMinLevel, kMaxLevel);
  }

  /// The LoS profile: exactly two inputs, traffic flow first, speed second.
  inline void require_los_profile(SugenoFis const& fis) {
    if (fis.inputs().size() != 2) {
      throw ConfigError("a LoS system needs exactly two inputs (traffic flow, then speed); got " +
                        std::to_string(fis.inputs().size()));
    }
  }

  [[nodiscard]] inline Classification classify(SugenoFis const& fis, double flow, double speed,
                                               double epsilon = kDefaultBoundaryEpsilon) {
    if (!(epsilon >= 0.0 && epsilon < 0.5)) {
      throw ConfigError("boundary epsilon must lie in [0, 0.5)");
    }
    require_los_profile(fis);
    std::array<double, 2> const input{flow, speed};
    auto const res = fis.infer(input);
    Classification out;
    out.raw = res.raw;
    out.fired_rules = res.fired_rules;
    if (res.anomalous()) {
      return out;
    }
    out.level = LosLevel{round_level(res.raw)};
    out.boundary = std::abs(res.raw - std::floor(res.raw + 0.5)) > epsilon;
    return out;
  }

}  // namespace losfis
