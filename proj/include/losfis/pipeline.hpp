#pragma once

#include <array>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fis.hpp"
#include "los.hpp"

namespace losfis {

  /// One (speed, flow) observation. The timestamp is carried through untouched.
  struct Measurement {
    std::string timestamp;
    double speed{0.0};  // km/h
    double flow{0.0};   // veh/h

    bool operator==(Measurement const&) const = default;
  };

  /// Shortest text that parses back to exactly `value`.
  [[nodiscard]] inline std::string shortest(double value) {
    std::array<char, 64> buf{};
    auto const [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return ec == std::errc{} ? std::string(buf.data(), end) : std::string{"nan"};
  }

  [[nodiscard]] inline std::optional<double> parse_double(std::string_view s) noexcept {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      return std::nullopt;
    }
    return v;
  }

  // ---------------------------------------------------------------------------
  // CSV ingestion

  inline constexpr std::string_view kMeasurementHeader = "timestamp,speed_kmh,flow_vph";
  inline constexpr std::string_view kLabeledHeader = "timestamp,speed_kmh,flow_vph,los";

  struct IngestError {
    std::size_t line{0};
    std::string message;
  };

  enum class IngestMode {
    Partial,       // keep valid rows, report the rest
    AllOrNothing,  // any bad row empties the result
  };

  struct Dataset {
    std::vector<Measurement> rows;
    /// Per-row labels when the input carried a `los` column; nullopt entries were `-`.
    std::optional<std::vector<std::optional<LosLevel>>> labels;
    /// The first three fields of each accepted row as they appeared in the source.
    std::vector<std::string> row_text;
    std::vector<IngestError> errors;
    /// Non-blank lines after the header.
    std::size_t data_rows{0};

    [[nodiscard]] bool labeled() const noexcept { return labels.has_value(); }
  };

  namespace detail {
    inline std::vector<std::string_view> split_commas(std::string_view line) {
      std::vector<std::string_view> out;
      std::size_t start = 0;
      while (true) {
        auto const pos = line.find(',', start);
        if (pos == std::string_view::npos) {
          out.push_back(line.substr(start));
          return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
      }
    }

    inline std::string_view trim(std::string_view s) noexcept {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
      return s;
    }
  }  // namespace detail

  /// Reads `timestamp,speed_kmh,flow_vph[,los]` CSV. Never throws on malformed
  /// content; every problem is recorded with its 1-based line number.
  [[nodiscard]] inline Dataset ingest(std::string_view text, IngestMode mode = IngestMode::Partial) {
    Dataset out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    std::size_t columns = 3;
    while (pos <= text.size()) {
      auto const nl = text.find('\n', pos);
      auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      auto const line = detail::trim(raw);
      if (!have_header) {
        if (line == kMeasurementHeader) {
          columns = 3;
        } else if (line == kLabeledHeader) {
          columns = 4;
          out.labels.emplace();
        } else {
          out.errors.push_back({line_no, "missing header '" + std::string{kMeasurementHeader} + "'"});
          return out;
        }
        have_header = true;
        continue;
      }
      if (line.empty()) {
        continue;
      }
      ++out.data_rows;
      auto const fields = detail::split_commas(line);
      auto const bad = [&](std::string msg) { out.errors.push_back({line_no, std::move(msg)}); };
      if (fields.size() != columns) {
        bad("expected " + std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
        continue;
      }
      auto const ts = detail::trim(fields[0]);
      auto const speed = parse_double(detail::trim(fields[1]));
      auto const flow = parse_double(detail::trim(fields[2]));
      if (ts.empty()) {
        bad("empty timestamp");
        continue;
      }
      if (!speed || !flow) {
        bad(std::string{"non-numeric "} + (!speed ? "speed" : "flow"));
        continue;
      }
      if (!std::isfinite(*speed) || !std::isfinite(*flow)) {
        bad("non-finite value");
        continue;
      }
      if (*speed < 0.0 || *flow < 0.0) {
        bad(std::string{"negative "} + (*speed < 0.0 ? "speed" : "flow"));
        continue;
      }
      std::optional<LosLevel> label;
      if (columns == 4) {
        auto const l = detail::trim(fields[3]);
        if (l != "-") {
          auto const v = parse_double(l);
          if (!v || *v != std::floor(*v) || *v < kMinLevel || *v > kMaxLevel) {
            bad("los must be 1..6 or '-'");
            continue;
          }
          label = LosLevel{static_cast<int>(*v)};
        }
        out.labels->push_back(label);
      }
      out.rows.push_back(Measurement{std::string{ts}, *speed, *flow});
      auto const third_end = fields[0].size() + fields[1].size() + fields[2].size() + 2;
      out.row_text.emplace_back(line.substr(0, third_end));
    }
    if (!have_header) {
      out.errors.push_back({1, "missing header '" + std::string{kMeasurementHeader} + "'"});
    }
    if (mode == IngestMode::AllOrNothing && !out.errors.empty()) {
      out.rows.clear();
      out.row_text.clear();
      if (out.labels) out.labels->clear();
    }
    return out;
  }

  [[nodiscard]] inline Dataset ingest(std::istream& in, IngestMode mode = IngestMode::Partial) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest(std::string_view{buf.str()}, mode);
  }

  inline void write_measurements(std::ostream& os, std::span<Measurement const> rows) {
    os << kMeasurementHeader << "\n";
    for (auto const& m : rows) {
      os << m.timestamp << "," << shortest(m.speed) << "," << shortest(m.flow) << "\n";
    }
  }

  // ---------------------------------------------------------------------------
  // Synthetic data

  struct SyntheticOptions {
    /// Share of points pushed just outside a region edge.
    double jitter_fraction{0.02};
    /// Maximum outward offset, as a fraction of the axis span.
    double jitter_margin{0.01};
  };

  /// ISO-8601 UTC timestamp `step` quarter-hours after 2023-01-01T00:00:00.
  [[nodiscard]] inline std::string quarter_hour_timestamp(std::size_t step) {
    using namespace std::chrono;
    auto const t = sys_days{year{2023} / January / 1} + minutes{15} * static_cast<long long>(step);
    auto const day = floor<days>(t);
    year_month_day const ymd{day};
    hh_mm_ss const hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:00", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()));
    return buf;
  }

  /// Draws `n` points from the region model: uniform inside a rectangle chosen in
  /// proportion to its area, except that `jitter_fraction` of them are placed
  /// just outside a random edge. Identical seeds give identical output on every
  /// platform (the uniform variates are built from raw 64-bit draws).
  [[nodiscard]] inline std::vector<Measurement> generate_synthetic(LosRegionModel const& model, std::size_t n,
                                                                   std::uint64_t seed,
                                                                   SyntheticOptions const& opts = {}) {
    if (n == 0) {
      throw std::invalid_argument("synthetic sample count must be positive");
    }
    if (model.regions().empty()) {
      throw ConfigError("region model has no regions");
    }
    std::mt19937_64 rng{seed};
    auto const uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    std::vector<double> cumulative;
    double total_area = 0.0;
    for (auto const& r : model.regions()) {
      total_area += r.rect.area();
      cumulative.push_back(total_area);
    }
    auto const flow_dom = model.flow_domain();
    auto const speed_dom = model.speed_domain();

    std::vector<Measurement> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      auto const pick = uniform() * total_area;
      std::size_t idx = 0;
      while (idx + 1 < cumulative.size() && pick >= cumulative[idx]) ++idx;
      auto const& rect = model.regions()[idx].rect;

      double flow = rect.flow.lo + uniform() * rect.flow.width();
      double speed = rect.speed.lo + uniform() * rect.speed.width();
      if (uniform() < opts.jitter_fraction) {
        auto const edge = static_cast<int>(uniform() * 4.0);
        auto const flow_off = uniform() * opts.jitter_margin * flow_dom.width();
        auto const speed_off = uniform() * opts.jitter_margin * speed_dom.width();
        switch (edge) {
          case 0: flow = rect.flow.lo - flow_off; break;
          case 1: flow = rect.flow.hi + flow_off; break;
          case 2: speed = rect.speed.lo - speed_off; break;
          default: speed = rect.speed.hi + speed_off; break;
        }
        flow = std::clamp(flow, flow_dom.lo, flow_dom.hi);
        speed = std::clamp(speed, speed_dom.lo, speed_dom.hi);
      }
      out.push_back(Measurement{quarter_hour_timestamp(k), speed, flow});
    }
    return out;
  }

  // ---------------------------------------------------------------------------
  // Evaluation

  enum class FlagReason { Anomaly, OutOfDomain };

  struct FlaggedPoint {
    std::size_t index{0};
    FlagReason reason{FlagReason::Anomaly};
    std::optional<LosLevel> expected;
  };

  /// Agreement between predictions and ground truth. Accuracy is taken over
  /// points that have a ground-truth level and a non-anomalous prediction.
  struct EvaluationReport {
    std::size_t points{0};          // everything submitted
    std::size_t total{0};           // labelled and classified
    std::size_t mismatches{0};
    std::size_t anomalies{0};       // labelled, but no rule fired
    std::size_t boundary_cases{0};  // among `total`
    std::size_t unlabeled{0};
    std::size_t out_of_domain{0};
    std::array<std::array<std::size_t, 6>, 6> confusion{};  // [expected-1][predicted-1]
    std::vector<FlaggedPoint> flagged;

    [[nodiscard]] std::size_t correct() const noexcept { return total - mismatches; }
    [[nodiscard]] double accuracy() const noexcept {
      return total == 0 ? std::nan("") : static_cast<double>(correct()) / static_cast<double>(total);
    }
  };

  /// Scores `fis` against the oracle, or against `labels` when given (one entry
  /// per row; nullopt means unlabelled). Per-point domain errors are counted in
  /// the report, never thrown.
  [[nodiscard]] inline EvaluationReport evaluate(SugenoFis const& fis, LosRegionModel const& model,
                                                 std::span<Measurement const> data,
                                                 double epsilon = kDefaultBoundaryEpsilon,
                                                 std::span<std::optional<LosLevel> const> labels = {}) {
    if (data.empty()) {
      throw std::invalid_argument("no data to evaluate");
    }
    if (!labels.empty() && labels.size() != data.size()) {
      throw std::invalid_argument("label count does not match data");
    }
    require_los_profile(fis);
    EvaluationReport rep;
    rep.points = data.size();
    for (std::size_t k = 0; k < data.size(); ++k) {
      auto const& m = data[k];
      std::array<double, 2> const input{m.flow, m.speed};
      std::optional<LosLevel> expected;
      try {
        fis.check_input(input);
        expected = labels.empty() ? oracle_label(model, m.flow, m.speed) : labels[k];
      } catch (DomainError const&) {
        ++rep.out_of_domain;
        rep.flagged.push_back(FlaggedPoint{k, FlagReason::OutOfDomain, std::nullopt});
        continue;
      }
      if (!expected) {
        ++rep.unlabeled;
        continue;
      }
      auto const c = classify(fis, m.flow, m.speed, epsilon);
      if (c.anomaly()) {
        ++rep.anomalies;
        rep.flagged.push_back(FlaggedPoint{k, FlagReason::Anomaly, expected});
        continue;
      }
      ++rep.total;
      if (c.boundary) ++rep.boundary_cases;
      ++rep.confusion[static_cast<std::size_t>(expected->value() - 1)][static_cast<std::size_t>(c.level->value() - 1)];
      if (*c.level != *expected) ++rep.mismatches;
    }
    return rep;
  }

  inline void write_report_text(std::ostream& os, EvaluationReport const& rep) {
    char acc[32];
    std::snprintf(acc, sizeof acc, "%.4f", rep.accuracy());
    os << "points         " << rep.points << "\n"
       << "evaluated      " << rep.total << "\n"
       << "mismatches     " << rep.mismatches << "\n"
       << "accuracy       " << acc << "\n"
       << "anomalies      " << rep.anomalies << "\n"
       << "boundary cases " << rep.boundary_cases << "\n"
       << "unlabeled      " << rep.unlabeled << "\n"
       << "out of domain  " << rep.out_of_domain << "\n"
       << "\nconfusion (rows: expected LoS, columns: predicted LoS)\n"
       << "       1     2     3     4     5     6\n";
    for (std::size_t i = 0; i < 6; ++i) {
      char row[80];
      auto const& c = rep.confusion[i];
      std::snprintf(row, sizeof row, "%zu %5zu %5zu %5zu %5zu %5zu %5zu\n", i + 1, c[0], c[1], c[2], c[3], c[4], c[5]);
      os << row;
    }
  }

  // ---------------------------------------------------------------------------
  // Surface export

  struct SurfaceCell {
    double flow{0.0};
    double speed{0.0};
    double raw{0.0};
  };

  [[nodiscard]] inline std::vector<double> even_steps(Interval iv, std::size_t steps) {
    std::vector<double> xs(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      xs[k] = iv.lo + iv.width() * static_cast<double>(k) / static_cast<double>(steps - 1);
    }
    xs.back() = iv.hi;
    return xs;
  }

  /// Raw (unrounded) output over an evenly spaced grid that includes the domain
  /// corners; flow is the outer loop.
  [[nodiscard]] inline std::vector<SurfaceCell> export_surface(SugenoFis const& fis, std::size_t flow_steps,
                                                               std::size_t speed_steps) {
    if (flow_steps < 2 || speed_steps < 2) {
      throw std::invalid_argument("surface needs at least 2 steps per axis");
    }
    require_los_profile(fis);
    auto const flows = even_steps(fis.inputs()[0].domain(), flow_steps);
    auto const speeds = even_steps(fis.inputs()[1].domain(), speed_steps);
    std::vector<SurfaceCell> out;
    out.reserve(flow_steps * speed_steps);
    for (auto const f : flows) {
      for (auto const s : speeds) {
        std::array<double, 2> const input{f, s};
        out.push_back(SurfaceCell{f, s, fis.infer(input).raw});
      }
    }
    return out;
  }

  inline void write_surface_csv(std::ostream& os, std::span<SurfaceCell const> cells) {
    os << "flow_vph,speed_kmh,raw_los\n";
    for (auto const& c : cells) {
      os << shortest(c.flow) << "," << shortest(c.speed) << "," << shortest(c.raw) << "\n";
    }
  }

}  // namespace losfis
