// Acceptance checks for the shipped configuration. Prints one PASS/FAIL line per
// criterion and exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "generators.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace losfis;
namespace fs = std::filesystem;

namespace {

  struct Outcome {
    bool pass{false};
    std::string detail;
  };

  using Clock = std::chrono::steady_clock;

  double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }

  cli::Common shipped(std::string const& fis = "legerova.fis") {
    return cli::Common{support::data_path(fis), support::data_path("legerova.los"), kDefaultBoundaryEpsilon,
                       std::nullopt};
  }

  std::string fmt(char const* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
  }

  Outcome evaluation_accuracy() {
    auto const base = fs::temp_directory_path() / "losfis-acceptance-report";
    std::ostringstream out, err;
    auto const t0 = Clock::now();
    int const rc = cli::cmd_evaluate({shipped(), "", 3825, 1, base.string()}, out, err);
    double const dt = seconds_since(t0);
    if (rc != cli::kExitOk) return {false, "evaluate exited " + std::to_string(rc) + ": " + err.str()};
    auto const j = nlohmann::json::parse(support::slurp(base.string() + ".json"));
    fs::remove(base.string() + ".json");
    fs::remove(base.string() + ".txt");
    double const acc = j["accuracy"];
    std::size_t const mism = j["mismatches"];
    bool const ok = acc >= 0.99 && acc < 1.0 && mism >= 10 && dt < 1.0;
    return {ok, fmt("accuracy=%.4f mismatches=%zu evaluated=%zu time=%.3fs", acc, mism,
                    j["evaluated"].get<std::size_t>(), dt)};
  }

  Outcome rule_generation() {
    cli::GenrulesOptions opts{shipped("legerova-base.fis"), kDefaultRuleGrid, kDefaultAgreement, ""};
    std::ostringstream a, b, err;
    auto const t0 = Clock::now();
    int const rc = cli::cmd_genrules(opts, a, err);
    double const dt = seconds_since(t0);
    if (rc != cli::kExitOk) return {false, "genrules exited " + std::to_string(rc) + ": " + err.str()};
    (void)cli::cmd_genrules(opts, b, err);
    std::istringstream is{a.str()};
    std::size_t rules = 0;
    for (std::string line; std::getline(is, line);) rules += line.starts_with("rule ") ? 1 : 0;
    bool const same = a.str() == b.str();
    return {rules == 27 && same && dt < 1.0,
            fmt("rules=%zu deterministic=%s time=%.3fs", rules, same ? "yes" : "no", dt)};
  }

  Outcome output_range() {
    auto const fis = support::load_fis();
    std::mt19937_64 rng{2024};
    std::uniform_real_distribution<double> uf{0.0, 6000.0}, us{0.0, 80.0};
    std::size_t bad = 0, zeros = 0;
    for (int k = 0; k < 10000; ++k) {
      auto const r = support::infer_at(fis, uf(rng), us(rng));
      bool const in_range = r.raw == 0.0 || (r.raw >= 1.0 && r.raw <= 6.0);
      bool const zero_iff_silent = (r.raw == 0.0) == (r.fired_rules == 0);
      bad += (in_range && zero_iff_silent) ? 0 : 1;
      zeros += r.raw == 0.0 ? 1 : 0;
    }
    return {bad == 0, fmt("samples=10000 violations=%zu anomalous=%zu", bad, zeros)};
  }

  Outcome matches_reference() {
    auto const fis = support::load_fis();
    double worst = 0.0;
    std::size_t fired_mismatch = 0;
    for (int i = 0; i <= 100; ++i) {
      for (int j = 0; j <= 100; ++j) {
        double const in[2] = {60.0 * i, 0.8 * j};
        auto const got = fis.infer(in);
        auto const want = oracle::infer(fis, in);
        worst = std::max(worst, std::abs(got.raw - want.raw));
        fired_mismatch += got.fired_rules == want.fired ? 0 : 1;
      }
    }
    return {worst <= 1e-12 && fired_mismatch == 0, fmt("grid=101x101 max_diff=%.3g fired_mismatch=%zu", worst,
                                                        fired_mismatch)};
  }

  // Does the closed interval [p, q] meet the open support of `mf` (shoulders included)?
  bool meets_support(double p, double q, TrapezoidMF const& mf) {
    bool const below = q > mf.a || (mf.a == mf.b && q >= mf.a);
    bool const above = p < mf.d || (mf.c == mf.d && p <= mf.d);
    return below && above;
  }

  Outcome plateau_exactness() {
    auto const fis = support::load_fis();
    auto const& flow = fis.inputs()[0];
    auto const& speed = fis.inputs()[1];
    auto const mf = [](FuzzyVariable const& v, std::string const& t) { return v.terms()[*v.find_term(t)].mf; };
    std::size_t qualifying = 0, exact = 0;
    for (auto const& r : fis.rules()) {
      auto const fr = mf(flow, r.antecedent[0].term);
      auto const sr = mf(speed, r.antecedent[1].term);
      bool isolated = true;
      for (auto const& o : fis.rules()) {
        if (&o == &r) continue;
        auto const fo = mf(flow, o.antecedent[0].term);
        auto const so = mf(speed, o.antecedent[1].term);
        if (meets_support(fr.b, fr.c, fo) && meets_support(sr.b, sr.c, so)) {
          isolated = false;
          break;
        }
      }
      if (!isolated) continue;
      ++qualifying;
      auto const res = support::infer_at(fis, 0.5 * (fr.b + fr.c), 0.5 * (sr.b + sr.c));
      exact += (res.raw == r.consequent && res.fired_rules == 1) ? 1 : 0;
    }
    return {qualifying >= 1 && exact == qualifying, fmt("isolated_rules=%zu exact=%zu", qualifying, exact)};
  }

  Outcome anomaly_detection() {
    auto const fis = support::load_fis();
    auto const model = support::load_regions();
    auto const& flow = fis.inputs()[0];
    auto const& speed = fis.inputs()[1];
    std::size_t outside = 0, outside_wrong = 0;
    for (int i = 0; i <= 300; ++i) {
      for (int j = 0; j <= 160; ++j) {
        double const f = 20.0 * i, s = 0.5 * j;
        bool covered = false;
        for (auto const& r : fis.rules()) {
          double const mu_f = oracle::trapezoid(flow.terms()[*flow.find_term(r.antecedent[0].term)].mf, f);
          double const mu_s = oracle::trapezoid(speed.terms()[*speed.find_term(r.antecedent[1].term)].mf, s);
          covered = covered || (mu_f > 0.0 && mu_s > 0.0);
        }
        if (covered) continue;
        ++outside;
        outside_wrong += classify(fis, f, s).anomaly() ? 0 : 1;
      }
    }
    std::size_t labelled = 0, labelled_anomalous = 0;
    for (auto const& p : generate_synthetic(model, 3825, 1)) {
      if (!oracle_label(model, p.flow, p.speed)) continue;
      ++labelled;
      labelled_anomalous += classify(fis, p.flow, p.speed).anomaly() ? 1 : 0;
    }
    return {outside_wrong == 0 && labelled_anomalous == 0,
            fmt("uncovered_grid_points=%zu not_flagged=%zu labelled_points=%zu flagged=%zu", outside, outside_wrong,
                labelled, labelled_anomalous)};
  }

  Outcome dsl_round_trip() {
    gen::Source src{7};
    std::size_t round_trip_fail = 0;
    for (int k = 0; k < 100; ++k) {
      auto const fis = gen::random_fis(src);
      auto const back = dsl::parse(dsl::serialize(fis));
      round_trip_fail += (back.ok() && *back.fis == fis) ? 0 : 1;
    }
    std::size_t unpositioned = 0, rejected = 0;
    for (int k = 0; k < 1000; ++k) {
      std::string bytes(1 + src.index(200), '\0');
      for (auto& c : bytes) c = static_cast<char>(src.raw() & 0xff);
      auto const r = dsl::parse(bytes);
      if (r.ok()) continue;
      ++rejected;
      bool positioned = !r.errors.empty();
      for (auto const& e : r.errors) positioned = positioned && e.line >= 1 && e.column >= 1;
      unpositioned += positioned ? 0 : 1;
    }
    return {round_trip_fail == 0 && unpositioned == 0,
            fmt("round_trip_failures=%zu/100 rejected=%zu/1000 unpositioned=%zu", round_trip_fail, rejected,
                unpositioned)};
  }

  Outcome surface_consistency() {
    std::ostringstream csv, err;
    if (cli::cmd_surface({shipped(), 50, ""}, csv, err) != cli::kExitOk) return {false, err.str()};
    std::istringstream is{csv.str()};
    std::string line;
    std::getline(is, line);
    std::size_t cells = 0, differ = 0;
    while (std::getline(is, line)) {
      auto const a = line.find(',');
      auto const b = line.find(',', a + 1);
      std::ostringstream out;
      cli::InferOptions opts{shipped(), line.substr(0, a), line.substr(a + 1, b - a - 1)};
      if (cli::cmd_infer(opts, out, err) != cli::kExitOk) return {false, "infer failed at " + line};
      auto const text = out.str();
      auto const pos = text.find("raw_exact=");
      auto const exact = text.substr(pos + 10, text.size() - pos - 11);
      auto const want = parse_double(line.substr(b + 1));
      auto const got = parse_double(exact);
      ++cells;
      differ += (want && got && std::bit_cast<std::uint64_t>(*want) == std::bit_cast<std::uint64_t>(*got)) ? 0 : 1;
    }
    return {cells == 2500 && differ == 0, fmt("cells=%zu differing=%zu", cells, differ)};
  }

}  // namespace

int main() {
  struct Criterion {
    char const* name;
    std::function<Outcome()> check;
  };
  std::vector<Criterion> const criteria{
      {"synthetic evaluation accuracy in [0.99, 1) with >= 10 mismatches, under 1 s", evaluation_accuracy},
      {"rule generation yields 27 rules deterministically, under 1 s", rule_generation},
      {"raw output in {0} U [1, 6], zero exactly when no rule fires", output_range},
      {"inference matches the brute-force reference within 1e-12", matches_reference},
      {"isolated rule plateaus return their consequent exactly", plateau_exactness},
      {"uncovered inputs are anomalies; labelled synthetic points are not", anomaly_detection},
      {"DSL round-trips random systems and positions every error", dsl_round_trip},
      {"surface export equals point inference bit for bit", surface_consistency},
  };
  int failed = 0;
  int n = 0;
  for (auto const& c : criteria) {
    ++n;
    Outcome o;
    try {
      o = c.check();
    } catch (std::exception const& e) {
      o = {false, std::string{"exception: "} + e.what()};
    }
    std::printf("[%s] %d. %s (%s)\n", o.pass ? "PASS" : "FAIL", n, c.name, o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
