#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace losfis::cli {

  namespace {

    template <typename Errors>
    [[noreturn]] void throw_positioned(std::string const& path, Errors const& errors) {
      std::string msg;
      for (auto const& e : errors) {
        if (!msg.empty()) msg += "\n";
        msg += path + ":" + e.to_string();
      }
      throw UsageError(msg);
    }

    void write_file(std::string const& path, std::string const& content) {
      std::ofstream f(path, std::ios::binary);
      if (!f) {
        throw UsageError("cannot write '" + path + "'");
      }
      f << content;
      if (!f) {
        throw UsageError("failed writing '" + path + "'");
      }
    }

    void emit(std::string const& path, std::string const& content, std::ostream& out) {
      if (path.empty()) {
        out << content;
      } else {
        write_file(path, content);
      }
    }

    double require_number(std::string const& text, std::string_view what) {
      auto const v = parse_double(text);
      if (!v) {
        throw UsageError("invalid " + std::string{what} + " '" + text + "'");
      }
      return *v;
    }

    void check_epsilon(double eps) {
      if (!(eps >= 0.0 && eps < 0.5)) {
        throw UsageError("--epsilon must lie in [0, 0.5)");
      }
    }

    int guarded(std::ostream& err, std::function<int()> const& body) {
      try {
        return body();
      } catch (UsageError const& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
      } catch (ConfigError const& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
      } catch (DomainError const& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
      } catch (std::exception const& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
      }
    }

    std::string_view reason_name(FlagReason r) { return r == FlagReason::Anomaly ? "anomaly" : "out_of_domain"; }

  }  // namespace

  std::string read_file(std::string const& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
      throw UsageError("cannot read '" + path + "'");
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
  }

  SugenoFis load_fis(std::string const& path, std::optional<AndOperator> and_op) {
    if (path.empty()) {
      throw UsageError("--fis is required");
    }
    auto parsed = dsl::parse(read_file(path));
    if (!parsed) {
      throw_positioned(path, parsed.errors);
    }
    auto fis = std::move(*parsed.fis);
    return and_op ? fis.with_and_operator(*and_op) : fis;
  }

  LosRegionModel load_regions(std::string const& path) {
    if (path.empty()) {
      throw UsageError("--regions is required");
    }
    auto parsed = parse_regions(read_file(path));
    if (!parsed) {
      throw_positioned(path, parsed.errors);
    }
    return std::move(*parsed.model);
  }

  std::string format_classification(Classification const& c) {
    char raw[32];
    std::snprintf(raw, sizeof raw, "%.3f", c.raw);
    std::string out = "raw=" + std::string{raw} + " level=";
    out += c.anomaly() ? std::string{"ANOMALY"} : std::to_string(c.level->value());
    out += c.boundary ? " boundary=yes" : " boundary=no";
    out += c.anomaly() ? " anomaly=yes" : " anomaly=no";
    out += " fired=" + std::to_string(c.fired_rules);
    out += " raw_exact=" + shortest(c.raw);
    return out;
  }

  int cmd_label(LabelOptions const& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
      auto const model = load_regions(opts.regions_path);
      if (opts.data_path.empty()) {
        throw UsageError("--data is required");
      }
      auto const data = ingest(read_file(opts.data_path), IngestMode::AllOrNothing);
      if (!data.errors.empty()) {
        std::string msg = "rejected input:";
        for (auto const& e : data.errors) {
          msg += "\n" + opts.data_path + ":" + std::to_string(e.line) + ": " + e.message;
        }
        throw UsageError(msg);
      }
      std::ostringstream buf;
      buf << kLabeledHeader << "\n";
      for (std::size_t k = 0; k < data.rows.size(); ++k) {
        auto const& m = data.rows[k];
        if (!model.in_domain(m.flow, m.speed)) {
          throw UsageError(opts.data_path + ": row " + std::to_string(k + 1) +
                           " lies outside the region model's domain");
        }
        auto const level = oracle_label(model, m.flow, m.speed);
        buf << data.row_text[k] << "," << (level ? std::to_string(level->value()) : std::string{"-"}) << "\n";
      }
      emit(opts.out_path, buf.str(), out);
      return kExitOk;
    });
  }

  int cmd_infer(InferOptions const& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
      check_epsilon(opts.common.epsilon);
      auto const fis = load_fis(opts.common.fis_path, opts.common.and_op);
      auto const flow = require_number(opts.flow, "--flow");
      auto const speed = require_number(opts.speed, "--speed");
      auto const c = classify(fis, flow, speed, opts.common.epsilon);
      out << format_classification(c) << "\n";
      return kExitOk;
    });
  }

  int cmd_evaluate(EvaluateOptions const& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
      check_epsilon(opts.common.epsilon);
      auto const fis = load_fis(opts.common.fis_path, opts.common.and_op);
      auto const model = load_regions(opts.common.regions_path);
      require_los_profile(fis);

      Dataset data;
      std::string source;
      if (opts.synthetic) {
        if (!opts.data_path.empty()) {
          throw UsageError("--data and --synthetic are mutually exclusive");
        }
        if (*opts.synthetic == 0) {
          throw UsageError("no data");
        }
        data.rows = generate_synthetic(model, *opts.synthetic, opts.seed);
        source = "synthetic";
      } else {
        if (opts.data_path.empty()) {
          throw UsageError("either --data or --synthetic is required");
        }
        data = ingest(read_file(opts.data_path), IngestMode::Partial);
        for (auto const& e : data.errors) {
          err << "warning: " << opts.data_path << ":" << e.line << ": " << e.message << "\n";
        }
        source = opts.data_path;
      }
      if (data.rows.empty()) {
        throw UsageError("no data");
      }

      std::vector<std::optional<LosLevel>> const no_labels;
      auto const& labels = data.labels ? *data.labels : no_labels;
      auto const rep = evaluate(fis, model, data.rows, opts.common.epsilon, labels);

      std::ostringstream text;
      text << "source         " << source << (data.labeled() ? " (labels from file)" : " (labels from regions)")
           << "\n";
      write_report_text(text, rep);
      out << text.str();

      if (!opts.out_base.empty()) {
        nlohmann::json j;
        j["source"] = source;
        j["labels"] = data.labeled() ? "file" : "regions";
        if (opts.synthetic) j["seed"] = opts.seed;
        j["epsilon"] = opts.common.epsilon;
        j["and_operator"] = std::string{to_string(fis.and_operator())};
        j["points"] = rep.points;
        j["rejected_rows"] = data.errors.size();
        j["evaluated"] = rep.total;
        j["mismatches"] = rep.mismatches;
        j["accuracy"] = rep.total > 0 ? nlohmann::json(rep.accuracy()) : nlohmann::json(nullptr);
        j["anomalies"] = rep.anomalies;
        j["boundary_cases"] = rep.boundary_cases;
        j["unlabeled"] = rep.unlabeled;
        j["out_of_domain"] = rep.out_of_domain;
        j["confusion"] = rep.confusion;
        auto flagged = nlohmann::json::array();
        for (auto const& f : rep.flagged) {
          nlohmann::json e;
          e["index"] = f.index;
          e["timestamp"] = data.rows[f.index].timestamp;
          e["reason"] = std::string{reason_name(f.reason)};
          e["expected"] = f.expected ? nlohmann::json(f.expected->value()) : nlohmann::json(nullptr);
          flagged.push_back(std::move(e));
        }
        j["flagged"] = std::move(flagged);
        write_file(opts.out_base + ".txt", text.str());
        write_file(opts.out_base + ".json", j.dump(2) + "\n");
      }
      return kExitOk;
    });
  }

  int cmd_surface(SurfaceOptions const& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
      if (opts.steps < 2) {
        throw UsageError("--steps must be at least 2");
      }
      auto const fis = load_fis(opts.common.fis_path, opts.common.and_op);
      require_los_profile(fis);
      auto const cells = export_surface(fis, opts.steps, opts.steps);
      std::ostringstream buf;
      write_surface_csv(buf, cells);
      emit(opts.out_path, buf.str(), out);
      return kExitOk;
    });
  }

  int cmd_genrules(GenrulesOptions const& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
      if (opts.grid < 2) {
        throw UsageError("--grid must be at least 2");
      }
      if (!(opts.agreement > 0.5 && opts.agreement <= 1.0)) {
        throw UsageError("--agreement must lie in (0.5, 1]");
      }
      auto const base = load_fis(opts.common.fis_path, opts.common.and_op);
      auto const model = load_regions(opts.common.regions_path);
      require_los_profile(base);
      if (!base.rules().empty()) {
        err << "note: replacing " << base.rules().size() << " existing rules\n";
      }
      auto rules = generate_rules(model, base.inputs()[0], base.inputs()[1], opts.grid, opts.agreement);
      auto const fis = base.with_rules(std::move(rules));
      emit(opts.out_path, dsl::serialize(fis), out);
      err << "generated " << fis.rules().size() << " rules\n";
      return kExitOk;
    });
  }

}  // namespace losfis::cli
