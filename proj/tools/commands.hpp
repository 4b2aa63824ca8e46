#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include <losfis/losfis.hpp>

namespace losfis::cli {

  inline constexpr int kExitOk = 0;
  inline constexpr int kExitInternal = 1;
  inline constexpr int kExitUsage = 2;

  /// Bad flags, unreadable or invalid input files. Maps to exit code 2.
  class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
  };

  struct Common {
    std::string fis_path;
    std::string regions_path;
    double epsilon{kDefaultBoundaryEpsilon};
    std::optional<AndOperator> and_op;
  };

  struct LabelOptions {
    std::string regions_path;
    std::string data_path;
    std::string out_path;  // empty: stdout
  };

  struct InferOptions {
    Common common;
    std::string flow;
    std::string speed;
  };

  struct EvaluateOptions {
    Common common;
    std::string data_path;
    std::optional<std::size_t> synthetic;
    std::uint64_t seed{1};
    std::string out_base;  // writes <base>.txt and <base>.json when set
  };

  struct SurfaceOptions {
    Common common;
    std::size_t steps{50};
    std::string out_path;
  };

  struct GenrulesOptions {
    Common common;
    std::size_t grid{kDefaultRuleGrid};
    double agreement{kDefaultAgreement};
    std::string out_path;
  };

  std::string read_file(std::string const& path);
  SugenoFis load_fis(std::string const& path, std::optional<AndOperator> and_op = std::nullopt);
  LosRegionModel load_regions(std::string const& path);

  // Each command writes its product to `out` (unless an output path is given)
  // and diagnostics to `err`, and returns the process exit code.
  int cmd_label(LabelOptions const& opts, std::ostream& out, std::ostream& err);
  int cmd_infer(InferOptions const& opts, std::ostream& out, std::ostream& err);
  int cmd_evaluate(EvaluateOptions const& opts, std::ostream& out, std::ostream& err);
  int cmd_surface(SurfaceOptions const& opts, std::ostream& out, std::ostream& err);
  int cmd_genrules(GenrulesOptions const& opts, std::ostream& out, std::ostream& err);

  /// One-line rendering used by `infer`, e.g. `raw=1.000 level=1 boundary=no anomaly=no fired=1 raw_exact=1`.
  std::string format_classification(Classification const& c);

}  // namespace losfis::cli
