#pragma once

// Brute-force reference evaluator. Shares no code path with the engine: it
// uses the min/max closed form of the trapezoid, looks every name up by
// linear search on each call and sums rules in declaration order.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>

#include <losfis/fis.hpp>

namespace oracle {

  inline double trapezoid(losfis::TrapezoidMF const& mf, double x) {
    double const rise = mf.b > mf.a ? (x - mf.a) / (mf.b - mf.a) : (x >= mf.a ? 1.0 : 0.0);
    double const fall = mf.d > mf.c ? (mf.d - x) / (mf.d - mf.c) : (x <= mf.d ? 1.0 : 0.0);
    return std::max(0.0, std::min({rise, 1.0, fall}));
  }

  struct Result {
    double raw{0.0};
    std::size_t fired{0};
  };

  inline Result infer(losfis::SugenoFis const& fis, std::span<double const> input) {
    double num = 0.0;
    double den = 0.0;
    Result out;
    for (auto const& rule : fis.rules()) {
      double w = 1.0;
      for (auto const& clause : rule.antecedent) {
        bool found = false;
        for (std::size_t v = 0; v < fis.inputs().size(); ++v) {
          auto const& var = fis.inputs()[v];
          if (var.name() != clause.variable) continue;
          for (auto const& term : var.terms()) {
            if (term.name != clause.term) continue;
            double const mu = trapezoid(term.mf, input[v]);
            w = fis.and_operator() == losfis::AndOperator::Min ? std::min(w, mu) : w * mu;
            found = true;
          }
        }
        if (!found) throw std::logic_error("oracle: unresolved clause");
      }
      if (w > 0.0) {
        ++out.fired;
        num += w * rule.consequent;
        den += w;
      }
    }
    out.raw = den > 0.0 ? num / den : 0.0;
    return out;
  }

}  // namespace oracle
