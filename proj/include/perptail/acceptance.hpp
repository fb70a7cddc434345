#pragma once

#include <string>
#include <vector>

#include "perptail/montecarlo.hpp"

namespace perptail {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  bool quick = false;
  /// JSON text of the expectations file; empty selects the embedded copy of
  /// data/acceptance.json.
  std::string expectations_json;
};

/// Runs every acceptance criterion at the tolerances pinned in the
/// expectations file and reports one result per criterion.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// The embedded expectations (kept in sync with data/acceptance.json).
const char* default_expectations_json();

/// Canonical JSON for a simulation summary; the determinism contract is that
/// equal configs produce byte-identical output of this serializer.
std::string summary_to_json(const SimSummary& summary);

std::string gamma_report_to_json(const GammaValidationReport& report);

}  // namespace perptail
