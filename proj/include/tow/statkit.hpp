#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tow::statkit {

struct AgreementPair {
  bool human = false;
  bool model = false;
};

struct AgreementCounts {
  // a: both consistent; b: model-only (false positive); c: human-only;
  // d: both inconsistent.
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;
  std::int64_t d = 0;

  std::int64_t n() const { return a + b + c + d; }
};

AgreementCounts count_agreement(const std::vector<AgreementPair>& pairs);

// Throws std::runtime_error("degenerate marginals") when chance agreement is
// 1 without perfect observed agreement.
double cohen_kappa_counts(const AgreementCounts& counts);
double cohen_kappa(const std::vector<AgreementPair>& pairs);

// 1 - n_false_positive / n_total.
double non_fp_rate(std::int64_t n_false_positive, std::int64_t n_total);

// Regularized upper incomplete gamma Q(a, x); series for x < a+1, Lentz
// continued fraction otherwise.
double regularized_gamma_q(double a, double x);

// Upper tail of the chi-square distribution: Q(df/2, stat/2).
double chi_square_sf(double stat, int df);

struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> rows;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

struct ChiSquareResult {
  double stat = 0.0;
  int df = 0;
  double p = 1.0;
  bool expected_below_5 = false;  // small-expected-count warning
};

ChiSquareResult chi_square_independence(const ContingencyTable& table);

struct PairedOutcomes {
  std::int64_t a = 0;  // both correct
  std::int64_t b = 0;  // first-only correct
  std::int64_t c = 0;  // second-only correct
  std::int64_t d = 0;  // both incorrect
};

enum class McNemarMode { kAuto, kExact, kCorrected };

McNemarMode mcnemar_mode_from_name(const std::string& name);

struct McNemarResult {
  double p = 1.0;
  std::string method_used;  // "exact" or "corrected"
  double stat = 0.0;        // corrected mode only
};

// Exact: two-sided binomial over the discordant pairs. Corrected:
// (|b-c|-1)^2/(b+c) against chi-square df=1. Auto picks exact below 25
// discordant pairs.
McNemarResult mcnemar(const PairedOutcomes& outcomes, McNemarMode mode = McNemarMode::kAuto);

// Aligns two runs by example id. Throws on duplicates or id-set mismatch,
// listing the symmetric difference.
PairedOutcomes paired_outcomes(const std::vector<std::pair<std::string, bool>>& run_a,
                               const std::vector<std::pair<std::string, bool>>& run_b);

}  // namespace tow::statkit
