#include "tow/statkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace tow::statkit {

AgreementCounts count_agreement(const std::vector<AgreementPair>& pairs) {
  AgreementCounts counts;
  for (const auto& p : pairs) {
    if (p.human && p.model) {
      ++counts.a;
    } else if (!p.human && p.model) {
      ++counts.b;
    } else if (p.human && !p.model) {
      ++counts.c;
    } else {
      ++counts.d;
    }
  }
  return counts;
}

double cohen_kappa_counts(const AgreementCounts& counts) {
  auto n = counts.n();
  if (n <= 0) {
    throw std::invalid_argument("cohen_kappa requires at least one pair");
  }
  double nn = static_cast<double>(n);
  double p_o = static_cast<double>(counts.a + counts.d) / nn;
  double model_yes = static_cast<double>(counts.a + counts.b) / nn;
  double human_yes = static_cast<double>(counts.a + counts.c) / nn;
  double p_e = model_yes * human_yes + (1.0 - model_yes) * (1.0 - human_yes);
  if (1.0 - p_e < 1e-15) {
    if (p_o >= 1.0 - 1e-15) return 1.0;
    throw std::runtime_error("degenerate marginals");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

double cohen_kappa(const std::vector<AgreementPair>& pairs) {
  return cohen_kappa_counts(count_agreement(pairs));
}

double non_fp_rate(std::int64_t n_false_positive, std::int64_t n_total) {
  if (n_total <= 0) {
    throw std::invalid_argument("non_fp_rate requires a positive total");
  }
  if (n_false_positive < 0 || n_false_positive > n_total) {
    throw std::invalid_argument("false-positive count out of range");
  }
  return 1.0 - static_cast<double>(n_false_positive) / static_cast<double>(n_total);
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0) {
    throw std::invalid_argument("regularized_gamma_q requires a > 0");
  }
  if (x < 0.0) {
    throw std::invalid_argument("regularized_gamma_q requires x >= 0");
  }
  if (x == 0.0) return 1.0;

  if (x < a + 1.0) {
    // Lower-tail series, then complement.
    double sum = 1.0 / a;
    double del = sum;
    double ap = a;
    for (int n = 0; n < 10000; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    return std::max(0.0, 1.0 - p);
  }

  // Upper-tail continued fraction (modified Lentz).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi_square_sf(double stat, int df) {
  if (df <= 0) {
    throw std::invalid_argument("chi_square_sf requires df >= 1");
  }
  if (stat <= 0.0) return 1.0;
  return regularized_gamma_q(static_cast<double>(df) / 2.0, stat / 2.0);
}

ChiSquareResult chi_square_independence(const ContingencyTable& table) {
  std::size_t r = table.rows.size();
  if (r < 2) {
    throw std::invalid_argument("contingency table needs at least 2 rows");
  }
  std::size_t c = table.rows[0].size();
  if (c < 2) {
    throw std::invalid_argument("contingency table needs at least 2 columns");
  }
  for (const auto& row : table.rows) {
    if (row.size() != c) {
      throw std::invalid_argument("ragged contingency table");
    }
    for (auto v : row) {
      if (v < 0) throw std::invalid_argument("negative count in contingency table");
    }
  }

  std::vector<double> row_sum(r, 0.0);
  std::vector<double> col_sum(c, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      double v = static_cast<double>(table.rows[i][j]);
      row_sum[i] += v;
      col_sum[j] += v;
      total += v;
    }
  }
  if (total <= 0.0) {
    throw std::invalid_argument("contingency table is empty");
  }
  for (std::size_t i = 0; i < r; ++i) {
    if (row_sum[i] == 0.0) throw std::invalid_argument("zero row marginal");
  }
  for (std::size_t j = 0; j < c; ++j) {
    if (col_sum[j] == 0.0) throw std::invalid_argument("zero column marginal");
  }

  ChiSquareResult result;
  result.df = static_cast<int>((r - 1) * (c - 1));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      double expected = row_sum[i] * col_sum[j] / total;
      if (expected < 5.0) result.expected_below_5 = true;
      double diff = static_cast<double>(table.rows[i][j]) - expected;
      result.stat += diff * diff / expected;
    }
  }
  result.p = chi_square_sf(result.stat, result.df);
  return result;
}

McNemarMode mcnemar_mode_from_name(const std::string& name) {
  if (name == "auto") return McNemarMode::kAuto;
  if (name == "exact") return McNemarMode::kExact;
  if (name == "corrected") return McNemarMode::kCorrected;
  throw std::invalid_argument("unknown mcnemar mode: " + name);
}

namespace {

// Two-sided exact binomial p over n discordant pairs, k = min(b, c).
double exact_binomial_p(std::int64_t k, std::int64_t n) {
  if (n == 0) return 1.0;
  long double tail = 0.0L;
  if (n <= 62) {
    // Binomial coefficients stay exact in 64 bits up to C(62, 31).
    std::uint64_t coef = 1;
    long double scale = std::pow(0.5L, static_cast<long double>(n));
    for (std::int64_t i = 0; i <= k; ++i) {
      tail += static_cast<long double>(coef) * scale;
      coef = coef * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
    }
  } else {
    long double log_half = std::log(0.5L) * static_cast<long double>(n);
    for (std::int64_t i = 0; i <= k; ++i) {
      long double log_coef = std::lgamma(static_cast<long double>(n + 1)) -
                             std::lgamma(static_cast<long double>(i + 1)) -
                             std::lgamma(static_cast<long double>(n - i + 1));
      tail += std::exp(log_coef + log_half);
    }
  }
  long double p = 2.0L * tail;
  return static_cast<double>(std::min(p, 1.0L));
}

}  // namespace

McNemarResult mcnemar(const PairedOutcomes& outcomes, McNemarMode mode) {
  if (outcomes.b < 0 || outcomes.c < 0) {
    throw std::invalid_argument("discordant counts must be non-negative");
  }
  std::int64_t n = outcomes.b + outcomes.c;
  McNemarResult result;
  if (n == 0) {
    result.p = 1.0;
    result.method_used = mode == McNemarMode::kCorrected ? "corrected" : "exact";
    return result;
  }
  bool exact = mode == McNemarMode::kExact || (mode == McNemarMode::kAuto && n < 25);
  if (exact) {
    result.method_used = "exact";
    result.p = exact_binomial_p(std::min(outcomes.b, outcomes.c), n);
    return result;
  }
  result.method_used = "corrected";
  double diff = std::fabs(static_cast<double>(outcomes.b - outcomes.c)) - 1.0;
  result.stat = diff * diff / static_cast<double>(n);
  result.p = chi_square_sf(result.stat, 1);
  return result;
}

PairedOutcomes paired_outcomes(const std::vector<std::pair<std::string, bool>>& run_a,
                               const std::vector<std::pair<std::string, bool>>& run_b) {
  std::map<std::string, bool> by_id;
  for (const auto& [id, correct] : run_a) {
    if (!by_id.emplace(id, correct).second) {
      throw std::runtime_error("duplicate example id in first run: " + id);
    }
  }
  std::set<std::string> seen_b;
  for (const auto& [id, _] : run_b) {
    if (!seen_b.insert(id).second) {
      throw std::runtime_error("duplicate example id in second run: " + id);
    }
  }

  std::set<std::string> only_a;
  std::set<std::string> only_b;
  for (const auto& [id, _] : by_id) {
    if (!seen_b.count(id)) only_a.insert(id);
  }
  for (const auto& id : seen_b) {
    if (!by_id.count(id)) only_b.insert(id);
  }
  if (!only_a.empty() || !only_b.empty()) {
    std::string msg = "runs cover different example ids;";
    int shown = 0;
    for (const auto& id : only_a) {
      if (shown++ >= 10) break;
      msg += " first-only:" + id;
    }
    shown = 0;
    for (const auto& id : only_b) {
      if (shown++ >= 10) break;
      msg += " second-only:" + id;
    }
    throw std::runtime_error(msg);
  }

  PairedOutcomes out;
  for (const auto& [id, b_correct] : run_b) {
    bool a_correct = by_id.at(id);
    if (a_correct && b_correct) {
      ++out.a;
    } else if (a_correct) {
      ++out.b;
    } else if (b_correct) {
      ++out.c;
    } else {
      ++out.d;
    }
  }
  return out;
}

}  // namespace tow::statkit
