#include "legalstyle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>

#include "legalstyle/error.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

namespace {

void check_paired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::Alignment, "series lengths differ (" + std::to_string(x.size()) + " vs " +
                                          std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw Error(ErrorCode::Alignment, "at least two paired scores are required");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error(ErrorCode::Format, "scores must be finite");
  }
}

// Pairs among groups of equal keys in a sorted range: Σ t(t-1)/2.
template <typename It, typename Eq>
std::int64_t tied_pairs(It first, It last, Eq eq) {
  std::int64_t total = 0;
  while (first != last) {
    auto run_end = std::next(first);
    while (run_end != last && eq(*first, *run_end)) ++run_end;
    const auto t = static_cast<std::int64_t>(std::distance(first, run_end));
    total += t * (t - 1) / 2;
    first = run_end;
  }
  return total;
}

// Sorts v in place, returning the number of inversions (strictly greater
// elements preceding smaller ones).
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

PairedScores align_scores(const std::map<std::string, double>& system, const std::map<std::string, double>& human) {
  std::vector<std::string> missing;
  for (const auto& [id, _] : system) {
    if (!human.contains(id)) missing.push_back("human score missing for " + id);
  }
  for (const auto& [id, _] : human) {
    if (!system.contains(id)) missing.push_back("system score missing for " + id);
  }
  if (!missing.empty()) {
    std::string msg = missing.front();
    if (missing.size() > 1) msg += " (and " + std::to_string(missing.size() - 1) + " more)";
    throw Error(ErrorCode::Alignment, msg);
  }
  PairedScores out;
  for (const auto& [id, s] : system) {
    out.ids.push_back(id);
    out.system.push_back(s);
    out.human.push_back(human.at(id));
  }
  if (out.ids.size() < 2) throw Error(ErrorCode::Alignment, "at least two aligned documents are required");
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::UndefinedCorrelation, "correlation of a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const auto tx = tied_pairs(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
  const auto txy = tied_pairs(order.begin(), order.end(),
                              [&](std::size_t a, std::size_t b) { return x[a] == x[b] && y[a] == y[b]; });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> buf(n);
  const auto swaps = merge_count(ys, buf, 0, n);
  const auto ty = tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

  const auto denom_x = n0 - tx;
  const auto denom_y = n0 - ty;
  if (denom_x == 0 || denom_y == 0) throw Error(ErrorCode::UndefinedCorrelation, "tau-b of an all-tied series");
  // Concordant minus discordant pairs.
  const auto s = n0 - tx - ty + txy - 2 * swaps;
  return static_cast<double>(s) / std::sqrt(static_cast<double>(denom_x) * static_cast<double>(denom_y));
}

double krippendorff_alpha_interval(const AnnotationMatrix& m) {
  if (m.ratings.size() < 2) throw Error(ErrorCode::UndefinedAgreement, "at least two raters are required");
  const std::size_t units = m.ratings.front().size();
  for (const auto& row : m.ratings) {
    if (row.size() != units) throw Error(ErrorCode::Format, "rater rows have different lengths");
  }
  double n = 0.0;
  double observed = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t u = 0; u < units; ++u) {
    double mu = 0.0;
    double s = 0.0;
    double s2 = 0.0;
    for (const auto& row : m.ratings) {
      if (!row[u]) continue;
      const double v = *row[u];
      if (!std::isfinite(v)) throw Error(ErrorCode::Format, "ratings must be finite");
      mu += 1.0;
      s += v;
      s2 += v * v;
    }
    if (mu < 2.0) continue;
    // Σ_{i≠j} (v_i - v_j)² within the unit is 2(m Σv² - (Σv)²).
    observed += 2.0 * (mu * s2 - s * s) / (mu - 1.0);
    n += mu;
    sum += s;
    sum_sq += s2;
  }
  if (n < 2.0) throw Error(ErrorCode::UndefinedAgreement, "no unit has two or more ratings");
  const double expected = 2.0 * (n * sum_sq - sum * sum);
  if (!(expected > 0.0)) throw Error(ErrorCode::UndefinedAgreement, "all pairable ratings are identical");
  return 1.0 - (n - 1.0) * observed / expected;
}

Dispersion dispersion(std::span<const double> scores) {
  if (scores.size() < 2) throw Error(ErrorCode::InsufficientData, "dispersion needs at least two scores");
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  Dispersion d;
  d.stddev = std::sqrt(ss / n);
  d.variance = d.stddev * d.stddev;
  if (mean == 0.0) throw Error(ErrorCode::UndefinedCV, "coefficient of variation undefined for mean 0");
  d.cv = d.stddev / mean;
  return d;
}

double char_f1(std::string_view prediction, std::string_view reference) {
  if (utf8::is_blank(prediction) || utf8::is_blank(reference)) throw Error(ErrorCode::EmptyText, "char F1 needs two non-empty texts");
  std::unordered_map<char32_t, std::int64_t> ref_counts;
  std::int64_t ref_total = 0;
  for (char32_t cp : utf8::decode(reference)) {
    if (utf8::is_space(cp)) continue;
    ++ref_counts[cp];
    ++ref_total;
  }
  std::int64_t pred_total = 0;
  std::int64_t overlap = 0;
  for (char32_t cp : utf8::decode(prediction)) {
    if (utf8::is_space(cp)) continue;
    ++pred_total;
    auto it = ref_counts.find(cp);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(pred_total);
  const double recall = static_cast<double>(overlap) / static_cast<double>(ref_total);
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace legalstyle
