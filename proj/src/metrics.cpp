#include "plcp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "plcp/pinball.hpp"

namespace plcp {

std::vector<EvalGroup> halves(std::size_t column, double cut, const std::string& label) {
  std::ostringstream text;
  text << cut;
  return {
      {label + "<" + text.str(), [column, cut](std::span<const double> x) { return x[column] < cut; }},
      {label + ">=" + text.str(), [column, cut](std::span<const double> x) { return x[column] >= cut; }},
  };
}

std::vector<EvalGroup> binary_digit_groups(std::span<const std::size_t> columns) {
  std::vector<EvalGroup> out;
  for (std::size_t c : columns) {
    for (int bit = 0; bit < 2; ++bit) {
      out.push_back({"X" + std::to_string(c + 1) + "=" + std::to_string(bit),
                     [c, bit](std::span<const double> x) { return x[c] == static_cast<double>(bit); }});
    }
  }
  return out;
}

CoverageReport coverage(std::span<const LabeledSample> test, std::span<const double> scores,
                        std::span<const double> thresholds, std::span<const double> lengths,
                        std::span<const EvalGroup> groups) {
  const std::size_t n = test.size();
  if (n == 0) throw std::invalid_argument("coverage needs test data");
  if (scores.size() != n || thresholds.size() != n || lengths.size() != n) {
    throw std::invalid_argument("coverage inputs differ in length");
  }
  CoverageReport report;
  report.count = n;
  std::size_t covered = 0;
  double length_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    covered += scores[j] <= thresholds[j] ? 1 : 0;
    length_sum += lengths[j];
  }
  report.marginal = static_cast<double>(covered) / static_cast<double>(n);
  report.mean_length = length_sum / static_cast<double>(n);

  for (const auto& group : groups) {
    GroupCoverage gc;
    gc.name = group.name;
    std::size_t hits = 0;
    double lsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!group.contains(test[j].x)) continue;
      ++gc.count;
      hits += scores[j] <= thresholds[j] ? 1 : 0;
      lsum += lengths[j];
    }
    if (gc.count == 0) {
      gc.coverage = std::numeric_limits<double>::quiet_NaN();
      gc.mean_length = std::numeric_limits<double>::quiet_NaN();
    } else {
      gc.coverage = static_cast<double>(hits) / static_cast<double>(gc.count);
      gc.mean_length = lsum / static_cast<double>(gc.count);
    }
    report.groups.push_back(std::move(gc));
  }
  return report;
}

namespace {

void plcp_chunk(const PlcpRule& rule, std::span<const Vector> xs, std::size_t begin,
                std::size_t end, Vector& out) {
  if (begin >= end) return;
  const SampleMatrix probs = rule.model.forward_batch(feature_matrix(xs.subspan(begin, end - begin)));
  const Rng base(rule.assignment.seed);
  Vector h(probs.rows());
  for (std::size_t j = begin; j < end; ++j) {
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = probs(i, j - begin);
    Rng rng = base.substream(j);
    out[j] = rule.q[assign_group(h, rule.assignment.mode, &rng)];
  }
}

}  // namespace

Vector rule_thresholds(const PlcpRule& rule, std::span<const Vector> xs, std::size_t threads) {
  rule.validate();
  Vector out(xs.size());
  threads = std::max<std::size_t>(1, std::min(threads, xs.size()));
  if (threads <= 1) {
    plcp_chunk(rule, xs, 0, xs.size(), out);
    return out;
  }
  std::vector<std::thread> workers;
  const std::size_t chunk = (xs.size() + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(xs.size(), begin + chunk);
    workers.emplace_back([&, begin, end] { plcp_chunk(rule, xs, begin, end, out); });
  }
  for (auto& w : workers) w.join();
  return out;
}

Vector rule_thresholds(const SplitConformalRule& rule, std::span<const Vector> xs) {
  return Vector(xs.size(), rule.threshold);
}

Vector rule_thresholds(const GroupConditionalRule& rule, std::span<const Vector> xs) {
  Vector out(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) out[j] = rule.threshold_of(xs[j]);
  return out;
}

namespace {

McEstimate mean_and_se(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return {mean, se};
}

}  // namespace

McEstimate msce_oracle(std::span<const Vector> xs, std::span<const double> thresholds,
                       const OracleSpec& oracle) {
  if (xs.size() != thresholds.size()) throw std::invalid_argument("msce inputs differ in length");
  Vector terms(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double dev = oracle.cond_cdf(xs[j], thresholds[j]) - (1.0 - oracle.alpha);
    terms[j] = dev * dev;
  }
  return mean_and_se(terms);
}

McEstimate pinball_gap(std::span<const Vector> xs, std::span<const double> thresholds,
                       const OracleSpec& oracle, Rng& rng, std::size_t draws) {
  if (xs.size() != thresholds.size()) throw std::invalid_argument("pinball gap inputs differ in length");
  if (draws == 0) throw std::invalid_argument("pinball gap needs at least one draw per x");
  Vector terms(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double best = oracle.cond_quantile(xs[j], 1.0 - oracle.alpha);
    double acc = 0.0;
    for (std::size_t k = 0; k < draws; ++k) {
      const double s = oracle.sample_score(xs[j], rng);
      acc += pinball_loss(thresholds[j], s, oracle.alpha) - pinball_loss(best, s, oracle.alpha);
    }
    terms[j] = acc / static_cast<double>(draws);
  }
  return mean_and_se(terms);
}

CoverageInterval fallback_bounds(double p, double alpha, std::optional<double> gamma) {
  if (!(p >= 0.0)) throw std::invalid_argument("MSCE bound must be nonnegative");
  check_alpha(alpha);
  double radius = std::sqrt(p);
  if (gamma) {
    if (!(*gamma > 0.0 && *gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
    radius = std::sqrt(p / *gamma);
  }
  const double centre = 1.0 - alpha;
  return {std::clamp(centre - radius, 0.0, 1.0), std::clamp(centre + radius, 0.0, 1.0)};
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson inputs differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  if (*amin == *amax || *bmin == *bmax) return 0.0;
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

namespace {

struct Compressed {
  Vector values;                     // distinct values, ascending
  std::vector<std::uint64_t> counts;
  std::vector<std::size_t> index;    // sample -> position in values
};

Compressed compress(std::span<const double> a) {
  Compressed c;
  c.values.assign(a.begin(), a.end());
  std::sort(c.values.begin(), c.values.end());
  c.values.erase(std::unique(c.values.begin(), c.values.end()), c.values.end());
  c.counts.assign(c.values.size(), 0);
  c.index.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(c.values.begin(), c.values.end(), a[i]) - c.values.begin());
    c.index[i] = pos;
    ++c.counts[pos];
  }
  return c;
}

double median_of(const Compressed& c) {
  struct Weighted {
    double d;
    std::uint64_t w;
  };
  std::vector<Weighted> pairs;
  std::uint64_t zero = 0;
  for (std::size_t u = 0; u < c.values.size(); ++u) {
    zero += c.counts[u] * (c.counts[u] - 1) / 2;
    for (std::size_t v = u + 1; v < c.values.size(); ++v) {
      pairs.push_back({c.values[v] - c.values[u], c.counts[u] * c.counts[v]});
    }
  }
  if (zero > 0) pairs.push_back({0.0, zero});
  std::sort(pairs.begin(), pairs.end(), [](const Weighted& x, const Weighted& y) { return x.d < y.d; });
  std::uint64_t total = 0;
  for (const auto& p : pairs) total += p.w;
  if (total == 0) return 0.0;
  // 1-based rank lookup into the implicit sorted list of all pair distances.
  auto at_rank = [&](std::uint64_t rank) {
    std::uint64_t seen = 0;
    for (const auto& p : pairs) {
      seen += p.w;
      if (seen >= rank) return p.d;
    }
    return pairs.back().d;
  };
  if (total % 2 == 1) return at_rank(total / 2 + 1);
  return 0.5 * (at_rank(total / 2) + at_rank(total / 2 + 1));
}

Vector gram(const Vector& values, double width) {
  const std::size_t u = values.size();
  Vector k(u * u);
  const double inv = 1.0 / (2.0 * width * width);
  for (std::size_t i = 0; i < u; ++i) {
    for (std::size_t j = 0; j < u; ++j) {
      const double d = values[i] - values[j];
      k[i * u + j] = std::exp(-d * d * inv);
    }
  }
  return k;
}

}  // namespace

double median_pairwise_distance(std::span<const double> a) { return median_of(compress(a)); }

double hsic(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("hsic inputs differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  const Compressed ca = compress(a);
  const Compressed cb = compress(b);
  // A constant variable is independent of anything; skip the rounding residue.
  if (ca.values.size() == 1 || cb.values.size() == 1) return 0.0;
  double wa = median_of(ca);
  double wb = median_of(cb);
  if (!(wa > 0.0)) wa = 1.0;
  if (!(wb > 0.0)) wb = 1.0;
  const Vector ka = gram(ca.values, wa);
  const Vector kb = gram(cb.values, wb);
  const std::size_t ua = ca.values.size();
  const std::size_t ub = cb.values.size();

  // Row sums of the full kernel matrices, indexed by distinct value.
  Vector ra(ua, 0.0);
  Vector rb(ub, 0.0);
  for (std::size_t i = 0; i < ua; ++i) {
    for (std::size_t j = 0; j < ua; ++j) ra[i] += static_cast<double>(ca.counts[j]) * ka[i * ua + j];
  }
  for (std::size_t i = 0; i < ub; ++i) {
    for (std::size_t j = 0; j < ub; ++j) rb[i] += static_cast<double>(cb.counts[j]) * kb[i * ub + j];
  }

  // Distinct (a, b) pairs with multiplicities.
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> joint;
  for (std::size_t i = 0; i < n; ++i) ++joint[{ca.index[i], cb.index[i]}];
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>> cells(joint.begin(), joint.end());

  double t1 = 0.0;
  double t2 = 0.0;
  for (const auto& [p, cp] : cells) {
    double row = 0.0;
    for (const auto& [r, cr] : cells) row += cr * ka[p.first * ua + r.first] * kb[p.second * ub + r.second];
    t1 += cp * row;
    t2 += cp * ra[p.first] * rb[p.second];
  }
  double sa = 0.0;
  double sb = 0.0;
  for (std::size_t i = 0; i < ua; ++i) sa += static_cast<double>(ca.counts[i]) * ra[i];
  for (std::size_t i = 0; i < ub; ++i) sb += static_cast<double>(cb.counts[i]) * rb[i];

  const double nn = static_cast<double>(n);
  const double value = t1 / (nn * nn) - 2.0 * t2 / (nn * nn * nn) + sa * sb / (nn * nn * nn * nn);
  return std::max(value, 0.0);
}

EvalReport evaluate_thresholds(std::span<const LabeledSample> test, const ScoreSpec& score,
                               std::span<const double> thresholds,
                               std::span<const EvalGroup> groups, const OracleSpec* oracle,
                               const SetDomain& domain) {
  const Vector scores = compute_scores(score, test);
  Vector lengths(test.size());
  Vector covered(test.size());
  for (std::size_t j = 0; j < test.size(); ++j) {
    // Precomputed scores define no label set; the threshold stands in for its size.
    lengths[j] = score.kind == ScoreKind::Precomputed
                     ? thresholds[j]
                     : set_size(score, test[j].x, thresholds[j], domain, j);
    covered[j] = scores[j] <= thresholds[j] ? 1.0 : 0.0;
  }
  EvalReport report;
  report.coverage = coverage(test, scores, thresholds, lengths, groups);
  if (oracle != nullptr) {
    std::vector<Vector> xs(test.size());
    for (std::size_t j = 0; j < test.size(); ++j) xs[j] = test[j].x;
    report.msce = msce_oracle(xs, thresholds, *oracle).mean;
  }
  report.pearson_r = pearson(lengths, covered);
  report.hsic = hsic(lengths, covered);
  return report;
}

}  // namespace plcp
