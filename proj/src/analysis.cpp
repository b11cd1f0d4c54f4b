#include "ils/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ils {

namespace {

std::span<const double> component(const EnsembleState& s, Component comp) {
  switch (comp) {
    case Component::y:
      return s.y;
    case Component::z:
      return s.z;
    case Component::x:
      break;
  }
  return s.x;
}

// Maximal circular run of indices (0-based) satisfying `pred` that contains
// `seed`; returns nullopt when pred(seed) is false. The whole ring is one run.
template <typename Pred>
std::optional<std::pair<std::size_t, std::size_t>> run_containing(std::size_t n, std::size_t seed,
                                                                  Pred pred) {
  if (!pred(seed)) return std::nullopt;
  std::size_t len = 1;
  std::size_t lo = seed;
  while (len < n && pred((lo + n - 1) % n)) {
    lo = (lo + n - 1) % n;
    ++len;
  }
  std::size_t hi = seed;
  while (len < n && pred((hi + 1) % n)) {
    hi = (hi + 1) % n;
    ++len;
  }
  if (len == n) return std::make_pair(std::size_t{0}, n - 1);
  return std::make_pair(lo, hi);
}

}  // namespace

IncoherenceAccumulator::IncoherenceAccumulator(std::size_t n_osc, std::size_t sample_stride)
    : sum_(n_osc, 0.0), stride_(sample_stride) {
  if (n_osc < 3) throw std::invalid_argument("incoherence needs at least 3 oscillators");
}

void IncoherenceAccumulator::add(std::span<const double> u, double t) {
  const std::size_t n = sum_.size();
  if (u.size() != n) throw DimensionError("profile size does not match the accumulator");
  for (std::size_t i = 0; i < n; ++i) {
    const double curv = 2.0 * u[i] - u[(i + 1) % n] - u[(i + n - 1) % n];
    sum_[i] += curv * curv;
  }
  if (count_ == 0) t_first_ = t;
  t_last_ = t;
  ++count_;
}

void IncoherenceAccumulator::add(const EnsembleState& state, Component comp) {
  add(component(state, comp), state.t);
}

IncoherenceProfile IncoherenceAccumulator::result() const {
  if (count_ == 0) throw std::domain_error("incoherence window holds no samples");
  IncoherenceProfile out;
  out.delta_i.resize(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i) out.delta_i[i] = sum_[i] / static_cast<double>(count_);
  out.t_start = t_first_;
  out.t_end = t_last_;
  out.sample_stride = stride_;
  out.samples = count_;
  return out;
}

IncoherenceProfile incoherence_profile(std::span<const EnsembleState> samples, double t_start,
                                       double t_end, Component comp, std::size_t sample_stride) {
  if (samples.empty()) throw std::domain_error("incoherence window holds no samples");
  IncoherenceAccumulator acc(samples.front().size(), sample_stride);
  for (const auto& s : samples) {
    if (s.t >= t_start && s.t <= t_end) acc.add(s, comp);
  }
  auto out = acc.result();
  out.t_start = t_start;
  out.t_end = t_end;
  return out;
}

double default_jump_threshold(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> inc(n);
  for (std::size_t i = 0; i < n; ++i) inc[i] = std::abs(x[(i + 1) % n] - x[i]);
  auto mid = inc.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(inc.begin(), mid, inc.end());
  double median = *mid;
  if (n % 2 == 0) {
    median = 0.5 * (median + *std::max_element(inc.begin(), mid));
  }
  return std::max(5.0 * median, 1e-8);
}

std::vector<std::size_t> detect_boundaries(std::span<const double> x,
                                           std::optional<double> jump_threshold) {
  const std::size_t n = x.size();
  if (n < 2) return {};
  const double thr = jump_threshold ? *jump_threshold : default_jump_threshold(x);
  std::vector<double> inc(n);
  std::vector<bool> above(n);
  for (std::size_t i = 0; i < n; ++i) {
    inc[i] = std::abs(x[(i + 1) % n] - x[i]);
    above[i] = inc[i] > thr;
  }
  std::vector<std::size_t> out;
  // Start scanning just after a sub-threshold increment so that no run is
  // split by the wrap-around.
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (!above[i]) {
      start = (i + 1) % n;
      break;
    }
  }
  if (start == n) {
    // Every increment is a jump; report the largest one.
    const auto it = std::max_element(inc.begin(), inc.end());
    return {static_cast<std::size_t>(it - inc.begin()) + 1};
  }
  std::size_t k = 0;
  while (k < n) {
    const std::size_t i = (start + k) % n;
    if (!above[i]) {
      ++k;
      continue;
    }
    std::size_t best = i;
    while (k < n && above[(start + k) % n]) {
      const std::size_t j = (start + k) % n;
      if (inc[j] > inc[best]) best = j;
      ++k;
    }
    out.push_back(best + 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> detect_boundaries(const EnsembleState& snapshot,
                                           std::optional<double> jump_threshold) {
  return detect_boundaries(std::span<const double>(snapshot.x), jump_threshold);
}

std::string_view to_string(RegionLabel label) { return label == RegionLabel::I ? "I" : "II"; }

std::size_t RegionSpec::length() const { return hi >= lo ? hi - lo + 1 : n_osc - lo + 1 + hi; }

bool RegionSpec::contains(std::size_t i) const {
  if (i < 1 || i > n_osc) return false;
  return hi >= lo ? (i >= lo && i <= hi) : (i >= lo || i <= hi);
}

std::size_t RegionSpec::center() const {
  return (lo - 1 + (length() - 1) / 2) % n_osc + 1;
}

RegionSpec RegionSpec::window(RegionLabel label, std::size_t center_index, std::size_t width,
                              std::size_t n_osc) {
  if (width == 0 || center_index < 1 || center_index > n_osc) {
    throw std::invalid_argument("invalid region window");
  }
  RegionSpec r;
  r.label = label;
  r.n_osc = n_osc;
  if (width >= n_osc) {
    r.lo = 1;
    r.hi = n_osc;
    return r;
  }
  const std::size_t half = (width - 1) / 2;
  r.lo = (center_index - 1 + n_osc - half) % n_osc + 1;
  r.hi = (r.lo - 1 + width - 1) % n_osc + 1;
  return r;
}

Regions extract_regions(const IlsProfile& profile, double lambda_max,
                        std::span<const std::size_t> boundaries) {
  const std::size_t n = profile.size();
  const auto& lam = profile.lambda_i;
  Regions out;
  if (n == 0) return out;

  const auto argmax = static_cast<std::size_t>(std::max_element(lam.begin(), lam.end()) - lam.begin());
  out.high_anchor = argmax + 1;
  const auto high_run = run_containing(n, argmax, [&](std::size_t i) { return lam[i] > lambda_max; });
  std::vector<bool> in_high(n, false);
  if (high_run) {
    RegionSpec r{RegionLabel::II, high_run->first + 1, high_run->second + 1, n};
    for (std::size_t i = 1; i <= n; ++i) in_high[i - 1] = r.contains(i);
    out.high = r;
  }

  double best_min = std::numeric_limits<double>::infinity();
  for (std::size_t b : boundaries) {
    if (b < 1 || b > n) continue;
    const auto run = run_containing(
        n, b - 1, [&](std::size_t i) { return lam[i] < profile.lambda_full && !in_high[i]; });
    if (!run) continue;
    RegionSpec r{RegionLabel::I, run->first + 1, run->second + 1, n};
    double run_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= n; ++i) {
      if (r.contains(i)) run_min = std::min(run_min, lam[i - 1]);
    }
    if (run_min < best_min) {
      best_min = run_min;
      out.low = r;
      out.low_anchor = b;
    }
  }
  return out;
}

std::vector<RegionSpec> incoherent_clusters(std::span<const double> delta_i, double threshold,
                                            std::size_t min_width) {
  const std::size_t n = delta_i.size();
  std::vector<RegionSpec> out;
  if (n == 0) return out;
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    const auto run = run_containing(n, i, [&](std::size_t k) { return delta_i[k] > threshold; });
    if (!run) continue;
    RegionSpec r{RegionLabel::I, run->first + 1, run->second + 1, n};
    for (std::size_t k = 1; k <= n; ++k) {
      if (r.contains(k)) seen[k - 1] = true;
    }
    if (r.length() >= min_width) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const RegionSpec& a, const RegionSpec& b) { return a.lo < b.lo; });
  return out;
}

double default_incoherence_threshold(std::span<const double> delta_i) {
  // Coherent stretches sit many decades below the boundary spikes, so a
  // fraction of the peak separates them better than any multiple of the median.
  if (delta_i.empty()) return 0.0;
  return 0.01 * *std::max_element(delta_i.begin(), delta_i.end());
}

double region_distance(const EnsembleState& a, const EnsembleState& b, const RegionSpec& region) {
  if (a.size() != b.size() || a.size() != region.n_osc) {
    throw DimensionError("region distance: size mismatch");
  }
  double worst = 0.0;
  std::size_t i = region.lo;
  for (std::size_t k = 0; k < region.length(); ++k) {
    const std::size_t j = i - 1;
    const double dx = a.x[j] - b.x[j], dy = a.y[j] - b.y[j], dz = a.z[j] - b.z[j];
    worst = std::max(worst, std::sqrt(dx * dx + dy * dy + dz * dz));
    i = i % region.n_osc + 1;
  }
  return worst;
}

PersistenceResult persistence_from_distances(std::span<const double> times,
                                             std::span<const double> dist, double threshold,
                                             double hold) {
  const std::size_t m = times.size();
  if (dist.size() != m) throw DimensionError("distance series: sample counts differ");
  if (m == 0) throw std::domain_error("paired trajectory holds no samples");
  // First below-threshold stretch lasting at least `hold`.
  std::size_t k = 0;
  while (k < m) {
    if (dist[k] > threshold) {
      ++k;
      continue;
    }
    const std::size_t begin = k;
    while (k < m && dist[k] <= threshold) ++k;
    if (times[k - 1] - times[begin] >= hold) return {times[begin], true};
  }
  return {times.back(), false};
}

PersistenceResult perturbation_persistence(const PairedTrajectory& runs, const RegionSpec& region,
                                           double threshold, double hold) {
  const std::size_t m = runs.times.size();
  if (runs.reference.size() != m || runs.perturbed.size() != m) {
    throw DimensionError("paired trajectory: sample counts differ");
  }
  std::vector<double> dist(m);
  for (std::size_t k = 0; k < m; ++k) {
    dist[k] = region_distance(runs.reference[k], runs.perturbed[k], region);
  }
  return persistence_from_distances(runs.times, dist, threshold, hold);
}

}  // namespace ils
