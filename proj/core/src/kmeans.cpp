#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "coi/cluster.hpp"
#include "coi/error.hpp"

namespace coi {
namespace {

using Rng = std::mt19937_64;

double unit_uniform(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t nearest(const Matrix& centroids, std::span<const double> point, double* best_d = nullptr) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows; ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  if (best_d) *best_d = best_dist;
  return best;
}

double assign(const Matrix& x, const Matrix& centroids, std::vector<int>& assignment) {
  double inertia = 0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    double d = 0;
    assignment[i] = static_cast<int>(nearest(centroids, x.row(i), &d));
    inertia += d;
  }
  return inertia;
}

Matrix plus_plus_seeds(const Matrix& x, std::size_t k, Rng& rng) {
  Matrix centroids(k, x.cols);
  std::vector<double> dist(x.rows, std::numeric_limits<double>::infinity());
  std::size_t pick = std::min<std::size_t>(static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(x.rows)),
                                           x.rows - 1);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(x.row(pick).begin(), x.cols, centroids.row(c).begin());
    double total = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      dist[i] = std::min(dist[i], squared_distance(x.row(i), centroids.row(c)));
      total += dist[i];
    }
    if (c + 1 == k) break;
    if (total <= 0) {
      pick = std::min<std::size_t>(static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(x.rows)),
                                   x.rows - 1);
      continue;
    }
    const double target = unit_uniform(rng) * total;
    double acc = 0;
    pick = x.rows - 1;
    for (std::size_t i = 0; i < x.rows; ++i) {
      acc += dist[i];
      if (acc > target && dist[i] > 0) {
        pick = i;
        break;
      }
    }
  }
  return centroids;
}

}  // namespace

Matrix feature_matrix(std::span<const FeatureVector> features) {
  Matrix m(features.size(), kFeatureCount);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    if (!std::isfinite(f.skill) || !std::isfinite(f.commitment) || !std::isfinite(f.activity)) {
      throw ValidationError("feature row " + std::to_string(i) + " is not finite");
    }
    if (f.skill < 1 || f.skill > 3 || f.commitment < 0 || f.commitment > 100 || f.activity < 0) {
      throw ValidationError("feature row " + std::to_string(i) + " outside its range");
    }
    m.at(i, 0) = f.skill;
    m.at(i, 1) = f.commitment;
    m.at(i, 2) = f.activity;
  }
  return m;
}

FeatureVector features_of(const ActorProfile& p) {
  if (!p.skill_score) throw ValidationError("actor '" + p.actor_id + "' has no skill score");
  return {static_cast<double>(*p.skill_score), p.commitment_pct, p.activity_rate};
}

Matrix Scaler::transform(const Matrix& x) const {
  if (x.cols != mean.size()) throw ValidationError("scaler: column count mismatch");
  Matrix z = x;
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) z.at(r, c) = (x.at(r, c) - mean[c]) / scale[c];
  }
  return z;
}

Matrix Scaler::inverse(const Matrix& z) const {
  if (z.cols != mean.size()) throw ValidationError("scaler: column count mismatch");
  Matrix x = z;
  for (std::size_t r = 0; r < z.rows; ++r) {
    for (std::size_t c = 0; c < z.cols; ++c) x.at(r, c) = z.at(r, c) * scale[c] + mean[c];
  }
  return x;
}

Standardized standardize(const Matrix& x) {
  if (x.rows < 2) throw ValidationError("standardize: need at least two rows");
  Scaler s;
  s.mean.assign(x.cols, 0.0);
  s.scale.assign(x.cols, 1.0);
  s.constant.assign(x.cols, false);
  const auto n = static_cast<double>(x.rows);
  for (std::size_t c = 0; c < x.cols; ++c) {
    double sum = 0;
    for (std::size_t r = 0; r < x.rows; ++r) sum += x.at(r, c);
    s.mean[c] = sum / n;
    double ss = 0;
    for (std::size_t r = 0; r < x.rows; ++r) ss += (x.at(r, c) - s.mean[c]) * (x.at(r, c) - s.mean[c]);
    const double sd = std::sqrt(ss / n);
    if (sd > 0) {
      s.scale[c] = sd;
    } else {
      s.constant[c] = true;
    }
  }
  Standardized out{s.transform(x), s};
  return out;
}

KMeansResult lloyd(const Matrix& x, Matrix centroids, int max_iterations, double tolerance) {
  if (centroids.cols != x.cols || centroids.rows == 0) throw ValidationError("lloyd: bad initial centroids");
  const std::size_t k = centroids.rows;
  KMeansResult res;
  res.initial_centroids = centroids;
  res.assignment.assign(x.rows, 0);
  double inertia = assign(x, centroids, res.assignment);
  res.inertia_history.push_back(inertia);

  std::vector<int> next(x.rows);
  std::vector<std::size_t> counts(k);
  for (int it = 0; it < max_iterations; ++it) {
    std::fill(centroids.data.begin(), centroids.data.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < x.rows; ++i) {
      const auto c = static_cast<std::size_t>(res.assignment[i]);
      ++counts[c];
      for (std::size_t d = 0; d < x.cols; ++d) centroids.at(c, d) += x.at(i, d);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < x.cols; ++d) centroids.at(c, d) /= static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1;
      for (std::size_t i = 0; i < x.rows; ++i) {
        const auto own = static_cast<std::size_t>(res.assignment[i]);
        if (counts[own] <= 1) continue;
        const double d = squared_distance(x.row(i), centroids.row(own));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0) break;
      --counts[static_cast<std::size_t>(res.assignment[far])];
      std::copy_n(x.row(far).begin(), x.cols, centroids.row(c).begin());
      res.assignment[far] = static_cast<int>(c);
      counts[c] = 1;
    }

    const double updated = assign(x, centroids, next);
    res.inertia_history.push_back(updated);
    res.iterations = it + 1;
    const bool fixpoint = next == res.assignment;
    res.assignment.swap(next);
    const double change = inertia > 0 ? std::abs(inertia - updated) / inertia : std::abs(inertia - updated);
    inertia = updated;
    if (fixpoint || change < tolerance) break;
  }
  res.centroids = std::move(centroids);
  res.inertia = inertia;

  std::vector<bool> used(k, false);
  for (int a : res.assignment) used[static_cast<std::size_t>(a)] = true;
  res.k = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
  if (res.k < k) {
    std::vector<int> remap(k, -1);
    Matrix kept(res.k, x.cols);
    int next_id = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (!used[c]) continue;
      std::copy_n(res.centroids.row(c).begin(), x.cols, kept.row(static_cast<std::size_t>(next_id)).begin());
      remap[c] = next_id++;
    }
    for (int& a : res.assignment) a = remap[static_cast<std::size_t>(a)];
    res.centroids = std::move(kept);
  }
  return res;
}

KMeansResult kmeans(const Matrix& x, std::size_t k, const KMeansOptions& options) {
  if (k < 1 || k > x.rows) {
    throw ValidationError("kmeans: k=" + std::to_string(k) + " must be in 1.." + std::to_string(x.rows));
  }
  if (options.restarts < 1) throw ValidationError("kmeans: restarts must be positive");
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < options.restarts; ++r) {
    const auto ur = static_cast<std::uint64_t>(r);
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(ur), static_cast<std::uint32_t>(k)};
    Rng rng(seq);
    auto res = lloyd(x, plus_plus_seeds(x, k, rng), options.max_iterations, options.tolerance);
    res.restart = r;
    if (!have || res.inertia < best.inertia) {
      best = std::move(res);
      have = true;
    }
  }
  return best;
}

double silhouette(const Matrix& x, std::span<const int> assignment) {
  if (assignment.size() != x.rows) throw ValidationError("silhouette: assignment size mismatch");
  int k = 0;
  for (int a : assignment) {
    if (a < 0) throw ValidationError("silhouette: negative cluster id");
    k = std::max(k, a + 1);
  }
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
  if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2) {
    throw ValidationError("silhouette: need at least two non-empty clusters");
  }
  double total = 0;
  std::vector<double> sum(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto own = static_cast<std::size_t>(assignment[i]);
    if (sizes[own] == 1) continue;
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < x.rows; ++j) {
      if (j == i) continue;
      sum[static_cast<std::size_t>(assignment[j])] += std::sqrt(squared_distance(x.row(i), x.row(j)));
    }
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sum.size(); ++c) {
      if (c == own || sizes[c] == 0) continue;
      b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0) total += (b - a) / denom;
  }
  return total / static_cast<double>(x.rows);
}

SelectKResult select_k(const Matrix& x, const SelectKOptions& options) {
  if (x.rows < 3) throw ValidationError("select_k: need at least three rows");
  const std::size_t lo = std::max<std::size_t>(options.k_min, 2);
  const std::size_t hi = std::min(options.k_max, x.rows - 1);
  if (lo > hi) {
    throw ValidationError("select_k: empty k range [" + std::to_string(options.k_min) + ", " +
                          std::to_string(options.k_max) + "] for " + std::to_string(x.rows) + " rows");
  }
  SelectKResult out;
  bool have = false;
  for (std::size_t k = lo; k <= hi; ++k) {
    auto model = kmeans(x, k, options.kmeans);
    KSweepEntry entry{k, model.inertia, std::nullopt};
    if (model.k >= 2) {
      entry.silhouette = silhouette(x, model.assignment);
      if (!have || *entry.silhouette > out.silhouette) {
        out.silhouette = *entry.silhouette;
        out.model = std::move(model);
        have = true;
      }
    }
    out.sweep.push_back(entry);
  }
  if (!have) throw ValidationError("select_k: features do not separate into two clusters");
  return out;
}

}  // namespace coi
