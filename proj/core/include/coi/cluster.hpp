#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "coi/expertise.hpp"

namespace coi {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

struct FeatureVector {
  double skill = 0;
  double commitment = 0;
  double activity = 0;
};

inline constexpr std::size_t kFeatureCount = 3;

/// Rows of (skill, commitment, activity). Throws ValidationError for
/// non-finite values or values outside their ranges.
Matrix feature_matrix(std::span<const FeatureVector> features);
FeatureVector features_of(const ActorProfile& profile);

/// Per-column z-score with population standard deviation. A constant column
/// is only centered and is flagged in `constant`.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<bool> constant;

  Matrix transform(const Matrix& x) const;
  Matrix inverse(const Matrix& z) const;
};

struct Standardized {
  Matrix data;
  Scaler scaler;
};

/// Throws ValidationError for fewer than two rows.
Standardized standardize(const Matrix& x);

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct KMeansOptions {
  std::uint64_t seed = 0;
  int restarts = 10;
  int max_iterations = 300;
  /// Stop once the relative inertia change of an iteration drops below this.
  double tolerance = 1e-8;
};

struct KMeansResult {
  /// Number of non-empty clusters.
  std::size_t k = 0;
  Matrix centroids;
  std::vector<int> assignment;
  /// Sum of squared distances of points to their centroid.
  double inertia = 0;
  /// Inertia after every assignment step of the winning restart, starting
  /// with the assignment to the seeded centroids.
  std::vector<double> inertia_history;
  /// k-means++ seeds of the winning restart.
  Matrix initial_centroids;
  int iterations = 0;
  int restart = 0;
};

/// Lloyd iterations from the given centroids: nearest-centroid assignment
/// (ties to the lower index), mean update, an emptied cluster re-seeded at the
/// point farthest from its centroid. Stops at an assignment fixpoint, a
/// relative inertia change below tolerance or the iteration cap.
KMeansResult lloyd(const Matrix& x, Matrix centroids, int max_iterations = 300, double tolerance = 1e-8);

/// k-means++ seeding followed by lloyd(), best of `restarts` by inertia
/// (ties: earliest restart). Throws ValidationError unless 1 <= k <= rows.
KMeansResult kmeans(const Matrix& x, std::size_t k, const KMeansOptions& options = {});

/// Mean silhouette over all points with Euclidean distance; a point alone in
/// its cluster scores 0. Throws ValidationError for fewer than two non-empty
/// clusters or a size mismatch.
double silhouette(const Matrix& x, std::span<const int> assignment);

struct SelectKOptions {
  std::size_t k_min = 2;
  std::size_t k_max = 12;
  KMeansOptions kmeans;
};

struct KSweepEntry {
  std::size_t k = 0;
  double inertia = 0;
  std::optional<double> silhouette;
};

struct SelectKResult {
  KMeansResult model;
  double silhouette = 0;
  std::vector<KSweepEntry> sweep;
};

/// Fits every k in [k_min, min(k_max, rows - 1)] and keeps the highest
/// silhouette (ties: smaller k). Throws ValidationError when the range is
/// empty or no k yields two non-empty clusters.
SelectKResult select_k(const Matrix& x, const SelectKOptions& options = {});

enum class Quadrant { kProfessional, kProAmateur, kAverageCareerCriminal, kAmateur };
enum class ActivityDescriptor { kDiscrete, kActive, kHyperactive, kShortLived };

std::string_view to_string(Quadrant q) noexcept;
std::string_view to_string(ActivityDescriptor d) noexcept;

struct QuadrantLabel {
  Quadrant quadrant = Quadrant::kAmateur;
  ActivityDescriptor activity = ActivityDescriptor::kDiscrete;
  bool high_skill = false;
  bool high_commitment = false;

  bool operator==(const QuadrantLabel&) const = default;
};

struct LabelingRules {
  double skill_high = 2.2;
  double commitment_high = 50;
  double hyperactive_rate = 4;
  double active_rate = 1;
  /// Median activity window (days) at or below which a high/high cluster
  /// counts as short-lived.
  double short_lived_days = 1;
};

/// Raw-unit centroid plus the median activity window of the members.
struct ClusterFacts {
  double skill = 0;
  double commitment = 0;
  double activity = 0;
  std::optional<double> median_activity_days;
};

/// Quadrant from the two thresholds. A high/high cluster whose members were
/// active for at most `short_lived_days` becomes Pro-Amateur, short-lived.
/// Otherwise the descriptor is Hyperactive at or above `hyperactive_rate`,
/// Active at or above `active_rate`, and below that Active for committed
/// clusters and Discrete for the rest.
QuadrantLabel label_cluster(const ClusterFacts& facts, const LabelingRules& rules = {});

struct ClusterRow {
  int id = 0;
  std::vector<double> centroid_raw;
  std::vector<double> centroid_std;
  std::size_t members = 0;
  double pct_of_sample = 0;
  double median_activity_days = 0;
  QuadrantLabel label;
};

struct ExpertiseClustering {
  std::size_t k = 0;
  double silhouette = 0;
  double inertia = 0;
  Scaler scaler;
  std::vector<KSweepEntry> sweep;
  std::vector<ClusterRow> clusters;
  /// Sample actor id -> cluster id, in sample order.
  std::vector<std::pair<std::string, int>> members;
};

/// Labels each cluster of a fitted model; `sample` is row-aligned with the
/// clustered matrix.
std::vector<ClusterRow> label_clusters(const KMeansResult& model, const Scaler& scaler,
                                       std::span<const ActorProfile> sample, const LabelingRules& rules = {});

/// Standardize, select k, label. Throws ValidationError for fewer than
/// three actors.
ExpertiseClustering cluster_sample(std::span<const ActorProfile> sample, const SelectKOptions& options = {},
                                   const LabelingRules& rules = {});

nlohmann::json to_json(const ExpertiseClustering& clustering);
ExpertiseClustering clustering_from_json(const nlohmann::json& j);

}  // namespace coi
