#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "coi/cluster.hpp"
#include "coi/error.hpp"

namespace coi {
namespace {

std::vector<double> row_vector(const Matrix& m, std::size_t r) {
  auto row = m.row(r);
  return {row.begin(), row.end()};
}

Quadrant parse_quadrant(const std::string& s) {
  for (auto q : {Quadrant::kProfessional, Quadrant::kProAmateur, Quadrant::kAverageCareerCriminal, Quadrant::kAmateur}) {
    if (to_string(q) == s) return q;
  }
  throw ValidationError("unknown quadrant '" + s + "'");
}

ActivityDescriptor parse_descriptor(const std::string& s) {
  for (auto d : {ActivityDescriptor::kDiscrete, ActivityDescriptor::kActive, ActivityDescriptor::kHyperactive,
                 ActivityDescriptor::kShortLived}) {
    if (to_string(d) == s) return d;
  }
  throw ValidationError("unknown activity descriptor '" + s + "'");
}

}  // namespace

std::string_view to_string(Quadrant q) noexcept {
  switch (q) {
    case Quadrant::kProfessional: return "Professional";
    case Quadrant::kProAmateur: return "Pro-Amateur";
    case Quadrant::kAverageCareerCriminal: return "Average Career Criminal";
    case Quadrant::kAmateur: return "Amateur";
  }
  return "?";
}

std::string_view to_string(ActivityDescriptor d) noexcept {
  switch (d) {
    case ActivityDescriptor::kDiscrete: return "Discrete";
    case ActivityDescriptor::kActive: return "Active";
    case ActivityDescriptor::kHyperactive: return "Hyperactive";
    case ActivityDescriptor::kShortLived: return "Short-lived";
  }
  return "?";
}

QuadrantLabel label_cluster(const ClusterFacts& f, const LabelingRules& rules) {
  QuadrantLabel label;
  label.high_skill = f.skill >= rules.skill_high;
  label.high_commitment = f.commitment >= rules.commitment_high;
  if (label.high_skill) {
    label.quadrant = label.high_commitment ? Quadrant::kProfessional : Quadrant::kProAmateur;
  } else {
    label.quadrant = label.high_commitment ? Quadrant::kAverageCareerCriminal : Quadrant::kAmateur;
  }

  if (label.quadrant == Quadrant::kProfessional && f.median_activity_days &&
      *f.median_activity_days <= rules.short_lived_days) {
    label.quadrant = Quadrant::kProAmateur;
    label.activity = ActivityDescriptor::kShortLived;
    return label;
  }
  if (f.activity >= rules.hyperactive_rate) {
    label.activity = ActivityDescriptor::kHyperactive;
  } else if (f.activity >= rules.active_rate || label.high_commitment) {
    label.activity = ActivityDescriptor::kActive;
  } else {
    label.activity = ActivityDescriptor::kDiscrete;
  }
  return label;
}

std::vector<ClusterRow> label_clusters(const KMeansResult& model, const Scaler& scaler,
                                       std::span<const ActorProfile> sample, const LabelingRules& rules) {
  if (model.assignment.size() != sample.size()) throw ValidationError("label_clusters: sample size mismatch");
  const Matrix raw = scaler.inverse(model.centroids);
  std::vector<std::vector<double>> days(model.k);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    days[static_cast<std::size_t>(model.assignment[i])].push_back(static_cast<double>(sample[i].activity_days));
  }
  std::vector<ClusterRow> rows;
  for (std::size_t c = 0; c < model.k; ++c) {
    ClusterRow row;
    row.id = static_cast<int>(c);
    row.centroid_raw = row_vector(raw, c);
    row.centroid_std = row_vector(model.centroids, c);
    row.members = days[c].size();
    row.pct_of_sample = sample.empty() ? 0 : 100.0 * static_cast<double>(row.members) / static_cast<double>(sample.size());
    std::sort(days[c].begin(), days[c].end());
    std::optional<double> median;
    if (!days[c].empty()) {
      median = quantile_sorted(days[c], 0.5);
      row.median_activity_days = *median;
    }
    row.label = label_cluster({row.centroid_raw[0], row.centroid_raw[1], row.centroid_raw[2], median}, rules);
    rows.push_back(std::move(row));
  }
  return rows;
}

ExpertiseClustering cluster_sample(std::span<const ActorProfile> sample, const SelectKOptions& options,
                                   const LabelingRules& rules) {
  if (sample.size() < 3) throw ValidationError("cluster_sample: need at least three actors");
  std::vector<FeatureVector> features;
  features.reserve(sample.size());
  for (const auto& p : sample) features.push_back(features_of(p));
  const auto standardized = standardize(feature_matrix(features));
  auto selected = select_k(standardized.data, options);

  ExpertiseClustering out;
  out.k = selected.model.k;
  out.silhouette = selected.silhouette;
  out.inertia = selected.model.inertia;
  out.scaler = standardized.scaler;
  out.sweep = std::move(selected.sweep);
  out.clusters = label_clusters(selected.model, standardized.scaler, sample, rules);
  for (std::size_t i = 0; i < sample.size(); ++i) out.members.emplace_back(sample[i].actor_id, selected.model.assignment[i]);
  return out;
}

nlohmann::json to_json(const ExpertiseClustering& c) {
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& e : c.sweep) {
    sweep.push_back({{"k", e.k},
                     {"inertia", e.inertia},
                     {"silhouette", e.silhouette ? nlohmann::json(*e.silhouette) : nlohmann::json(nullptr)}});
  }
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& r : c.clusters) {
    clusters.push_back({{"id", r.id},
                        {"label", std::string(to_string(r.label.quadrant))},
                        {"activity", std::string(to_string(r.label.activity))},
                        {"high_skill", r.label.high_skill},
                        {"high_commitment", r.label.high_commitment},
                        {"centroid", r.centroid_raw},
                        {"centroid_standardized", r.centroid_std},
                        {"members", r.members},
                        {"pct_of_sample", r.pct_of_sample},
                        {"median_activity_days", r.median_activity_days}});
  }
  nlohmann::json members = nlohmann::json::array();
  for (const auto& [actor, cluster] : c.members) members.push_back({{"actor_id", actor}, {"cluster", cluster}});
  return {{"k", c.k},
          {"silhouette", c.silhouette},
          {"inertia", c.inertia},
          {"features", {"skill", "commitment", "activity"}},
          {"scaler", {{"mean", c.scaler.mean}, {"scale", c.scaler.scale}, {"constant", c.scaler.constant}}},
          {"sweep", std::move(sweep)},
          {"clusters", std::move(clusters)},
          {"members", std::move(members)}};
}

ExpertiseClustering clustering_from_json(const nlohmann::json& j) {
  try {
    ExpertiseClustering c;
    c.k = j.at("k").get<std::size_t>();
    c.silhouette = j.at("silhouette").get<double>();
    c.inertia = j.at("inertia").get<double>();
    const auto& s = j.at("scaler");
    c.scaler.mean = s.at("mean").get<std::vector<double>>();
    c.scaler.scale = s.at("scale").get<std::vector<double>>();
    c.scaler.constant = s.at("constant").get<std::vector<bool>>();
    for (const auto& e : j.at("sweep")) {
      KSweepEntry entry{e.at("k").get<std::size_t>(), e.at("inertia").get<double>(), std::nullopt};
      if (!e.at("silhouette").is_null()) entry.silhouette = e.at("silhouette").get<double>();
      c.sweep.push_back(entry);
    }
    for (const auto& r : j.at("clusters")) {
      ClusterRow row;
      row.id = r.at("id").get<int>();
      row.label.quadrant = parse_quadrant(r.at("label").get<std::string>());
      row.label.activity = parse_descriptor(r.at("activity").get<std::string>());
      row.label.high_skill = r.at("high_skill").get<bool>();
      row.label.high_commitment = r.at("high_commitment").get<bool>();
      row.centroid_raw = r.at("centroid").get<std::vector<double>>();
      row.centroid_std = r.at("centroid_standardized").get<std::vector<double>>();
      row.members = r.at("members").get<std::size_t>();
      row.pct_of_sample = r.at("pct_of_sample").get<double>();
      row.median_activity_days = r.at("median_activity_days").get<double>();
      c.clusters.push_back(std::move(row));
    }
    for (const auto& m : j.at("members")) {
      c.members.emplace_back(m.at("actor_id").get<std::string>(), m.at("cluster").get<int>());
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("clusters.json: ") + e.what());
  }
}

}  // namespace coi
