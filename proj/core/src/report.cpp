#include "coi/report.hpp"

#include <fmt/format.h>

#include "coi/error.hpp"

namespace coi {
namespace {

using json = nlohmann::json;

std::string num(const json& v, int precision = 2) {
  if (v.is_null()) return "-";
  if (v.is_number_integer() || v.is_number_unsigned()) return std::to_string(v.get<long long>());
  return fmt::format("{:.{}f}", v.get<double>(), precision);
}

void summary_row(std::string& out, const std::string& name, const json& s) {
  out += fmt::format("  {:<28} {:>8} {:>10} {:>10} {:>8} {:>8} {:>8} {:>8}\n", name, num(s.at("count")), num(s.at("mean")),
                     num(s.at("std")), num(s.at("min")), num(s.at("median")), num(s.at("p75")), num(s.at("max")));
}

void summary_header(std::string& out) {
  out += fmt::format("  {:<28} {:>8} {:>10} {:>10} {:>8} {:>8} {:>8} {:>8}\n", "", "count", "mean", "std", "min",
                     "median", "p75", "max");
}

}  // namespace

json build_report(const ReportSources& src) {
  try {
    json communities = json::array();
    for (const auto& c : src.communities.at("communities")) {
      json row = c;
      row.erase("actors");
      communities.push_back(std::move(row));
    }
    json clusters{{"skipped", src.clusters.at("skipped")}, {"sample_size", src.clusters.at("sample_size")}};
    if (src.clusters.at("skipped").get<bool>()) {
      clusters["reason"] = src.clusters.at("reason");
    } else {
      json rows = json::array();
      double pct_total = 0;
      for (const auto& c : src.clusters.at("clusters")) {
        rows.push_back({{"id", c.at("id")},
                        {"label", c.at("label")},
                        {"activity", c.at("activity")},
                        {"centroid", c.at("centroid")},
                        {"members", c.at("members")},
                        {"pct_of_sample", c.at("pct_of_sample")},
                        {"median_activity_days", c.at("median_activity_days")}});
        pct_total += c.at("pct_of_sample").get<double>();
      }
      json by_label = json::object();
      for (const auto& c : src.clusters.at("clusters")) {
        const auto label = c.at("label").get<std::string>();
        by_label[label] = by_label.value(label, 0.0) + c.at("pct_of_sample").get<double>();
      }
      clusters["k"] = src.clusters.at("k");
      clusters["silhouette"] = src.clusters.at("silhouette");
      clusters["sweep"] = src.clusters.at("sweep");
      clusters["rows"] = std::move(rows);
      clusters["pct_total"] = pct_total;
      clusters["pct_by_label"] = std::move(by_label);
    }
    return {{"corpus", src.corpus_stats},
            {"network",
             {{"threshold", src.graph_stats.at("threshold")},
              {"actors_without_capec", src.graph_stats.at("actors_without_capec")},
              {"unfiltered", src.graph_stats.at("unfiltered")},
              {"filtered", src.graph_stats.at("filtered")},
              {"removal", src.graph_stats.at("removal")},
              {"actor_overview", src.graph_stats.at("actor_overview")}}},
            {"communities",
             {{"modularity", src.communities.at("modularity")},
              {"count", src.communities.at("community_count")},
              {"config", src.communities.at("config")},
              {"rows", std::move(communities)}}},
            {"skill_distribution", src.sample_stats.at("skill_distribution")},
            {"sample",
             {{"config", src.sample_stats.at("config")},
              {"actors", src.sample_stats.at("actors")},
              {"size", src.sample_stats.at("sample_size")},
              {"stats", src.sample_stats.at("sample")}}},
            {"clusters", std::move(clusters)}};
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report: malformed stage summary: ") + e.what());
  }
}

std::string render_report_text(const json& r) {
  std::string out;
  try {
    const auto& corpus = r.at("corpus");
    out += "Corpus\n";
    out += fmt::format("  posts {}  actors {}  forums {}  distinct CVEs {}\n\n", num(corpus.at("posts")),
                       num(corpus.at("actors")), num(corpus.at("forums")), num(corpus.at("distinct_cves")));

    const auto& net = r.at("network");
    const auto& removal = net.at("removal");
    out += "Actor-CAPEC network\n";
    for (const char* which : {"unfiltered", "filtered"}) {
      const auto& s = net.at(which);
      out += fmt::format("  {:<11} nodes {} (actors {}, CAPECs {})  edges {}  density {} (all pairs {})\n", which,
                         num(s.at("nodes")), num(s.at("actors").at("count")), num(s.at("capecs").at("count")),
                         num(s.at("edges")), num(s.at("density_bipartite"), 4), num(s.at("density_all_pairs"), 4));
      out += fmt::format("  {:<11} mean actor degree {} (sd {})  mean CAPEC degree {} (sd {})\n", "",
                         num(s.at("actors").at("mean_degree")), num(s.at("actors").at("std_degree")),
                         num(s.at("capecs").at("mean_degree")), num(s.at("capecs").at("std_degree")));
    }
    out += fmt::format("  popularity limit {}: removed {} CAPECs and {} actors; {} actors had no CAPEC\n",
                       num(removal.at("limit")), num(removal.at("removed_capec_count")),
                       num(removal.at("removed_actor_count")), num(net.at("actors_without_capec")));
    const auto& overview = net.at("actor_overview");
    out += fmt::format("  one-timers {} ({:.2f}%)\n", num(overview.at("one_timers")),
                       100.0 * overview.at("one_timer_share").get<double>());
    summary_header(out);
    summary_row(out, "out-degree", overview.at("out_degree"));
    summary_row(out, "posts", overview.at("posts"));
    summary_row(out, "posts (no one-timers)", overview.at("posts_without_one_timers"));
    out += "\n";

    const auto& comm = r.at("communities");
    out += fmt::format("Communities of interest (modularity {})\n", num(comm.at("modularity"), 4));
    out += fmt::format("  {:>3} {:>7} {:>7} {:>9} {:>12} {:>12}  {}\n", "id", "actors", "CAPECs", "%one-time",
                       "out-degree", "posts", "keywords");
    for (const auto& c : comm.at("rows")) {
      std::string keywords;
      for (const auto& k : c.at("keywords")) {
        if (!keywords.empty()) keywords += ", ";
        keywords += k.at("token").get<std::string>();
      }
      out += fmt::format("  {:>3} {:>7} {:>7} {:>9} {:>12} {:>12}  {}\n", num(c.at("id")), num(c.at("actor_count")),
                         num(c.at("capec_count")), num(c.at("pct_one_timers")),
                         num(c.at("mean_out_degree")) + "±" + num(c.at("std_out_degree")),
                         num(c.at("mean_posts")) + "±" + num(c.at("std_posts")), keywords);
    }
    out += "\n";

    out += "Skill level distribution\n";
    const auto& dist = r.at("skill_distribution");
    for (const auto& row : dist.at("levels")) {
      out += fmt::format("  {:<7} ({}) CAPECs {:>5} ({:>6.2f}%)  values {:>6.2f}%\n", row.at("level").get<std::string>(),
                         num(row.at("code")), num(row.at("capecs")), 100.0 * row.at("capec_share").get<double>(),
                         100.0 * row.at("value_share").get<double>());
    }
    out += fmt::format("  CAPECs without a skill level: {}\n\n", num(dist.at("capecs_without_level")));

    const auto& sample = r.at("sample");
    out += fmt::format("Sample ({} of {} actors)\n", num(sample.at("size")), num(sample.at("actors")));
    const auto& ss = sample.at("stats");
    summary_header(out);
    summary_row(out, "skill list length", ss.at("skill_list_length"));
    summary_row(out, "skill score", ss.at("skill_score"));
    summary_row(out, "posts", ss.at("posts"));
    summary_row(out, "commitment %", ss.at("commitment_pct"));
    summary_row(out, "activity days", ss.at("activity_days"));
    summary_row(out, "activity rate", ss.at("activity_rate"));
    out += "\n";

    const auto& cl = r.at("clusters");
    if (cl.at("skipped").get<bool>()) {
      out += fmt::format("Clusters: skipped ({})\n", cl.at("reason").get<std::string>());
    } else {
      out += fmt::format("Clusters (k = {}, silhouette {})\n", num(cl.at("k")), num(cl.at("silhouette"), 3));
      out += fmt::format("  {:>3} {:<24} {:<12} {:<26} {:>7} {:>7}\n", "id", "label", "activity",
                         "centroid [skill; commit; rate]", "n", "%");
      for (const auto& c : cl.at("rows")) {
        const auto& ctr = c.at("centroid");
        out += fmt::format("  {:>3} {:<24} {:<12} {:<26} {:>7} {:>7}\n", num(c.at("id")),
                           c.at("label").get<std::string>(), c.at("activity").get<std::string>(),
                           fmt::format("[{}; {}; {}]", num(ctr.at(0)), num(ctr.at(1)), num(ctr.at(2))),
                           num(c.at("members")), num(c.at("pct_of_sample")));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report: malformed report: ") + e.what());
  }
  return out;
}

}  // namespace coi
