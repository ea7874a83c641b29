// coi: command-line front end for the communities-of-interest pipeline.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coi/catalog.hpp"
#include "coi/error.hpp"
#include "coi/pipeline.hpp"
#include "coi/util/hash.hpp"
#include "coi/util/time.hpp"

namespace {

using coi::Stage;
namespace fs = std::filesystem;

struct Flags {
  std::string workspace;
  bool force = false;
  bool quiet = false;

  std::string input;
  std::string not_before = "1990-01-01T00:00:00Z";
  std::string not_after = "2100-01-01T00:00:00Z";

  std::vector<std::string> nvd;
  std::string capec_csv;
  std::string cve_cwe;
  std::string capec_json;
  std::string out;

  std::size_t threshold = 500;
  double threshold_fraction = 0;

  coi::LeidenOptions leiden;

  coi::ExpertiseOptions expertise;
  std::string skill_mode = "occurrence";
  std::string imputation = "parent-first";

  coi::ClusterOptions cluster;

  coi::SynthConfig synth;
  std::string synth_config;
  bool use_synth = false;

  std::string format = "graphml";
};

void print(const Flags& f, const coi::StageResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (!f.quiet) std::cout << r.summary << '\n';
}

coi::Timestamp parse_time_flag(const std::string& text, const char* flag) {
  if (auto t = coi::parse_timestamp(text)) return *t;
  if (auto t = coi::parse_timestamp(text + "T00:00:00Z")) return *t;
  throw coi::ValidationError(std::string(flag) + ": not an ISO-8601 instant: '" + text + "'");
}

coi::IngestOptions ingest_options(const Flags& f) {
  coi::IngestOptions o;
  o.input = f.input;
  o.parse.not_before = parse_time_flag(f.not_before, "--not-before");
  o.parse.not_after = parse_time_flag(f.not_after, "--not-after");
  return o;
}

coi::CatalogSource catalog_source(const Flags& f) {
  coi::CatalogSource s;
  for (const auto& p : f.nvd) s.nvd_json.emplace_back(p);
  if (!f.capec_csv.empty()) s.capec_csv = f.capec_csv;
  if (!f.cve_cwe.empty()) s.cve_cwe_csv = f.cve_cwe;
  if (!f.capec_json.empty()) s.capec_json = f.capec_json;
  return s;
}

coi::PopularityThreshold threshold(const Flags& f) {
  return f.threshold_fraction > 0 ? coi::PopularityThreshold::fraction(f.threshold_fraction)
                                  : coi::PopularityThreshold::absolute(f.threshold);
}

coi::ExpertiseOptions expertise_options(const Flags& f) {
  auto o = f.expertise;
  auto mode = coi::parse_skill_list_mode(f.skill_mode);
  if (!mode) throw coi::ValidationError("--skill-mode must be 'occurrence' or 'unique'");
  auto imputation = coi::parse_imputation(f.imputation);
  if (!imputation) throw coi::ValidationError("--imputation must be 'parent-first', 'child-first' or 'none'");
  o.skill_mode = *mode;
  o.imputation = *imputation;
  return o;
}

coi::SynthConfig synth_config(const Flags& f, const CLI::App& cmd, const std::string& prefix = "") {
  coi::SynthConfig c = f.synth;
  if (!f.synth_config.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(coi::read_file(f.synth_config));
    } catch (const nlohmann::json::exception& e) {
      throw coi::ValidationError("--config: " + std::string(e.what()));
    }
    c = coi::synth_config_from_json(j);
    // Explicit flags win over the file.
    if (cmd.count("--" + prefix + "seed")) c.seed = f.synth.seed;
    if (cmd.count("--communities")) c.n_communities = f.synth.n_communities;
    if (cmd.count("--capecs-per-community")) c.capecs_per_community = f.synth.capecs_per_community;
    if (cmd.count("--actors-per-community")) c.actors_per_community = f.synth.actors_per_community;
    if (cmd.count("--noise")) c.noise = f.synth.noise;
  }
  coi::validate(c);
  return c;
}

void add_ingest_flags(CLI::App* cmd, Flags& f, bool required) {
  auto* opt = cmd->add_option("--input,-i", f.input, "Posts as JSONL (post_id, actor_id, forum_id, timestamp, content)");
  if (required) opt->required();
  cmd->add_option("--not-before", f.not_before, "Reject posts earlier than this instant")->capture_default_str();
  cmd->add_option("--not-after", f.not_after, "Reject posts later than this instant")->capture_default_str();
}

void add_catalog_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--nvd", f.nvd, "NVD JSON feed (repeatable)");
  cmd->add_option("--capec-csv", f.capec_csv, "MITRE CAPEC CSV export");
  cmd->add_option("--cve-cwe", f.cve_cwe, "Normalized cve_cwe.csv");
  cmd->add_option("--capec-json", f.capec_json, "Normalized capec.json");
}

void add_graph_flags(CLI::App* cmd, Flags& f) {
  auto* abs = cmd->add_option("--capec-threshold", f.threshold,
                              "Drop CAPECs linked to more than this many actors")
                  ->capture_default_str()
                  ->check(CLI::PositiveNumber);
  cmd->add_option("--capec-threshold-fraction", f.threshold_fraction,
                  "Drop CAPECs linked to more than this share of actors")
      ->check(CLI::Range(0.0, 1.0))
      ->excludes(abs);
}

void add_leiden_flags(CLI::App* cmd, Flags& f, const std::string& prefix = "") {
  cmd->add_option("--" + prefix + "seed", f.leiden.seed, "Leiden seed")->capture_default_str();
  cmd->add_option("--" + prefix + "restarts", f.leiden.restarts, "Independent Leiden runs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--resolution", f.leiden.resolution, "Modularity resolution")->capture_default_str();
  cmd->add_option("--threads", f.leiden.threads, "Worker threads for restarts")->capture_default_str();
}

void add_expertise_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--min-posts", f.expertise.min_posts, "Minimum posts for the sample")->capture_default_str();
  cmd->add_option("--skill-percentile", f.expertise.skill_percentile, "Nearest-rank percentile of skill values")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 100.0));
  cmd->add_option("--skill-mode", f.skill_mode, "occurrence | unique")->capture_default_str();
  cmd->add_option("--imputation", f.imputation, "parent-first | child-first | none")->capture_default_str();
}

void add_cluster_flags(CLI::App* cmd, Flags& f, const std::string& prefix = "") {
  auto& s = f.cluster.select;
  cmd->add_option("--k-min", s.k_min, "Smallest k tried")->capture_default_str();
  cmd->add_option("--k-max", s.k_max, "Largest k tried")->capture_default_str();
  cmd->add_option("--" + prefix + "seed", s.kmeans.seed, "k-means seed")->capture_default_str();
  cmd->add_option("--" + prefix + "restarts", s.kmeans.restarts, "k-means++ restarts per k")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto& r = f.cluster.rules;
  cmd->add_option("--skill-high", r.skill_high, "Centroid skill counted as high")->capture_default_str();
  cmd->add_option("--commitment-high", r.commitment_high, "Centroid commitment (%) counted as high")
      ->capture_default_str();
  cmd->add_option("--hyperactive-rate", r.hyperactive_rate, "Posts per day labelled hyperactive")
      ->capture_default_str();
  cmd->add_option("--active-rate", r.active_rate, "Posts per day labelled active")->capture_default_str();
}

void add_synth_flags(CLI::App* cmd, Flags& f, const std::string& prefix = "") {
  cmd->add_option("--" + prefix + "seed", f.synth.seed, "Generator seed")->capture_default_str();
  cmd->add_option("--communities", f.synth.n_communities, "Planted communities")->capture_default_str();
  cmd->add_option("--capecs-per-community", f.synth.capecs_per_community)->capture_default_str();
  cmd->add_option("--actors-per-community", f.synth.actors_per_community)->capture_default_str();
  cmd->add_option("--noise", f.synth.noise, "Probability a post comes from another community")
      ->capture_default_str();
  cmd->add_option("--config", f.synth_config, "Generator configuration as JSON");
}

int run(int argc, char** argv) {
  Flags f;
  CLI::App app{"Communities of interest and actor expertise from CVE-mentioning forum posts"};
  app.require_subcommand(1);
  app.add_option("--workspace,-w", f.workspace, "Workspace directory (default: $COI_WORKSPACE or ./coi-workspace)");
  app.add_flag("--force", f.force, "Run even when upstream artifacts changed since they were recorded");
  app.add_flag("--quiet,-q", f.quiet, "Only print warnings and errors");

  auto* ingest = app.add_subcommand("ingest", "Parse posts and build the corpus");
  add_ingest_flags(ingest, f, true);

  auto* convert = app.add_subcommand("convert-catalog", "Convert or load the CVE/CWE/CAPEC catalog");
  convert->alias("convert");
  add_catalog_flags(convert, f);
  convert->add_option("--out", f.out, "Write the normalized catalog here instead of into the workspace");

  auto* graph = app.add_subcommand("graph", "Build the actor-CAPEC graph and apply the popularity filter");
  add_graph_flags(graph, f);

  auto* communities = app.add_subcommand("communities", "Leiden community detection");
  add_leiden_flags(communities, f);

  auto* expertise = app.add_subcommand("expertise", "Per-actor skill, commitment and activity");
  add_expertise_flags(expertise, f);

  auto* cluster = app.add_subcommand("cluster", "k-means over the sample and quadrant labels");
  add_cluster_flags(cluster, f);

  auto* report = app.add_subcommand("report", "Write report.json and report.txt");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted ground truth");
  add_synth_flags(synth, f);
  synth->add_option("--out", f.out, "Write the generated files here instead of into the workspace");

  auto* export_cmd = app.add_subcommand("export-graph", "Serialize the graph with modes and communities");
  export_cmd->add_option("--format", f.format, "graphml | dot | csv")->capture_default_str();
  export_cmd->add_option("--out,-o", f.out, "Output file (default: stdout)");

  auto* all = app.add_subcommand("run-all", "Run every stage in order");
  all->add_flag("--synth", f.use_synth, "Start from a generated corpus instead of --input and catalog files");
  add_ingest_flags(all, f, false);
  add_catalog_flags(all, f);
  add_graph_flags(all, f);
  add_leiden_flags(all, f, "leiden-");
  add_expertise_flags(all, f);
  add_cluster_flags(all, f, "kmeans-");
  add_synth_flags(all, f, "synth-");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(coi::ExitCode::kValidation);
  }

  // Stand-alone conversions do not touch a workspace.
  if (convert->parsed() && !f.out.empty()) {
    std::vector<std::string> notes;
    const auto snapshot = coi::load_catalog_source(catalog_source(f), &notes);
    for (const auto& n : notes) std::cerr << "warning: " << n << '\n';
    coi::write_snapshot(snapshot, f.out);
    if (!f.quiet) {
      std::cout << "catalog: " << snapshot.cves().size() << " CVEs, " << snapshot.capecs().size() << " CAPECs -> "
                << f.out << '\n';
    }
    return 0;
  }
  if (synth->parsed() && !f.out.empty()) {
    const auto config = synth_config(f, *synth);
    coi::write_synth(coi::generate(config), f.out);
    if (!f.quiet) std::cout << "synth: wrote " << f.out << '\n';
    return 0;
  }

  coi::Workspace ws(f.workspace.empty() ? coi::default_workspace_root() : fs::path(f.workspace));
  if (export_cmd->parsed()) {
    const auto text = coi::export_workspace_graph(ws, coi::parse_graph_format(f.format), f.force);
    if (f.out.empty()) {
      std::cout << text;
    } else {
      coi::write_file_atomic(f.out, text);
    }
    return 0;
  }

  coi::WorkspaceLock lock(ws);
  if (ingest->parsed()) print(f, coi::run_ingest(ws, ingest_options(f)));
  if (convert->parsed()) print(f, coi::run_catalog(ws, catalog_source(f)));
  if (graph->parsed()) print(f, coi::run_graph(ws, threshold(f), f.force));
  if (communities->parsed()) print(f, coi::run_communities(ws, f.leiden, f.force));
  if (expertise->parsed()) print(f, coi::run_expertise(ws, expertise_options(f), f.force));
  if (cluster->parsed()) print(f, coi::run_cluster(ws, f.cluster, f.force));
  if (report->parsed()) print(f, coi::run_report(ws, f.force));
  if (synth->parsed()) print(f, coi::run_synth(ws, synth_config(f, *synth)));
  if (all->parsed()) {
    coi::RunAllOptions o;
    o.ingest = ingest_options(f);
    if (f.use_synth) {
      o.synth = synth_config(f, *all, "synth-");
    } else {
      if (f.input.empty()) throw coi::ValidationError("run-all: give --input and catalog files, or --synth");
      o.catalog = catalog_source(f);
    }
    o.threshold = threshold(f);
    o.leiden = f.leiden;
    o.expertise = expertise_options(f);
    o.cluster = f.cluster;
    o.force = f.force;
    for (const auto& r : coi::run_all(ws, o)) print(f, r);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const coi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(coi::ExitCode::kIo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(coi::ExitCode::kValidation);
  }
}
