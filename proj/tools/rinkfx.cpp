// rinkfx: estimate per-rink event-recording biases from play-by-play logs
// and produce adjustment multipliers that standardize counts across rinks.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rinkfx/adjust.hpp"
#include "rinkfx/csv.hpp"
#include "rinkfx/design.hpp"
#include "rinkfx/effects.hpp"
#include "rinkfx/elastic_net.hpp"
#include "rinkfx/errors.hpp"
#include "rinkfx/events.hpp"
#include "rinkfx/synth.hpp"
#include "rinkfx/team_game.hpp"

namespace fs = std::filesystem;
using namespace rinkfx;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMissingInput = 3;
constexpr int kExitBadInput = 4;
constexpr int kExitSolver = 5;

constexpr const char* kExitCodeFooter =
    "Exit codes:\n"
    "  0  success\n"
    "  1  unexpected error\n"
    "  2  invalid flags or configuration\n"
    "  3  missing input file\n"
    "  4  malformed input (parse or schema error)\n"
    "  5  solver failure";

class MissingInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
  if (!fs::exists(path)) {
    throw MissingInputError("missing input file: " + path);
  }
}

std::string slurp(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spill(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

std::vector<TeamGame> load_team_games(const std::string& path,
                                      const std::vector<std::string>& seasons) {
  require_file(path);
  std::ifstream in(path);
  auto rows = read_team_games_csv(in);
  if (!seasons.empty()) {
    std::set<std::string> keep(seasons.begin(), seasons.end());
    std::erase_if(rows,
                  [&keep](const TeamGame& tg) { return !keep.contains(tg.season); });
  }
  return rows;
}

std::vector<ModelEvent> parse_events(const std::vector<std::string>& names) {
  std::vector<ModelEvent> events;
  if (names.empty()) {
    events.assign(kAllModelEvents.begin(), kAllModelEvents.end());
    return events;
  }
  for (ModelEvent event : kAllModelEvents) {  // canonical order
    for (const std::string& name : names) {
      auto parsed = model_event_from(name);
      if (!parsed) throw ConfigError("unknown event '" + name + "'");
      if (*parsed == event) {
        events.push_back(event);
        break;
      }
    }
  }
  return events;
}

EncodeOptions parse_unpenalized(const std::vector<std::string>& families) {
  EncodeOptions options;
  for (const std::string& name : families) {
    auto family = column_family_from(name);
    if (!family) throw ConfigError("unknown column family '" + name + "'");
    options.unpenalized.insert(*family);
  }
  return options;
}

void print_diagnostics(const IngestDiagnostics& diag) {
  std::cerr << "parsed " << diag.rows_parsed << " rows, accepted "
            << diag.games_accepted << " games";
  if (!diag.rejected.empty()) {
    std::cerr << ", rejected " << diag.rejected.size();
  }
  std::cerr << '\n';
  for (const auto& game : diag.rejected) {
    std::cerr << "rejected " << game.season << "/" << game.game_id << ": "
              << game.reason << '\n';
  }
  for (const auto& warning : diag.warnings) {
    std::cerr << "warning: " << warning << '\n';
  }
}

struct CommonFitFlags {
  std::string input;
  std::string out_dir;
  std::vector<std::string> events;
  std::vector<std::string> seasons;
  std::vector<std::string> unpenalized;
  double alpha = 0.5;
  int folds = 10;
  std::uint64_t seed = 1;
  int n_lambda = 100;
  double lambda_min_ratio = 1e-4;
  double tol = 1e-7;
  int max_iter = 100000;
  int threads = 0;
  int persistence_threshold = -1;
  bool dump_design = false;

  ElasticNetSpec spec() const {
    ElasticNetSpec s;
    s.alpha = alpha;
    s.folds = folds;
    s.seed = seed;
    s.n_lambda = n_lambda;
    s.path_ratio = lambda_min_ratio;
    s.tol = tol;
    s.max_iter = max_iter;
    return s;
  }
};

void add_fit_flags(CLI::App* cmd, CommonFitFlags& flags) {
  cmd->add_option("-i,--input", flags.input, "Team-game table (CSV)")
      ->required();
  cmd->add_option("-o,--out", flags.out_dir, "Output directory")->required();
  cmd->add_option("--events", flags.events,
                  "Events to fit (default: all nine)")
      ->delimiter(',');
  cmd->add_option("--seasons", flags.seasons, "Season filter (default: all)")
      ->delimiter(',');
  cmd->add_option("--alpha", flags.alpha,
                  "Elastic-net mixing weight (1 = lasso, 0 = ridge)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--folds", flags.folds, "Cross-validation folds")
      ->capture_default_str()
      ->check(CLI::Range(2, 1000));
  cmd->add_option("--seed", flags.seed, "Master seed (folds derive from it)")
      ->capture_default_str();
  cmd->add_option("--n-lambda", flags.n_lambda, "Path length")
      ->capture_default_str()
      ->check(CLI::Range(1, 10000));
  cmd->add_option("--lambda-min-ratio", flags.lambda_min_ratio,
                  "lambda_min / lambda_max")
      ->capture_default_str();
  cmd->add_option("--tol", flags.tol, "Coordinate-descent tolerance")
      ->capture_default_str();
  cmd->add_option("--max-iter", flags.max_iter, "Sweep cap per lambda")
      ->capture_default_str();
  cmd->add_option("--unpenalized", flags.unpenalized,
                  "Extra unpenalized column families "
                  "(rink,asd,for,against,home,homer)")
      ->delimiter(',');
  cmd->add_option("--threads", flags.threads,
                  "CV fold threads (0 = hardware)")
      ->capture_default_str();
}

std::vector<EventAnalysis> run_event_fits(const CommonFitFlags& flags) {
  // Flag values validate before any file is read.
  auto events = parse_events(flags.events);
  EncodeOptions encode_options = parse_unpenalized(flags.unpenalized);
  PersistenceRule rule{flags.persistence_threshold};
  auto team_games = load_team_games(flags.input, flags.seasons);
  if (team_games.empty()) {
    throw ValidationError("no team-game rows after filtering");
  }
  std::vector<EventAnalysis> analyses;
  analyses.reserve(events.size());
  for (ModelEvent event : events) {
    std::cerr << "fitting " << to_string(event) << " ("
              << seasons_of(team_games).size() << " seasons + pooled)\n";
    analyses.push_back(fit_event_models(team_games, event, flags.spec(),
                                        encode_options, rule, flags.threads));
  }
  return analyses;
}

void write_fit_outputs(const fs::path& dir, const EventAnalysis& analysis) {
  const std::string event{to_string(analysis.event)};
  std::ostringstream summary;
  summary << "{\n  \"schema_version\": 1,\n  \"event\": \"" << event
          << "\",\n  \"scopes\": {";
  bool first_scope = true;
  auto write_scope = [&](const std::string& scope, const FitResult& fit) {
    {
      std::ofstream out(dir / ("cv_" + event + "_" + scope + ".csv"));
      write_cv_csv(out, fit);
    }
    CsvTable coefs;
    coefs.header = {"label", "coefficient", "effect"};
    const double b0 = fit.intercept_at(fit.lambda_chosen);
    coefs.rows.push_back(
        {"(intercept)", fmt_double(b0), fmt_double(std::exp(b0))});
    for (std::size_t j = 0; j < fit.columns.size(); ++j) {
      const double c = fit.coefficients(static_cast<Eigen::Index>(j),
                                        fit.lambda_chosen);
      coefs.rows.push_back({fit.columns[j].str(), fmt_double(c),
                            fmt_double(std::exp(c))});
    }
    write_csv_file((dir / ("coef_" + event + "_" + scope + ".csv")).string(),
                   coefs);
    summary << (first_scope ? "\n" : ",\n") << "    \"" << scope
            << "\": {\"alpha\": " << fmt_double(fit.alpha)
            << ", \"lambda_chosen\": "
            << fmt_double(fit.lambda[static_cast<std::size_t>(
                   fit.lambda_chosen)])
            << ", \"lambda_index\": " << fit.lambda_chosen
            << ", \"nonzero\": "
            << fit.nonzero[static_cast<std::size_t>(fit.lambda_chosen)]
            << "}";
    first_scope = false;
  };
  for (std::size_t s = 0; s < analysis.seasons.size(); ++s) {
    write_scope(analysis.seasons[s], analysis.yearly_fits[s]);
  }
  write_scope("pooled", analysis.pooled_fit);
  summary << "\n  }\n}\n";
  spill(dir / ("fit_" + event + ".json"), summary.str());
}

void write_effects_outputs(const fs::path& dir, const EventAnalysis& analysis) {
  const std::string event{to_string(analysis.event)};
  {
    std::ofstream out(dir / ("effects_" + event + ".csv"));
    write_effects_csv(out, analysis);
  }
  spill(dir / ("effects_" + event + ".json"), effects_json(analysis));
  {
    std::ofstream out(dir / ("persistence_" + event + ".csv"));
    write_persistence_csv(out, analysis.report);
  }
  spill(dir / ("persistence_" + event + ".json"),
        persistence_json(analysis.report));
}

// --- subcommand drivers ---

struct IngestFlags {
  std::string input;
  std::string output;
  std::string asd_orientation = "for-team";
  std::string goal_term = "raw";
  std::string rink_map;
  std::string exclude_games;
  std::vector<std::string> seasons;
};

int run_ingest(const IngestFlags& flags) {
  require_file(flags.input);
  TeamGameOptions options;
  if (flags.asd_orientation == "for-team") {
    options.asd_orientation = AsdOrientation::ForTeam;
  } else if (flags.asd_orientation == "home") {
    options.asd_orientation = AsdOrientation::Home;
  } else {
    throw ConfigError("--asd-orientation must be for-team or home");
  }
  if (flags.goal_term == "raw") {
    options.goal_term = GoalTerm::Raw;
  } else if (flags.goal_term == "prorated") {
    options.goal_term = GoalTerm::Prorated;
  } else {
    throw ConfigError("--goal-term must be raw or prorated");
  }
  if (!flags.rink_map.empty()) {
    require_file(flags.rink_map);
    options.rinks = RinkMap::from_csv_file(flags.rink_map);
  }
  if (!flags.exclude_games.empty()) {
    require_file(flags.exclude_games);
    std::ifstream in(flags.exclude_games);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) options.exclude_games.insert(line);
    }
  }

  std::ifstream in(flags.input);
  IngestDiagnostics diag;
  auto games = parse_pbp(in, &diag);
  if (!flags.seasons.empty()) {
    std::set<std::string> keep(flags.seasons.begin(), flags.seasons.end());
    std::erase_if(games,
                  [&keep](const GameLog& g) { return !keep.contains(g.season); });
  }
  auto rows = build_all_team_games(games, options, &diag);
  std::ofstream out(flags.output);
  if (!out) throw ValidationError("cannot write " + flags.output);
  write_team_games_csv(out, rows);
  print_diagnostics(diag);
  std::cerr << "wrote " << rows.size() << " team-game rows to "
            << flags.output << '\n';
  return 0;
}

int run_fit(const CommonFitFlags& flags) {
  fs::create_directories(flags.out_dir);
  std::vector<TeamGame> team_games;
  if (flags.dump_design) {
    team_games = load_team_games(flags.input, flags.seasons);
  }
  for (const EventAnalysis& analysis : run_event_fits(flags)) {
    write_fit_outputs(flags.out_dir, analysis);
    if (!flags.dump_design) continue;
    const std::string event{to_string(analysis.event)};
    EncodeOptions encode_options = parse_unpenalized(flags.unpenalized);
    for (const std::string& season : analysis.seasons) {
      std::vector<TeamGame> rows;
      for (const TeamGame& tg : team_games) {
        if (tg.season == season) rows.push_back(tg);
      }
      std::ofstream out(fs::path(flags.out_dir) /
                        ("design_" + event + "_" + season + ".csv"));
      write_design_csv(out, encode_yearly(rows, analysis.event,
                                          encode_options));
    }
    std::ofstream out(fs::path(flags.out_dir) /
                      ("design_" + event + "_pooled.csv"));
    write_design_csv(out, encode_pooled(team_games, analysis.event,
                                        encode_options));
  }
  return 0;
}

int run_effects(const CommonFitFlags& flags) {
  fs::create_directories(flags.out_dir);
  for (const EventAnalysis& analysis : run_event_fits(flags)) {
    write_effects_outputs(flags.out_dir, analysis);
  }
  return 0;
}

struct AdjustFlags {
  std::string pbp;
  std::string reports_dir;
  std::string team_games;
  std::string rink_map;
  std::string event = "HIT";
  std::string season;
  std::string out_dir;
};

int run_adjust(const AdjustFlags& flags) {
  auto event = model_event_from(flags.event);
  if (!event) throw ConfigError("unknown event '" + flags.event + "'");
  if (!is_primitive(*event)) {
    throw ConfigError("player adjustment applies to recorded events only");
  }
  fs::create_directories(flags.out_dir);
  const fs::path reports(flags.reports_dir);

  auto report_path = [&reports](ModelEvent e) {
    return reports / ("persistence_" + std::string(to_string(e)) + ".json");
  };
  PersistenceReport report =
      persistence_from_json(slurp(report_path(*event).string()));
  AdjustmentWeights weights =
      AdjustmentWeights::from_reports(std::span(&report, 1));

  RinkMap rinks;
  if (!flags.rink_map.empty()) {
    require_file(flags.rink_map);
    rinks = RinkMap::from_csv_file(flags.rink_map);
  }

  require_file(flags.pbp);
  std::ifstream in(flags.pbp);
  IngestDiagnostics diag;
  auto games = parse_pbp(in, &diag);
  AdjustStats stats;
  auto ranked = adjust_player_counts(games, weights, flags.season, *event,
                                     rinks, &stats);
  const std::string stem =
      "adjusted_" + std::string(to_string(*event)) + "_" + flags.season;
  {
    std::ofstream out(fs::path(flags.out_dir) / (stem + ".csv"));
    write_adjusted_counts_csv(out, ranked);
  }
  spill(fs::path(flags.out_dir) / (stem + ".json"),
        adjusted_counts_json(ranked, *event, flags.season, stats));
  std::cerr << "adjusted " << stats.events_counted << " events ("
            << stats.events_skipped_no_player << " skipped without player)\n";

  if (!flags.team_games.empty()) {
    PersistenceReport corsi_report = persistence_from_json(
        slurp(report_path(ModelEvent::Corsi).string()));
    AdjustmentWeights corsi_weights =
        AdjustmentWeights::from_reports(std::span(&corsi_report, 1));
    auto team_games = load_team_games(flags.team_games, {});
    auto pct = adjust_corsi_pct(team_games, corsi_weights, flags.season);
    {
      std::ofstream out(fs::path(flags.out_dir) /
                        ("corsi_pct_" + flags.season + ".csv"));
      write_corsi_pct_csv(out, pct);
    }
    spill(fs::path(flags.out_dir) / ("corsi_pct_" + flags.season + ".json"),
          corsi_pct_json(pct, flags.season));
  }
  return 0;
}

struct SynthFlags {
  std::string out_dir;
  std::string config;
  std::uint64_t seed = 1;
  bool seed_set = false;
  double noise_sd = -1.0;
  bool event_level = false;
};

int run_synth(const SynthFlags& flags) {
  SyntheticConfig config;
  if (!flags.config.empty()) {
    config = synthetic_config_from_json(slurp(flags.config));
  } else {
    config = SyntheticConfig::demo();
  }
  if (flags.seed_set) config.seed = flags.seed;
  if (flags.noise_sd >= 0.0) config.noise_sd = flags.noise_sd;
  config.validate();

  fs::create_directories(flags.out_dir);
  const fs::path dir(flags.out_dir);
  spill(dir / "config.json", synthetic_config_json(config));
  if (flags.event_level) {
    EventLevelOutput output = generate_event_level(config);
    std::ofstream out(dir / "pbp.csv");
    serialize_pbp(out, output.games);
    spill(dir / "truth.json", truth_json(output.truth));
    std::cerr << "wrote " << output.games.size() << " games to "
              << (dir / "pbp.csv").string() << '\n';
  } else {
    SynthOutput output = generate_team_games(config);
    std::ofstream out(dir / "team_games.csv");
    write_team_games_csv(out, output.team_games);
    spill(dir / "truth.json", truth_json(output.truth));
    std::cerr << "wrote " << output.team_games.size()
              << " team-game rows to " << (dir / "team_games.csv").string()
              << '\n';
  }
  return 0;
}

struct ReportFlags {
  std::string input_dir;
  std::string out_dir;
};

int run_report(const ReportFlags& flags) {
  fs::create_directories(flags.out_dir);
  const fs::path in_dir(flags.input_dir);
  const fs::path out_dir(flags.out_dir);
  std::vector<SummaryRow> rows;
  for (ModelEvent event : kAllModelEvents) {
    const std::string name{to_string(event)};
    const fs::path effects_path = in_dir / ("effects_" + name + ".json");
    const fs::path persistence_path =
        in_dir / ("persistence_" + name + ".json");
    if (!fs::exists(effects_path) || !fs::exists(persistence_path)) continue;
    EventSummaryInput input = summary_input_from_json(
        slurp(effects_path.string()), slurp(persistence_path.string()));
    rows.push_back(summarize_input(input));
    std::ofstream grid(out_dir / ("grid_" + name + ".csv"));
    write_effect_grid_csv(grid, input);
  }
  if (rows.empty()) {
    throw MissingInputError("no effects/persistence reports found in " +
                            flags.input_dir);
  }
  {
    std::ofstream out(out_dir / "summary.csv");
    write_summary_csv(out, rows);
  }
  spill(out_dir / "summary.json", summary_json(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rinkfx: estimate per-rink event-recording biases from hockey "
      "play-by-play logs and produce adjustment multipliers"};
  app.require_subcommand(1);
  app.footer(kExitCodeFooter);

  IngestFlags ingest_flags;
  auto* ingest = app.add_subcommand(
      "ingest", "Parse play-by-play logs into the team-game table");
  ingest->add_option("-i,--input", ingest_flags.input, "Play-by-play CSV")
      ->required();
  ingest->add_option("-o,--output", ingest_flags.output,
                     "Team-game table to write")
      ->required();
  ingest
      ->add_option("--asd-orientation", ingest_flags.asd_orientation,
                   "ASD sign convention: for-team or home")
      ->capture_default_str()
      ->check(CLI::IsMember({"for-team", "home"}));
  ingest
      ->add_option("--goal-term", ingest_flags.goal_term,
                   "Goals inside CORSI/FENWICK: raw or prorated")
      ->capture_default_str()
      ->check(CLI::IsMember({"raw", "prorated"}));
  ingest->add_option("--rink-map", ingest_flags.rink_map,
                     "season,team,rink mapping CSV (splits relocations)");
  ingest->add_option("--exclude-games", ingest_flags.exclude_games,
                     "File of game ids to drop (one per line)");
  ingest->add_option("--seasons", ingest_flags.seasons, "Season filter")
      ->delimiter(',');

  CommonFitFlags fit_flags;
  auto* fit = app.add_subcommand(
      "fit", "Fit yearly and pooled models; write CV and coefficient tables");
  add_fit_flags(fit, fit_flags);
  fit->add_flag("--dump-design", fit_flags.dump_design,
                "Also write each encoded design matrix as CSV");

  CommonFitFlags effects_flags;
  auto* effects = app.add_subcommand(
      "effects", "Fit models and write effect tables and persistence reports");
  add_fit_flags(effects, effects_flags);
  effects
      ->add_option("--persistence-threshold",
                   effects_flags.persistence_threshold,
                   "Yearly same-sign count required (-1 = seasons-1)")
      ->capture_default_str();

  AdjustFlags adjust_flags;
  auto* adjust = app.add_subcommand(
      "adjust", "Reweight recorded events into adjusted player counts");
  adjust->add_option("--pbp", adjust_flags.pbp,
                     "Play-by-play CSV with a player column")
      ->required();
  adjust->add_option("--reports", adjust_flags.reports_dir,
                     "Directory with persistence_<EVENT>.json reports")
      ->required();
  adjust->add_option("--team-games", adjust_flags.team_games,
                     "Team-game table; enables the CORSI percentage report");
  adjust->add_option("--rink-map", adjust_flags.rink_map,
                     "season,team,rink mapping CSV");
  adjust->add_option("--event", adjust_flags.event, "Recorded event to adjust")
      ->capture_default_str();
  adjust->add_option("--season", adjust_flags.season, "Season to adjust")
      ->required();
  adjust->add_option("-o,--out", adjust_flags.out_dir, "Output directory")
      ->required();

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand(
      "synth", "Generate synthetic data with known planted effects");
  synth->add_option("-o,--out", synth_flags.out_dir, "Output directory")
      ->required();
  synth->add_option("--config", synth_flags.config,
                    "Synthetic config JSON (default: built-in demo league)");
  synth->add_option("--seed", synth_flags.seed, "Seed override")
      ->capture_default_str()
      ->trigger_on_parse()
      ->each([&synth_flags](const std::string&) { synth_flags.seed_set = true; });
  synth->add_option("--noise-sd", synth_flags.noise_sd,
                    "Log-scale noise override (negative keeps config value)")
      ->capture_default_str();
  synth->add_flag("--event-level", synth_flags.event_level,
                  "Emit ingest-schema event rows instead of team-game rows");

  ReportFlags report_flags;
  auto* report = app.add_subcommand(
      "report", "Summarize effects output into the cross-event overview");
  report->add_option("-i,--input", report_flags.input_dir,
                     "Directory written by `effects`")
      ->required();
  report->add_option("-o,--out", report_flags.out_dir, "Output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e);  // --help
    }
    std::cerr << "rinkfx: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*ingest) return run_ingest(ingest_flags);
    if (*fit) return run_fit(fit_flags);
    if (*effects) return run_effects(effects_flags);
    if (*adjust) return run_adjust(adjust_flags);
    if (*synth) return run_synth(synth_flags);
    if (*report) return run_report(report_flags);
  } catch (const MissingInputError& e) {
    std::cerr << "rinkfx: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const ParseError& e) {
    std::cerr << "rinkfx: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const SolverError& e) {
    std::cerr << "rinkfx: solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ConfigError& e) {
    std::cerr << "rinkfx: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "rinkfx: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "rinkfx: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitUsage;
}
