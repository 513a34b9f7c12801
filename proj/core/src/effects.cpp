#include "rinkfx/effects.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include <json.hpp>

#include "rinkfx/csv.hpp"
#include "rinkfx/errors.hpp"
#include "rinkfx/rng.hpp"

namespace rinkfx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

EffectEntry entry_from(double coefficient) {
  return {coefficient, std::exp(coefficient), coefficient != 0.0};
}

}  // namespace

EffectTable effect_table_from_fit(ModelEvent event, const std::string& scope,
                                  const FitResult& fit) {
  if (fit.lambda_chosen < 0) {
    throw ValidationError("effect_table_from_fit: fit has no chosen lambda");
  }
  EffectTable table;
  table.event = event;
  table.scope = scope;
  const bool pooled = scope == "pooled";
  const double b0 = fit.intercept_at(fit.lambda_chosen);
  const Eigen::VectorXd coef = fit.coef_at(fit.lambda_chosen);
  std::set<std::string> seasons;
  for (std::size_t j = 0; j < fit.columns.size(); ++j) {
    const ColumnLabel& label = fit.columns[j];
    const double c = coef[static_cast<Eigen::Index>(j)];
    // Yearly fits leave the season tag empty; key them by the fit's scope.
    const std::string season = pooled ? label.season : scope;
    switch (label.family) {
      case ColumnFamily::Intercept:
        seasons.insert(season);
        table.mean_effect[season] = std::exp(b0 + c);
        break;
      case ColumnFamily::Asd:
        table.asd_effect[season] = entry_from(c);
        break;
      case ColumnFamily::Home:
        table.home_effect[season] = entry_from(c);
        break;
      case ColumnFamily::Rink:
        table.rink_effect[label.level] = entry_from(c);
        break;
      case ColumnFamily::HomeRink:
        table.homer_effect[label.level] = entry_from(c);
        break;
      case ColumnFamily::TeamFor:
      case ColumnFamily::TeamAgainst:
        break;  // nuisance terms, not reported
    }
  }
  table.seasons.assign(seasons.begin(), seasons.end());
  return table;
}

int PersistenceRule::resolve(int n_seasons) const {
  if (min_same_signed >= 0) return min_same_signed;
  return std::max(1, n_seasons - 1);
}

namespace {

struct SignTally {
  int positive = 0;
  int negative = 0;
  std::vector<double> effects;  // NaN where absent
};

SignTally tally(const std::vector<EffectTable>& yearly,
                const std::map<std::string, EffectEntry> EffectTable::*field,
                const std::string& rink) {
  SignTally t;
  t.effects.reserve(yearly.size());
  for (const EffectTable& table : yearly) {
    const auto& entries = table.*field;
    auto it = entries.find(rink);
    if (it == entries.end()) {
      t.effects.push_back(kNaN);
      continue;
    }
    t.effects.push_back(it->second.effect);
    const int s = sign_of(it->second.coefficient);
    if (s > 0) ++t.positive;
    if (s < 0) ++t.negative;
  }
  return t;
}

/// The three conditions on one coefficient track (rink or homer).
struct TrackResult {
  bool persistent = false;
  int direction = 0;
  double pooled_effect = 1.0;
};

TrackResult classify_track(const SignTally& t, const EffectTable& pooled,
                           const std::map<std::string, EffectEntry>
                               EffectTable::*field,
                           const std::string& rink, int threshold) {
  TrackResult result;
  const auto& entries = pooled.*field;
  auto it = entries.find(rink);
  const double pooled_coef = it == entries.end() ? 0.0 : it->second.coefficient;
  result.pooled_effect = std::exp(pooled_coef);

  const bool same_signed_majority =
      std::max(t.positive, t.negative) >= threshold;   // condition 1
  const bool no_opposite = std::min(t.positive, t.negative) == 0;  // condition 2
  const int yearly_dir =
      t.positive > 0 ? 1 : (t.negative > 0 ? -1 : 0);
  const bool pooled_agrees =
      pooled_coef != 0.0 && sign_of(pooled_coef) == yearly_dir;  // condition 3

  if (same_signed_majority && no_opposite && yearly_dir != 0 &&
      pooled_agrees) {
    result.persistent = true;
    result.direction = yearly_dir;
  }
  return result;
}

}  // namespace

PersistenceEntry classify_persistence(const std::vector<EffectTable>& yearly,
                                      const EffectTable& pooled,
                                      const std::string& rink,
                                      const PersistenceRule& rule) {
  const int threshold = rule.resolve(static_cast<int>(yearly.size()));
  PersistenceEntry entry;
  entry.rink = rink;

  SignTally rink_tally = tally(yearly, &EffectTable::rink_effect, rink);
  TrackResult re = classify_track(rink_tally, pooled,
                                  &EffectTable::rink_effect, rink, threshold);
  entry.persistent = re.persistent;
  entry.direction = re.direction;
  entry.pooled_effect = re.pooled_effect;
  entry.yearly_effects = std::move(rink_tally.effects);

  SignTally homer_tally = tally(yearly, &EffectTable::homer_effect, rink);
  TrackResult he = classify_track(homer_tally, pooled,
                                  &EffectTable::homer_effect, rink, threshold);
  entry.homer_persistent = he.persistent;
  entry.homer_direction = he.direction;
  entry.pooled_homer_effect = he.pooled_effect;
  return entry;
}

PersistenceReport build_persistence_report(
    const std::vector<EffectTable>& yearly, const EffectTable& pooled,
    const PersistenceRule& rule) {
  PersistenceReport report;
  report.event = pooled.event;
  for (const EffectTable& table : yearly) {
    report.seasons.push_back(table.scope);
  }
  std::set<std::string> rinks;
  for (const EffectTable& table : yearly) {
    for (const auto& [rink, entry] : table.rink_effect) rinks.insert(rink);
  }
  for (const auto& [rink, entry] : pooled.rink_effect) rinks.insert(rink);
  for (const std::string& rink : rinks) {
    report.entries[rink] = classify_persistence(yearly, pooled, rink, rule);
  }
  return report;
}

EventAnalysis fit_event_models(std::span<const TeamGame> team_games,
                               ModelEvent event, const ElasticNetSpec& spec,
                               const EncodeOptions& encode_options,
                               const PersistenceRule& rule, int threads) {
  std::vector<TeamGame> all(team_games.begin(), team_games.end());
  std::set<std::string> season_set;
  for (const TeamGame& tg : all) season_set.insert(tg.season);

  EventAnalysis analysis;
  analysis.event = event;
  analysis.seasons.assign(season_set.begin(), season_set.end());

  const std::string event_name{to_string(event)};
  auto fit_scope = [&](std::span<const TeamGame> rows,
                       const std::string& scope) {
    Encoded encoded = scope == "pooled"
                          ? encode_pooled(rows, event, encode_options)
                          : encode_yearly(rows, event, encode_options);
    ElasticNetSpec scoped = spec;
    scoped.seed = derive_seed(spec.seed, "cv:" + event_name + ":" + scope);
    try {
      return cross_validate(encoded.design, encoded.response, scoped, threads);
    } catch (const SolverError& err) {
      throw SolverError(err.lambda_index(), "event " + event_name +
                                                ", scope " + scope + ": " +
                                                err.what());
    }
  };

  for (const std::string& season : analysis.seasons) {
    std::vector<TeamGame> rows;
    for (const TeamGame& tg : all) {
      if (tg.season == season) rows.push_back(tg);
    }
    FitResult fit = fit_scope(rows, season);
    analysis.yearly.push_back(effect_table_from_fit(event, season, fit));
    analysis.yearly_fits.push_back(std::move(fit));
  }
  analysis.pooled_fit = fit_scope(all, "pooled");
  analysis.pooled = effect_table_from_fit(event, "pooled", analysis.pooled_fit);
  analysis.report =
      build_persistence_report(analysis.yearly, analysis.pooled, rule);
  return analysis;
}

namespace {

SummaryRow summarize_core(ModelEvent event, const PersistenceReport& report,
                          const std::map<std::string, EffectEntry>& yearly_asd,
                          const std::map<std::string, EffectEntry>& yearly_home) {
  SummaryRow row;
  row.event = event;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& [rink, entry] : report.entries) {
    if (entry.persistent) {
      ++row.persistent_re;
      lo = std::min(lo, entry.pooled_effect);
      hi = std::max(hi, entry.pooled_effect);
    }
    if (entry.homer_persistent) ++row.persistent_he;
  }
  row.re_range = row.persistent_re > 0 ? hi - lo : 0.0;

  auto mean_effect = [](const std::map<std::string, EffectEntry>& entries) {
    if (entries.empty()) return 1.0;
    double sum = 0.0;
    for (const auto& [season, entry] : entries) sum += entry.effect;
    return sum / static_cast<double>(entries.size());
  };
  row.avg_asd_effect = mean_effect(yearly_asd);
  row.avg_home_effect = mean_effect(yearly_home);
  return row;
}

std::map<std::string, EffectEntry> collect_yearly(
    const std::vector<EffectTable>& yearly,
    const std::map<std::string, EffectEntry> EffectTable::*field) {
  std::map<std::string, EffectEntry> out;
  for (const EffectTable& table : yearly) {
    const auto& entries = table.*field;
    auto it = entries.find(table.scope);
    if (it != entries.end()) out[table.scope] = it->second;
  }
  return out;
}

}  // namespace

SummaryRow summarize_event(const EventAnalysis& analysis) {
  return summarize_core(analysis.event, analysis.report,
                        collect_yearly(analysis.yearly, &EffectTable::asd_effect),
                        collect_yearly(analysis.yearly,
                                       &EffectTable::home_effect));
}

std::vector<SummaryRow> summarize(const std::vector<EventAnalysis>& analyses) {
  std::vector<SummaryRow> rows;
  rows.reserve(analyses.size());
  for (const EventAnalysis& analysis : analyses) {
    rows.push_back(summarize_event(analysis));
  }
  return rows;
}

SummaryRow summarize_input(const EventSummaryInput& input) {
  return summarize_core(input.event, input.report, input.yearly_asd,
                        input.yearly_home);
}

namespace {

void append_table_rows(CsvTable& csv, const EffectTable& table) {
  auto push = [&csv, &table](ColumnFamily family, const std::string& level,
                             const std::string& season, double coefficient,
                             double effect, bool nonzero) {
    csv.rows.push_back({table.scope, std::string(to_string(family)), level,
                        season, fmt_double(coefficient), fmt_double(effect),
                        nonzero ? "1" : "0"});
  };
  for (const auto& [season, effect] : table.mean_effect) {
    push(ColumnFamily::Intercept, "", season, std::log(effect), effect, true);
  }
  for (const auto& [season, e] : table.asd_effect) {
    push(ColumnFamily::Asd, "", season, e.coefficient, e.effect, e.nonzero);
  }
  for (const auto& [season, e] : table.home_effect) {
    push(ColumnFamily::Home, "", season, e.coefficient, e.effect, e.nonzero);
  }
  for (const auto& [rink, e] : table.rink_effect) {
    push(ColumnFamily::Rink, rink, "", e.coefficient, e.effect, e.nonzero);
  }
  for (const auto& [rink, e] : table.homer_effect) {
    push(ColumnFamily::HomeRink, rink, "", e.coefficient, e.effect, e.nonzero);
  }
}

nlohmann::json table_json(const EffectTable& table) {
  nlohmann::json j;
  j["scope"] = table.scope;
  j["seasons"] = table.seasons;
  j["mean_effect"] = table.mean_effect;
  auto entries_json = [](const std::map<std::string, EffectEntry>& entries) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, e] : entries) {
      out[key] = {{"coefficient", e.coefficient},
                  {"effect", e.effect},
                  {"nonzero", e.nonzero}};
    }
    return out;
  };
  j["asd"] = entries_json(table.asd_effect);
  j["home"] = entries_json(table.home_effect);
  j["rink"] = entries_json(table.rink_effect);
  j["homer"] = entries_json(table.homer_effect);
  return j;
}

EffectEntry entry_from_json(const nlohmann::json& j) {
  return {j.at("coefficient").get<double>(), j.at("effect").get<double>(),
          j.at("nonzero").get<bool>()};
}

}  // namespace

void write_effects_csv(std::ostream& out, const EventAnalysis& analysis) {
  CsvTable csv;
  csv.header = {"scope",  "family", "level",  "season",
                "coefficient", "effect", "nonzero"};
  for (const EffectTable& table : analysis.yearly) {
    append_table_rows(csv, table);
  }
  append_table_rows(csv, analysis.pooled);
  write_csv(out, csv);
}

std::string effects_json(const EventAnalysis& analysis) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["event"] = std::string(to_string(analysis.event));
  j["seasons"] = analysis.seasons;
  j["yearly"] = nlohmann::json::array();
  for (const EffectTable& table : analysis.yearly) {
    j["yearly"].push_back(table_json(table));
  }
  j["pooled"] = table_json(analysis.pooled);
  return j.dump(2) + "\n";
}

void write_persistence_csv(std::ostream& out,
                           const PersistenceReport& report) {
  CsvTable csv;
  csv.header = {"rink",
                "persistent",
                "direction",
                "pooled_effect",
                "homer_persistent",
                "homer_direction",
                "pooled_homer_effect"};
  for (const std::string& season : report.seasons) {
    csv.header.push_back("yearly_" + season);
  }
  auto dir_str = [](int d) {
    return std::string(d > 0 ? "above" : (d < 0 ? "below" : ""));
  };
  for (const auto& [rink, e] : report.entries) {
    std::vector<std::string> row = {rink,
                                    e.persistent ? "1" : "0",
                                    dir_str(e.direction),
                                    fmt_double(e.pooled_effect),
                                    e.homer_persistent ? "1" : "0",
                                    dir_str(e.homer_direction),
                                    fmt_double(e.pooled_homer_effect)};
    for (double effect : e.yearly_effects) {
      row.push_back(std::isnan(effect) ? "NA" : fmt_double(effect));
    }
    csv.rows.push_back(std::move(row));
  }
  write_csv(out, csv);
}

std::string persistence_json(const PersistenceReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["event"] = std::string(to_string(report.event));
  j["seasons"] = report.seasons;
  nlohmann::json rinks = nlohmann::json::object();
  for (const auto& [rink, e] : report.entries) {
    nlohmann::json yearly = nlohmann::json::array();
    for (double effect : e.yearly_effects) {
      if (std::isnan(effect)) {
        yearly.push_back(nullptr);
      } else {
        yearly.push_back(effect);
      }
    }
    rinks[rink] = {{"persistent", e.persistent},
                   {"direction", e.direction},
                   {"pooled_effect", e.pooled_effect},
                   {"yearly_effects", yearly},
                   {"homer_persistent", e.homer_persistent},
                   {"homer_direction", e.homer_direction},
                   {"pooled_homer_effect", e.pooled_homer_effect}};
  }
  j["rinks"] = rinks;
  return j.dump(2) + "\n";
}

PersistenceReport persistence_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PersistenceReport report;
  auto event = model_event_from(j.at("event").get<std::string>());
  if (!event) throw ValidationError("persistence report: unknown event");
  report.event = *event;
  report.seasons = j.at("seasons").get<std::vector<std::string>>();
  for (const auto& [rink, e] : j.at("rinks").items()) {
    PersistenceEntry entry;
    entry.rink = rink;
    entry.persistent = e.at("persistent").get<bool>();
    entry.direction = e.at("direction").get<int>();
    entry.pooled_effect = e.at("pooled_effect").get<double>();
    for (const auto& effect : e.at("yearly_effects")) {
      entry.yearly_effects.push_back(effect.is_null() ? kNaN
                                                      : effect.get<double>());
    }
    entry.homer_persistent = e.at("homer_persistent").get<bool>();
    entry.homer_direction = e.at("homer_direction").get<int>();
    entry.pooled_homer_effect = e.at("pooled_homer_effect").get<double>();
    report.entries[rink] = std::move(entry);
  }
  return report;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  CsvTable csv;
  csv.header = {"event",    "persistent_re", "persistent_he",
                "re_range", "avg_asd_effect", "avg_home_effect"};
  for (const SummaryRow& row : rows) {
    csv.rows.push_back({std::string(to_string(row.event)),
                        std::to_string(row.persistent_re),
                        std::to_string(row.persistent_he),
                        fmt_double(row.re_range),
                        fmt_double(row.avg_asd_effect),
                        fmt_double(row.avg_home_effect)});
  }
  write_csv(out, csv);
}

std::string summary_json(const std::vector<SummaryRow>& rows) {
  nlohmann::json j;
  j["schema_version"] = 1;
  nlohmann::json events = nlohmann::json::array();
  for (const SummaryRow& row : rows) {
    events.push_back({{"event", std::string(to_string(row.event))},
                      {"persistent_re", row.persistent_re},
                      {"persistent_he", row.persistent_he},
                      {"re_range", row.re_range},
                      {"avg_asd_effect", row.avg_asd_effect},
                      {"avg_home_effect", row.avg_home_effect}});
  }
  j["events"] = events;
  return j.dump(2) + "\n";
}

namespace {

void write_grid(std::ostream& out, ModelEvent event,
                const PersistenceReport& report) {
  CsvTable csv;
  csv.header = {"event", "rink", "season", "effect", "persistent_direction"};
  auto dir_str = [](int d) {
    return std::string(d > 0 ? "above" : (d < 0 ? "below" : ""));
  };
  for (const auto& [rink, e] : report.entries) {
    for (std::size_t i = 0;
         i < report.seasons.size() && i < e.yearly_effects.size(); ++i) {
      csv.rows.push_back({std::string(to_string(event)), rink,
                          report.seasons[i],
                          std::isnan(e.yearly_effects[i])
                              ? "NA"
                              : fmt_double(e.yearly_effects[i]),
                          dir_str(e.persistent ? e.direction : 0)});
    }
  }
  write_csv(out, csv);
}

}  // namespace

void write_effect_grid_csv(std::ostream& out, const EventAnalysis& analysis) {
  write_grid(out, analysis.event, analysis.report);
}

void write_effect_grid_csv(std::ostream& out, const EventSummaryInput& input) {
  write_grid(out, input.event, input.report);
}

EventSummaryInput summary_input_from_json(const std::string& effects_text,
                                          const std::string& persistence_text) {
  EventSummaryInput input;
  input.report = persistence_from_json(persistence_text);
  input.event = input.report.event;
  input.seasons = input.report.seasons;
  nlohmann::json j = nlohmann::json::parse(effects_text);
  for (const auto& table : j.at("yearly")) {
    const std::string scope = table.at("scope").get<std::string>();
    const auto& asd = table.at("asd");
    if (asd.contains(scope)) {
      input.yearly_asd[scope] = entry_from_json(asd.at(scope));
    }
    const auto& home = table.at("home");
    if (home.contains(scope)) {
      input.yearly_home[scope] = entry_from_json(home.at(scope));
    }
  }
  return input;
}

}  // namespace rinkfx
