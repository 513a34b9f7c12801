#include "rinkfx/adjust.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <json.hpp>

#include "rinkfx/csv.hpp"
#include "rinkfx/errors.hpp"

namespace rinkfx {

double event_weight(const PersistenceReport& report, const std::string& rink,
                    bool is_home) {
  auto it = report.entries.find(rink);
  if (it == report.entries.end()) {
    throw ValidationError("event_weight: unknown rink '" + rink + "'");
  }
  const PersistenceEntry& entry = it->second;
  if (!entry.persistent) return 1.0;
  double denom = entry.pooled_effect;
  if (is_home && entry.homer_persistent) denom *= entry.pooled_homer_effect;
  return 1.0 / denom;
}

AdjustmentWeights AdjustmentWeights::from_reports(
    std::span<const PersistenceReport> reports) {
  AdjustmentWeights weights;
  for (const PersistenceReport& report : reports) {
    const int e = static_cast<int>(report.event);
    for (const auto& [rink, entry] : report.entries) {
      weights.rinks_.insert(rink);
      auto& side = weights.weights_[rink][static_cast<std::size_t>(e)];
      side.away = event_weight(report, rink, /*is_home=*/false);
      side.home = event_weight(report, rink, /*is_home=*/true);
    }
  }
  return weights;
}

AdjustmentWeights AdjustmentWeights::uniform(const std::set<std::string>& rinks,
                                             double weight) {
  AdjustmentWeights weights;
  weights.rinks_ = rinks;
  for (const std::string& rink : rinks) {
    for (auto& side : weights.weights_[rink]) {
      side.away = weight;
      side.home = weight;
    }
  }
  return weights;
}

void AdjustmentWeights::set(const std::string& rink, ModelEvent event,
                            double away_weight, double home_weight) {
  rinks_.insert(rink);
  auto& side = weights_[rink][static_cast<std::size_t>(event)];
  side.away = away_weight;
  side.home = home_weight;
}

double AdjustmentWeights::weight(const std::string& rink, ModelEvent event,
                                 bool is_home) const {
  if (!rinks_.contains(rink)) {
    throw ValidationError("adjustment weight: unknown rink '" + rink + "'");
  }
  auto it = weights_.find(rink);
  if (it == weights_.end()) return 1.0;
  const SideWeights& side = it->second[static_cast<std::size_t>(event)];
  return is_home ? side.home : side.away;
}

std::vector<AdjustedCountRow> adjust_player_counts(
    const std::vector<GameLog>& games, const AdjustmentWeights& weights,
    const std::string& season, ModelEvent event, const RinkMap& rinks,
    AdjustStats* stats) {
  if (!is_primitive(event)) {
    throw ValidationError(
        "adjust_player_counts: only recorded events carry player attribution");
  }
  const EventType wanted = to_event_type(event);

  struct Tally {
    double adjusted = 0.0;
    long raw = 0;
    std::set<std::string> teams;
  };
  std::map<std::string, Tally> players;

  for (const GameLog& game : games) {
    if (game.season != season) continue;
    const std::string rink = rinks.rink_for(game.season, game.home_team);
    for (const EventInterval& iv : filter_nen5v5(compute_intervals(game.events))) {
      const RawEvent& e = iv.event;
      if (e.type != wanted) continue;
      if (e.player.empty()) {
        if (stats) ++stats->events_skipped_no_player;
        continue;
      }
      const bool is_home = e.event_team == game.home_team;
      const double w = weights.weight(rink, event, is_home);
      Tally& tally = players[e.player];
      tally.adjusted += w;
      tally.raw += 1;
      tally.teams.insert(e.event_team);
      if (stats) ++stats->events_counted;
    }
  }

  std::vector<AdjustedCountRow> rows;
  rows.reserve(players.size());
  for (const auto& [player, tally] : players) {
    std::string teams;
    for (const std::string& team : tally.teams) {
      if (!teams.empty()) teams += '/';
      teams += team;
    }
    rows.push_back({player, teams, tally.adjusted, tally.raw,
                    tally.adjusted - static_cast<double>(tally.raw)});
  }
  std::sort(rows.begin(), rows.end(),
            [](const AdjustedCountRow& a, const AdjustedCountRow& b) {
              if (a.adjusted != b.adjusted) return a.adjusted > b.adjusted;
              return a.player < b.player;
            });
  return rows;
}

std::vector<CorsiPctRow> adjust_corsi_pct(std::span<const TeamGame> team_games,
                                          const AdjustmentWeights& weights,
                                          const std::string& season) {
  struct Totals {
    double raw_for = 0, raw_all = 0;
    double adj_for = 0, adj_all = 0;
  };
  std::map<std::string, Totals> teams;
  for (const TeamGame& tg : team_games) {
    if (tg.season != season) continue;
    const double count = static_cast<double>(tg.corsi_count());
    const double weighted =
        count * weights.weight(tg.rink, ModelEvent::Corsi, tg.is_home);
    // This row's events are CORSI-for its team and CORSI-against the
    // opponent; both sides' denominators see them.
    teams[tg.for_team].raw_for += count;
    teams[tg.for_team].raw_all += count;
    teams[tg.against_team].raw_all += count;
    teams[tg.for_team].adj_for += weighted;
    teams[tg.for_team].adj_all += weighted;
    teams[tg.against_team].adj_all += weighted;
  }
  std::vector<CorsiPctRow> rows;
  rows.reserve(teams.size());
  for (const auto& [team, t] : teams) {
    CorsiPctRow row;
    row.team = team;
    row.raw_pct = t.raw_all > 0 ? t.raw_for / t.raw_all : 0.0;
    row.adjusted_pct = t.adj_all > 0 ? t.adj_for / t.adj_all : 0.0;
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(),
            [](const CorsiPctRow& a, const CorsiPctRow& b) {
              if (a.raw_pct != b.raw_pct) return a.raw_pct > b.raw_pct;
              return a.team < b.team;
            });
  return rows;
}

void write_adjusted_counts_csv(std::ostream& out,
                               const std::vector<AdjustedCountRow>& rows) {
  CsvTable csv;
  csv.header = {"player", "team", "adjusted", "raw", "differential"};
  for (const AdjustedCountRow& row : rows) {
    csv.rows.push_back({row.player, row.teams, fmt_fixed(row.adjusted, 1),
                        std::to_string(row.raw),
                        fmt_fixed(row.differential, 1)});
  }
  write_csv(out, csv);
}

std::string adjusted_counts_json(const std::vector<AdjustedCountRow>& rows,
                                 ModelEvent event, const std::string& season,
                                 const AdjustStats& stats) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["event"] = std::string(to_string(event));
  j["season"] = season;
  j["events_counted"] = stats.events_counted;
  j["events_skipped_no_player"] = stats.events_skipped_no_player;
  nlohmann::json players = nlohmann::json::array();
  for (const AdjustedCountRow& row : rows) {
    players.push_back({{"player", row.player},
                       {"team", row.teams},
                       {"adjusted", row.adjusted},
                       {"raw", row.raw},
                       {"differential", row.differential}});
  }
  j["players"] = players;
  return j.dump(2) + "\n";
}

void write_corsi_pct_csv(std::ostream& out,
                         const std::vector<CorsiPctRow>& rows) {
  CsvTable csv;
  csv.header = {"team", "corsi_pct", "corsi_pct_adjusted"};
  for (const CorsiPctRow& row : rows) {
    csv.rows.push_back({row.team, fmt_fixed(row.raw_pct, 4),
                        fmt_fixed(row.adjusted_pct, 4)});
  }
  write_csv(out, csv);
}

std::string corsi_pct_json(const std::vector<CorsiPctRow>& rows,
                           const std::string& season) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["season"] = season;
  nlohmann::json teams = nlohmann::json::array();
  for (const CorsiPctRow& row : rows) {
    teams.push_back({{"team", row.team},
                     {"corsi_pct", row.raw_pct},
                     {"corsi_pct_adjusted", row.adjusted_pct}});
  }
  j["teams"] = teams;
  return j.dump(2) + "\n";
}

}  // namespace rinkfx
