#include "rinkfx/team_game.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "rinkfx/csv.hpp"
#include "rinkfx/errors.hpp"

namespace rinkfx {

namespace {

constexpr double kRegulationSeconds = 3600.0;

}  // namespace

void RinkMap::add(const std::string& season, const std::string& team,
                  const std::string& rink) {
  map_[{season, team}] = rink;
}

std::string RinkMap::rink_for(const std::string& season,
                              const std::string& team) const {
  auto it = map_.find({season, team});
  return it == map_.end() ? team : it->second;
}

RinkMap RinkMap::from_csv_file(const std::string& path) {
  CsvTable table = read_csv_file(path);
  if (table.header != std::vector<std::string>{"season", "team", "rink"}) {
    throw ValidationError(path + ": rink map header must be season,team,rink");
  }
  RinkMap map;
  for (const auto& row : table.rows) map.add(row[0], row[1], row[2]);
  return map;
}

double prorate(double count, double nen5v5_seconds) {
  if (!(nen5v5_seconds > 0.0)) {
    throw ValidationError("prorate: nen5v5_seconds must be positive");
  }
  // Multiply before dividing: 14 events in 3000 s gives exactly 16.8.
  return count * kRegulationSeconds / nen5v5_seconds;
}

double compute_asd(const std::vector<EventInterval>& full_game,
                   const std::string& orientation_team) {
  if (full_game.empty()) {
    throw ValidationError("compute_asd: no intervals");
  }
  const RawEvent& first = full_game.front().event;
  double sum = 0.0;
  double seconds = 0.0;
  for (const auto& iv : full_game) {
    sum += (iv.event.home_score - iv.event.away_score) * iv.length_seconds;
    seconds += iv.length_seconds;
  }
  if (std::abs(seconds - kRegulationSeconds) > 1e-6) {
    throw ValidationError("compute_asd: intervals sum to " +
                          fmt_double(seconds) + ", expected 3600");
  }
  double asd = sum / kRegulationSeconds;
  if (orientation_team == first.home_team) return asd;
  if (orientation_team == first.away_team) return -asd;
  throw ValidationError("compute_asd: orientation team '" + orientation_team +
                        "' is neither home nor away");
}

std::pair<TeamGame, TeamGame> build_team_games(const GameLog& game,
                                               const TeamGameOptions& options) {
  auto intervals = compute_intervals(game.events);
  if (std::abs(total_seconds(intervals) - kRegulationSeconds) > 1e-6) {
    throw ValidationError("game " + game.game_id +
                          ": regulation coverage is short (intervals sum to " +
                          fmt_double(total_seconds(intervals)) + ")");
  }
  auto nen = filter_nen5v5(intervals);
  const double nen_seconds = total_seconds(nen);
  if (!(nen_seconds > 0.0)) {
    throw ValidationError("game " + game.game_id + ": zero NEN5v5 seconds");
  }

  TeamGame home;
  home.season = game.season;
  home.game_id = game.game_id;
  home.for_team = game.home_team;
  home.against_team = game.away_team;
  home.rink = options.rinks.rink_for(game.season, game.home_team);
  home.is_home = true;
  home.nen5v5_seconds = nen_seconds;
  TeamGame away = home;
  away.for_team = game.away_team;
  away.against_team = game.home_team;
  away.is_home = false;

  for (const auto& iv : nen) {
    const RawEvent& e = iv.event;
    if (e.type == EventType::Faceoff || e.type == EventType::Other) continue;
    if (e.event_team == game.home_team) {
      ++home.count_of(e.type);
    } else if (e.event_team == game.away_team) {
      ++away.count_of(e.type);
    }
  }

  const double asd_home = compute_asd(intervals, game.home_team);
  home.asd = asd_home;
  away.asd =
      options.asd_orientation == AsdOrientation::ForTeam ? -asd_home : asd_home;

  auto fill_rates = [&](TeamGame& row, const TeamGame& other) {
    for (ModelEvent event : kPrimitiveModelEvents) {
      row.rate_of(event) = prorate(row.count_of(to_event_type(event)),
                                   nen_seconds);
    }
    const double goal_term = options.goal_term == GoalTerm::Raw
                                 ? static_cast<double>(row.goal_count())
                                 : prorate(row.goal_count(), nen_seconds);
    row.rate_of(ModelEvent::Corsi) = row.rate_of(ModelEvent::Shot) +
                                     row.rate_of(ModelEvent::Miss) +
                                     row.rate_of(ModelEvent::Block) + goal_term;
    row.rate_of(ModelEvent::Fenwick) = row.rate_of(ModelEvent::Shot) +
                                       row.rate_of(ModelEvent::Miss) +
                                       goal_term;
    // A turnover: a TAKE by the for-team or a GIVE by the against-team.
    row.rate_of(ModelEvent::Turn) =
        prorate(row.count_of(EventType::Take) + other.count_of(EventType::Give),
                nen_seconds);
  };
  fill_rates(home, away);
  fill_rates(away, home);
  return {home, away};
}

std::vector<TeamGame> build_all_team_games(const std::vector<GameLog>& games,
                                           const TeamGameOptions& options,
                                           IngestDiagnostics* diag) {
  std::vector<TeamGame> rows;
  rows.reserve(games.size() * 2);
  for (const GameLog& game : games) {
    if (options.exclude_games.contains(game.game_id)) {
      if (diag) {
        diag->rejected.push_back(
            {game.season, game.game_id, "excluded by configuration"});
      }
      continue;
    }
    try {
      auto [home, away] = build_team_games(game, options);
      rows.push_back(std::move(home));
      rows.push_back(std::move(away));
    } catch (const ValidationError& err) {
      if (diag) {
        diag->rejected.push_back({game.season, game.game_id, err.what()});
      }
    }
  }
  return rows;
}

namespace {

std::vector<std::string> team_game_header() {
  std::vector<std::string> header = {"season",   "game_id",
                                     "for_team", "against_team",
                                     "is_home",  "rink",
                                     "asd",      "nen5v5_seconds"};
  for (EventType type : {EventType::Shot, EventType::Miss, EventType::Block,
                         EventType::Hit, EventType::Give, EventType::Take,
                         EventType::Goal}) {
    header.push_back("count_" + std::string(to_string(type)));
  }
  for (ModelEvent event : kAllModelEvents) {
    header.push_back("rate_" + std::string(to_string(event)));
  }
  return header;
}

}  // namespace

void write_team_games_csv(std::ostream& out, const std::vector<TeamGame>& rows) {
  CsvTable table;
  table.header = team_game_header();
  table.rows.reserve(rows.size());
  for (const TeamGame& tg : rows) {
    std::vector<std::string> row = {tg.season,
                                    tg.game_id,
                                    tg.for_team,
                                    tg.against_team,
                                    tg.is_home ? "1" : "0",
                                    tg.rink,
                                    fmt_double(tg.asd),
                                    fmt_double(tg.nen5v5_seconds)};
    for (int c : tg.count) row.push_back(std::to_string(c));
    for (double r : tg.rate) row.push_back(fmt_double(r));
    table.rows.push_back(std::move(row));
  }
  write_csv(out, table);
}

std::vector<TeamGame> read_team_games_csv(std::istream& in) {
  CsvTable table = read_csv(in);
  if (table.header != team_game_header()) {
    throw ValidationError("team-game table header mismatch");
  }
  std::vector<TeamGame> rows;
  rows.reserve(table.rows.size());
  std::size_t line = 1;
  for (const auto& fields : table.rows) {
    ++line;
    TeamGame tg;
    tg.season = fields[0];
    tg.game_id = fields[1];
    tg.for_team = fields[2];
    tg.against_team = fields[3];
    if (fields[4] != "0" && fields[4] != "1") {
      throw ParseError(line, "is_home", "expected 0 or 1");
    }
    tg.is_home = fields[4] == "1";
    tg.rink = fields[5];
    try {
      tg.asd = std::stod(fields[6]);
      tg.nen5v5_seconds = std::stod(fields[7]);
      for (int i = 0; i < 7; ++i) tg.count[i] = std::stoi(fields[8 + i]);
      for (int i = 0; i < kNumModelEvents; ++i) {
        tg.rate[i] = std::stod(fields[15 + i]);
      }
    } catch (const std::exception&) {
      throw ParseError(line, "numeric", "unparsable numeric field");
    }
    rows.push_back(std::move(tg));
  }
  return rows;
}

std::vector<std::string> seasons_of(const std::vector<TeamGame>& rows) {
  std::set<std::string> seasons;
  for (const TeamGame& tg : rows) seasons.insert(tg.season);
  return {seasons.begin(), seasons.end()};
}

}  // namespace rinkfx
