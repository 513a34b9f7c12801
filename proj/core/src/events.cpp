#include "rinkfx/events.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "rinkfx/csv.hpp"
#include "rinkfx/errors.hpp"

namespace rinkfx {

namespace {

constexpr int kRegulationSeconds = 3600;
constexpr int kPeriodSeconds = 1200;

const std::vector<std::string> kColumns = {
    "season",        "game_id",      "period",       "elapsed_seconds",
    "event_type",    "event_team",   "home_team",    "away_team",
    "home_score",    "away_score",   "home_skaters", "away_skaters",
    "home_goalie_on", "away_goalie_on"};

int parse_int(std::size_t line, const std::string& field,
              const std::string& text, int lo, int hi) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, field, "not an integer: '" + text + "'");
  }
  if (value < lo || value > hi) {
    throw ParseError(line, field,
                     "value " + text + " outside [" + std::to_string(lo) +
                         ", " + std::to_string(hi) + "]");
  }
  return value;
}

bool parse_bool01(std::size_t line, const std::string& field,
                  const std::string& text) {
  if (text == "1") return true;
  if (text == "0") return false;
  throw ParseError(line, field, "expected 0 or 1, got '" + text + "'");
}

RawEvent parse_row(std::size_t line, const std::vector<std::string>& f,
                   bool has_player) {
  RawEvent e;
  e.season = f[0];
  e.game_id = f[1];
  if (e.season.empty()) throw ParseError(line, "season", "empty");
  if (e.game_id.empty()) throw ParseError(line, "game_id", "empty");
  e.period = parse_int(line, "period", f[2], 1, 10);
  const int elapsed_hi = e.period <= 3 ? kRegulationSeconds : 24 * 3600;
  e.elapsed_seconds =
      parse_int(line, "elapsed_seconds", f[3], 0, elapsed_hi);
  auto type = event_type_from(f[4]);
  if (!type) throw ParseError(line, "event_type", "unknown type '" + f[4] + "'");
  e.type = *type;
  e.event_team = f[5];
  e.home_team = f[6];
  e.away_team = f[7];
  if (e.home_team.empty()) throw ParseError(line, "home_team", "empty");
  if (e.away_team.empty()) throw ParseError(line, "away_team", "empty");
  if (e.home_team == e.away_team) {
    throw ParseError(line, "away_team", "equals home_team");
  }
  e.home_score = parse_int(line, "home_score", f[8], 0, 99);
  e.away_score = parse_int(line, "away_score", f[9], 0, 99);
  e.home_skaters = parse_int(line, "home_skaters", f[10], 3, 6);
  e.away_skaters = parse_int(line, "away_skaters", f[11], 3, 6);
  e.home_goalie_on = parse_bool01(line, "home_goalie_on", f[12]);
  e.away_goalie_on = parse_bool01(line, "away_goalie_on", f[13]);
  if (has_player) e.player = f[14];

  const bool attributed =
      e.type != EventType::Faceoff && e.type != EventType::Other;
  if (attributed) {
    if (e.event_team != e.home_team && e.event_team != e.away_team) {
      throw ParseError(line, "event_team",
                       "'" + e.event_team + "' is neither home nor away");
    }
  } else if (!e.event_team.empty() && e.event_team != e.home_team &&
             e.event_team != e.away_team) {
    throw ParseError(line, "event_team",
                     "'" + e.event_team + "' is neither home nor away");
  }
  return e;
}

}  // namespace

std::vector<GameLog> parse_pbp(std::istream& in, IngestDiagnostics* diag) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(1, "header", "missing header row");
  }
  auto header = split_csv_line(line);
  bool has_player = false;
  if (header.size() == kColumns.size() + 1 && header.back() == "player") {
    has_player = true;
  } else if (header.size() != kColumns.size()) {
    throw ParseError(1, "header",
                     "expected " + std::to_string(kColumns.size()) +
                         " columns, got " + std::to_string(header.size()));
  }
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (header[i] != kColumns[i]) {
      throw ParseError(1, "header",
                       "column " + std::to_string(i + 1) + " is '" +
                           header[i] + "', expected '" + kColumns[i] + "'");
    }
  }

  struct PendingGame {
    GameLog log;
    std::vector<std::size_t> lines;  // source line per event
  };
  std::map<std::pair<std::string, std::string>, PendingGame> games;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    auto fields = split_csv_line(line);
    const std::size_t want = kColumns.size() + (has_player ? 1 : 0);
    if (fields.size() != want) {
      throw ParseError(line_no, "row",
                       "expected " + std::to_string(want) + " fields, got " +
                           std::to_string(fields.size()));
    }
    RawEvent event = parse_row(line_no, fields, has_player);
    ++rows;
    auto key = std::make_pair(event.season, event.game_id);
    auto& game = games[key];
    if (game.log.events.empty()) {
      game.log.season = event.season;
      game.log.game_id = event.game_id;
      game.log.home_team = event.home_team;
      game.log.away_team = event.away_team;
    } else if (game.log.home_team != event.home_team ||
               game.log.away_team != event.away_team) {
      throw ParseError(line_no, "home_team",
                       "game " + event.game_id +
                           " changes home/away teams mid-game");
    }
    game.log.events.push_back(std::move(event));
    game.lines.push_back(line_no);
  }

  std::vector<GameLog> out;
  out.reserve(games.size());
  for (auto& [key, game] : games) {
    auto& events = game.log.events;
    std::vector<std::size_t> order(events.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&events](std::size_t a, std::size_t b) {
                       return std::make_pair(events[a].period,
                                             events[a].elapsed_seconds) <
                              std::make_pair(events[b].period,
                                             events[b].elapsed_seconds);
                     });
    std::vector<RawEvent> sorted;
    sorted.reserve(events.size());
    for (std::size_t i : order) sorted.push_back(std::move(events[i]));
    // An exact duplicate row is a recording collision, not a timestamp tie.
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] == sorted[i - 1]) {
        throw ParseError(game.lines[order[i]], "row",
                         "duplicate event row in game " + game.log.game_id);
      }
    }
    events = std::move(sorted);

    const bool any_regulation =
        std::any_of(events.begin(), events.end(),
                    [](const RawEvent& e) { return e.period <= 3; });
    if (!any_regulation) {
      if (diag) {
        diag->rejected.push_back({game.log.season, game.log.game_id,
                                  "events only in periods > 3"});
      }
      continue;
    }
    if (diag) {
      for (const RawEvent& e : events) {
        if (e.period > 3) continue;
        const int lo = (e.period - 1) * kPeriodSeconds;
        const int hi = e.period * kPeriodSeconds;
        if (e.elapsed_seconds < lo || e.elapsed_seconds > hi) {
          diag->warnings.push_back(
              "game " + e.game_id + ": event at t=" +
              std::to_string(e.elapsed_seconds) +
              " attributed to period " + std::to_string(e.period) +
              " outside its clock range");
        }
      }
    }
    out.push_back(std::move(game.log));
  }
  if (diag) {
    diag->rows_parsed += rows;
    diag->games_accepted += out.size();
  }
  return out;
}

void serialize_pbp(std::ostream& out, const std::vector<GameLog>& games) {
  bool any_player = false;
  for (const auto& game : games) {
    for (const auto& e : game.events) {
      if (!e.player.empty()) {
        any_player = true;
        break;
      }
    }
    if (any_player) break;
  }
  out << kPbpHeader;
  if (any_player) out << ",player";
  out << '\n';
  for (const auto& game : games) {
    for (const auto& e : game.events) {
      out << e.season << ',' << e.game_id << ',' << e.period << ','
          << e.elapsed_seconds << ',' << to_string(e.type) << ','
          << e.event_team << ',' << e.home_team << ',' << e.away_team << ','
          << e.home_score << ',' << e.away_score << ',' << e.home_skaters
          << ',' << e.away_skaters << ',' << (e.home_goalie_on ? 1 : 0) << ','
          << (e.away_goalie_on ? 1 : 0);
      if (any_player) out << ',' << e.player;
      out << '\n';
    }
  }
}

std::vector<EventInterval> compute_intervals(
    const std::vector<RawEvent>& events) {
  std::vector<const RawEvent*> regulation;
  regulation.reserve(events.size());
  for (const RawEvent& e : events) {
    if (e.period <= 3) regulation.push_back(&e);
  }
  std::vector<EventInterval> intervals;
  intervals.reserve(regulation.size());
  for (std::size_t i = 0; i < regulation.size(); ++i) {
    const RawEvent& cur = *regulation[i];
    if (i + 1 < regulation.size()) {
      const RawEvent& next = *regulation[i + 1];
      if (next.elapsed_seconds < cur.elapsed_seconds) {
        throw ValidationError(
            "game " + cur.game_id + ": out-of-order timestamps (" +
            std::to_string(cur.elapsed_seconds) + " then " +
            std::to_string(next.elapsed_seconds) + ")");
      }
      intervals.push_back(
          {cur, static_cast<double>(next.elapsed_seconds -
                                    cur.elapsed_seconds)});
    } else {
      intervals.push_back(
          {cur, static_cast<double>(kRegulationSeconds - cur.elapsed_seconds)});
    }
  }
  return intervals;
}

std::vector<EventInterval> filter_nen5v5(
    std::vector<EventInterval> intervals) {
  std::erase_if(intervals, [](const EventInterval& iv) {
    const RawEvent& e = iv.event;
    return e.period > 3 || e.home_skaters != 5 || e.away_skaters != 5 ||
           !e.home_goalie_on || !e.away_goalie_on;
  });
  return intervals;
}

double total_seconds(const std::vector<EventInterval>& intervals) {
  double sum = 0.0;
  for (const auto& iv : intervals) sum += iv.length_seconds;
  return sum;
}

}  // namespace rinkfx
