#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rinkfx/types.hpp"

namespace rinkfx {

/// One recorded play-by-play row.
struct RawEvent {
  std::string season;
  std::string game_id;
  int period = 0;
  int elapsed_seconds = 0;  // seconds since game start
  EventType type = EventType::Other;
  std::string event_team;  // empty only for FAC/OTHER
  std::string home_team;
  std::string away_team;
  int home_score = 0;
  int away_score = 0;
  int home_skaters = 0;
  int away_skaters = 0;
  bool home_goalie_on = false;
  bool away_goalie_on = false;
  std::string player;  // optional attribution column, may be empty

  friend bool operator==(const RawEvent&, const RawEvent&) = default;
};

/// All events of one game, sorted by (period, elapsed_seconds).
struct GameLog {
  std::string season;
  std::string game_id;
  std::string home_team;
  std::string away_team;
  std::vector<RawEvent> events;
};

/// An event together with the time until the next one. The last event of
/// period 3 stretches to second 3600.
struct EventInterval {
  RawEvent event;
  double length_seconds = 0.0;
};

/// Per-run ingest outcome: rejected games and non-fatal oddities.
struct IngestDiagnostics {
  struct RejectedGame {
    std::string season;
    std::string game_id;
    std::string reason;
  };
  std::vector<RejectedGame> rejected;
  std::vector<std::string> warnings;
  std::size_t rows_parsed = 0;
  std::size_t games_accepted = 0;
};

inline constexpr std::string_view kPbpHeader =
    "season,game_id,period,elapsed_seconds,event_type,event_team,home_team,"
    "away_team,home_score,away_score,home_skaters,away_skaters,"
    "home_goalie_on,away_goalie_on";

/// Parse the delimited play-by-play schema (kPbpHeader, optionally followed
/// by a trailing `player` column). Rows are grouped by (season, game_id) and
/// sorted by (period, elapsed_seconds); groups come back sorted by key.
/// Games whose events all lie in periods > 3 are dropped and reported through
/// `diag`. Malformed rows, field-range violations and exact duplicate rows
/// within a game throw ParseError.
std::vector<GameLog> parse_pbp(std::istream& in,
                               IngestDiagnostics* diag = nullptr);

/// Inverse of parse_pbp. Emits the player column when any event carries one.
void serialize_pbp(std::ostream& out, const std::vector<GameLog>& games);

/// Interval lengths for the regulation portion (periods 1-3) of one game.
/// Events in periods > 3 are discarded. Throws ValidationError on
/// out-of-order timestamps.
std::vector<EventInterval> compute_intervals(
    const std::vector<RawEvent>& events);

/// Keep only intervals recorded at 5-on-5 with both goalies on, periods 1-3.
/// Idempotent; the empty result is legal.
std::vector<EventInterval> filter_nen5v5(std::vector<EventInterval> intervals);

/// Sum of interval lengths.
double total_seconds(const std::vector<EventInterval>& intervals);

}  // namespace rinkfx
