#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rinkfx/events.hpp"
#include "rinkfx/types.hpp"

namespace rinkfx {

/// Sign convention for the stored average score differential.
/// ForTeam: each row's ASD is oriented to its for_team (away rows negated).
/// Home: both rows carry the home-minus-away value.
enum class AsdOrientation { ForTeam, Home };

/// How goals enter the derived CORSI/FENWICK rates: as the raw NEN5v5 goal
/// count, or prorated like the recorded events.
enum class GoalTerm { Raw, Prorated };

/// Season-scoped franchise -> arena mapping. Teams without an entry keep
/// their own id as the rink id, so relocations can be split per arena.
class RinkMap {
 public:
  RinkMap() = default;

  void add(const std::string& season, const std::string& team,
           const std::string& rink);
  std::string rink_for(const std::string& season,
                       const std::string& team) const;

  /// Reads a `season,team,rink` table (header required).
  static RinkMap from_csv_file(const std::string& path);

 private:
  std::map<std::pair<std::string, std::string>, std::string> map_;
};

/// One team's side of one game: prorated NEN5v5 event rates, the average
/// score differential and the hosting rink.
struct TeamGame {
  std::string season;
  std::string game_id;
  std::string for_team;
  std::string against_team;
  std::string rink;
  bool is_home = false;
  double asd = 0.0;
  double nen5v5_seconds = 0.0;
  std::array<double, 9> rate{};  // indexed by ModelEvent
  std::array<int, 7> count{};    // six primitives, then GOAL

  double rate_of(ModelEvent event) const {
    return rate[static_cast<int>(event)];
  }
  double& rate_of(ModelEvent event) { return rate[static_cast<int>(event)]; }
  int count_of(EventType type) const {
    return count[static_cast<int>(type)];
  }
  int& count_of(EventType type) { return count[static_cast<int>(type)]; }
  int goal_count() const { return count[6]; }

  int corsi_count() const {
    return count_of(EventType::Shot) + count_of(EventType::Miss) +
           count_of(EventType::Block) + goal_count();
  }
  int fenwick_count() const {
    return count_of(EventType::Shot) + count_of(EventType::Miss) +
           goal_count();
  }
};

struct TeamGameOptions {
  AsdOrientation asd_orientation = AsdOrientation::ForTeam;
  GoalTerm goal_term = GoalTerm::Raw;
  RinkMap rinks;
  std::set<std::string> exclude_games;  // game ids dropped at ingest
};

/// count / nen5v5_seconds * 3600. Throws ValidationError when
/// nen5v5_seconds <= 0.
double prorate(double count, double nen5v5_seconds);

/// Time-weighted mean score lead over the full regulation game (all
/// strengths), oriented to `orientation_team`. Intervals must sum to 3600.
double compute_asd(const std::vector<EventInterval>& full_game,
                   const std::string& orientation_team);

/// Aggregate one game into its two team-game rows. Throws ValidationError
/// for games with short regulation coverage or zero NEN5v5 seconds.
std::pair<TeamGame, TeamGame> build_team_games(
    const GameLog& game, const TeamGameOptions& options = {});

/// Whole-corpus aggregation. Games that fail build_team_games are dropped
/// and reported through `diag` instead of aborting the run.
std::vector<TeamGame> build_all_team_games(const std::vector<GameLog>& games,
                                           const TeamGameOptions& options = {},
                                           IngestDiagnostics* diag = nullptr);

void write_team_games_csv(std::ostream& out,
                          const std::vector<TeamGame>& rows);
std::vector<TeamGame> read_team_games_csv(std::istream& in);

/// Distinct seasons present, sorted.
std::vector<std::string> seasons_of(const std::vector<TeamGame>& rows);

}  // namespace rinkfx
