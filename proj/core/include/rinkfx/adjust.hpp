#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rinkfx/effects.hpp"
#include "rinkfx/events.hpp"
#include "rinkfx/team_game.hpp"

namespace rinkfx {

/// Weight applied to one recorded event at one rink, per event for a
/// (rink, event) with a persistent effect: 1/effect for away-team events and
/// 1/(effect * homer_effect) for home-team events where a persistent homer
/// effect exists; 1 everywhere else.
double event_weight(const PersistenceReport& report, const std::string& rink,
                    bool is_home);

/// Per (rink, event, side) multipliers backed by persistence reports.
/// Lookups for rinks absent from every report throw ValidationError.
class AdjustmentWeights {
 public:
  static AdjustmentWeights from_reports(
      std::span<const PersistenceReport> reports);

  /// Uniform weight for every rink/event/side; for ratio-invariance checks.
  static AdjustmentWeights uniform(const std::set<std::string>& rinks,
                                   double weight);

  double weight(const std::string& rink, ModelEvent event,
                bool is_home) const;

  const std::set<std::string>& known_rinks() const { return rinks_; }

  void set(const std::string& rink, ModelEvent event, double away_weight,
           double home_weight);

 private:
  struct SideWeights {
    double away = 1.0;
    double home = 1.0;
  };
  std::map<std::string, std::array<SideWeights, 9>> weights_;
  std::set<std::string> rinks_;
};

struct AdjustedCountRow {
  std::string player;
  std::string teams;  // distinct event teams, '/'-joined for traded players
  double adjusted = 0.0;
  long raw = 0;
  double differential = 0.0;  // adjusted - raw
};

struct AdjustStats {
  std::size_t events_counted = 0;
  std::size_t events_skipped_no_player = 0;
};

/// Reweight one season's recorded events of one primitive type and rank
/// players by adjusted count (descending, ties by name). Only NEN5v5 events
/// in periods 1-3 count, matching the fitted rates. Events without player
/// attribution are skipped and counted in `stats`.
std::vector<AdjustedCountRow> adjust_player_counts(
    const std::vector<GameLog>& games, const AdjustmentWeights& weights,
    const std::string& season, ModelEvent event, const RinkMap& rinks = {},
    AdjustStats* stats = nullptr);

struct CorsiPctRow {
  std::string team;
  double raw_pct = 0.0;
  double adjusted_pct = 0.0;
};

/// Raw and rink-adjusted CORSI percentage per team, sorted by raw percentage
/// descending. Every CORSI event of a game carries its rink's weight for the
/// side that recorded it, so numerator and denominator are both affected.
std::vector<CorsiPctRow> adjust_corsi_pct(std::span<const TeamGame> team_games,
                                          const AdjustmentWeights& weights,
                                          const std::string& season);

void write_adjusted_counts_csv(std::ostream& out,
                               const std::vector<AdjustedCountRow>& rows);
std::string adjusted_counts_json(const std::vector<AdjustedCountRow>& rows,
                                 ModelEvent event, const std::string& season,
                                 const AdjustStats& stats);
void write_corsi_pct_csv(std::ostream& out,
                         const std::vector<CorsiPctRow>& rows);
std::string corsi_pct_json(const std::vector<CorsiPctRow>& rows,
                           const std::string& season);

}  // namespace rinkfx
