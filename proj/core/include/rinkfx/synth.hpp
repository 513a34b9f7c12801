#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rinkfx/effects.hpp"
#include "rinkfx/events.hpp"
#include "rinkfx/team_game.hpp"
#include "rinkfx/types.hpp"

namespace rinkfx {

/// Planted exp-scale parameters for one event. Rinks absent from the maps
/// are null (effect 1).
struct PlantedEffects {
  double mean = 10.0;   // rate per 3600 s at ASD 0, away, league-average rink
  double asd = 1.0;     // multiplicative effect per unit of ASD
  double home = 1.0;
  std::map<std::string, double> rink;
  std::map<std::string, double> homer;
};

struct SyntheticConfig {
  std::vector<std::string> seasons;
  std::vector<int> games_per_season;  // parallel to seasons
  std::vector<std::string> teams;     // rink id == team id
  std::vector<ModelEvent> events;
  std::map<ModelEvent, PlantedEffects> effects;
  double noise_sd = 0.25;        // log-scale observation noise
  double asd_home_mean = 0.08;   // home-row ASD location
  double asd_sd = 0.8;
  double nen_seconds_mean = 3000.0;
  double nen_seconds_sd = 150.0;
  double goal_rate_mean = 2.3;   // unbiased, feeds the derived-event goal term
  bool count_noise = false;      // misspecification mode: integer count draws
  std::uint64_t seed = 1;

  /// A small desk-scale league with a few planted effects.
  static SyntheticConfig demo();

  void validate() const;  // throws ConfigError
};

/// The planted truth saved alongside generated data.
struct TruthRecord {
  std::vector<std::string> seasons;
  std::vector<std::string> teams;
  std::map<ModelEvent, PlantedEffects> effects;
};

struct SynthOutput {
  std::vector<TeamGame> team_games;
  TruthRecord truth;
};

/// Draw team-game rows straight from the model: each requested event's log
/// rate is its planted linear predictor plus noise. Deterministic per seed;
/// per-season substreams.
SynthOutput generate_team_games(const SyntheticConfig& config);

/// Emit ingest-schema event rows instead: goals drive the score (and hence
/// the realized ASD), primitive counts are rounded rates over a simulated
/// NEN5v5 duration, and strength changes mark the non-5v5 time. Derived
/// events in config.events are ignored here; they are computed downstream.
struct EventLevelOutput {
  std::vector<GameLog> games;
  TruthRecord truth;
};
EventLevelOutput generate_event_level(const SyntheticConfig& config);

/// Recovery scoring against the planted truth for one event. Log errors are
/// measured over planted non-null effects; false positives count estimated
/// nonzero effects on null rinks, false negatives planted rinks estimated as
/// null. Throws ValidationError when the rink sets do not match the truth.
struct RecoveryError {
  double max_abs_log_error = 0.0;
  double mean_abs_log_error = 0.0;
  int false_positives = 0;
  int false_negatives = 0;
  std::map<std::string, double> per_rink_log_error;  // planted rinks only
};

RecoveryError recovery_error(const TruthRecord& truth, ModelEvent event,
                             const EffectTable& pooled_estimate);

std::string truth_json(const TruthRecord& truth);
TruthRecord truth_from_json(const std::string& text);
std::string synthetic_config_json(const SyntheticConfig& config);
SyntheticConfig synthetic_config_from_json(const std::string& text);

}  // namespace rinkfx
