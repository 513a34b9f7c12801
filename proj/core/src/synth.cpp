#include "rinkfx/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <json.hpp>

#include "rinkfx/errors.hpp"
#include "rinkfx/rng.hpp"

namespace rinkfx {

namespace {

constexpr int kRegulationSeconds = 3600;

double clamp_positive(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

int poisson_draw(Rng& rng, double mean) {
  // Knuth inversion; fine for the rate magnitudes this generator uses.
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= rng.uniform();
  } while (p > limit);
  return k - 1;
}

double planted_log_rate(const PlantedEffects& effects, const std::string& rink,
                        double row_asd, bool is_home) {
  double pred = std::log(effects.mean) + row_asd * std::log(effects.asd);
  auto rink_it = effects.rink.find(rink);
  if (rink_it != effects.rink.end()) pred += std::log(rink_it->second);
  if (is_home) {
    pred += std::log(effects.home);
    auto homer_it = effects.homer.find(rink);
    if (homer_it != effects.homer.end()) pred += std::log(homer_it->second);
  }
  return pred;
}

/// Balanced-ish schedule: shuffle, pair adjacent teams, first of the pair
/// hosts; repeat rounds until `games` pairings exist.
std::vector<std::pair<std::string, std::string>> make_schedule(
    Rng& rng, const std::vector<std::string>& teams, int games) {
  std::vector<std::pair<std::string, std::string>> schedule;
  schedule.reserve(static_cast<std::size_t>(games));
  std::vector<std::string> order = teams;
  while (static_cast<int>(schedule.size()) < games) {
    rng.shuffle(order);
    for (std::size_t i = 0; i + 1 < order.size() &&
                            static_cast<int>(schedule.size()) < games;
         i += 2) {
      schedule.emplace_back(order[i], order[i + 1]);
    }
  }
  return schedule;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (seasons.empty()) throw ConfigError("synth: no seasons");
  if (seasons.size() != games_per_season.size()) {
    throw ConfigError("synth: games_per_season must match seasons");
  }
  if (teams.size() < 2) throw ConfigError("synth: need at least 2 teams");
  if (events.empty()) throw ConfigError("synth: no events configured");
  for (int games : games_per_season) {
    if (games < static_cast<int>(teams.size()) / 2) {
      throw ConfigError("synth: games per season below teams/2");
    }
  }
  if (noise_sd < 0.0) throw ConfigError("synth: negative noise sd");
  std::set<std::string> team_set(teams.begin(), teams.end());
  if (team_set.size() != teams.size()) {
    throw ConfigError("synth: duplicate team ids");
  }
  for (const auto& [event, planted] : effects) {
    if (!(planted.mean > 0.0 && planted.asd > 0.0 && planted.home > 0.0)) {
      throw ConfigError("synth: planted effects must be positive");
    }
    for (const auto& [rink, value] : planted.rink) {
      if (!(value > 0.0)) throw ConfigError("synth: planted effects must be positive");
      if (!team_set.contains(rink)) {
        throw ConfigError("synth: planted rink '" + rink + "' not a team");
      }
    }
    for (const auto& [rink, value] : planted.homer) {
      if (!(value > 0.0)) throw ConfigError("synth: planted effects must be positive");
      if (!team_set.contains(rink)) {
        throw ConfigError("synth: planted homer rink '" + rink + "' not a team");
      }
    }
  }
}

SyntheticConfig SyntheticConfig::demo() {
  SyntheticConfig config;
  config.seasons = {"20072008", "20082009", "20092010",
                    "20102011", "20112012", "20122013"};
  config.games_per_season = {120, 120, 120, 120, 120, 70};
  config.teams = {"ANA", "BOS", "CAR", "DAL", "EDM",
                  "FLA", "LAK", "MIN", "NJD", "TOR"};
  config.events.assign(kAllModelEvents.begin(), kAllModelEvents.end());

  auto plant = [&config](ModelEvent event, double mean, double asd,
                         double home) -> PlantedEffects& {
    PlantedEffects& p = config.effects[event];
    p.mean = mean;
    p.asd = asd;
    p.home = home;
    return p;
  };
  auto& block = plant(ModelEvent::Block, 12.0, 0.93, 1.05);
  block.rink = {{"BOS", 0.866}, {"NJD", 0.541}, {"TOR", 1.245}};
  auto& give = plant(ModelEvent::Give, 5.2, 0.95, 1.68);
  give.rink = {{"EDM", 2.167}, {"NJD", 0.27}};
  auto& hit = plant(ModelEvent::Hit, 24.0, 0.97, 1.11);
  hit.rink = {{"LAK", 1.298}, {"NJD", 0.592}};
  hit.homer = {{"NJD", 1.196}, {"TOR", 0.906}};
  auto& miss = plant(ModelEvent::Miss, 10.0, 0.95, 1.09);
  miss.rink = {{"NJD", 0.603}, {"TOR", 1.25}};
  plant(ModelEvent::Shot, 25.0, 0.96, 1.06);
  auto& take = plant(ModelEvent::Take, 4.6, 1.05, 1.54);
  take.rink = {{"MIN", 0.445}, {"EDM", 1.259}};
  auto& corsi = plant(ModelEvent::Corsi, 50.0, 0.96, 1.06);
  corsi.rink = {{"NJD", 0.839}, {"TOR", 1.125}};
  auto& fenwick = plant(ModelEvent::Fenwick, 38.0, 0.98, 1.06);
  fenwick.rink = {{"TOR", 1.074}};
  auto& turn = plant(ModelEvent::Turn, 14.5, 1.04, 0.97);
  turn.rink = {{"EDM", 1.6}, {"NJD", 0.799}};
  return config;
}

SynthOutput generate_team_games(const SyntheticConfig& config) {
  config.validate();
  SynthOutput out;
  out.truth = {config.seasons, config.teams, config.effects};

  for (std::size_t si = 0; si < config.seasons.size(); ++si) {
    const std::string& season = config.seasons[si];
    Rng rng(derive_seed(config.seed, "synth:season:" + season));
    auto schedule =
        make_schedule(rng, config.teams, config.games_per_season[si]);
    int game_no = 0;
    for (const auto& [home_team, away_team] : schedule) {
      ++game_no;
      char id[32];
      std::snprintf(id, sizeof(id), "%s-G%04d", season.c_str(), game_no);
      const double nen = clamp_positive(
          config.nen_seconds_mean + config.nen_seconds_sd * rng.normal(),
          600.0, 3600.0);
      const double asd = config.asd_home_mean + config.asd_sd * rng.normal();

      TeamGame home, away;
      home.season = away.season = season;
      home.game_id = away.game_id = id;
      home.rink = away.rink = home_team;
      home.for_team = home_team;
      home.against_team = away_team;
      home.is_home = true;
      home.asd = asd;
      away.for_team = away_team;
      away.against_team = home_team;
      away.is_home = false;
      away.asd = -asd;
      home.nen5v5_seconds = away.nen5v5_seconds = nen;

      // Unbiased goal counts feed the derived-event goal terms.
      for (TeamGame* row : {&home, &away}) {
        const double goal_rate =
            std::exp(std::log(config.goal_rate_mean) +
                     config.noise_sd * rng.normal());
        row->count[6] =
            static_cast<int>(std::lround(goal_rate * nen / 3600.0));
      }

      for (ModelEvent event : kAllModelEvents) {
        auto it = config.effects.find(event);
        if (it == config.effects.end() ||
            std::find(config.events.begin(), config.events.end(), event) ==
                config.events.end()) {
          continue;
        }
        for (TeamGame* row : {&home, &away}) {
          const double pred = planted_log_rate(it->second, row->rink,
                                               row->asd, row->is_home);
          double rate = std::exp(pred + config.noise_sd * rng.normal());
          if (config.count_noise) {
            const int count = poisson_draw(rng, rate * nen / 3600.0);
            rate = count * 3600.0 / nen;
          }
          row->rate_of(event) = rate;
          if (is_primitive(event)) {
            row->count_of(to_event_type(event)) =
                static_cast<int>(std::lround(rate * nen / 3600.0));
          }
        }
      }
      out.team_games.push_back(std::move(home));
      out.team_games.push_back(std::move(away));
    }
  }
  return out;
}

namespace {

struct PenaltyWindow {
  int start = 0;
  int length = 0;
  bool home_short = false;
  bool covers(int t) const { return t >= start && t < start + length; }
};

struct GoalTimeline {
  std::vector<std::pair<int, bool>> goals;  // (time, scored_by_home), sorted

  std::pair<int, int> score_at(int t) const {
    int home = 0, away = 0;
    for (const auto& [time, by_home] : goals) {
      if (time > t) break;
      (by_home ? home : away) += 1;
    }
    return {home, away};
  }

  double asd_home() const {
    double weighted = 0.0;
    int lead = 0;
    int prev = 0;
    for (const auto& [time, by_home] : goals) {
      weighted += static_cast<double>(lead) * (time - prev);
      lead += by_home ? 1 : -1;
      prev = time;
    }
    weighted += static_cast<double>(lead) * (kRegulationSeconds - prev);
    return weighted / kRegulationSeconds;
  }
};

}  // namespace

EventLevelOutput generate_event_level(const SyntheticConfig& config) {
  config.validate();
  EventLevelOutput out;
  out.truth = {config.seasons, config.teams, config.effects};

  constexpr int kRosterSize = 12;
  auto roster_player = [](const std::string& team, std::uint64_t i) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s_P%02d", team.c_str(),
                  static_cast<int>(i) + 1);
    return std::string(buf);
  };

  for (std::size_t si = 0; si < config.seasons.size(); ++si) {
    const std::string& season = config.seasons[si];
    Rng rng(derive_seed(config.seed, "synth:events:" + season));
    auto schedule =
        make_schedule(rng, config.teams, config.games_per_season[si]);
    int game_no = 0;
    for (const auto& [home_team, away_team] : schedule) {
      ++game_no;
      char id[32];
      std::snprintf(id, sizeof(id), "%s-G%04d", season.c_str(), game_no);

      GameLog game;
      game.season = season;
      game.game_id = id;
      game.home_team = home_team;
      game.away_team = away_team;

      const int nen = static_cast<int>(clamp_positive(
          config.nen_seconds_mean + config.nen_seconds_sd * rng.normal(),
          1800.0, 3600.0));
      PenaltyWindow penalty;
      penalty.length = kRegulationSeconds - nen;
      if (penalty.length > 0) {
        penalty.start =
            300 + static_cast<int>(rng.below(
                      static_cast<std::uint64_t>(3000 - penalty.length)));
        penalty.home_short = rng.below(2) == 0;
      }

      // Distinct rows only: a re-draw on (time, type, team, player)
      // collisions keeps the output free of duplicate recordings.
      std::set<std::tuple<int, int, std::string, std::string>> used;
      auto claim = [&used](int t, EventType type, const std::string& team,
                           const std::string& player) {
        return used.insert({t, static_cast<int>(type), team, player}).second;
      };

      GoalTimeline timeline;
      struct GoalDraw {
        int t;
        bool by_home;
        std::string player;
      };
      std::vector<GoalDraw> goal_draws;
      for (bool by_home : {true, false}) {
        const std::string& team = by_home ? home_team : away_team;
        const double goal_rate = std::exp(std::log(config.goal_rate_mean) +
                                          config.noise_sd * rng.normal());
        const int goals =
            static_cast<int>(std::lround(goal_rate * nen / 3600.0));
        for (int g = 0; g < goals; ++g) {
          const std::string player =
              roster_player(team, rng.below(kRosterSize));
          int t;
          do {
            t = 1 + static_cast<int>(rng.below(kRegulationSeconds - 1));
          } while (!claim(t, EventType::Goal, team, player));
          goal_draws.push_back({t, by_home, player});
          timeline.goals.emplace_back(t, by_home);
        }
      }
      std::sort(timeline.goals.begin(), timeline.goals.end());
      const double asd = timeline.asd_home();

      struct Pending {
        int t;
        EventType type;
        std::string team;
        std::string player;
      };
      std::vector<Pending> pending;
      pending.push_back({0, EventType::Faceoff, "", ""});
      pending.push_back({1200, EventType::Faceoff, "", ""});
      pending.push_back({2400, EventType::Faceoff, "", ""});
      if (penalty.length > 0) {
        pending.push_back({penalty.start, EventType::Other, "", ""});
        pending.push_back(
            {penalty.start + penalty.length, EventType::Other, "", ""});
      }
      for (const GoalDraw& goal : goal_draws) {
        pending.push_back({goal.t, EventType::Goal,
                           goal.by_home ? home_team : away_team, goal.player});
      }

      auto draw_nen_time = [&]() {
        while (true) {
          const int t =
              static_cast<int>(rng.below(kRegulationSeconds));
          if (penalty.length == 0 || !penalty.covers(t)) return t;
        }
      };

      for (ModelEvent event : kPrimitiveModelEvents) {
        auto it = config.effects.find(event);
        if (it == config.effects.end() ||
            std::find(config.events.begin(), config.events.end(), event) ==
                config.events.end()) {
          continue;
        }
        for (bool is_home : {true, false}) {
          const std::string& team = is_home ? home_team : away_team;
          const double row_asd = is_home ? asd : -asd;
          const double rate =
              std::exp(planted_log_rate(it->second, home_team, row_asd,
                                        is_home) +
                       config.noise_sd * rng.normal());
          const int count =
              static_cast<int>(std::lround(rate * nen / 3600.0));
          const EventType type = to_event_type(event);
          for (int c = 0; c < count; ++c) {
            const std::string player =
                roster_player(team, rng.below(kRosterSize));
            int t;
            do {
              t = draw_nen_time();
            } while (!claim(t, type, team, player));
            pending.push_back({t, type, team, player});
          }
        }
      }

      std::sort(pending.begin(), pending.end(),
                [](const Pending& a, const Pending& b) {
                  return std::tie(a.t, a.type, a.team, a.player) <
                         std::tie(b.t, b.type, b.team, b.player);
                });

      game.events.reserve(pending.size());
      for (const Pending& p : pending) {
        RawEvent e;
        e.season = season;
        e.game_id = id;
        e.period = std::min(p.t / 1200, 2) + 1;
        e.elapsed_seconds = p.t;
        e.type = p.type;
        e.event_team = p.team;
        e.home_team = home_team;
        e.away_team = away_team;
        const auto [hs, as] = timeline.score_at(p.t);
        e.home_score = hs;
        e.away_score = as;
        const bool short_handed =
            penalty.length > 0 && penalty.covers(p.t);
        e.home_skaters = short_handed && penalty.home_short ? 4 : 5;
        e.away_skaters = short_handed && !penalty.home_short ? 4 : 5;
        e.home_goalie_on = true;
        e.away_goalie_on = true;
        e.player = p.player;
        game.events.push_back(std::move(e));
      }
      out.games.push_back(std::move(game));
    }
  }
  return out;
}

RecoveryError recovery_error(const TruthRecord& truth, ModelEvent event,
                             const EffectTable& pooled_estimate) {
  auto effects_it = truth.effects.find(event);
  if (effects_it == truth.effects.end()) {
    throw ValidationError("recovery_error: event not in the truth record");
  }
  const PlantedEffects& planted = effects_it->second;

  std::set<std::string> team_set(truth.teams.begin(), truth.teams.end());
  std::set<std::string> estimated;
  for (const auto& [rink, entry] : pooled_estimate.rink_effect) {
    estimated.insert(rink);
  }
  if (estimated != team_set) {
    throw ValidationError(
        "recovery_error: estimated rink set does not match the truth");
  }

  RecoveryError result;
  double sum = 0.0;
  int planted_count = 0;
  for (const std::string& rink : truth.teams) {
    const auto planted_it = planted.rink.find(rink);
    const double truth_effect =
        planted_it == planted.rink.end() ? 1.0 : planted_it->second;
    const EffectEntry& est = pooled_estimate.rink_effect.at(rink);
    if (truth_effect != 1.0) {
      const double err = std::abs(std::log(est.effect) - std::log(truth_effect));
      result.per_rink_log_error[rink] = err;
      result.max_abs_log_error = std::max(result.max_abs_log_error, err);
      sum += err;
      ++planted_count;
      if (!est.nonzero) ++result.false_negatives;
    } else if (est.nonzero) {
      ++result.false_positives;
    }
  }
  result.mean_abs_log_error = planted_count > 0 ? sum / planted_count : 0.0;
  return result;
}

namespace {

nlohmann::json planted_json(const PlantedEffects& planted) {
  return {{"mean", planted.mean},
          {"asd", planted.asd},
          {"home", planted.home},
          {"rink", planted.rink},
          {"homer", planted.homer}};
}

PlantedEffects planted_from_json(const nlohmann::json& j) {
  PlantedEffects planted;
  planted.mean = j.at("mean").get<double>();
  planted.asd = j.at("asd").get<double>();
  planted.home = j.at("home").get<double>();
  if (j.contains("rink")) {
    planted.rink = j.at("rink").get<std::map<std::string, double>>();
  }
  if (j.contains("homer")) {
    planted.homer = j.at("homer").get<std::map<std::string, double>>();
  }
  return planted;
}

nlohmann::json effects_map_json(
    const std::map<ModelEvent, PlantedEffects>& effects) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [event, planted] : effects) {
    out[std::string(to_string(event))] = planted_json(planted);
  }
  return out;
}

std::map<ModelEvent, PlantedEffects> effects_map_from_json(
    const nlohmann::json& j) {
  std::map<ModelEvent, PlantedEffects> out;
  for (const auto& [name, planted] : j.items()) {
    auto event = model_event_from(name);
    if (!event) throw ValidationError("unknown event '" + name + "'");
    out[*event] = planted_from_json(planted);
  }
  return out;
}

}  // namespace

std::string truth_json(const TruthRecord& truth) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["seasons"] = truth.seasons;
  j["teams"] = truth.teams;
  j["effects"] = effects_map_json(truth.effects);
  return j.dump(2) + "\n";
}

TruthRecord truth_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TruthRecord truth;
  truth.seasons = j.at("seasons").get<std::vector<std::string>>();
  truth.teams = j.at("teams").get<std::vector<std::string>>();
  truth.effects = effects_map_from_json(j.at("effects"));
  return truth;
}

std::string synthetic_config_json(const SyntheticConfig& config) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["seasons"] = config.seasons;
  j["games_per_season"] = config.games_per_season;
  j["teams"] = config.teams;
  nlohmann::json events = nlohmann::json::array();
  for (ModelEvent event : config.events) {
    events.push_back(std::string(to_string(event)));
  }
  j["events"] = events;
  j["effects"] = effects_map_json(config.effects);
  j["noise_sd"] = config.noise_sd;
  j["asd_home_mean"] = config.asd_home_mean;
  j["asd_sd"] = config.asd_sd;
  j["nen_seconds_mean"] = config.nen_seconds_mean;
  j["nen_seconds_sd"] = config.nen_seconds_sd;
  j["goal_rate_mean"] = config.goal_rate_mean;
  j["count_noise"] = config.count_noise;
  j["seed"] = config.seed;
  return j.dump(2) + "\n";
}

SyntheticConfig synthetic_config_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SyntheticConfig config;
  config.seasons = j.at("seasons").get<std::vector<std::string>>();
  config.games_per_season = j.at("games_per_season").get<std::vector<int>>();
  config.teams = j.at("teams").get<std::vector<std::string>>();
  for (const auto& name : j.at("events")) {
    auto event = model_event_from(name.get<std::string>());
    if (!event) {
      throw ValidationError("unknown event '" + name.get<std::string>() + "'");
    }
    config.events.push_back(*event);
  }
  config.effects = effects_map_from_json(j.at("effects"));
  if (j.contains("noise_sd")) config.noise_sd = j.at("noise_sd").get<double>();
  if (j.contains("asd_home_mean")) {
    config.asd_home_mean = j.at("asd_home_mean").get<double>();
  }
  if (j.contains("asd_sd")) config.asd_sd = j.at("asd_sd").get<double>();
  if (j.contains("nen_seconds_mean")) {
    config.nen_seconds_mean = j.at("nen_seconds_mean").get<double>();
  }
  if (j.contains("nen_seconds_sd")) {
    config.nen_seconds_sd = j.at("nen_seconds_sd").get<double>();
  }
  if (j.contains("goal_rate_mean")) {
    config.goal_rate_mean = j.at("goal_rate_mean").get<double>();
  }
  if (j.contains("count_noise")) {
    config.count_noise = j.at("count_noise").get<bool>();
  }
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  config.validate();
  return config;
}

}  // namespace rinkfx
