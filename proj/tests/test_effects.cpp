#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rinkfx/effects.hpp"
#include "rinkfx/errors.hpp"
#include "rinkfx/rng.hpp"
#include "rinkfx/synth.hpp"

using namespace rinkfx;

namespace {

EffectEntry coef(double c) { return {c, std::exp(c), c != 0.0}; }

/// Yearly tables for one rink ("X") with the given coefficient per season;
/// NaN means the rink is absent from that season.
std::vector<EffectTable> yearly_tables(const std::vector<double>& coefs,
                                       ModelEvent event = ModelEvent::Block) {
  std::vector<EffectTable> tables;
  for (std::size_t s = 0; s < coefs.size(); ++s) {
    EffectTable table;
    table.event = event;
    table.scope = "S" + std::to_string(s + 1);
    table.seasons = {table.scope};
    if (!std::isnan(coefs[s])) {
      table.rink_effect["X"] = coef(coefs[s]);
      table.homer_effect["X"] = coef(0.0);
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

EffectTable pooled_table(double rink_coef, double homer_coef = 0.0,
                         ModelEvent event = ModelEvent::Block) {
  EffectTable table;
  table.event = event;
  table.scope = "pooled";
  table.rink_effect["X"] = coef(rink_coef);
  table.homer_effect["X"] = coef(homer_coef);
  return table;
}

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST_CASE("six same-signed years plus agreeing pooled fit is persistent") {
  // The pattern of a rink that records blocks at roughly half the league
  // rate: all six yearly coefficients negative, pooled effect 0.541.
  const double c = std::log(0.541);
  auto yearly = yearly_tables({c, c * 0.9, c * 1.1, c, c * 0.8, c});
  auto entry = classify_persistence(yearly, pooled_table(c), "X");
  CHECK(entry.persistent);
  CHECK(entry.direction == -1);
  CHECK(entry.pooled_effect == doctest::Approx(0.541).epsilon(1e-12));
  CHECK(entry.yearly_effects.size() == 6);
}

TEST_CASE("classification condition failures") {
  const double up = 0.2;
  SUBCASE("all six yearly coefficients zero") {
    auto entry = classify_persistence(yearly_tables({0, 0, 0, 0, 0, 0}),
                                      pooled_table(up), "X");
    CHECK(!entry.persistent);
    CHECK(entry.direction == 0);
  }
  SUBCASE("five positive and one nonzero negative violates condition 2") {
    auto entry = classify_persistence(
        yearly_tables({up, up, up, up, up, -0.1}), pooled_table(up), "X");
    CHECK(!entry.persistent);
  }
  SUBCASE("four of six is below the default threshold") {
    auto entry = classify_persistence(yearly_tables({up, up, up, up, 0, 0}),
                                      pooled_table(up), "X");
    CHECK(!entry.persistent);
  }
  SUBCASE("five of six with one shrunk to zero passes") {
    auto entry = classify_persistence(yearly_tables({up, up, up, up, up, 0}),
                                      pooled_table(up), "X");
    CHECK(entry.persistent);
    CHECK(entry.direction == 1);
  }
  SUBCASE("pooled zero violates condition 3") {
    auto entry = classify_persistence(
        yearly_tables({up, up, up, up, up, up}), pooled_table(0.0), "X");
    CHECK(!entry.persistent);
  }
  SUBCASE("pooled opposite sign violates condition 3") {
    auto entry = classify_persistence(
        yearly_tables({up, up, up, up, up, up}), pooled_table(-up), "X");
    CHECK(!entry.persistent);
  }
}

TEST_CASE("absent seasons count as absent, never opposite-signed") {
  const double up = 0.3;
  SUBCASE("five present positive plus one absent is persistent") {
    auto entry = classify_persistence(
        yearly_tables({up, up, up, up, up, kAbsent}), pooled_table(up), "X");
    CHECK(entry.persistent);
    CHECK(std::isnan(entry.yearly_effects[5]));
  }
  SUBCASE("a rink present in only two seasons cannot qualify") {
    auto entry = classify_persistence(
        yearly_tables({up, up, kAbsent, kAbsent, kAbsent, kAbsent}),
        pooled_table(up), "X");
    CHECK(!entry.persistent);
  }
}

TEST_CASE("homer persistence uses the same three conditions") {
  const double c = std::log(1.196);
  auto yearly = yearly_tables({0, 0, 0, 0, 0, 0});
  for (auto& table : yearly) table.homer_effect["X"] = coef(c);
  yearly[5].homer_effect["X"] = coef(0.0);  // five of six
  auto entry = classify_persistence(yearly, pooled_table(0.0, c), "X");
  CHECK(!entry.persistent);  // the rink track itself is null
  CHECK(entry.homer_persistent);
  CHECK(entry.homer_direction == 1);
  CHECK(entry.pooled_homer_effect == doctest::Approx(1.196).epsilon(1e-12));
}

TEST_CASE("persistence threshold is configurable and rule resolves n-1") {
  PersistenceRule rule;
  CHECK(rule.resolve(6) == 5);
  CHECK(rule.resolve(2) == 1);
  CHECK(rule.resolve(1) == 1);
  const double up = 0.4;
  PersistenceRule strict{6};
  auto entry = classify_persistence(yearly_tables({up, up, up, up, up, 0}),
                                    pooled_table(up), "X", strict);
  CHECK(!entry.persistent);
}

TEST_CASE("adding an agreeing season never flips persistent to not") {
  Rng rng(314);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 4 + static_cast<int>(rng.below(4));
    std::vector<double> coefs;
    for (int s = 0; s < n; ++s) {
      const double u = rng.uniform();
      coefs.push_back(u < 0.3 ? 0.0 : (u < 0.65 ? 0.3 : -0.3));
    }
    const double pooled_coef = rng.uniform() < 0.5 ? 0.3 : -0.3;
    auto before = classify_persistence(yearly_tables(coefs),
                                       pooled_table(pooled_coef), "X");
    if (!before.persistent) continue;
    // Append a season agreeing with the established direction.
    coefs.push_back(before.direction > 0 ? 0.3 : -0.3);
    auto after = classify_persistence(yearly_tables(coefs),
                                      pooled_table(pooled_coef), "X");
    CHECK(after.persistent);
  }
}

TEST_CASE("classification depends only on coefficient signs") {
  const double up = 0.25;
  auto yearly = yearly_tables({up, up, up, up, up, 0});
  auto pooled = pooled_table(up);
  auto base = classify_persistence(yearly, pooled, "X");
  // A shifted intercept rescales every mean effect but not the rink
  // coefficients; persistence must be unchanged.
  for (auto& table : yearly) table.mean_effect[table.scope] = 99.0;
  pooled.mean_effect["S1"] = 99.0;
  auto shifted = classify_persistence(yearly, pooled, "X");
  CHECK(base.persistent == shifted.persistent);
  CHECK(base.direction == shifted.direction);
}

TEST_CASE("summarize counts, range and yearly-effect averages") {
  EventAnalysis analysis;
  analysis.event = ModelEvent::Block;
  analysis.seasons = {"S1", "S2"};
  for (const std::string& season : analysis.seasons) {
    EffectTable table;
    table.event = ModelEvent::Block;
    table.scope = season;
    table.seasons = {season};
    table.asd_effect[season] = coef(std::log(season == "S1" ? 0.92 : 0.96));
    table.home_effect[season] = coef(std::log(season == "S1" ? 1.05 : 1.07));
    analysis.yearly.push_back(table);
  }
  PersistenceEntry above;
  above.rink = "A";
  above.persistent = true;
  above.direction = 1;
  above.pooled_effect = 1.3;
  PersistenceEntry below;
  below.rink = "B";
  below.persistent = true;
  below.direction = -1;
  below.pooled_effect = 0.8;
  below.homer_persistent = true;
  PersistenceEntry none;
  none.rink = "C";
  analysis.report.event = ModelEvent::Block;
  analysis.report.entries = {{"A", above}, {"B", below}, {"C", none}};

  SummaryRow row = summarize_event(analysis);
  CHECK(row.persistent_re == 2);
  CHECK(row.persistent_he == 1);
  CHECK(row.re_range == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(row.avg_asd_effect == doctest::Approx((0.92 + 0.96) / 2).epsilon(1e-12));
  CHECK(row.avg_home_effect == doctest::Approx((1.05 + 1.07) / 2).epsilon(1e-12));

  SUBCASE("no persistent rinks gives count 0 and range 0") {
    analysis.report.entries = {{"C", none}};
    SummaryRow empty = summarize_event(analysis);
    CHECK(empty.persistent_re == 0);
    CHECK(empty.re_range == 0.0);
  }
}

TEST_CASE("fit_event_models recovers a planted below-average block rink") {
  // Desk-scale run: planted BOS BLOCK effect 0.866 must come back clearly
  // below average but shrunk toward 1.
  SyntheticConfig config = SyntheticConfig::demo();
  config.seed = 6;
  auto output = generate_team_games(config);
  ElasticNetSpec spec;
  spec.seed = 6;
  EventAnalysis analysis =
      fit_event_models(output.team_games, ModelEvent::Block, spec, {}, {}, 2);

  CHECK(analysis.seasons.size() == 6);
  CHECK(analysis.yearly.size() == 6);
  REQUIRE(analysis.report.entries.size() == config.teams.size());

  // The planted 0.866 comes back below average, shrunk toward 1.
  const EffectEntry& bos_pooled = analysis.pooled.rink_effect.at("BOS");
  CHECK(bos_pooled.effect > 0.80);
  CHECK(bos_pooled.effect < 0.93);

  // The stronger planted rink survives the full three-condition rule.
  const PersistenceEntry& njd = analysis.report.entries.at("NJD");
  CHECK(njd.persistent);
  CHECK(njd.direction == -1);
  CHECK(njd.pooled_effect < 0.75);

  // A zero coefficient maps to effect exactly 1.
  bool found_null = false;
  for (const auto& [rink, entry] : analysis.pooled.rink_effect) {
    if (!entry.nonzero) {
      CHECK(entry.effect == 1.0);
      found_null = true;
    }
  }
  CHECK(found_null);

  SUBCASE("effects and persistence emit consistent reports") {
    std::ostringstream effects_csv;
    write_effects_csv(effects_csv, analysis);
    CHECK(effects_csv.str().find("scope,family,level,season,coefficient,"
                                 "effect,nonzero") == 0);

    const std::string persistence = persistence_json(analysis.report);
    PersistenceReport reloaded = persistence_from_json(persistence);
    CHECK(reloaded.event == analysis.report.event);
    CHECK(reloaded.entries.size() == analysis.report.entries.size());
    CHECK(reloaded.entries.at("NJD").persistent);
    CHECK(reloaded.entries.at("NJD").pooled_effect ==
          doctest::Approx(njd.pooled_effect).epsilon(1e-12));

    EventSummaryInput input = summary_input_from_json(
        effects_json(analysis), persistence);
    SummaryRow from_json = summarize_input(input);
    SummaryRow direct = summarize_event(analysis);
    CHECK(from_json.persistent_re == direct.persistent_re);
    CHECK(from_json.avg_asd_effect ==
          doctest::Approx(direct.avg_asd_effect).epsilon(1e-12));

    std::ostringstream grid;
    write_effect_grid_csv(grid, analysis);
    const std::string grid_text = grid.str();
    CHECK(grid_text.find("event,rink,season,effect,persistent_direction") ==
          0);
    // one row per (rink, season)
    const auto lines = std::count(grid_text.begin(), grid_text.end(), '\n');
    CHECK(lines == 1 + 10 * 6);
  }
}

TEST_CASE("solver failures are tagged with event and scope") {
  SyntheticConfig config = SyntheticConfig::demo();
  config.seasons = {"20122013"};
  config.games_per_season = {30};
  auto output = generate_team_games(config);
  ElasticNetSpec spec;
  spec.max_iter = 1;
  try {
    fit_event_models(output.team_games, ModelEvent::Give, spec);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("GIVE") != std::string::npos);
  }
}
