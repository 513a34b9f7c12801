#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rinkfx/design.hpp"
#include "rinkfx/errors.hpp"
#include "rinkfx/synth.hpp"

using namespace rinkfx;

namespace {

TeamGame row(const std::string& season, const std::string& game,
             const std::string& for_team, const std::string& against,
             const std::string& rink, bool home, double asd, double hit_rate) {
  TeamGame tg;
  tg.season = season;
  tg.game_id = game;
  tg.for_team = for_team;
  tg.against_team = against;
  tg.rink = rink;
  tg.is_home = home;
  tg.asd = asd;
  tg.nen5v5_seconds = 3600;
  tg.rate_of(ModelEvent::Hit) = hit_rate;
  return tg;
}

/// Two games, two teams, two rinks, one season.
std::vector<TeamGame> yearly_fixture() {
  return {
      row("20122013", "G1", "AAA", "BBB", "RA", true, 0.5, 16.8),
      row("20122013", "G1", "BBB", "AAA", "RA", false, -0.5, 10.0),
      row("20122013", "G2", "BBB", "AAA", "RB", true, -0.25, 12.0),
      row("20122013", "G2", "AAA", "BBB", "RB", false, 0.25, 8.0),
  };
}

}  // namespace

TEST_CASE("encode_yearly reproduces the hand-constructed 4x11 matrix") {
  auto encoded = encode_yearly(yearly_fixture(), ModelEvent::Hit);
  const auto& design = encoded.design;

  // intercept | rink RA,RB | asd | for AAA,BBB | against AAA,BBB | home |
  // homer RA,RB
  REQUIRE(design.cols() == 11);
  REQUIRE(design.rows() == 4);
  const std::vector<std::string> labels = {
      "intercept", "rink:RA",     "rink:RB",     "asd",
      "for:AAA",   "for:BBB",     "against:AAA", "against:BBB",
      "home",      "homer:RA",    "homer:RB"};
  for (std::size_t j = 0; j < labels.size(); ++j) {
    CHECK(design.columns[j].str() == labels[j]);
  }

  const double expected[4][11] = {
      {1, 1, 0, 0.50, 1, 0, 0, 1, 1, 1, 0},
      {1, 1, 0, -0.50, 0, 1, 1, 0, 0, 0, 0},
      {1, 0, 1, -0.25, 0, 1, 1, 0, 1, 0, 1},
      {1, 0, 1, 0.25, 1, 0, 0, 1, 0, 0, 0},
  };
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 11; ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(design.values(i, j) == expected[i][j]);
    }
  }

  // Response is the floored log rate.
  CHECK(encoded.response(0) == std::log(16.8 + 1e-3));
  CHECK(encoded.response(1) == std::log(10.0 + 1e-3));

  // Only the intercept is unpenalized by default.
  CHECK(design.penalized[0] == 0);
  for (std::size_t j = 1; j < 11; ++j) CHECK(design.penalized[j] == 1);
}

TEST_CASE("zero rate is floored to ln(1e-3)") {
  auto rows = yearly_fixture();
  rows[0].rate_of(ModelEvent::Hit) = 0.0;
  auto encoded = encode_yearly(rows, ModelEvent::Hit);
  CHECK(encoded.response(0) == std::log(1e-3));
  CHECK(encoded.response(0) == doctest::Approx(-6.9078).epsilon(1e-4));
}

TEST_CASE("encode_pooled two-season fixture checked cell by cell") {
  std::vector<TeamGame> rows = {
      row("S1", "G1", "AAA", "BBB", "RA", true, 0.5, 16.8),
      row("S1", "G1", "BBB", "AAA", "RA", false, -0.5, 10.0),
      row("S2", "G2", "BBB", "AAA", "RB", true, -0.25, 12.0),
      row("S2", "G2", "AAA", "BBB", "RB", false, 0.25, 8.0),
  };
  auto encoded = encode_pooled(rows, ModelEvent::Hit);
  const auto& design = encoded.design;

  // Rink and homer columns are shared; intercept/asd/for/against/home are
  // per-season: 2 + 2 + 2 + 4 + 4 + 2 + 2.
  REQUIRE(design.cols() == 18);
  const std::vector<std::string> labels = {
      "intercept@S1", "intercept@S2", "rink:RA", "rink:RB", "asd@S1",
      "asd@S2",       "for:AAA@S1",   "for:BBB@S1", "for:AAA@S2",
      "for:BBB@S2",   "against:AAA@S1", "against:BBB@S1", "against:AAA@S2",
      "against:BBB@S2", "home@S1",    "home@S2", "homer:RA", "homer:RB"};
  REQUIRE(labels.size() == 18);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    CHECK(design.columns[j].str() == labels[j]);
  }

  const double expected[4][18] = {
      // i  i  rA rB a1    a2    f:A1 f:B1 f:A2 f:B2 g:A1 g:B1 g:A2 g:B2 h1 h2 hRA hRB
      {1, 0, 1, 0, 0.50, 0, 1, 0, 0, 0, 0, 1, 0, 0, 1, 0, 1, 0},
      {1, 0, 1, 0, -0.50, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0},
      {0, 1, 0, 1, 0, -0.25, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 1},
      {0, 1, 0, 1, 0, 0.25, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0},
  };
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 18; ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(design.values(i, j) == expected[i][j]);
    }
  }

  // Every intercept column is unpenalized.
  CHECK(design.penalized[0] == 0);
  CHECK(design.penalized[1] == 0);
  for (std::size_t j = 2; j < 18; ++j) CHECK(design.penalized[j] == 1);
}

TEST_CASE("two-season pooled doubles season families, keeps rinks shared") {
  SyntheticConfig config = SyntheticConfig::demo();
  config.seasons = {"20112012", "20122013"};
  config.games_per_season = {20, 20};
  config.seed = 5;
  auto output = generate_team_games(config);

  std::vector<TeamGame> one_season;
  for (const TeamGame& tg : output.team_games) {
    if (tg.season == "20112012") one_season.push_back(tg);
  }
  auto pooled = encode_pooled(output.team_games, ModelEvent::Block);
  auto yearly = encode_yearly(one_season, ModelEvent::Block);

  auto family_count = [](const DesignMatrix& d, ColumnFamily family) {
    int count = 0;
    for (const auto& label : d.columns) {
      if (label.family == family) ++count;
    }
    return count;
  };
  CHECK(family_count(pooled.design, ColumnFamily::Rink) ==
        family_count(yearly.design, ColumnFamily::Rink));
  CHECK(family_count(pooled.design, ColumnFamily::HomeRink) ==
        family_count(yearly.design, ColumnFamily::HomeRink));
  CHECK(family_count(pooled.design, ColumnFamily::Intercept) == 2);
  CHECK(family_count(pooled.design, ColumnFamily::Asd) == 2);
  CHECK(family_count(pooled.design, ColumnFamily::Home) == 2);
  CHECK(family_count(pooled.design, ColumnFamily::TeamFor) ==
        2 * family_count(yearly.design, ColumnFamily::TeamFor));
}

TEST_CASE("single-season pooled equals yearly up to column labels") {
  auto rows = yearly_fixture();
  auto pooled = encode_pooled(rows, ModelEvent::Hit);
  auto yearly = encode_yearly(rows, ModelEvent::Hit);
  REQUIRE(pooled.design.cols() == yearly.design.cols());
  CHECK(pooled.design.values == yearly.design.values);
  CHECK(pooled.response == yearly.response);
  CHECK(pooled.design.columns[0].str() == "intercept@20122013");
  CHECK(yearly.design.columns[0].str() == "intercept");
}

TEST_CASE("indicator families sum to one per row; homer is home x rink") {
  SyntheticConfig config = SyntheticConfig::demo();
  config.seasons = {"20112012", "20122013"};
  config.games_per_season = {15, 15};
  config.seed = 23;
  auto output = generate_team_games(config);
  auto encoded = encode_pooled(output.team_games, ModelEvent::Give);
  const auto& d = encoded.design;

  auto family_sum = [&d](Eigen::Index i, ColumnFamily family) {
    double sum = 0;
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (d.columns[static_cast<std::size_t>(j)].family == family) {
        sum += d.values(i, j);
      }
    }
    return sum;
  };
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    CHECK(family_sum(i, ColumnFamily::Rink) == 1.0);
    CHECK(family_sum(i, ColumnFamily::TeamFor) == 1.0);
    CHECK(family_sum(i, ColumnFamily::TeamAgainst) == 1.0);
    CHECK(family_sum(i, ColumnFamily::Intercept) == 1.0);
    // homer_j == home * rink_j, row-wise
    const double home_value = family_sum(i, ColumnFamily::Home);
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      const ColumnLabel& label = d.columns[static_cast<std::size_t>(j)];
      if (label.family != ColumnFamily::HomeRink) continue;
      auto rink_col = d.find({ColumnFamily::Rink, label.level, ""});
      REQUIRE(rink_col.has_value());
      CHECK(d.values(i, j) == home_value * d.values(i, *rink_col));
    }
  }
}

TEST_CASE("encoding is deterministic") {
  auto rows = yearly_fixture();
  auto a = encode_yearly(rows, ModelEvent::Hit);
  auto b = encode_yearly(rows, ModelEvent::Hit);
  CHECK(a.design.values == b.design.values);
  CHECK(a.design.columns == b.design.columns);
}

TEST_CASE("encode error paths") {
  SUBCASE("yearly rejects rows spanning seasons") {
    auto rows = yearly_fixture();
    rows[2].season = "20112012";
    rows[3].season = "20112012";
    CHECK_THROWS_AS(encode_yearly(rows, ModelEvent::Hit), ValidationError);
  }
  SUBCASE("fewer than two rinks") {
    auto rows = yearly_fixture();
    for (auto& tg : rows) tg.rink = "RA";
    CHECK_THROWS_AS(encode_yearly(rows, ModelEvent::Hit), ValidationError);
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(encode_yearly({}, ModelEvent::Hit), ValidationError);
  }
}

TEST_CASE("unpenalized families are honored") {
  EncodeOptions options;
  options.unpenalized = {ColumnFamily::Asd, ColumnFamily::Home};
  auto encoded = encode_yearly(yearly_fixture(), ModelEvent::Hit, options);
  for (std::size_t j = 0; j < encoded.design.columns.size(); ++j) {
    const ColumnFamily family = encoded.design.columns[j].family;
    const bool expect_unpenalized = family == ColumnFamily::Intercept ||
                                    family == ColumnFamily::Asd ||
                                    family == ColumnFamily::Home;
    CHECK(encoded.design.penalized[j] == (expect_unpenalized ? 0 : 1));
  }
}

TEST_CASE("design debug dump carries labels in the header") {
  auto encoded = encode_yearly(yearly_fixture(), ModelEvent::Hit);
  std::ostringstream out;
  write_design_csv(out, encoded);
  const std::string text = out.str();
  CHECK(text.find("intercept,rink:RA,rink:RB,asd,") == 0);
  CHECK(text.find(",response\n") != std::string::npos);
}
