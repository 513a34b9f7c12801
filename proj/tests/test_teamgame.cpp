#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rinkfx/errors.hpp"
#include "rinkfx/events.hpp"
#include "rinkfx/synth.hpp"
#include "rinkfx/team_game.hpp"

using namespace rinkfx;

namespace {

RawEvent mk(int period, int t, EventType type, const std::string& team,
            int hs, int as, int h5 = 5, int a5 = 5) {
  RawEvent e;
  e.season = "20122013";
  e.game_id = "G1";
  e.period = period;
  e.elapsed_seconds = t;
  e.type = type;
  e.event_team = team;
  e.home_team = "HME";
  e.away_team = "AWY";
  e.home_score = hs;
  e.away_score = as;
  e.home_skaters = h5;
  e.away_skaters = a5;
  e.home_goalie_on = true;
  e.away_goalie_on = true;
  return e;
}

/// Intervals for the worked ASD example: home leads by 1 for 1240 s, by 2
/// for 213 s, tied otherwise.
std::vector<EventInterval> asd_example_intervals() {
  std::vector<RawEvent> events = {
      mk(1, 0, EventType::Faceoff, "", 0, 0),
      mk(1, 100, EventType::Goal, "HME", 1, 0),
      mk(2, 1340, EventType::Goal, "HME", 2, 0),
      mk(2, 1553, EventType::Other, "", 2, 2),
  };
  return compute_intervals(events);
}

GameLog swap_home_away(const GameLog& game) {
  GameLog swapped = game;
  std::swap(swapped.home_team, swapped.away_team);
  for (RawEvent& e : swapped.events) {
    std::swap(e.home_team, e.away_team);
    std::swap(e.home_score, e.away_score);
    std::swap(e.home_skaters, e.away_skaters);
    std::swap(e.home_goalie_on, e.away_goalie_on);
  }
  return swapped;
}

}  // namespace

TEST_CASE("prorate golden cases") {
  CHECK(prorate(14, 3000) == 16.8);  // multiply-first keeps this exact
  CHECK(prorate(0, 2875) == 0.0);
  for (int n : {0, 1, 7, 23, 55}) {
    CHECK(prorate(n, 3600) == static_cast<double>(n));
  }
  CHECK_THROWS_AS(prorate(3, 0.0), ValidationError);
}

TEST_CASE("compute_asd matches the worked example to 5e-4") {
  auto intervals = asd_example_intervals();
  CHECK(total_seconds(intervals) == 3600.0);
  const double asd = compute_asd(intervals, "HME");
  CHECK(std::abs(asd - 0.463) < 5e-4);
  CHECK(asd == (1.0 * 1240 + 2.0 * 213) / 3600.0);
  CHECK(compute_asd(intervals, "AWY") == -asd);
}

TEST_CASE("compute_asd sign and degenerate cases") {
  SUBCASE("tied all game is zero for both orientations") {
    auto intervals = compute_intervals(
        {mk(1, 0, EventType::Faceoff, "", 0, 0),
         mk(2, 1800, EventType::Other, "", 0, 0)});
    CHECK(compute_asd(intervals, "HME") == 0.0);
    CHECK(compute_asd(intervals, "AWY") == 0.0);
  }
  SUBCASE("home leads by 1 throughout, away orientation is -1") {
    auto intervals =
        compute_intervals({mk(1, 0, EventType::Other, "", 1, 0)});
    CHECK(compute_asd(intervals, "AWY") == -1.0);
  }
  SUBCASE("intervals not covering regulation") {
    std::vector<EventInterval> short_game = {
        {mk(1, 0, EventType::Other, "", 0, 0), 1200.0}};
    CHECK_THROWS_AS(compute_asd(short_game, "HME"), ValidationError);
  }
  SUBCASE("unknown orientation team") {
    CHECK_THROWS_AS(compute_asd(asd_example_intervals(), "XXX"),
                    ValidationError);
  }
}

TEST_CASE("build_team_games on a hand-tallied fixture") {
  // 600 s of 5v4 (t in [500, 1100)) leaves 3000 s of NEN5v5.
  GameLog game;
  game.season = "20122013";
  game.game_id = "G1";
  game.home_team = "HME";
  game.away_team = "AWY";
  game.events.push_back(mk(1, 0, EventType::Faceoff, "", 0, 0));
  game.events.push_back(mk(1, 500, EventType::Other, "", 0, 0, 5, 4));
  game.events.push_back(mk(1, 700, EventType::Hit, "HME", 0, 0, 5, 4));
  game.events.push_back(mk(1, 1100, EventType::Other, "", 0, 0));
  // 14 home hits in NEN5v5 time.
  for (int i = 0; i < 14; ++i) {
    game.events.push_back(mk(2, 1300 + 10 * i, EventType::Hit, "HME", 0, 0));
  }
  game.events.push_back(mk(2, 2000, EventType::Shot, "AWY", 0, 0));
  game.events.push_back(mk(2, 2010, EventType::Goal, "AWY", 0, 1));
  game.events.push_back(mk(3, 2500, EventType::Take, "HME", 0, 1));
  game.events.push_back(mk(3, 2600, EventType::Give, "AWY", 0, 1));
  game.events.push_back(mk(3, 2700, EventType::Give, "HME", 0, 1));
  game.events.push_back(mk(3, 2800, EventType::Miss, "AWY", 0, 1));
  game.events.push_back(mk(3, 2900, EventType::Block, "AWY", 0, 1));

  auto [home, away] = build_team_games(game);
  CHECK(home.nen5v5_seconds == 3000.0);
  CHECK(home.is_home);
  CHECK(!away.is_home);
  CHECK(home.for_team == "HME");
  CHECK(home.against_team == "AWY");
  CHECK(away.for_team == "AWY");
  CHECK(home.rink == "HME");
  CHECK(away.rink == "HME");

  // The 5v4 hit does not count; 14 NEN hits over 3000 s prorate to 16.8.
  CHECK(home.count_of(EventType::Hit) == 14);
  CHECK(home.rate_of(ModelEvent::Hit) == 16.8);

  // Hand tallies.
  CHECK(away.count_of(EventType::Shot) == 1);
  CHECK(away.goal_count() == 1);
  CHECK(away.count_of(EventType::Miss) == 1);
  CHECK(away.count_of(EventType::Block) == 1);
  CHECK(home.count_of(EventType::Take) == 1);
  CHECK(away.count_of(EventType::Give) == 1);
  CHECK(home.count_of(EventType::Give) == 1);

  // TURN: home TAKE + away GIVE; away TAKE + home GIVE.
  CHECK(home.rate_of(ModelEvent::Turn) == prorate(2, 3000));
  CHECK(away.rate_of(ModelEvent::Turn) == prorate(1, 3000));

  // CORSI = shots + misses + blocks prorated, plus the raw goal count.
  CHECK(away.rate_of(ModelEvent::Corsi) ==
        doctest::Approx(prorate(3, 3000) + 1.0).epsilon(1e-12));
  CHECK(away.rate_of(ModelEvent::Fenwick) ==
        doctest::Approx(prorate(2, 3000) + 1.0).epsilon(1e-12));
  CHECK(home.rate_of(ModelEvent::Corsi) == 0.0);

  // ASD: away leads by 1 from t=2010 on, for-team orientation.
  const double expected_asd = -(3600.0 - 2010.0) / 3600.0;
  CHECK(home.asd == doctest::Approx(expected_asd).epsilon(1e-12));
  CHECK(away.asd == doctest::Approx(-expected_asd).epsilon(1e-12));

  SUBCASE("prorated goal term variant") {
    TeamGameOptions options;
    options.goal_term = GoalTerm::Prorated;
    auto [h2, a2] = build_team_games(game, options);
    CHECK(a2.rate_of(ModelEvent::Corsi) ==
          doctest::Approx(prorate(3, 3000) + prorate(1, 3000)).epsilon(1e-12));
  }
  SUBCASE("home ASD orientation keeps both rows home-minus-away") {
    TeamGameOptions options;
    options.asd_orientation = AsdOrientation::Home;
    auto [h2, a2] = build_team_games(game, options);
    CHECK(h2.asd == a2.asd);
    CHECK(h2.asd == doctest::Approx(expected_asd).epsilon(1e-12));
  }
  SUBCASE("rink map renames the arena") {
    TeamGameOptions options;
    options.rinks.add("20122013", "HME", "ARENA2");
    auto [h2, a2] = build_team_games(game, options);
    CHECK(h2.rink == "ARENA2");
    CHECK(a2.rink == "ARENA2");
  }
}

TEST_CASE("turnover zero case") {
  GameLog game;
  game.season = "20122013";
  game.game_id = "G1";
  game.home_team = "HME";
  game.away_team = "AWY";
  game.events.push_back(mk(1, 0, EventType::Faceoff, "", 0, 0));
  game.events.push_back(mk(2, 1500, EventType::Give, "HME", 0, 0));
  auto [home, away] = build_team_games(game);
  CHECK(home.rate_of(ModelEvent::Turn) == 0.0);  // no home TAKE, no away GIVE
  CHECK(away.rate_of(ModelEvent::Turn) == prorate(1, 3600));
}

TEST_CASE("games with short regulation coverage or zero NEN5v5 are rejected") {
  GameLog late_start;
  late_start.season = "20122013";
  late_start.game_id = "G1";
  late_start.home_team = "HME";
  late_start.away_team = "AWY";
  late_start.events.push_back(mk(1, 60, EventType::Faceoff, "", 0, 0));
  CHECK_THROWS_AS(build_team_games(late_start), ValidationError);

  GameLog no_nen = late_start;
  no_nen.game_id = "G2";
  no_nen.events.clear();
  no_nen.events.push_back(mk(1, 0, EventType::Faceoff, "", 0, 0, 5, 4));
  CHECK_THROWS_AS(build_team_games(no_nen), ValidationError);

  IngestDiagnostics diag;
  auto rows = build_all_team_games({late_start, no_nen}, {}, &diag);
  CHECK(rows.empty());
  CHECK(diag.rejected.size() == 2);
}

TEST_CASE("exclude_games drops configured ids with a diagnostic") {
  GameLog game;
  game.season = "20122013";
  game.game_id = "G9";
  game.home_team = "HME";
  game.away_team = "AWY";
  game.events.push_back(mk(1, 0, EventType::Faceoff, "", 0, 0));
  TeamGameOptions options;
  options.exclude_games.insert("G9");
  IngestDiagnostics diag;
  CHECK(build_all_team_games({game}, options, &diag).empty());
  REQUIRE(diag.rejected.size() == 1);
  CHECK(diag.rejected[0].reason == "excluded by configuration");
}

TEST_CASE("relabeling equivariance: swapping home/away swaps the rows") {
  SyntheticConfig config = SyntheticConfig::demo();
  config.seasons = {"20122013"};
  config.games_per_season = {6};
  config.seed = 17;
  auto output = generate_event_level(config);
  for (const GameLog& game : output.games) {
    auto [home, away] = build_team_games(game);
    auto [home2, away2] = build_team_games(swap_home_away(game));

    // The original away team now owns the home row, with identical rates and
    // the same for-team-oriented ASD; positionally the ASD negates.
    CHECK(home2.for_team == away.for_team);
    CHECK(home2.rate == away.rate);
    CHECK(home2.asd == doctest::Approx(away.asd).epsilon(1e-12));
    CHECK(home2.asd == doctest::Approx(-home.asd).epsilon(1e-12));
    CHECK(away2.for_team == home.for_team);
    CHECK(away2.rate == home.rate);
    CHECK(away2.asd == doctest::Approx(-away.asd).epsilon(1e-12));
  }
}

TEST_CASE("turnovers split the giveaway/takeaway total and FENWICK <= CORSI") {
  SyntheticConfig config = SyntheticConfig::demo();
  config.seasons = {"20122013"};
  config.games_per_season = {10};
  config.seed = 3;
  auto output = generate_event_level(config);
  for (const GameLog& game : output.games) {
    auto [home, away] = build_team_games(game);
    const double total_give_take =
        prorate(home.count_of(EventType::Give) + home.count_of(EventType::Take) +
                    away.count_of(EventType::Give) +
                    away.count_of(EventType::Take),
                home.nen5v5_seconds);
    CHECK(home.rate_of(ModelEvent::Turn) + away.rate_of(ModelEvent::Turn) ==
          doctest::Approx(total_give_take).epsilon(1e-12));
    CHECK(home.rate_of(ModelEvent::Fenwick) <= home.rate_of(ModelEvent::Corsi));
    CHECK(away.rate_of(ModelEvent::Fenwick) <= away.rate_of(ModelEvent::Corsi));
  }
}

TEST_CASE("rink map loads from CSV and defaults to the team id") {
  const char* path = "rink_map_test.csv";
  {
    std::ofstream out(path);
    out << "season,team,rink\n";
    out << "20102011,WPG,ATL_ARENA\n";
    out << "20112012,WPG,WPG_ARENA\n";
  }
  RinkMap map = RinkMap::from_csv_file(path);
  CHECK(map.rink_for("20102011", "WPG") == "ATL_ARENA");
  CHECK(map.rink_for("20112012", "WPG") == "WPG_ARENA");
  CHECK(map.rink_for("20112012", "BOS") == "BOS");
  std::remove(path);

  {
    std::ofstream out(path);
    out << "wrong,header,row\n";
  }
  CHECK_THROWS_AS(RinkMap::from_csv_file(path), ValidationError);
  std::remove(path);
}

TEST_CASE("team-game table round-trips exactly") {
  SyntheticConfig config = SyntheticConfig::demo();
  config.seasons = {"20112012", "20122013"};
  config.games_per_season = {7, 5};
  config.seed = 11;
  auto output = generate_team_games(config);

  std::ostringstream out;
  write_team_games_csv(out, output.team_games);
  std::istringstream in(out.str());
  auto parsed = read_team_games_csv(in);
  REQUIRE(parsed.size() == output.team_games.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const TeamGame& a = output.team_games[i];
    const TeamGame& b = parsed[i];
    CHECK(a.season == b.season);
    CHECK(a.game_id == b.game_id);
    CHECK(a.for_team == b.for_team);
    CHECK(a.against_team == b.against_team);
    CHECK(a.is_home == b.is_home);
    CHECK(a.rink == b.rink);
    CHECK(a.asd == b.asd);
    CHECK(a.nen5v5_seconds == b.nen5v5_seconds);
    CHECK(a.rate == b.rate);
    CHECK(a.count == b.count);
  }
  CHECK(seasons_of(parsed) ==
        std::vector<std::string>{"20112012", "20122013"});
}
