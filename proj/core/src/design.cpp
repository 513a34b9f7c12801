#include "rinkfx/design.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "rinkfx/csv.hpp"
#include "rinkfx/errors.hpp"

namespace rinkfx {

std::string_view to_string(ColumnFamily family) {
  switch (family) {
    case ColumnFamily::Intercept: return "intercept";
    case ColumnFamily::Rink: return "rink";
    case ColumnFamily::Asd: return "asd";
    case ColumnFamily::TeamFor: return "for";
    case ColumnFamily::TeamAgainst: return "against";
    case ColumnFamily::Home: return "home";
    case ColumnFamily::HomeRink: return "homer";
  }
  return "intercept";
}

std::optional<ColumnFamily> column_family_from(std::string_view name) {
  for (ColumnFamily family :
       {ColumnFamily::Intercept, ColumnFamily::Rink, ColumnFamily::Asd,
        ColumnFamily::TeamFor, ColumnFamily::TeamAgainst, ColumnFamily::Home,
        ColumnFamily::HomeRink}) {
    if (to_string(family) == name) return family;
  }
  return std::nullopt;
}

std::string ColumnLabel::str() const {
  std::string s{to_string(family)};
  if (!level.empty()) s += ":" + level;
  if (!season.empty()) s += "@" + season;
  return s;
}

std::optional<int> DesignMatrix::find(const ColumnLabel& label) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] == label) return static_cast<int>(j);
  }
  return std::nullopt;
}

namespace {

struct Levels {
  std::vector<std::string> seasons;
  std::vector<std::string> rinks;
  std::vector<std::string> teams;

  static Levels collect(std::span<const TeamGame> rows) {
    std::set<std::string> seasons, rinks, teams;
    for (const TeamGame& tg : rows) {
      seasons.insert(tg.season);
      rinks.insert(tg.rink);
      teams.insert(tg.for_team);
      teams.insert(tg.against_team);
    }
    return {{seasons.begin(), seasons.end()},
            {rinks.begin(), rinks.end()},
            {teams.begin(), teams.end()}};
  }
};

Encoded encode(std::span<const TeamGame> rows, ModelEvent event, bool pooled,
               const EncodeOptions& options) {
  if (rows.empty()) throw ValidationError("encode: no team games");
  Levels levels = Levels::collect(rows);
  if (!pooled && levels.seasons.size() != 1) {
    throw ValidationError("encode_yearly: rows span " +
                          std::to_string(levels.seasons.size()) + " seasons");
  }
  if (levels.rinks.size() < 2) {
    throw ValidationError("encode: fewer than 2 rinks in the data");
  }

  std::set<ColumnFamily> unpenalized = options.unpenalized;
  unpenalized.insert(ColumnFamily::Intercept);

  // Season-specific families carry a season tag only in the pooled model;
  // rink and home-rink columns are always shared.
  const std::string no_season;
  std::vector<ColumnLabel> columns;
  auto add = [&](ColumnFamily family, const std::string& level,
                 const std::string& season) {
    columns.push_back({family, level, season});
  };
  auto per_season = [&](auto&& fn) {
    if (pooled) {
      for (const auto& season : levels.seasons) fn(season);
    } else {
      fn(no_season);
    }
  };

  per_season([&](const std::string& s) { add(ColumnFamily::Intercept, "", s); });
  for (const auto& rink : levels.rinks) add(ColumnFamily::Rink, rink, no_season);
  per_season([&](const std::string& s) { add(ColumnFamily::Asd, "", s); });
  per_season([&](const std::string& s) {
    for (const auto& team : levels.teams) add(ColumnFamily::TeamFor, team, s);
  });
  per_season([&](const std::string& s) {
    for (const auto& team : levels.teams)
      add(ColumnFamily::TeamAgainst, team, s);
  });
  per_season([&](const std::string& s) { add(ColumnFamily::Home, "", s); });
  for (const auto& rink : levels.rinks)
    add(ColumnFamily::HomeRink, rink, no_season);

  std::map<ColumnLabel, int> index;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    index[columns[j]] = static_cast<int>(j);
  }

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = static_cast<Eigen::Index>(columns.size());
  Encoded out;
  out.design.values = Eigen::MatrixXd::Zero(n, p);
  out.design.columns = columns;
  out.design.penalized.resize(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.design.penalized[j] = unpenalized.contains(columns[j].family) ? 0 : 1;
  }
  out.response.resize(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const TeamGame& tg = rows[static_cast<std::size_t>(i)];
    const std::string& s = pooled ? tg.season : no_season;
    auto& X = out.design.values;
    X(i, index.at({ColumnFamily::Intercept, "", s})) = 1.0;
    X(i, index.at({ColumnFamily::Rink, tg.rink, no_season})) = 1.0;
    X(i, index.at({ColumnFamily::Asd, "", s})) = tg.asd;
    X(i, index.at({ColumnFamily::TeamFor, tg.for_team, s})) = 1.0;
    X(i, index.at({ColumnFamily::TeamAgainst, tg.against_team, s})) = 1.0;
    if (tg.is_home) {
      X(i, index.at({ColumnFamily::Home, "", s})) = 1.0;
      X(i, index.at({ColumnFamily::HomeRink, tg.rink, no_season})) = 1.0;
    }
    const double rate = tg.rate_of(event);
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
      throw ValidationError("encode: invalid rate for game " + tg.game_id);
    }
    out.response(i) = std::log(rate + kRateFloor);
  }
  return out;
}

}  // namespace

Encoded encode_yearly(std::span<const TeamGame> team_games, ModelEvent event,
                      const EncodeOptions& options) {
  return encode(team_games, event, /*pooled=*/false, options);
}

Encoded encode_pooled(std::span<const TeamGame> team_games, ModelEvent event,
                      const EncodeOptions& options) {
  return encode(team_games, event, /*pooled=*/true, options);
}

void write_design_csv(std::ostream& out, const Encoded& encoded) {
  CsvTable table;
  for (const auto& label : encoded.design.columns) {
    table.header.push_back(label.str());
  }
  table.header.push_back("response");
  const auto& X = encoded.design.values;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(X.cols()) + 1);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      row.push_back(fmt_double(X(i, j)));
    }
    row.push_back(fmt_double(encoded.response(i)));
    table.rows.push_back(std::move(row));
  }
  write_csv(out, table);
}

}  // namespace rinkfx
