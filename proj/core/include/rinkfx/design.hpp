#pragma once

#include <Eigen/Core>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "rinkfx/team_game.hpp"
#include "rinkfx/types.hpp"

namespace rinkfx {

/// Zero rates are floored to ln(rate + kRateFloor) so the log response stays
/// finite.
inline constexpr double kRateFloor = 1e-3;

enum class ColumnFamily : std::uint8_t {
  Intercept,
  Rink,
  Asd,
  TeamFor,
  TeamAgainst,
  Home,
  HomeRink,
};

std::string_view to_string(ColumnFamily family);
std::optional<ColumnFamily> column_family_from(std::string_view name);

/// Identifies one design column: family, categorical level (rink or team id,
/// empty for intercept/asd/home) and season (empty for season-shared
/// columns).
struct ColumnLabel {
  ColumnFamily family = ColumnFamily::Intercept;
  std::string level;
  std::string season;

  /// "family[:level][@season]"
  std::string str() const;

  friend auto operator<=>(const ColumnLabel&, const ColumnLabel&) = default;
};

/// Labeled numeric design matrix. Indicator columns are 0/1; the home-rink
/// family is the row-wise product of the home column and the rink family.
struct DesignMatrix {
  Eigen::MatrixXd values;  // n x p
  std::vector<ColumnLabel> columns;
  std::vector<std::uint8_t> penalized;  // 1 = shrunk by the elastic net

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  std::optional<int> find(const ColumnLabel& label) const;
};

struct Encoded {
  DesignMatrix design;
  Eigen::VectorXd response;  // ln(rate + kRateFloor)
};

struct EncodeOptions {
  /// Families exempt from the penalty. The intercept is always exempt.
  std::set<ColumnFamily> unpenalized;
};

/// Single-season design: one intercept, one ASD slope, one home indicator,
/// indicators per observed rink/team level, and home-rink interactions.
/// Throws ValidationError if rows span seasons, or the season has fewer than
/// two rinks.
Encoded encode_yearly(std::span<const TeamGame> team_games, ModelEvent event,
                      const EncodeOptions& options = {});

/// Multi-season design: per-season intercept, ASD, team and home columns;
/// rink and home-rink columns shared across seasons.
Encoded encode_pooled(std::span<const TeamGame> team_games, ModelEvent event,
                      const EncodeOptions& options = {});

/// Debug dump: header row of column labels plus "response", one data row per
/// observation.
void write_design_csv(std::ostream& out, const Encoded& encoded);

}  // namespace rinkfx
