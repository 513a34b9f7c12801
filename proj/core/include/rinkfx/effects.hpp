#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rinkfx/elastic_net.hpp"
#include "rinkfx/team_game.hpp"

namespace rinkfx {

struct EffectEntry {
  double coefficient = 0.0;
  double effect = 1.0;  // exp(coefficient)
  bool nonzero = false;
};

/// Exponentiated coefficients of one fit at its CV-chosen lambda. Yearly
/// tables have a single season key; pooled tables key the season-specific
/// terms by season and share rink/homer entries.
struct EffectTable {
  ModelEvent event = ModelEvent::Shot;
  std::string scope;                 // season id, or "pooled"
  std::vector<std::string> seasons;  // sorted
  std::map<std::string, double> mean_effect;       // by season
  std::map<std::string, EffectEntry> asd_effect;   // by season
  std::map<std::string, EffectEntry> home_effect;  // by season
  std::map<std::string, EffectEntry> rink_effect;  // by rink
  std::map<std::string, EffectEntry> homer_effect; // by rink
};

/// Build an EffectTable from a cross-validated fit.
EffectTable effect_table_from_fit(ModelEvent event, const std::string& scope,
                                  const FitResult& fit);

/// Classification of one (rink, event) pair under the three-condition rule.
/// yearly_effects has one entry per season; NaN marks seasons where the rink
/// is absent from the data.
struct PersistenceEntry {
  std::string rink;
  bool persistent = false;
  int direction = 0;  // +1 above average, -1 below, 0 none
  double pooled_effect = 1.0;
  std::vector<double> yearly_effects;
  bool homer_persistent = false;
  int homer_direction = 0;
  double pooled_homer_effect = 1.0;
};

struct PersistenceReport {
  ModelEvent event = ModelEvent::Shot;
  std::vector<std::string> seasons;
  std::map<std::string, PersistenceEntry> entries;  // by rink
};

struct PersistenceRule {
  /// Minimum count of same-signed nonzero yearly coefficients; -1 means
  /// n_seasons - 1 (at least 1).
  int min_same_signed = -1;

  int resolve(int n_seasons) const;
};

/// Apply the three conditions to one rink: (1) nonzero same-signed yearly
/// coefficient in at least `min_same_signed` seasons, (2) no opposite-signed
/// nonzero yearly coefficient, (3) pooled coefficient nonzero with the same
/// sign. Seasons where the rink is absent count as absent, never as
/// opposite-signed. The same rule classifies the homer interaction.
PersistenceEntry classify_persistence(const std::vector<EffectTable>& yearly,
                                      const EffectTable& pooled,
                                      const std::string& rink,
                                      const PersistenceRule& rule = {});

/// One entry per rink appearing anywhere in the data.
PersistenceReport build_persistence_report(
    const std::vector<EffectTable>& yearly, const EffectTable& pooled,
    const PersistenceRule& rule = {});

/// Everything the pipeline derives for one event: per-season and pooled
/// fits, their effect tables and the persistence classification.
struct EventAnalysis {
  ModelEvent event = ModelEvent::Shot;
  std::vector<std::string> seasons;
  std::vector<EffectTable> yearly;
  EffectTable pooled;
  PersistenceReport report;
  std::vector<FitResult> yearly_fits;
  FitResult pooled_fit;
};

/// Fit one cross-validated model per season plus the pooled model, then
/// classify every rink. CV fold seeds are derived per (event, scope) so
/// adding an event never perturbs another fit's folds. Solver errors are
/// rethrown tagged with (event, scope).
EventAnalysis fit_event_models(std::span<const TeamGame> team_games,
                               ModelEvent event, const ElasticNetSpec& spec,
                               const EncodeOptions& encode_options = {},
                               const PersistenceRule& rule = {},
                               int threads = 1);

/// One row of the cross-event overview table.
struct SummaryRow {
  ModelEvent event = ModelEvent::Shot;
  int persistent_re = 0;
  int persistent_he = 0;
  double re_range = 0.0;  // max - min persistent pooled effect, 0 if none
  double avg_asd_effect = 1.0;   // mean of the yearly ASD effects
  double avg_home_effect = 1.0;  // mean of the yearly home effects
};

SummaryRow summarize_event(const EventAnalysis& analysis);
std::vector<SummaryRow> summarize(const std::vector<EventAnalysis>& analyses);

// Report emission. CSV and JSON forms carry the same content; JSON files
// include a schema_version field.
void write_effects_csv(std::ostream& out, const EventAnalysis& analysis);
std::string effects_json(const EventAnalysis& analysis);
void write_persistence_csv(std::ostream& out, const PersistenceReport& report);
std::string persistence_json(const PersistenceReport& report);
PersistenceReport persistence_from_json(const std::string& text);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
std::string summary_json(const std::vector<SummaryRow>& rows);

/// Plot-ready grid: one row per (rink, season) with the yearly effect and
/// the persistence direction flag.
void write_effect_grid_csv(std::ostream& out, const EventAnalysis& analysis);

/// Slim reload of what `report` needs from effects/persistence JSON output.
struct EventSummaryInput {
  ModelEvent event = ModelEvent::Shot;
  std::vector<std::string> seasons;
  std::map<std::string, EffectEntry> yearly_asd;   // by season
  std::map<std::string, EffectEntry> yearly_home;  // by season
  PersistenceReport report;
};
EventSummaryInput summary_input_from_json(const std::string& effects_text,
                                          const std::string& persistence_text);
SummaryRow summarize_input(const EventSummaryInput& input);
void write_effect_grid_csv(std::ostream& out, const EventSummaryInput& input);

}  // namespace rinkfx
