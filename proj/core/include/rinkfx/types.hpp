#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace rinkfx {

/// Play-by-play event kinds as recorded in the input log. FAC and OTHER rows
/// carry no team attribution.
enum class EventType : std::uint8_t {
  Shot,
  Miss,
  Block,
  Hit,
  Give,
  Take,
  Goal,
  Faceoff,
  Other,
};

inline constexpr std::array<EventType, 9> kAllEventTypes = {
    EventType::Shot, EventType::Miss,    EventType::Block,
    EventType::Hit,  EventType::Give,    EventType::Take,
    EventType::Goal, EventType::Faceoff, EventType::Other,
};

std::string_view to_string(EventType type);
std::optional<EventType> event_type_from(std::string_view name);

/// Response events the models are fit on: the six recorded primitives plus
/// the derived CORSI, FENWICK and TURN rates.
enum class ModelEvent : std::uint8_t {
  Shot,
  Miss,
  Block,
  Hit,
  Give,
  Take,
  Corsi,
  Fenwick,
  Turn,
};

inline constexpr int kNumModelEvents = 9;

inline constexpr std::array<ModelEvent, 9> kAllModelEvents = {
    ModelEvent::Shot, ModelEvent::Miss,  ModelEvent::Block,
    ModelEvent::Hit,  ModelEvent::Give,  ModelEvent::Take,
    ModelEvent::Corsi, ModelEvent::Fenwick, ModelEvent::Turn,
};

inline constexpr std::array<ModelEvent, 6> kPrimitiveModelEvents = {
    ModelEvent::Shot, ModelEvent::Miss, ModelEvent::Block,
    ModelEvent::Hit,  ModelEvent::Give, ModelEvent::Take,
};

std::string_view to_string(ModelEvent event);
std::optional<ModelEvent> model_event_from(std::string_view name);

/// True for the six directly recorded events (not CORSI/FENWICK/TURN).
constexpr bool is_primitive(ModelEvent event) {
  return static_cast<int>(event) < 6;
}

/// The recorded event a primitive model event corresponds to.
constexpr EventType to_event_type(ModelEvent event) {
  return static_cast<EventType>(static_cast<int>(event));
}

}  // namespace rinkfx
