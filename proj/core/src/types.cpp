#include "rinkfx/types.hpp"

namespace rinkfx {

std::string_view to_string(EventType type) {
  switch (type) {
    case EventType::Shot: return "SHOT";
    case EventType::Miss: return "MISS";
    case EventType::Block: return "BLOCK";
    case EventType::Hit: return "HIT";
    case EventType::Give: return "GIVE";
    case EventType::Take: return "TAKE";
    case EventType::Goal: return "GOAL";
    case EventType::Faceoff: return "FAC";
    case EventType::Other: return "OTHER";
  }
  return "OTHER";
}

std::optional<EventType> event_type_from(std::string_view name) {
  for (EventType type : kAllEventTypes) {
    if (to_string(type) == name) return type;
  }
  return std::nullopt;
}

std::string_view to_string(ModelEvent event) {
  switch (event) {
    case ModelEvent::Shot: return "SHOT";
    case ModelEvent::Miss: return "MISS";
    case ModelEvent::Block: return "BLOCK";
    case ModelEvent::Hit: return "HIT";
    case ModelEvent::Give: return "GIVE";
    case ModelEvent::Take: return "TAKE";
    case ModelEvent::Corsi: return "CORSI";
    case ModelEvent::Fenwick: return "FENWICK";
    case ModelEvent::Turn: return "TURN";
  }
  return "SHOT";
}

std::optional<ModelEvent> model_event_from(std::string_view name) {
  for (ModelEvent event : kAllModelEvents) {
    if (to_string(event) == name) return event;
  }
  return std::nullopt;
}

}  // namespace rinkfx
