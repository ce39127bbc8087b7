#pragma once

#include <string>
#include <vector>

#include "gcs/client_core.hpp"

namespace gcs {

/// Display lines for one client event. Every event renders to at least one
/// line; a roster renders one line per member.
///
///   [2024-03-01 10:00:00] bob: hi
///   [2024-03-01 10:00:00] bob (private): hi
///   *** bob is now the coordinator
///   !!! not_coordinator: bob is not the coordinator; alice is
std::vector<std::string> render_event(const ClientEvent& event);

}  // namespace gcs
