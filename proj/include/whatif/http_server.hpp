#pragma once

#include <string>

#include "whatif/service.hpp"

namespace whatif {

/// Blocks serving `service` over HTTP until the process is stopped. Every
/// response carries permissive CORS headers so a browser front end on
/// another origin can call the API.
void serve(Service& service, const std::string& host, int port);

}  // namespace whatif
