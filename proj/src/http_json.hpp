#pragma once

#include <chrono>
#include <string>

#include "json.hpp"

namespace covfair::detail {

struct HttpTarget {
    std::string base;         // scheme://host[:port]
    std::string path_prefix;  // e.g. "" or "/api"
};

/// Splits an endpoint URL into the host part and an optional path prefix.
HttpTarget parse_endpoint(const std::string& endpoint);

struct HttpOptions {
    std::string auth_token;
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{200};
    std::chrono::seconds timeout{60};
};

/// POSTs a JSON body and parses the JSON reply. Connection failures and 5xx
/// replies are retried with exponential backoff; anything still failing
/// raises TransportError.
nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body, const HttpOptions& options);

nlohmann::json get_json(const std::string& endpoint, const std::string& path,
                        const HttpOptions& options);

}  // namespace covfair::detail
