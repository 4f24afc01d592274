#include "http_json.hpp"

#include <thread>

#include "covfair/errors.hpp"
#include "httplib.h"

namespace covfair::detail {

HttpTarget parse_endpoint(const std::string& endpoint) {
    if (endpoint.empty()) throw ConfigError("remote endpoint is empty");
    auto scheme = endpoint.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("remote endpoint must start with http://: " + endpoint);
    }
    auto slash = endpoint.find('/', scheme + 3);
    HttpTarget t;
    if (slash == std::string::npos) {
        t.base = endpoint;
    } else {
        t.base = endpoint.substr(0, slash);
        t.path_prefix = endpoint.substr(slash);
        while (!t.path_prefix.empty() && t.path_prefix.back() == '/') t.path_prefix.pop_back();
    }
    return t;
}

namespace {

template <typename Send>
nlohmann::json with_retries(const std::string& endpoint, const std::string& path,
                            const HttpOptions& options, Send send) {
    HttpTarget target = parse_endpoint(endpoint);
    std::string last_error;
    auto backoff = options.initial_backoff;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        httplib::Client client(target.base);
        client.set_connection_timeout(options.timeout);
        client.set_read_timeout(options.timeout);
        client.set_write_timeout(options.timeout);
        if (!options.auth_token.empty()) client.set_bearer_token_auth(options.auth_token);

        httplib::Result res = send(client, target.path_prefix + path);
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            // Client errors are not retryable.
            throw TransportError(endpoint + path + " returned HTTP " +
                                 std::to_string(res->status) + ": " + res->body);
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(endpoint + path + " returned invalid JSON: " + e.what());
        }
    }
    throw TransportError(endpoint + path + " failed after " +
                         std::to_string(options.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace

nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body, const HttpOptions& options) {
    const std::string payload = body.dump();
    return with_retries(endpoint, path, options,
                        [&](httplib::Client& c, const std::string& full_path) {
                            return c.Post(full_path, payload, "application/json");
                        });
}

nlohmann::json get_json(const std::string& endpoint, const std::string& path,
                        const HttpOptions& options) {
    return with_retries(endpoint, path, options,
                        [&](httplib::Client& c, const std::string& full_path) {
                            return c.Get(full_path);
                        });
}

}  // namespace covfair::detail
