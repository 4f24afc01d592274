#pragma once

#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "covfair/decomposition.hpp"
#include "covfair/entailment.hpp"
#include "httplib.h"
#include "json.hpp"

namespace testing {

// In-process stand-in for the entailment service. Entailment replies use the
// lexical overlap rule; decomposition replies use the rule-based splitter.
class StubServer {
public:
    std::atomic<int> fail_first{0};      // answer this many requests with 503
    std::atomic<int> client_error{0};    // when nonzero, answer every request with this status
    std::atomic<int> requests{0};
    std::atomic<int> in_flight{0};
    std::atomic<int> max_in_flight{0};
    std::atomic<int> delay_ms{0};
    std::string required_token;
    std::string model = "stub-nli";
    bool empty_decomposition = false;

    StubServer() {
        server_.new_task_queue = [] { return new httplib::ThreadPool(16); };
        server_.Get("/health", [this](const httplib::Request& req, httplib::Response& res) {
            if (!admit(req, res)) return;
            reply(res, {{"status", "ok"}, {"model", model}, {"mode", "stub"}});
        });
        server_.Post("/v1/entail", [this](const httplib::Request& req, httplib::Response& res) {
            if (!admit(req, res)) return;
            int now = ++in_flight;
            int prev = max_in_flight.load();
            while (now > prev && !max_in_flight.compare_exchange_weak(prev, now)) {
            }
            if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            auto body = nlohmann::json::parse(req.body);
            nlohmann::json probs = nlohmann::json::array();
            for (const auto& p : body.at("pairs")) {
                probs.push_back(covfair::lexical_entailment(p.at("premise").get<std::string>(),
                                                            p.at("hypothesis").get<std::string>()));
            }
            {
                std::lock_guard lock(mutex_);
                batch_sizes.push_back(body.at("pairs").size());
            }
            --in_flight;
            reply(res, {{"probs", probs}});
        });
        server_.Post("/v1/decompose", [this](const httplib::Request& req, httplib::Response& res) {
            if (!admit(req, res)) return;
            auto body = nlohmann::json::parse(req.body);
            nlohmann::json units = nlohmann::json::array();
            for (const auto& t : body.at("texts")) {
                units.push_back(empty_decomposition
                                    ? std::vector<std::string>{}
                                    : covfair::decompose_rule_based(t.get<std::string>()));
            }
            if (units.empty()) units.push_back(nlohmann::json::array());
            reply(res, {{"units", units}});
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::vector<std::size_t> batches() {
        std::lock_guard lock(mutex_);
        return batch_sizes;
    }

private:
    bool admit(const httplib::Request& req, httplib::Response& res) {
        ++requests;
        if (client_error != 0) {
            res.status = client_error;
            return false;
        }
        if (fail_first > 0) {
            --fail_first;
            res.status = 503;
            return false;
        }
        if (!required_token.empty() &&
            req.get_header_value("Authorization") != "Bearer " + required_token) {
            res.status = 401;
            return false;
        }
        return true;
    }

    static void reply(httplib::Response& res, const nlohmann::json& j) {
        res.set_content(j.dump(), "application/json");
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mutex_;
    std::vector<std::size_t> batch_sizes;
};

// Nothing listens on the tcpmux port, so connections are refused at once.
inline std::string dead_endpoint() { return "http://127.0.0.1:1"; }

}  // namespace testing
