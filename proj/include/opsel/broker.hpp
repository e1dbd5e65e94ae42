// Selection broker: a stateless request/response daemon that runs the
// decision engine on offers collected from cooperating operators.
//
// Wire format: each frame is a 4-byte big-endian payload length followed by a
// UTF-8 JSON document. Requests and responses use the field names below.
//
//   request  {"request_id", "user": {"home_op", "p", "service"},
//             "strategy": {"w_u", "w_op"},
//             "offers": [{"op", "delivered", "sp", "cs", "has_capacity"}]}
//   response {"request_id", "chosen", "per_candidate": [{"op", "d", "g", "cf"}],
//             "error"}
//
// `chosen` is null when no offer has capacity or when `error` is set. One
// response is written per request frame, in request order on a connection.
#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "opsel/decision.hpp"
#include "opsel/model.hpp"

namespace opsel {

inline constexpr std::size_t kMaxFrameBytes = 16u << 20;

struct OfferSpec {
    OperatorId op;
    QosProfile delivered;
    double sp = 0.0;
    double cs = 0.0;
    bool has_capacity = true;
};

struct SelectionRequest {
    std::string request_id;
    OperatorId home_op;
    double p = 0.0;
    std::string service;
    StrategyWeights strategy;
    std::vector<OfferSpec> offers;
};

struct SelectionResponse {
    std::string request_id;
    std::optional<OperatorId> chosen;
    std::vector<CandidateEval> per_candidate;
    std::optional<std::string> error;
};

/// Rejected request; the message goes back in the response's error field.
class RequestError : public std::runtime_error {
public:
    RequestError(std::string request_id, const std::string& message)
        : std::runtime_error(message), request_id_(std::move(request_id))
    {
    }

    const std::string& request_id() const { return request_id_; }

private:
    std::string request_id_;
};

class BrokerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scoring parameters the broker applies to every request.
struct BrokerDefaults {
    ScoreWeights weights;
    AspirationMode mode = AspirationMode::BestCandidate;
    double price_ref = 1.0;
    std::map<std::string, ServiceClass> services;

    static BrokerDefaults from_scenario(const ScenarioConfig& config);
};

std::string encode_frame(std::string_view payload);

/// Removes and returns the first complete frame payload in `buffer`.
std::optional<std::string> pop_frame(std::string& buffer);

std::string encode_request(const SelectionRequest& request);
SelectionRequest decode_request(std::string_view payload);

std::string encode_response(const SelectionResponse& response);
SelectionResponse decode_response(std::string_view payload);

/// Scores the offers and runs select_operator. Throws RequestError.
SelectionResponse evaluate_request(const SelectionRequest& request, const BrokerDefaults& defaults);

/// Full per-frame path: decode, evaluate, encode. Never throws on bad input.
std::string handle_payload(std::string_view payload, const BrokerDefaults& defaults);

class BrokerServer {
public:
    explicit BrokerServer(BrokerDefaults defaults);
    ~BrokerServer();

    BrokerServer(const BrokerServer&) = delete;
    BrokerServer& operator=(const BrokerServer&) = delete;

    /// Binds "host:port" (port 0 picks a free port) and starts accepting.
    /// Returns the bound port. Throws BrokerError on failure.
    std::uint16_t start(const std::string& endpoint);
    void stop();

private:
    struct Worker {
        std::thread thread;
        std::shared_ptr<std::atomic<bool>> done;
    };

    void accept_loop();
    void reap_finished();
    void serve_connection(int fd);

    BrokerDefaults defaults_;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::mutex mu_;
    std::vector<Worker> workers_;
    std::vector<int> client_fds_;
};

/// Blocking client used by tests and tools.
class BrokerClient {
public:
    BrokerClient() = default;
    ~BrokerClient();

    BrokerClient(const BrokerClient&) = delete;
    BrokerClient& operator=(const BrokerClient&) = delete;

    void connect(const std::string& endpoint);
    void send_raw(std::string_view bytes);
    void send_frame(std::string_view payload) { send_raw(encode_frame(payload)); }
    std::string read_frame();
    std::string roundtrip(std::string_view payload);

private:
    int fd_ = -1;
    std::string buffer_;
};

/// Runs a broker on `endpoint` until SIGINT or SIGTERM.
void serve(const std::string& endpoint, const BrokerDefaults& defaults);

}  // namespace opsel
