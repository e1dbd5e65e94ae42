#include "opsel/broker.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <iostream>
#include <set>

#include "opsel/config_io.hpp"

namespace opsel {

using nlohmann::json;

BrokerDefaults BrokerDefaults::from_scenario(const ScenarioConfig& config)
{
    BrokerDefaults d;
    d.weights = config.score_weights;
    d.mode = config.aspiration_mode;
    d.price_ref = config.price_ref();
    d.services[config.service.name] = config.service;
    return d;
}

std::string encode_frame(std::string_view payload)
{
    const auto n = static_cast<std::uint32_t>(payload.size());
    std::string out;
    out.reserve(payload.size() + 4);
    out.push_back(static_cast<char>((n >> 24) & 0xff));
    out.push_back(static_cast<char>((n >> 16) & 0xff));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
    out.append(payload);
    return out;
}

namespace {

std::uint32_t frame_length(std::string_view bytes)
{
    auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])); };
    return (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
}

}  // namespace

std::optional<std::string> pop_frame(std::string& buffer)
{
    if (buffer.size() < 4) return std::nullopt;
    const std::size_t n = frame_length(buffer);
    if (buffer.size() < 4 + n) return std::nullopt;
    std::string payload = buffer.substr(4, n);
    buffer.erase(0, 4 + n);
    return payload;
}

std::string encode_request(const SelectionRequest& request)
{
    json offers = json::array();
    for (const auto& o : request.offers)
        offers.push_back({{"op", to_string(o.op)},
                          {"delivered", qos_to_json(o.delivered)},
                          {"sp", o.sp},
                          {"cs", o.cs},
                          {"has_capacity", o.has_capacity}});
    return json{{"request_id", request.request_id},
                {"user", {{"home_op", to_string(request.home_op)}, {"p", request.p}, {"service", request.service}}},
                {"strategy", {{"w_u", request.strategy.w_u}, {"w_op", request.strategy.w_op}}},
                {"offers", offers}}
        .dump();
}

namespace {

OperatorId decode_op(const json& j, const std::string& id)
{
    if (j.is_number_integer()) return OperatorId{j.get<int>()};
    if (j.is_string())
        if (auto op = parse_operator_id(j.get<std::string>())) return *op;
    throw RequestError(id, "bad operator id");
}

double decode_number(const json& obj, const char* key, const std::string& id)
{
    if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_number())
        throw RequestError(id, std::string("missing or non-numeric '") + key + "'");
    return obj.at(key).get<double>();
}

}  // namespace

SelectionRequest decode_request(std::string_view payload)
{
    json j = json::parse(payload, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw RequestError("", "malformed request: not a JSON object");

    SelectionRequest req;
    if (!j.contains("request_id") || !j["request_id"].is_string())
        throw RequestError("", "missing request_id");
    req.request_id = j["request_id"].get<std::string>();
    const std::string& id = req.request_id;

    if (!j.contains("user") || !j["user"].is_object()) throw RequestError(id, "missing user");
    const auto& user = j["user"];
    if (!user.contains("home_op")) throw RequestError(id, "missing user.home_op");
    req.home_op = decode_op(user["home_op"], id);
    req.p = decode_number(user, "p", id);
    if (!user.contains("service") || !user["service"].is_string()) throw RequestError(id, "missing user.service");
    req.service = user["service"].get<std::string>();

    if (!j.contains("strategy")) throw RequestError(id, "missing strategy");
    req.strategy = {decode_number(j["strategy"], "w_u", id), decode_number(j["strategy"], "w_op", id)};

    if (!j.contains("offers") || !j["offers"].is_array()) throw RequestError(id, "missing offers");
    for (const auto& o : j["offers"]) {
        if (!o.is_object() || !o.contains("op")) throw RequestError(id, "bad offer");
        OfferSpec offer;
        offer.op = decode_op(o["op"], id);
        if (!o.contains("delivered")) throw RequestError(id, "offer without delivered QoS");
        try {
            offer.delivered = qos_from_json(o["delivered"]);
        } catch (const ConfigError& e) {
            throw RequestError(id, e.what());
        }
        offer.sp = decode_number(o, "sp", id);
        offer.cs = decode_number(o, "cs", id);
        if (o.contains("has_capacity")) {
            if (!o["has_capacity"].is_boolean()) throw RequestError(id, "has_capacity must be boolean");
            offer.has_capacity = o["has_capacity"].get<bool>();
        }
        req.offers.push_back(std::move(offer));
    }
    return req;
}

std::string encode_response(const SelectionResponse& response)
{
    json per = json::array();
    for (const auto& c : response.per_candidate)
        per.push_back({{"op", to_string(c.op)}, {"d", c.distance}, {"g", c.profit}, {"cf", c.cf}});
    return json{{"request_id", response.request_id},
                {"chosen", response.chosen ? json(to_string(*response.chosen)) : json(nullptr)},
                {"per_candidate", per},
                {"error", response.error ? json(*response.error) : json(nullptr)}}
        .dump();
}

SelectionResponse decode_response(std::string_view payload)
{
    json j = json::parse(payload);
    SelectionResponse r;
    r.request_id = j.at("request_id").get<std::string>();
    if (!j.at("chosen").is_null()) r.chosen = parse_operator_id(j["chosen"].get<std::string>());
    for (const auto& c : j.at("per_candidate")) {
        CandidateEval e;
        e.op = *parse_operator_id(c.at("op").get<std::string>());
        e.distance = c.at("d").get<double>();
        e.profit = c.at("g").get<double>();
        e.cf = c.at("cf").get<double>();
        r.per_candidate.push_back(e);
    }
    if (!j.at("error").is_null()) r.error = j["error"].get<std::string>();
    return r;
}

SelectionResponse evaluate_request(const SelectionRequest& request, const BrokerDefaults& defaults)
{
    const std::string& id = request.request_id;
    if (request.offers.empty()) throw RequestError(id, "no candidates");
    auto svc = defaults.services.find(request.service);
    if (svc == defaults.services.end()) throw RequestError(id, "unknown service '" + request.service + "'");
    if (!(request.p >= 0.0)) throw RequestError(id, "p must be >= 0");
    const auto& w = request.strategy;
    if (!(w.w_u >= 0.0) || !(w.w_op >= 0.0) || (w.w_u == 0.0 && w.w_op == 0.0))
        throw RequestError(id, "invalid strategy weights");

    std::set<OperatorId> seen;
    std::vector<OperatorConfig> candidates;
    for (const auto& o : request.offers) {
        if (!seen.insert(o.op).second) throw RequestError(id, "duplicate offer for " + to_string(o.op));
        if (o.op == request.home_op) throw RequestError(id, "offer from the home operator");
        if (!(o.sp >= 0.0) || !(o.cs >= 0.0)) throw RequestError(id, "prices must be >= 0");
        OperatorConfig op;
        op.id = o.op;
        op.delivered = o.delivered;
        op.sp = o.sp;
        op.cs = o.cs;
        candidates.push_back(std::move(op));
    }

    UserContext user{request.home_op, request.p, &svc->second};
    try {
        const Score su = user_score(user, candidates, defaults.weights, defaults.price_ref, defaults.mode);
        std::vector<CandidateOffer> offers;
        for (std::size_t i = 0; i < candidates.size(); ++i)
            offers.push_back({candidates[i].id, network_score(candidates[i], user, defaults.weights, defaults.price_ref),
                              candidates[i].cs, request.offers[i].has_capacity});
        const Decision decision = select_operator(user, su, offers, request.strategy);
        return {id, decision.chosen, decision.per_candidate, std::nullopt};
    } catch (const std::domain_error& e) {
        throw RequestError(id, e.what());
    }
}

std::string handle_payload(std::string_view payload, const BrokerDefaults& defaults)
{
    try {
        return encode_response(evaluate_request(decode_request(payload), defaults));
    } catch (const RequestError& e) {
        return encode_response({e.request_id(), std::nullopt, {}, std::string(e.what())});
    }
}

namespace {

struct Endpoint {
    std::string host;
    std::string port;
};

Endpoint split_endpoint(const std::string& endpoint)
{
    auto colon = endpoint.rfind(':');
    if (colon == std::string::npos || colon + 1 == endpoint.size())
        throw BrokerError("endpoint must be host:port, got '" + endpoint + "'");
    Endpoint e{endpoint.substr(0, colon), endpoint.substr(colon + 1)};
    if (e.host.empty()) e.host = "0.0.0.0";
    return e;
}

addrinfo* resolve(const Endpoint& e, bool passive)
{
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    if (int rc = getaddrinfo(e.host.c_str(), e.port.c_str(), &hints, &res); rc != 0)
        throw BrokerError("cannot resolve " + e.host + ":" + e.port + ": " + gai_strerror(rc));
    return res;
}

bool write_all(int fd, std::string_view bytes)
{
    while (!bytes.empty()) {
        ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

}  // namespace

BrokerServer::BrokerServer(BrokerDefaults defaults) : defaults_(std::move(defaults)) {}

BrokerServer::~BrokerServer() { stop(); }

std::uint16_t BrokerServer::start(const std::string& endpoint)
{
    if (running_) throw BrokerError("broker already running");
    const auto e = split_endpoint(endpoint);
    addrinfo* res = resolve(e, true);

    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
        freeaddrinfo(res);
        throw BrokerError(std::string("socket: ") + std::strerror(errno));
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
        const std::string err = std::strerror(errno);
        freeaddrinfo(res);
        ::close(fd);
        throw BrokerError("cannot bind " + endpoint + ": " + err);
    }
    freeaddrinfo(res);

    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);

    listen_fd_ = fd;
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
    return ntohs(bound.sin_port);
}

void BrokerServer::stop()
{
    if (!running_.exchange(false)) return;
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;

    std::vector<Worker> workers;
    {
        std::lock_guard lock(mu_);
        for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
        workers.swap(workers_);
    }
    for (auto& w : workers) w.thread.join();
}

void BrokerServer::accept_loop()
{
    while (running_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        reap_finished();
        if (::poll(&pfd, 1, 100) <= 0) continue;
        int client = ::accept(listen_fd_, nullptr, nullptr);
        if (client < 0) continue;
        std::lock_guard lock(mu_);
        client_fds_.push_back(client);
        auto done = std::make_shared<std::atomic<bool>>(false);
        workers_.push_back({std::thread([this, client, done] {
                                serve_connection(client);
                                *done = true;
                            }),
                            done});
    }
}

void BrokerServer::reap_finished()
{
    std::vector<Worker> finished;
    {
        std::lock_guard lock(mu_);
        auto split = std::partition(workers_.begin(), workers_.end(), [](const Worker& w) { return !*w.done; });
        std::move(split, workers_.end(), std::back_inserter(finished));
        workers_.erase(split, workers_.end());
    }
    for (auto& w : finished) w.thread.join();
}

void BrokerServer::serve_connection(int fd)
{
    std::string buffer;
    std::set<std::string> seen_ids;
    std::size_t discard = 0;
    char chunk[8192];

    while (true) {
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        std::string_view incoming(chunk, static_cast<std::size_t>(n));

        if (discard > 0) {
            const std::size_t skip = std::min(discard, incoming.size());
            discard -= skip;
            incoming.remove_prefix(skip);
        }
        buffer.append(incoming);

        bool ok = true;
        while (ok && discard == 0) {
            if (buffer.size() >= 4 && frame_length(buffer) > kMaxFrameBytes) {
                const std::size_t len = frame_length(buffer);
                const std::size_t have = std::min(buffer.size() - 4, len);
                discard = len - have;
                buffer.erase(0, 4 + have);
                ok = write_all(fd, encode_frame(encode_response(
                                       {"", std::nullopt, {}, std::string("frame too large")})));
                continue;
            }
            auto payload = pop_frame(buffer);
            if (!payload) break;

            std::string reply;
            try {
                auto request = decode_request(*payload);
                if (!seen_ids.insert(request.request_id).second)
                    throw RequestError(request.request_id, "duplicate request_id on this connection");
                reply = encode_response(evaluate_request(request, defaults_));
            } catch (const RequestError& e) {
                reply = encode_response({e.request_id(), std::nullopt, {}, std::string(e.what())});
            }
            ok = write_all(fd, encode_frame(reply));
        }
        if (!ok) break;
    }

    std::lock_guard lock(mu_);
    client_fds_.erase(std::remove(client_fds_.begin(), client_fds_.end(), fd), client_fds_.end());
    ::close(fd);
}

BrokerClient::~BrokerClient()
{
    if (fd_ >= 0) ::close(fd_);
}

void BrokerClient::connect(const std::string& endpoint)
{
    auto e = split_endpoint(endpoint);
    if (e.host == "0.0.0.0") e.host = "127.0.0.1";
    addrinfo* res = resolve(e, false);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0 || ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
        const std::string err = std::strerror(errno);
        freeaddrinfo(res);
        if (fd >= 0) ::close(fd);
        throw BrokerError("cannot connect to " + endpoint + ": " + err);
    }
    freeaddrinfo(res);
    fd_ = fd;
}

void BrokerClient::send_raw(std::string_view bytes)
{
    if (!write_all(fd_, bytes)) throw BrokerError("send failed");
}

std::string BrokerClient::read_frame()
{
    char chunk[8192];
    while (true) {
        if (auto payload = pop_frame(buffer_)) return *payload;
        ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw BrokerError("connection closed");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::string BrokerClient::roundtrip(std::string_view payload)
{
    send_frame(payload);
    return read_frame();
}

void serve(const std::string& endpoint, const BrokerDefaults& defaults)
{
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    BrokerServer server(defaults);
    const auto port = server.start(endpoint);
    std::cout << "broker listening on port " << port << std::endl;

    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
}

}  // namespace opsel
