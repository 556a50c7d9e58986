#include "voxelbot/gateway.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <httplib.h>
#include <json.hpp>
#include <sstream>

#include "voxelbot/net.hpp"

namespace voxelbot {

namespace pr = protocol;
using nlohmann::json;

std::string base64_encode(const pr::Bytes& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

pr::Bytes base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw std::invalid_argument("base64 length must be a multiple of 4");
    pr::Bytes out(text.size() / 4 * 3 + 1);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) throw std::invalid_argument("malformed base64");
    // The decoder counts padding as zero bytes.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Gateway::Gateway(WorldServer& core, std::mutex& mutex, const BlockRegistry& registry)
    : core_(core), mutex_(mutex), registry_(registry) {}

Gateway::~Gateway() { stop(); }

void Gateway::stop() {
    if (http_) http_->stop();
    if (thread_.joinable()) thread_.join();
    http_.reset();
}

std::uint16_t Gateway::start(std::uint16_t port, const std::string& host) {
    http_ = std::make_unique<httplib::Server>();
    auto& http = *http_;
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    auto reply = [](httplib::Response& res, const json& body, int status = 200) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    };
    // Looks up ?session=N; replies 404 and returns nullopt when unknown. Caller holds mutex_.
    auto session_of = [this, reply](const httplib::Request& req, httplib::Response& res) -> std::optional<ConnectionId> {
        std::uint64_t s = 0;
        try {
            s = std::stoull(req.get_param_value("session"));
        } catch (const std::exception&) {
            reply(res, {{"error", "missing or bad session"}}, 400);
            return std::nullopt;
        }
        auto it = sessions_.find(s);
        if (it == sessions_.end()) {
            reply(res, {{"error", "unknown session"}}, 404);
            return std::nullopt;
        }
        return it->second;
    };

    http.Post("/session", [this, reply](const httplib::Request&, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        const std::uint64_t s = next_session_++;
        sessions_[s] = core_.connect();
        reply(res, {{"session", s}});
    });

    http.Post("/send", [this, reply, session_of](const httplib::Request& req, httplib::Response& res) {
        std::vector<pr::Message> msgs;
        std::istringstream lines(req.body);
        std::string line;
        std::size_t index = 0;
        while (std::getline(lines, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            try {
                const auto bytes = base64_decode(line);
                const auto d = pr::decode(bytes);
                if (!d || d->consumed != bytes.size()) throw pr::ProtocolError("frame " + std::to_string(index) + " is not exactly one message", 0);
                msgs.push_back(d->message);
            } catch (const std::exception& e) {
                reply(res, {{"error", "frame " + std::to_string(index) + ": " + e.what()}}, 400);
                return;
            }
            ++index;
        }
        std::lock_guard lock(mutex_);
        const auto c = session_of(req, res);
        if (!c) return;
        for (const auto& m : msgs) core_.receive(*c, m);
        reply(res, {{"accepted", msgs.size()}});
    });

    http.Get("/poll", [this, reply, session_of](const httplib::Request& req, httplib::Response& res) {
        int wait_ms = 0;
        if (req.has_param("wait")) {
            try {
                wait_ms = std::clamp(std::stoi(req.get_param_value("wait")), 0, 25000);
            } catch (const std::exception&) {
                wait_ms = 0;
            }
        }
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(wait_ms);
        for (;;) {
            {
                std::lock_guard lock(mutex_);
                const auto c = session_of(req, res);
                if (!c) return;
                auto msgs = core_.drain(*c);
                const bool closed = core_.closed(*c);
                if (!msgs.empty() || closed || std::chrono::steady_clock::now() >= deadline) {
                    json frames = json::array();
                    for (const auto& m : msgs) frames.push_back(base64_encode(pr::encode(m)));
                    reply(res, {{"frames", frames}, {"closed", closed}});
                    return;
                }
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
    });

    http.Post("/close", [this, reply, session_of](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        const auto c = session_of(req, res);
        if (!c) return;
        core_.disconnect(*c);
        sessions_.erase(std::stoull(req.get_param_value("session")));
        reply(res, {{"closed", true}});
    });

    http.Get("/registry", [this, reply](const httplib::Request&, httplib::Response& res) {
        json blocks = json::array();
        for (const auto& [b, info] : registry_.entries()) {
            blocks.push_back({{"id", b.id}, {"meta", b.meta}, {"name", info.name}, {"colour", info.colour}});
        }
        reply(res, {{"version", registry_.version()}, {"blocks", blocks}});
    });

    http.Get("/hash", [this, reply](const httplib::Request&, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        reply(res, {{"hash", hash_hex(core_.world().hash())}, {"non_air", core_.world().non_air_count()}, {"tick", core_.now()}});
    });

    const int bound = port == 0 ? http.bind_to_any_port(host) : (http.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        http_.reset();
        throw NetError("gateway cannot listen on " + host + ":" + std::to_string(port));
    }
    thread_ = std::thread([this] { http_->listen_after_bind(); });
    http.wait_until_ready();
    return static_cast<std::uint16_t>(bound);
}

}  // namespace voxelbot
