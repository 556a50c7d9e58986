#pragma once
// Browser-facing gateway: wire-protocol frames carried base64 over HTTP long-poll.
//
//   POST /session                 -> {"session": N}
//   POST /send?session=N          body: one base64 frame per line -> {"accepted": k}
//   GET  /poll?session=N&wait=MS  -> {"frames": [base64...], "closed": bool}
//   POST /close?session=N
//   GET  /registry                -> {"version": v, "blocks": [{"id", "meta", "name", "colour"}...]}
//   GET  /hash                    -> {"hash": "<16 hex digits>", "non_air": n, "tick": t}

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "voxelbot/block_registry.hpp"
#include "voxelbot/protocol.hpp"
#include "voxelbot/server.hpp"

namespace httplib {
class Server;
}

namespace voxelbot {

[[nodiscard]] std::string base64_encode(const protocol::Bytes& bytes);
// Throws std::invalid_argument on malformed input.
[[nodiscard]] protocol::Bytes base64_decode(std::string_view text);

[[nodiscard]] std::string hash_hex(std::uint64_t h);

class Gateway {
public:
    // `mutex` guards `core`; it is the same mutex the TCP server uses.
    Gateway(WorldServer& core, std::mutex& mutex, const BlockRegistry& registry);
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    // Binds and serves on a background thread. Port 0 picks a free port. Throws NetError on failure.
    std::uint16_t start(std::uint16_t port, const std::string& host = "127.0.0.1");
    void stop();

private:
    WorldServer& core_;
    std::mutex& mutex_;
    const BlockRegistry& registry_;
    std::unique_ptr<httplib::Server> http_;
    std::thread thread_;
    std::map<std::uint64_t, ConnectionId> sessions_;  // guarded by mutex_
    std::uint64_t next_session_ = 1;
};

}  // namespace voxelbot
