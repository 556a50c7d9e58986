#pragma once
// Transports between clients and the world server: in-process and TCP.

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "voxelbot/protocol.hpp"
#include "voxelbot/server.hpp"

namespace voxelbot {

class NetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Client side of a connection.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(const protocol::Message& m) = 0;
    // Messages that have arrived, waiting up to timeout_ms for the first one.
    virtual std::vector<protocol::Message> receive(int timeout_ms = 0) = 0;
    [[nodiscard]] virtual bool connected() const = 0;
};

// Talks to a WorldServer in the same process. The caller drives server ticks.
class LocalTransport : public Transport {
public:
    explicit LocalTransport(WorldServer& server) : server_(server), id_(server.connect()) {}
    ~LocalTransport() override { server_.disconnect(id_); }
    LocalTransport(const LocalTransport&) = delete;
    LocalTransport& operator=(const LocalTransport&) = delete;

    void send(const protocol::Message& m) override { server_.receive(id_, m); }
    std::vector<protocol::Message> receive(int = 0) override { return server_.drain(id_); }
    [[nodiscard]] bool connected() const override { return !server_.closed(id_); }
    [[nodiscard]] ConnectionId id() const { return id_; }

private:
    WorldServer& server_;
    ConnectionId id_;
};

class TcpTransport : public Transport {
public:
    // Throws NetError when the server cannot be reached.
    TcpTransport(const std::string& host, std::uint16_t port);
    ~TcpTransport() override;
    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    void send(const protocol::Message& m) override;
    std::vector<protocol::Message> receive(int timeout_ms = 0) override;
    [[nodiscard]] bool connected() const override { return fd_ >= 0; }
    void close();

private:
    int fd_ = -1;
    protocol::FrameReader reader_;
};

// "host:port" with host defaulting to 127.0.0.1.
[[nodiscard]] std::pair<std::string, std::uint16_t> parse_host_port(const std::string& s);

// Serves a WorldServer over TCP using poll(). Every touch of the WorldServer happens under mutex().
class TcpServer {
public:
    // Binds immediately; port 0 picks a free port. Throws NetError when the port is busy.
    TcpServer(WorldServer& core, std::uint16_t port, const std::string& host = "127.0.0.1");
    ~TcpServer();
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    [[nodiscard]] std::uint16_t port() const { return port_; }
    [[nodiscard]] std::mutex& mutex() { return mutex_; }

    // Accepts, reads, dispatches and flushes once.
    void poll_once(int timeout_ms);
    // Runs until stop is set, ticking every tick_ms (0 disables ticking).
    void run(const std::atomic<bool>& stop, int tick_ms);
    // Writes out anything queued by other threads (for example the gateway).
    void flush();

private:
    struct Client {
        int fd = -1;
        ConnectionId id = 0;
        protocol::FrameReader reader;
        protocol::Bytes pending;
    };

    void accept_clients();
    void read_client(Client& c);
    void write_client(Client& c);

    WorldServer& core_;
    std::mutex mutex_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::vector<Client> clients_;
};

}  // namespace voxelbot
