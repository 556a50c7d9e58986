#include "voxelbot/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <iostream>

namespace voxelbot {

namespace pr = protocol;

namespace {

std::string errno_text() { return std::strerror(errno); }

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

// Sends everything, blocking on a full socket buffer. Returns false if the peer is gone.
bool send_all(int fd, const std::uint8_t* data, std::size_t n) {
    while (n > 0) {
        const ssize_t k = ::send(fd, data, n, MSG_NOSIGNAL);
        if (k < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) {
                pollfd p{fd, POLLOUT, 0};
                ::poll(&p, 1, 100);
                continue;
            }
            return false;
        }
        data += k;
        n -= static_cast<std::size_t>(k);
    }
    return true;
}

}  // namespace

std::pair<std::string, std::uint16_t> parse_host_port(const std::string& s) {
    const auto colon = s.rfind(':');
    std::string host = colon == std::string::npos ? std::string{} : s.substr(0, colon);
    const std::string port_text = colon == std::string::npos ? s : s.substr(colon + 1);
    if (host.empty()) host = "127.0.0.1";
    std::size_t used = 0;
    int port = 0;
    try {
        port = std::stoi(port_text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != port_text.size() || port_text.empty() || port < 0 || port > 65535) throw NetError("bad address '" + s + "'");
    return {host, static_cast<std::uint16_t>(port)};
}

// ---------------------------------------------------------------------------------------------
// Client

TcpTransport::TcpTransport(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port_text = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), port_text.c_str(), &hints, &res); rc != 0) {
        throw NetError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    std::string last_error = "no addresses";
    for (addrinfo* a = res; a; a = a->ai_next) {
        const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
            fd_ = fd;
            break;
        }
        last_error = errno_text();
        ::close(fd);
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) throw NetError("cannot connect to " + host + ":" + port_text + ": " + last_error);
    set_nodelay(fd_);
}

TcpTransport::~TcpTransport() { close(); }

void TcpTransport::close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void TcpTransport::send(const pr::Message& m) {
    if (fd_ < 0) throw NetError("not connected");
    const auto bytes = pr::encode(m);
    if (!send_all(fd_, bytes.data(), bytes.size())) {
        close();
        throw NetError("connection lost");
    }
}

std::vector<pr::Message> TcpTransport::receive(int timeout_ms) {
    std::vector<pr::Message> out;
    while (auto m = reader_.next()) out.push_back(std::move(*m));
    if (fd_ < 0) return out;
    int wait = out.empty() ? timeout_ms : 0;
    std::uint8_t buf[65536];
    for (;;) {
        pollfd p{fd_, POLLIN, 0};
        const int rc = ::poll(&p, 1, wait);
        if (rc <= 0) break;
        const ssize_t k = ::recv(fd_, buf, sizeof buf, 0);
        if (k <= 0) {
            if (k < 0 && errno == EINTR) continue;
            close();
            break;
        }
        reader_.feed({buf, static_cast<std::size_t>(k)});
        while (auto m = reader_.next()) out.push_back(std::move(*m));
        wait = 0;
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Server

TcpServer::TcpServer(WorldServer& core, std::uint16_t port, const std::string& host) : core_(core) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw NetError("socket: " + errno_text());
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw NetError("bad listen address " + host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0) {
        const std::string why = errno_text();
        ::close(listen_fd_);
        throw NetError("cannot listen on " + host + ":" + std::to_string(port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    set_nonblocking(listen_fd_);
}

TcpServer::~TcpServer() {
    for (auto& c : clients_) ::close(c.fd);
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::accept_clients() {
    for (;;) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) return;
        set_nonblocking(fd);
        set_nodelay(fd);
        Client c;
        c.fd = fd;
        {
            std::lock_guard lock(mutex_);
            c.id = core_.connect();
        }
        clients_.push_back(std::move(c));
    }
}

void TcpServer::read_client(Client& c) {
    std::uint8_t buf[65536];
    for (;;) {
        const ssize_t k = ::recv(c.fd, buf, sizeof buf, 0);
        if (k < 0 && errno == EINTR) continue;
        if (k < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) return;
        if (k <= 0) {
            ::close(c.fd);
            c.fd = -1;
            return;
        }
        c.reader.feed({buf, static_cast<std::size_t>(k)});
        try {
            while (auto m = c.reader.next()) {
                std::lock_guard lock(mutex_);
                core_.receive(c.id, *m);
            }
        } catch (const pr::ProtocolError& e) {
            std::cerr << "connection " << c.id << ": protocol error at byte " << e.offset() << ": " << e.what() << '\n';
            pr::Bytes bytes = pr::encode(pr::Disconnect{std::string("protocol error: ") + e.what()});
            send_all(c.fd, bytes.data(), bytes.size());
            ::close(c.fd);
            c.fd = -1;
            return;
        }
    }
}

void TcpServer::write_client(Client& c) {
    if (c.fd < 0) return;
    std::vector<pr::Message> out;
    bool closed = false;
    {
        std::lock_guard lock(mutex_);
        out = core_.drain(c.id);
        closed = core_.closed(c.id);
    }
    for (const auto& m : out) pr::encode_append(m, c.pending);
    if (!c.pending.empty()) {
        if (!send_all(c.fd, c.pending.data(), c.pending.size())) {
            ::close(c.fd);
            c.fd = -1;
        }
        c.pending.clear();
    }
    if (closed && c.fd >= 0) {
        ::shutdown(c.fd, SHUT_WR);
        ::close(c.fd);
        c.fd = -1;
    }
}

void TcpServer::poll_once(int timeout_ms) {
    std::vector<pollfd> fds;
    fds.push_back({listen_fd_, POLLIN, 0});
    for (const auto& c : clients_) fds.push_back({c.fd, POLLIN, 0});
    ::poll(fds.data(), fds.size(), timeout_ms);
    if (fds[0].revents & POLLIN) accept_clients();
    for (std::size_t i = 1; i < fds.size(); ++i) {
        if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) read_client(clients_[i - 1]);
    }
    flush();
}

void TcpServer::flush() {
    for (auto& c : clients_) write_client(c);
    for (auto& c : clients_) {
        if (c.fd < 0) {
            std::lock_guard lock(mutex_);
            core_.disconnect(c.id);
        }
    }
    std::erase_if(clients_, [](const Client& c) { return c.fd < 0; });
}

void TcpServer::run(const std::atomic<bool>& stop, int tick_ms) {
    using clock = std::chrono::steady_clock;
    auto next_tick = clock::now() + std::chrono::milliseconds(tick_ms);
    while (!stop.load()) {
        int timeout = 20;
        if (tick_ms > 0) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(next_tick - clock::now()).count();
            timeout = static_cast<int>(std::max<long long>(0, std::min<long long>(left, 20)));
        }
        poll_once(timeout);
        if (tick_ms > 0 && clock::now() >= next_tick) {
            {
                std::lock_guard lock(mutex_);
                core_.tick();
            }
            next_tick += std::chrono::milliseconds(tick_ms);
            if (clock::now() > next_tick + std::chrono::milliseconds(50 * tick_ms)) next_tick = clock::now();
            flush();
        }
    }
    std::lock_guard lock(mutex_);
    core_.flush_record();
}

}  // namespace voxelbot
