#include "cogtrace/stream_net/socket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>

#include "cogtrace/common/error.hpp"

namespace cogtrace::net {

namespace {

[[noreturn]] void fail(const std::string& what) {
    throw ProtocolError(what + ": " + std::strerror(errno));
}

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    const std::string h = host.empty() ? "0.0.0.0" : (host == "localhost" ? "127.0.0.1" : host);
    if (inet_pton(AF_INET, h.c_str(), &addr.sin_addr) == 1) return addr;
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (getaddrinfo(h.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
        throw ProtocolError("cannot resolve host " + host);
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    freeaddrinfo(res);
    return addr;
}

int poll_timeout_ms(double timeout_s) {
    if (timeout_s < 0) return -1;
    return static_cast<int>(std::ceil(timeout_s * 1000.0));
}

}  // namespace

void Socket::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Socket::shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

double local_clock() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

Socket udp_bind(const std::string& host, std::uint16_t port) {
    Socket s(::socket(AF_INET, SOCK_DGRAM, 0));
    if (!s.valid()) fail("udp socket");
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    auto addr = resolve(host, port);
    if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        fail("udp bind port " + std::to_string(port));
    return s;
}

Socket tcp_listen(const std::string& host, std::uint16_t port) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) fail("tcp socket");
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    auto addr = resolve(host, port);
    if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        fail("tcp bind port " + std::to_string(port));
    if (::listen(s.fd(), 16) != 0) fail("listen");
    return s;
}

Socket tcp_connect(const std::string& host, std::uint16_t port) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) fail("tcp socket");
    auto addr = resolve(host, port);
    if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        fail("connect " + host + ":" + std::to_string(port));
    int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return s;
}

std::uint16_t local_port(const Socket& s) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) fail("getsockname");
    return ntohs(addr.sin_port);
}

bool wait_readable(const Socket& s, double timeout_s) {
    pollfd p{s.fd(), POLLIN, 0};
    while (true) {
        int rc = ::poll(&p, 1, poll_timeout_ms(timeout_s));
        if (rc < 0 && errno == EINTR) continue;
        if (rc < 0) fail("poll");
        return rc > 0;
    }
}

void send_all(const Socket& s, std::span<const std::byte> data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        auto n = ::send(s.fd(), data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("send");
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::size_t recv_some(const Socket& s, std::span<std::byte> buffer) {
    while (true) {
        auto n = ::recv(s.fd(), buffer.data(), buffer.size(), 0);
        if (n < 0 && errno == EINTR) continue;
        if (n < 0) fail("recv");
        return static_cast<std::size_t>(n);
    }
}

void send_datagram(const Socket& s, const std::string& host, std::uint16_t port,
                   std::span<const std::byte> data) {
    auto addr = resolve(host, port);
    auto n = ::sendto(s.fd(), data.data(), data.size(), 0, reinterpret_cast<sockaddr*>(&addr),
                      sizeof addr);
    if (n < 0) fail("sendto");
}

std::optional<Datagram> recv_datagram(const Socket& s, double timeout_s) {
    if (!wait_readable(s, timeout_s)) return std::nullopt;
    char buf[65536];
    sockaddr_in from{};
    socklen_t len = sizeof from;
    auto n = ::recvfrom(s.fd(), buf, sizeof buf, 0, reinterpret_cast<sockaddr*>(&from), &len);
    if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) return std::nullopt;
        fail("recvfrom");
    }
    char host[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &from.sin_addr, host, sizeof host);
    return Datagram{std::string(buf, static_cast<std::size_t>(n)), host, ntohs(from.sin_port)};
}

}  // namespace cogtrace::net
