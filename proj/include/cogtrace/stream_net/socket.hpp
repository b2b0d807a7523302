#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace cogtrace::net {

// Owning POSIX socket descriptor.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) noexcept : fd_(fd) {}
    ~Socket() { close(); }
    Socket(Socket&& other) noexcept : fd_(other.release()) {}
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            close();
            fd_ = other.release();
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    int release() noexcept {
        int fd = fd_;
        fd_ = -1;
        return fd;
    }
    void close() noexcept;
    // Unblocks a thread sitting in accept/recv on this socket.
    void shutdown() noexcept;

private:
    int fd_ = -1;
};

// Receiver-side monotonic clock in seconds.
double local_clock();

Socket udp_bind(const std::string& host, std::uint16_t port);
Socket tcp_listen(const std::string& host, std::uint16_t port);
Socket tcp_connect(const std::string& host, std::uint16_t port);
std::uint16_t local_port(const Socket& s);

// True when readable within timeout (seconds); false on timeout.
bool wait_readable(const Socket& s, double timeout_s);

void send_all(const Socket& s, std::span<const std::byte> data);
// Returns bytes read; 0 on orderly shutdown.
std::size_t recv_some(const Socket& s, std::span<std::byte> buffer);

void send_datagram(const Socket& s, const std::string& host, std::uint16_t port,
                   std::span<const std::byte> data);
struct Datagram {
    std::string payload;
    std::string from_host;
    std::uint16_t from_port = 0;
};
std::optional<Datagram> recv_datagram(const Socket& s, double timeout_s);

}  // namespace cogtrace::net
