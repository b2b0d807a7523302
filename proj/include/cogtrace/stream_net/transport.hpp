#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cogtrace/stream_net/clock_sync.hpp"
#include "cogtrace/stream_net/frame.hpp"
#include "cogtrace/stream_net/simulator.hpp"
#include "cogtrace/stream_net/socket.hpp"
#include "cogtrace/stream_net/stream_types.hpp"

namespace cogtrace::net {

struct NetworkConfig {
    std::string discovery_host = "127.0.0.1";
    std::uint16_t discovery_port = 16571;
    double announce_interval_s = 1.0;
    std::string bind_host = "127.0.0.1";

    // COGTRACE_DISCOVERY_PORT, COGTRACE_ANNOUNCE_INTERVAL, COGTRACE_DISCOVERY_HOST
    // override the corresponding fields.
    NetworkConfig with_env_overrides() const;
};

// What a device advertises: identity plus where to fetch samples and where
// to send clock probes.
struct StreamEndpoint {
    StreamInfo info;
    std::string host;
    std::uint16_t data_port = 0;
    std::uint16_t probe_port = 0;

    bool operator==(const StreamEndpoint&) const = default;
};

std::string encode_announcement(const StreamEndpoint& endpoint);
// nullopt for anything that is not a well-formed announcement.
std::optional<StreamEndpoint> decode_announcement(std::string_view datagram);

// Listens for announcements; reports each source_id once.
class DiscoveryListener {
public:
    explicit DiscoveryListener(const std::string& host, std::uint16_t port);
    std::uint16_t port() const { return local_port(socket_); }
    // Newly seen endpoints arriving within timeout.
    std::vector<StreamEndpoint> poll(double timeout_s);

private:
    Socket socket_;
    std::vector<std::string> seen_;
};

std::vector<StreamEndpoint> discover(const NetworkConfig& config, double timeout_s);
std::vector<StreamInfo> discover_streams(double timeout_s, const NetworkConfig& config = {});

// Probe datagrams, little-endian:
//   request  "CTPQ" u64 seq f64 t0
//   reply    "CTPR" u64 seq f64 t0 f64 t1 f64 t2
class ProbeResponder {
public:
    ProbeResponder(const std::string& host, std::function<double()> sender_clock);
    ~ProbeResponder();
    std::uint16_t port() const { return port_; }

private:
    void run();
    Socket socket_;
    std::uint16_t port_ = 0;
    std::function<double()> clock_;
    std::atomic<bool> stop_{false};
    std::thread thread_;
};

// Sends `count` probes and collects replies (lost probes are skipped).
std::vector<ClockProbe> probe_clock(const std::string& host, std::uint16_t port, std::size_t count,
                                    double reply_timeout_s = 0.2);

// TCP server side of one stream; pushes frames to every connected inlet.
class StreamOutlet {
public:
    StreamOutlet(StreamInfo info, const std::string& host, std::uint16_t port = 0);
    ~StreamOutlet();
    std::uint16_t port() const { return port_; }
    const StreamInfo& info() const { return info_; }
    void push(const Chunk& chunk);
    std::size_t client_count() const;

private:
    void accept_loop();
    StreamInfo info_;
    Socket listener_;
    std::uint16_t port_ = 0;
    mutable std::mutex mutex_;
    std::vector<Socket> clients_;
    std::atomic<bool> stop_{false};
    std::thread acceptor_;
};

// TCP client side; one logical reader.
class StreamInlet {
public:
    StreamInlet(const std::string& host, std::uint16_t port);
    // Next chunk within timeout, nullopt on timeout. Throws ProtocolError
    // once the outlet has gone away.
    std::optional<Chunk> pull(double timeout_s);
    void close() { socket_.shutdown(); }

private:
    Socket socket_;
    FrameReader reader_;
};

// A simulator served over the network in real time: outlet, announcer and
// probe responder on its own thread.
class LiveDevice {
public:
    LiveDevice(DeviceProfile profile, NetworkConfig config, double chunk_period_s = 0.05);
    ~LiveDevice();
    void start();
    void stop();
    const StreamEndpoint& endpoint() const { return endpoint_; }
    std::uint64_t emitted() const { return emitted_.load(); }

private:
    void run();
    double sender_now() const;

    DeviceProfile profile_;
    NetworkConfig config_;
    double chunk_period_s_;
    std::optional<StreamOutlet> outlet_;
    std::optional<ProbeResponder> responder_;
    StreamEndpoint endpoint_;
    Socket announce_socket_;
    std::atomic<bool> stop_{false};
    std::atomic<std::uint64_t> emitted_{0};
    std::thread thread_;
};

}  // namespace cogtrace::net
