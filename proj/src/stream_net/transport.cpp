#include "cogtrace/stream_net/transport.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <sys/socket.h>

#include <nlohmann/json.hpp>

#include "cogtrace/common/error.hpp"

namespace cogtrace::net {

using nlohmann::json;

namespace {

constexpr std::string_view kAnnounceType = "cogtrace.announce";
constexpr int kAnnounceVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
std::uint64_t get_u64(std::string_view in, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}
double get_f64(std::string_view in, std::size_t at) { return std::bit_cast<double>(get_u64(in, at)); }

std::span<const std::byte> as_bytes(const std::string& s) {
    return std::as_bytes(std::span(s.data(), s.size()));
}

}  // namespace

NetworkConfig NetworkConfig::with_env_overrides() const {
    NetworkConfig c = *this;
    if (const char* p = std::getenv("COGTRACE_DISCOVERY_PORT"))
        c.discovery_port = static_cast<std::uint16_t>(std::stoul(p));
    if (const char* p = std::getenv("COGTRACE_ANNOUNCE_INTERVAL")) c.announce_interval_s = std::stod(p);
    if (const char* p = std::getenv("COGTRACE_DISCOVERY_HOST")) c.discovery_host = p;
    return c;
}

std::string encode_announcement(const StreamEndpoint& e) {
    json j{{"type", kAnnounceType},
           {"version", kAnnounceVersion},
           {"host", e.host},
           {"data_port", e.data_port},
           {"probe_port", e.probe_port},
           {"info",
            {{"name", e.info.name},
             {"modality", to_string(e.info.modality)},
             {"channel_count", e.info.channel_count},
             {"nominal_rate", e.info.nominal_rate},
             {"channel_labels", e.info.channel_labels},
             {"source_id", e.info.source_id}}}};
    return j.dump();
}

std::optional<StreamEndpoint> decode_announcement(std::string_view datagram) {
    auto j = json::parse(datagram, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
        if (j.at("type").get<std::string>() != kAnnounceType) return std::nullopt;
        if (j.at("version").get<int>() != kAnnounceVersion) return std::nullopt;
        StreamEndpoint e;
        e.host = j.at("host").get<std::string>();
        e.data_port = j.at("data_port").get<std::uint16_t>();
        e.probe_port = j.at("probe_port").get<std::uint16_t>();
        const auto& i = j.at("info");
        e.info.name = i.at("name").get<std::string>();
        auto m = parse_modality(i.at("modality").get<std::string>());
        if (!m) return std::nullopt;
        e.info.modality = *m;
        e.info.channel_count = i.at("channel_count").get<std::uint32_t>();
        e.info.nominal_rate = i.at("nominal_rate").get<double>();
        e.info.channel_labels = i.at("channel_labels").get<std::vector<std::string>>();
        e.info.source_id = i.at("source_id").get<std::string>();
        validate(e.info);
        return e;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

DiscoveryListener::DiscoveryListener(const std::string& host, std::uint16_t port)
    : socket_(udp_bind(host, port)) {}

std::vector<StreamEndpoint> DiscoveryListener::poll(double timeout_s) {
    std::vector<StreamEndpoint> found;
    const double deadline = local_clock() + timeout_s;
    while (true) {
        const double left = deadline - local_clock();
        if (left <= 0) break;
        auto d = recv_datagram(socket_, left);
        if (!d) break;
        auto e = decode_announcement(d->payload);
        if (!e) continue;
        if (std::find(seen_.begin(), seen_.end(), e->info.source_id) != seen_.end()) continue;
        seen_.push_back(e->info.source_id);
        found.push_back(std::move(*e));
    }
    return found;
}

std::vector<StreamEndpoint> discover(const NetworkConfig& config, double timeout_s) {
    DiscoveryListener listener(config.discovery_host, config.discovery_port);
    auto found = listener.poll(timeout_s);
    std::sort(found.begin(), found.end(),
              [](const auto& a, const auto& b) { return a.info.source_id < b.info.source_id; });
    return found;
}

std::vector<StreamInfo> discover_streams(double timeout_s, const NetworkConfig& config) {
    std::vector<StreamInfo> infos;
    for (auto& e : discover(config, timeout_s)) infos.push_back(std::move(e.info));
    return infos;
}

ProbeResponder::ProbeResponder(const std::string& host, std::function<double()> sender_clock)
    : socket_(udp_bind(host, 0)), clock_(std::move(sender_clock)) {
    port_ = local_port(socket_);
    thread_ = std::thread([this] { run(); });
}

ProbeResponder::~ProbeResponder() {
    stop_ = true;
    if (thread_.joinable()) thread_.join();
}

void ProbeResponder::run() {
    while (!stop_) {
        auto d = recv_datagram(socket_, 0.05);
        if (!d) continue;
        const double t1 = clock_();
        const auto& p = d->payload;
        if (p.size() != 20 || p.compare(0, 4, "CTPQ") != 0) continue;
        std::string reply = "CTPR";
        put_u64(reply, get_u64(p, 4));
        put_f64(reply, get_f64(p, 12));
        put_f64(reply, t1);
        put_f64(reply, clock_());
        try {
            send_datagram(socket_, d->from_host, d->from_port, as_bytes(reply));
        } catch (const ProtocolError&) {
            // Requester vanished; nothing to answer.
        }
    }
}

std::vector<ClockProbe> probe_clock(const std::string& host, std::uint16_t port, std::size_t count,
                                    double reply_timeout_s) {
    Socket s = udp_bind("0.0.0.0", 0);
    std::vector<ClockProbe> probes;
    for (std::uint64_t seq = 0; seq < count; ++seq) {
        std::string req = "CTPQ";
        put_u64(req, seq);
        const double t0 = local_clock();
        put_f64(req, t0);
        send_datagram(s, host, port, as_bytes(req));
        const double deadline = t0 + reply_timeout_s;
        while (true) {
            const double left = deadline - local_clock();
            if (left <= 0) break;
            auto d = recv_datagram(s, left);
            if (!d) break;
            const double t3 = local_clock();
            const auto& r = d->payload;
            if (r.size() != 36 || r.compare(0, 4, "CTPR") != 0 || get_u64(r, 4) != seq) continue;
            probes.push_back({get_f64(r, 12), get_f64(r, 20), get_f64(r, 28), t3});
            break;
        }
    }
    return probes;
}

StreamOutlet::StreamOutlet(StreamInfo info, const std::string& host, std::uint16_t port)
    : info_(std::move(info)), listener_(tcp_listen(host, port)) {
    validate(info_);
    port_ = local_port(listener_);
    acceptor_ = std::thread([this] { accept_loop(); });
}

StreamOutlet::~StreamOutlet() {
    stop_ = true;
    listener_.shutdown();
    if (acceptor_.joinable()) acceptor_.join();
}

void StreamOutlet::accept_loop() {
    while (!stop_) {
        if (!wait_readable(listener_, 0.05)) continue;
        int fd = ::accept(listener_.fd(), nullptr, nullptr);
        if (fd < 0) continue;
        std::lock_guard lock(mutex_);
        clients_.emplace_back(fd);
    }
}

void StreamOutlet::push(const Chunk& chunk) {
    const auto frame = encode_chunk(chunk);
    std::lock_guard lock(mutex_);
    for (auto it = clients_.begin(); it != clients_.end();) {
        try {
            send_all(*it, frame);
            ++it;
        } catch (const ProtocolError&) {
            it = clients_.erase(it);
        }
    }
}

std::size_t StreamOutlet::client_count() const {
    std::lock_guard lock(mutex_);
    return clients_.size();
}

StreamInlet::StreamInlet(const std::string& host, std::uint16_t port)
    : socket_(tcp_connect(host, port)) {}

std::optional<Chunk> StreamInlet::pull(double timeout_s) {
    if (auto c = reader_.next()) return c;
    const double deadline = local_clock() + timeout_s;
    std::byte buf[16384];
    while (true) {
        const double left = deadline - local_clock();
        if (left <= 0 || !wait_readable(socket_, left)) return std::nullopt;
        const auto n = recv_some(socket_, buf);
        if (n == 0) throw ProtocolError("stream closed by outlet");
        reader_.feed(std::span(buf, n));
        if (auto c = reader_.next()) return c;
    }
}

LiveDevice::LiveDevice(DeviceProfile profile, NetworkConfig config, double chunk_period_s)
    : profile_(std::move(profile)), config_(std::move(config)), chunk_period_s_(chunk_period_s) {
    DeviceSimulator probe_config(profile_);  // validates before any socket is opened
    (void)probe_config;
}

LiveDevice::~LiveDevice() { stop(); }

double LiveDevice::sender_now() const { return profile_.clock.sender_time(local_clock()); }

void LiveDevice::start() {
    if (thread_.joinable()) return;
    outlet_.emplace(profile_.info, config_.bind_host);
    responder_.emplace(config_.bind_host, [this] { return sender_now(); });
    endpoint_ = {profile_.info, config_.bind_host == "0.0.0.0" ? "127.0.0.1" : config_.bind_host,
                 outlet_->port(), responder_->port()};
    announce_socket_ = udp_bind("0.0.0.0", 0);
    stop_ = false;
    thread_ = std::thread([this] { run(); });
}

void LiveDevice::stop() {
    stop_ = true;
    if (thread_.joinable()) thread_.join();
    outlet_.reset();
    responder_.reset();
}

void LiveDevice::run() {
    auto profile = profile_;
    profile.start_time = sender_now();
    DeviceSimulator sim(profile);
    const auto announcement = encode_announcement(endpoint_);
    double next_announce = 0.0;
    while (!stop_) {
        const double now = local_clock();
        if (now >= next_announce) {
            try {
                send_datagram(announce_socket_, config_.discovery_host, config_.discovery_port,
                              as_bytes(announcement));
            } catch (const ProtocolError&) {
            }
            next_announce = now + config_.announce_interval_s;
        }
        auto samples = sim.generate_until(sender_now());
        if (!samples.empty()) {
            emitted_ += samples.size();
            outlet_->push(Chunk{profile.info.source_id, std::move(samples)});
        }
        std::this_thread::sleep_for(std::chrono::duration<double>(chunk_period_s_));
    }
}

}  // namespace cogtrace::net
