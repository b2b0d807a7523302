#include <doctest.h>

#include <cmath>
#include <limits>
#include <thread>

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "cogtrace/common/error.hpp"
#include "cogtrace/stream_net/frame.hpp"
#include "cogtrace/stream_net/transport.hpp"

using namespace cogtrace;
using namespace cogtrace::net;

namespace {

Chunk random_chunk(testgen::Rng& rng) {
    Chunk c;
    c.stream_id = "s" + std::to_string(rng.integer(0, 999));
    const int channels = rng.integer(1, 16), n = rng.integer(1, 40);
    double t = rng.uniform(-1e3, 1e3);
    for (int i = 0; i < n; ++i) {
        Sample s{t, {}};
        for (int k = 0; k < channels; ++k) s.values.push_back(static_cast<float>(rng.normal(100.0)));
        c.samples.push_back(s);
        t += rng.uniform(0.0, 0.1);
    }
    return c;
}

}  // namespace

TEST_CASE("single sample chunk survives a frame roundtrip") {
    const Chunk c{"eda", {{0.0, {0.0f}}}};
    CHECK(decode_chunk(encode_chunk(c)) == c);
}

TEST_CASE("14-channel EEG chunk keeps values and order") {
    Chunk c{"eeg", {}};
    for (int i = 0; i < 3; ++i) {
        Sample s{i / 128.0, {}};
        for (int ch = 0; ch < 14; ++ch) s.values.push_back(static_cast<float>(i * 100 + ch));
        c.samples.push_back(s);
    }
    const auto back = decode_chunk(encode_chunk(c));
    CHECK(back == c);
    CHECK(back.samples[2].values[13] == 213.0f);
}

TEST_CASE("frame header layout is little-endian with the documented magic") {
    const auto bytes = encode_chunk({"ab", {{1.0, {2.0f}}}});
    // 4 length + 4 magic + 2 version + 2 id length + 2 id + 4 count + 4 channels + 8 + 4
    REQUIRE(bytes.size() == 34);
    CHECK(std::to_integer<int>(bytes[0]) == 30);
    CHECK(std::to_integer<char>(bytes[4]) == 'C');
    CHECK(std::to_integer<char>(bytes[7]) == 'F');
    CHECK(std::to_integer<int>(bytes[8]) == kFrameVersion);
}

TEST_CASE("invalid chunks are rejected") {
    const float nan = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(encode_chunk({"x", {{0.0, {nan}}}}), ProtocolError);
    CHECK_THROWS_AS(encode_chunk({"x", {}}), ProtocolError);
    CHECK_THROWS_AS(encode_chunk({"x", {{0.0, {1.0f}}, {0.1, {1.0f, 2.0f}}}}), ProtocolError);
    CHECK_THROWS_AS(encode_chunk({"x", {{std::numeric_limits<double>::infinity(), {1.0f}}}}), ProtocolError);
}

TEST_CASE("corrupt frames are rejected") {
    auto bytes = encode_chunk({"eda", {{0.5, {1.0f}}}});
    SUBCASE("bad magic") {
        bytes[4] = std::byte{'X'};
        CHECK_THROWS_AS(decode_chunk(bytes), ProtocolError);
    }
    SUBCASE("truncated") {
        bytes.pop_back();
        CHECK_THROWS_AS(decode_chunk(bytes), ProtocolError);
    }
    SUBCASE("trailing bytes") {
        bytes.push_back(std::byte{0});
        CHECK_THROWS_AS(decode_chunk(bytes), ProtocolError);
    }
    SUBCASE("unknown version") {
        bytes[8] = std::byte{9};
        CHECK_THROWS_AS(decode_chunk(bytes), ProtocolError);
    }
}

TEST_CASE("property: random chunks roundtrip through the codec") {
    for (int seed = 0; seed < 300; ++seed) {
        testgen::Rng rng(seed);
        const auto c = random_chunk(rng);
        INFO("seed " << seed);
        CHECK(decode_chunk(encode_chunk(c)) == c);
    }
}

TEST_CASE("property: FrameReader reassembles frames split at arbitrary points") {
    for (int seed = 0; seed < 100; ++seed) {
        testgen::Rng rng(seed);
        std::vector<Chunk> sent;
        std::vector<std::byte> wire;
        for (int k = rng.integer(1, 5); k > 0; --k) {
            sent.push_back(random_chunk(rng));
            const auto f = encode_chunk(sent.back());
            wire.insert(wire.end(), f.begin(), f.end());
        }
        FrameReader reader;
        std::vector<Chunk> got;
        std::size_t pos = 0;
        while (pos < wire.size()) {
            const auto n = std::min<std::size_t>(wire.size() - pos, static_cast<std::size_t>(rng.integer(1, 64)));
            reader.feed(std::span(wire).subspan(pos, n));
            pos += n;
            while (auto c = reader.next()) got.push_back(*c);
        }
        INFO("seed " << seed);
        CHECK(got == sent);
        CHECK(reader.buffered() == 0);
    }
}

TEST_CASE("announcements roundtrip and garbage is ignored") {
    StreamEndpoint ep{eda_stream_info("sim-eda"), "127.0.0.1", 4000, 4001};
    const auto back = decode_announcement(encode_announcement(ep));
    REQUIRE(back);
    CHECK(*back == ep);
    CHECK_FALSE(decode_announcement("hello"));
    CHECK_FALSE(decode_announcement(""));
}

TEST_CASE("clock offset from one symmetric probe") {
    const ClockProbe p{0.0, 5.001, 5.001, 0.002};
    const auto e = estimate_clock_offset(std::span(&p, 1));
    CHECK(e.offset == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(e.round_trip == doctest::Approx(0.002).epsilon(1e-12));
}

TEST_CASE("the probe with the smaller round trip wins") {
    const ClockProbe probes[] = {{0.0, 1.010, 1.010, 0.030}, {1.0, 2.001, 2.001, 1.002}};
    const auto e = estimate_clock_offset(probes);
    CHECK(e.offset == doctest::Approx(probes[1].offset()));
    CHECK(e.round_trip == doctest::Approx(0.002));
}

TEST_CASE("clock offset rejects empty or backwards probes") {
    CHECK_THROWS_AS(estimate_clock_offset({}), ProtocolError);
    const ClockProbe bad{1.0, 2.0, 1.5, 2.0};
    CHECK_THROWS_AS(estimate_clock_offset(std::span(&bad, 1)), ProtocolError);
}

TEST_CASE("property: jittered probes recover a 2.5 s offset like the NTP oracle") {
    for (int seed = 0; seed < 200; ++seed) {
        testgen::Rng rng(seed);
        const auto probes = testgen::jittered_probes(rng, 2.5, 100, rng.uniform(0.0, 0.002), 0.005);
        std::vector<oracle::Exchange> ex;
        for (const auto& p : probes) ex.push_back({p.t0, p.t1, p.t2, p.t3});
        const auto e = estimate_clock_offset(probes);
        INFO("seed " << seed);
        CHECK(e.offset == doctest::Approx(oracle::ntp_offset(ex)).epsilon(1e-12));
        CHECK(std::abs(e.offset - 2.5) <= 0.0025);
    }
}

TEST_CASE("receiver correction flips the probe convention") {
    const ClockOffsetEstimate e{2.5, 0.001, 10.0};
    const auto c = receiver_correction(e);
    CHECK(c.offset == -2.5);
    CHECK(c.round_trip == e.round_trip);
    CHECK(c.measured_at == e.measured_at);
}

TEST_CASE("EDA simulator: 10 s at 128 Hz gives 1280 samples, reruns identical") {
    auto profiles = default_device_set(7);
    const auto& eda = *std::find_if(profiles.begin(), profiles.end(),
                                    [](const DeviceProfile& p) { return p.info.modality == Modality::EDA; });
    const auto a = run_simulator(eda, 10.0);
    CHECK(a.size() == 1280);
    CHECK(run_simulator(eda, 10.0) == a);
}

TEST_CASE("property: simulator output does not depend on chunking") {
    for (const auto& profile : default_device_set(3)) {
        const auto whole = run_simulator(profile, 4.0);
        DeviceSimulator sim(profile);
        std::vector<Sample> pieces;
        testgen::Rng rng(1);
        double t = profile.start_time;
        while (pieces.size() < whole.size()) {
            t += rng.uniform(0.001, 0.4);
            auto part = sim.generate_until(std::min(t, profile.start_time + 4.0));
            pieces.insert(pieces.end(), part.begin(), part.end());
            if (t >= profile.start_time + 4.0) break;
        }
        INFO(profile.info.source_id);
        CHECK(pieces == whole);
    }
}

TEST_CASE("default device set matches the documented rates and channels") {
    const auto set = default_device_set(0);
    REQUIRE(set.size() == 5);
    struct Expect {
        Modality m;
        double rate;
        std::uint32_t channels;
    };
    const Expect expect[] = {{Modality::Gaze, 60, 4}, {Modality::EEG, 128, 14}, {Modality::EDA, 128, 1},
                             {Modality::PPG, 64, 1},  {Modality::Temperature, 4, 1}};
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(set[i].info.modality == expect[i].m);
        CHECK(set[i].info.nominal_rate == expect[i].rate);
        CHECK(set[i].info.channel_count == expect[i].channels);
        CHECK_NOTHROW(validate(set[i].info));
    }
}

TEST_CASE("scripted gaze dwells inside A and then B") {
    DeviceProfile p;
    p.info = gaze_stream_info("g");
    p.seed = 5;
    p.gaze.source = GazeSource::Scripted;
    const Rect a{100, 100, 50, 20}, b{600, 400, 30, 30};
    p.gaze.script = {{a, 2.0}, {b, 3.0}};
    p.gaze.blink_probability = 0.0;
    const auto samples = run_simulator(p, 5.0);
    REQUIRE(samples.size() == 300);
    for (const auto& s : samples) {
        const Rect& r = s.timestamp < 2.0 ? a : b;
        INFO("t=" << s.timestamp);
        CHECK(r.contains(s.values[kGazeX], s.values[kGazeY]));
    }
}

TEST_CASE("marker simulator emits exactly the scripted events") {
    DeviceProfile p;
    p.info = marker_stream_info("m");
    p.markers = {{0.5, 1.0f}, {1.5, 2.0f}, {2.5, 3.0f}};
    const auto samples = run_simulator(p, 10.0);
    REQUIRE(samples.size() == 3);
    CHECK(samples[1].timestamp == doctest::Approx(1.5));
    CHECK(samples[2].values[0] == 3.0f);
}

TEST_CASE("stream info validation") {
    auto info = eeg_stream_info("e");
    CHECK_NOTHROW(validate(info));
    info.channel_labels.pop_back();
    CHECK_THROWS_AS(validate(info), ProtocolError);
    auto m = marker_stream_info("m");
    m.nominal_rate = -1;
    CHECK_THROWS_AS(validate(m), ProtocolError);
    CHECK(parse_modality("eeg") == Modality::EEG);
    CHECK_FALSE(parse_modality("sonar"));
}

TEST_CASE("loopback: outlet to inlet and probe responder") {
    StreamOutlet outlet(temperature_stream_info("t"), "127.0.0.1");
    StreamInlet inlet("127.0.0.1", outlet.port());
    for (int i = 0; i < 200 && outlet.client_count() == 0; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    const Chunk c{"t", {{1.0, {33.5f}}, {1.25, {33.6f}}}};
    outlet.push(c);
    const auto got = inlet.pull(2.0);
    REQUIRE(got);
    CHECK(*got == c);

    ProbeResponder responder("127.0.0.1", [] { return local_clock() - 1.0; });
    const auto probes = probe_clock("127.0.0.1", responder.port(), 8);
    REQUIRE(!probes.empty());
    CHECK(std::abs(estimate_clock_offset(probes).offset + 1.0) < 0.0025);
}

TEST_CASE("inlet reports a vanished outlet") {
    std::optional<StreamOutlet> outlet;
    outlet.emplace(temperature_stream_info("t"), "127.0.0.1");
    StreamInlet inlet("127.0.0.1", outlet->port());
    for (int i = 0; i < 200 && outlet->client_count() == 0; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    outlet.reset();
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 50; ++i) inlet.pull(0.1);
        }(),
        ProtocolError);
}

TEST_CASE("discovery with nothing announced returns nothing") {
    NetworkConfig cfg;
    cfg.discovery_port = 0;  // any free port: nobody announces there
    DiscoveryListener listener(cfg.discovery_host, 0);
    CHECK(listener.poll(0.2).empty());
}
