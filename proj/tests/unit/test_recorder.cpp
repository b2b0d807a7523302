#include <doctest.h>

#include <filesystem>
#include <thread>

#include "../support/generators.hpp"
#include "../support/paths.hpp"
#include "cogtrace/common/error.hpp"
#include "cogtrace/recorder/clock_correction.hpp"
#include "cogtrace/recorder/session.hpp"
#include "cogtrace/stream_net/simulator.hpp"

using namespace cogtrace;
using namespace cogtrace::rec;
namespace fs = std::filesystem;

namespace {

std::vector<net::StreamInfo> default_infos() {
    std::vector<net::StreamInfo> infos;
    for (const auto& p : net::default_device_set(1)) infos.push_back(p.info);
    return infos;
}

const SessionIdentity kId{"S1", "P01", "2024-01-01T00:00:00Z"};

}  // namespace

TEST_CASE("start_recording validates the stream list") {
    CHECK_THROWS_AS(start_recording(kId, {}), RecorderError);
    const auto infos = default_infos();
    auto s = start_recording(kId, infos);
    CHECK(s->stream_ids().size() == 5);
    for (const auto& id : s->stream_ids()) CHECK(s->sample_count(id) == 0);
    std::vector<net::StreamInfo> dup{infos[0], infos[0]};
    CHECK_THROWS_AS(start_recording(kId, dup), RecorderError);
}

TEST_CASE("append grows the buffer and rejects bad input") {
    const auto infos = default_infos();
    auto s = start_recording(kId, infos);
    auto eda = net::default_device_set(1)[2];
    REQUIRE(eda.info.modality == net::Modality::EDA);
    const auto samples = net::run_simulator(eda, 10.0);
    s->append(eda.info.source_id, {eda.info.source_id, samples});
    CHECK(s->sample_count(eda.info.source_id) == 1280);

    CHECK_THROWS_AS(s->append("nope", {"nope", {{0.0, {1.0f}}}}), RecorderError);
    const double tail = samples.back().timestamp;
    CHECK_THROWS_AS(s->append(eda.info.source_id, {eda.info.source_id, {{tail - 2.0, {1.0f}}}}), RecorderError);
    // within the regression tolerance
    CHECK_NOTHROW(s->append(eda.info.source_id, {eda.info.source_id, {{tail - kRegressionTolerance / 2, {1.0f}}}}));
    CHECK_THROWS_AS(s->append(eda.info.source_id, {eda.info.source_id, {{tail + 1, {1.0f, 2.0f}}}}), Error);
}

TEST_CASE("constant offset shifts every timestamp") {
    const std::vector<net::Sample> in{{0.0, {1}}, {1.0, {2}}, {2.5, {3}}};
    const net::ClockOffsetEstimate h{5.0, 0.001, 0.0};
    const auto out = correct_timestamps(in, std::span(&h, 1));
    for (std::size_t i = 0; i < in.size(); ++i) {
        CHECK(out[i].timestamp == doctest::Approx(in[i].timestamp + 5.0));
        CHECK(out[i].values == in[i].values);
    }
    CHECK_THROWS_AS(correct_timestamps(in, {}), RecorderError);
}

TEST_CASE("offset interpolation is linear inside and flat outside the history") {
    const net::ClockOffsetEstimate h[] = {{1.0, 0, 0.0}, {2.0, 0, 100.0}};
    CHECK(interpolate_offset(h, 50.0) == doctest::Approx(1.5));
    CHECK(interpolate_offset(h, -10.0) == doctest::Approx(1.0));
    CHECK(interpolate_offset(h, 500.0) == doctest::Approx(2.0));
}

TEST_CASE("drifting 50 ppm clock corrected to within 2 ms over 10 minutes") {
    const net::ClockModel clock{0.8, 50.0};
    testgen::Rng rng(9);
    std::vector<net::ClockOffsetEstimate> history;
    for (double t = 0.0; t <= 600.0; t += net::kProbeIntervalS) {
        std::vector<net::ClockProbe> probes;
        for (std::size_t k = 0; k < net::kProbesPerBurst; ++k) {
            const double t0 = t + k * 0.01, fwd = rng.uniform(0.0002, 0.003), back = rng.uniform(0.0002, 0.003);
            net::ClockProbe p;
            p.t0 = t0;
            p.t1 = clock.sender_time(t0 + fwd);
            p.t2 = p.t1 + 1e-5;
            p.t3 = clock.receiver_time(p.t2) + back;
            probes.push_back(p);
        }
        history.push_back(net::receiver_correction(net::estimate_clock_offset(probes)));
    }
    std::vector<net::Sample> samples;
    for (double r = 0.0; r < 600.0; r += 0.37) samples.push_back({clock.sender_time(r), {0.0f}});
    const auto out = correct_timestamps(samples, history);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
        worst = std::max(worst, std::abs(out[i].timestamp - clock.receiver_time(samples[i].timestamp)));
    CHECK(worst <= 0.002);
}

TEST_CASE("empty session finalizes to one file per stream") {
    const auto dir = testpaths::scratch("rec-empty");
    const auto infos = default_infos();
    auto s = start_recording(kId, infos);
    const auto m = s->finalize(dir / "s");
    REQUIRE(m.streams.size() == 5);
    for (const auto& st : m.streams) {
        CHECK(st.sample_count == 0);
        CHECK(fs::exists(dir / "s" / st.file));
    }
    CHECK_THROWS_AS(s->finalize(dir / "t"), RecorderError);
    CHECK(s->finalized());
}

TEST_CASE("10 s session: manifest bytes equal the files on disk and data roundtrips") {
    const auto dir = testpaths::scratch("rec-10s");
    const auto profiles = net::default_device_set(4);
    std::vector<net::StreamInfo> infos;
    for (const auto& p : profiles) infos.push_back(p.info);
    auto s = start_recording(kId, infos);
    for (const auto& p : profiles) {
        s->append(p.info.source_id, {p.info.source_id, net::run_simulator(p, 10.0)});
        s->add_offset(p.info.source_id, {0.25, 0.001, 5.0});
    }
    s->log_event({1.0, "step_start", "baseline:b"});
    s->add_response({"pre", "q1", "3"});
    const auto expected = corrected(s->snapshot());
    const auto m = s->finalize(dir / "s");

    std::uint64_t sum = 0;
    for (const auto& st : m.streams) {
        CHECK(fs::file_size(dir / "s" / st.file) == st.bytes);
        sum += st.bytes;
    }
    CHECK(sum == m.total_bytes);
    CHECK(load_manifest(dir / "s") == m);
    const auto back = load_session(dir / "s");
    CHECK(back.streams.size() == expected.streams.size());
    for (std::size_t i = 0; i < back.streams.size(); ++i) {
        REQUIRE(back.streams[i].samples.size() == expected.streams[i].samples.size());
        CHECK(back.streams[i].samples.front().timestamp == doctest::Approx(expected.streams[i].samples.front().timestamp));
        CHECK(back.streams[i].samples.back().values == expected.streams[i].samples.back().values);
    }
    CHECK(back.events == expected.events);
    CHECK(back.responses == expected.responses);
    CHECK_THROWS_AS(write_session(expected, dir / "s"), RecorderError);
}

TEST_CASE("manifest text roundtrips") {
    SessionManifest m;
    m.identity = kId;
    m.streams.push_back({net::eeg_stream_info("e"), "streams/e.bin", 12, 345});
    m.duration_s = 12.5;
    m.total_bytes = 345;
    CHECK(parse_manifest(render_manifest(m)) == m);
    CHECK_THROWS_AS(parse_manifest("garbage = "), Error);
}

TEST_CASE("concurrent appends to different streams and snapshots") {
    const auto profiles = net::default_device_set(2);
    std::vector<net::StreamInfo> infos;
    for (const auto& p : profiles) infos.push_back(p.info);
    auto s = start_recording(kId, infos);
    std::vector<std::thread> threads;
    for (const auto& p : profiles)
        threads.emplace_back([&s, p] {
            net::DeviceSimulator sim(p);
            for (int k = 1; k <= 50; ++k) {
                auto part = sim.generate_until(k * 0.1);
                if (!part.empty()) s->append(p.info.source_id, {p.info.source_id, part});
            }
        });
    for (int k = 0; k < 20; ++k) (void)s->snapshot();
    for (auto& t : threads) t.join();
    for (const auto& p : profiles)
        CHECK(s->sample_count(p.info.source_id) == net::run_simulator(p, 5.0).size());
}
