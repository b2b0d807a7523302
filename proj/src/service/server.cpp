#include "cogtrace/service/server.hpp"

#include <httplib.h>

#include <chrono>
#include <ctime>
#include <filesystem>

#include "cogtrace/common/error.hpp"
#include "cogtrace/common/text.hpp"
#include "cogtrace/highlight/heatmap.hpp"
#include "cogtrace/service/analysis.hpp"
#include "cogtrace/service/record.hpp"
#include "cogtrace/stream_net/socket.hpp"
#include "cogtrace/stream_net/transport.hpp"

namespace cogtrace::service {

using nlohmann::json;

struct SessionService::Ingest {
    net::StreamEndpoint endpoint;
    std::atomic<std::uint64_t> samples{0};
    std::atomic<double> last_sample{-1.0};
    std::atomic<bool> connected{true};
    std::atomic<bool> recorded{false};
    std::thread thread;
};

namespace {

constexpr double kStaleAfterS = 3.0;

Reply error_reply(int status, const std::string& message, std::vector<std::string> diagnostics = {}) {
    json body{{"error", message}};
    if (!diagnostics.empty()) body["diagnostics"] = diagnostics;
    return {status, body};
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void send(httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

// Empty body reads as {}; malformed JSON yields nullopt.
std::optional<json> body_json(const httplib::Request& req) {
    if (text::trim(req.body).empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error&) {
        return std::nullopt;
    }
}

}  // namespace

SessionService::SessionService(SessionConfig config) : config_(std::move(config)) {
    workflow_ = workflow::load_workflow_file(config_.workflow_path, config_.corpus_dir);
    workflow_.seed = config_.seed;
    plan_ = workflow::plan_steps(workflow_);
    corpus_ = code::SourceCorpus::load_directory(config_.corpus_dir);
    state_ = workflow::initial_state(plan_);
    views_.push_back({net::local_clock(), {"", config_.geometry}});

    http_ = std::make_unique<httplib::Server>();
    // httplib's default sets SO_REUSEPORT, which would let a second service
    // share the port silently.
    http_->set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    route();
    const auto& host = config_.network.bind_host;
    if (config_.http_port == 0) {
        const int p = http_->bind_to_any_port(host);
        if (p <= 0) throw Error("cannot bind an HTTP port on " + host);
        port_ = static_cast<std::uint16_t>(p);
    } else {
        if (!http_->bind_to_port(host, config_.http_port))
            throw Error("cannot bind HTTP port " + std::to_string(config_.http_port) + " on " + host +
                        ": address in use");
        port_ = config_.http_port;
    }
    publish();
}

SessionService::~SessionService() { stop(); }

void SessionService::start() {
    if (started_.exchange(true)) return;
    http_thread_ = std::thread([this] { http_->listen_after_bind(); });
    discovery_thread_ = std::thread([this] { discovery_loop(); });
    actor_thread_ = std::thread([this] { actor_loop(); });
}

void SessionService::stop() {
    {
        std::lock_guard lk(stop_mutex_);
        if (stopping_.exchange(true)) {
            if (!started_) return;
        }
    }
    stop_cv_.notify_all();
    queue_cv_.notify_all();
    if (http_) http_->stop();
    for (auto* t : {&http_thread_, &discovery_thread_, &actor_thread_})
        if (t->joinable()) t->join();
    std::lock_guard lk(ingest_mutex_);
    for (auto& in : ingests_)
        if (in->thread.joinable()) in->thread.join();
}

void SessionService::wait() {
    std::unique_lock lk(stop_mutex_);
    stop_cv_.wait(lk, [this] { return stopping_.load(); });
}

void SessionService::discovery_loop() {
    std::optional<net::DiscoveryListener> listener;
    try {
        listener.emplace(config_.network.discovery_host, config_.network.discovery_port);
    } catch (const Error& e) {
        std::lock_guard lk(snapshot_mutex_);
        auto s = std::make_shared<Snapshot>(*snapshot_);
        s->errors.push_back(std::string("discovery disabled: ") + e.what());
        snapshot_ = s;
        return;
    }
    while (!stopping_) {
        for (auto& ep : listener->poll(0.25)) {
            auto in = std::make_unique<Ingest>();
            in->endpoint = ep;
            Ingest* raw = in.get();
            raw->thread = std::thread([this, raw] {
                const auto& id = raw->endpoint.info.source_id;
                try {
                    net::StreamInlet inlet(raw->endpoint.host, raw->endpoint.data_port);
                    std::shared_ptr<rec::RecordingSession> seen;
                    double next_probe = 0.0;
                    while (!stopping_) {
                        auto chunk = inlet.pull(0.2);
                        std::shared_ptr<rec::RecordingSession> rec;
                        {
                            std::lock_guard lk(recording_mutex_);
                            rec = recording_;
                        }
                        if (rec != seen) {
                            seen = rec;
                            next_probe = 0.0;
                        }
                        const bool active = rec && raw->recorded && !rec->finalized();
                        if (chunk && !chunk->samples.empty()) {
                            raw->samples += chunk->samples.size();
                            raw->last_sample = net::local_clock();
                            if (active) {
                                try {
                                    rec->append(id, *chunk);
                                } catch (const RecorderError&) {
                                    // finalized between the check and the append
                                }
                            }
                        }
                        if (active && net::local_clock() >= next_probe) {
                            const auto probes = net::probe_clock(raw->endpoint.host, raw->endpoint.probe_port,
                                                                 net::kProbesPerBurst);
                            if (!probes.empty()) {
                                try {
                                    rec->add_offset(id, net::receiver_correction(net::estimate_clock_offset(probes)));
                                } catch (const Error&) {
                                }
                            }
                            next_probe = net::local_clock() + net::kProbeIntervalS;
                        }
                    }
                } catch (const Error&) {
                }
                raw->connected = false;
            });
            std::lock_guard lk(ingest_mutex_);
            ingests_.push_back(std::move(in));
        }
    }
}

std::optional<double> SessionService::active_deadline() const {
    if (state_.phase != workflow::RunPhase::Running) return std::nullopt;
    const auto& step = plan_[state_.current];
    if (!step.timed()) return std::nullopt;
    return step_started_ + step.duration_s * config_.time_scale;
}

void SessionService::actor_loop() {
    while (true) {
        std::unique_ptr<Command> cmd;
        bool timer = false;
        {
            std::unique_lock lk(queue_mutex_);
            const auto deadline = active_deadline();
            auto ready = [this] { return stopping_ || !queue_.empty(); };
            if (deadline) {
                const double wait_s = std::max(0.0, *deadline - net::local_clock());
                queue_cv_.wait_for(lk, std::chrono::duration<double>(wait_s), ready);
            } else {
                queue_cv_.wait(lk, ready);
            }
            if (stopping_) break;
            if (!queue_.empty()) {
                cmd = std::move(queue_.front());
                queue_.pop_front();
            } else if (deadline && net::local_clock() >= *deadline) {
                timer = true;
            }
        }
        if (cmd) {
            Reply r;
            try {
                r = handle(*cmd);
            } catch (const std::exception& e) {
                r = error_reply(500, e.what());
            }
            cmd->reply.set_value(std::move(r));
        } else if (timer) {
            const double now = net::local_clock();
            try {
                apply(workflow::advance(state_, plan_, {workflow::WorkflowEvent::Type::TimerElapsed, {}}, now), now);
            } catch (const Error& e) {
                errors_.push_back(e.what());
                publish();
            }
        }
    }
    // Unanswered commands get a clean refusal.
    std::lock_guard lk(queue_mutex_);
    for (auto& c : queue_) c->reply.set_value(error_reply(503, "service is shutting down"));
    queue_.clear();
}

Reply SessionService::post(Command::Type type, json payload) {
    auto cmd = std::make_unique<Command>();
    cmd->type = type;
    cmd->payload = std::move(payload);
    auto future = cmd->reply.get_future();
    {
        std::lock_guard lk(queue_mutex_);
        if (stopping_ || !started_) return error_reply(503, "service is not running");
        queue_.push_back(std::move(cmd));
    }
    queue_cv_.notify_all();
    return future.get();
}

Reply SessionService::handle(Command& cmd) {
    using Type = workflow::WorkflowEvent::Type;
    const double now = net::local_clock();
    try {
        switch (cmd.type) {
            case Command::Type::Start: {
                if (state_.phase != workflow::RunPhase::NotStarted)
                    return error_reply(409, "session already started");
                std::vector<net::StreamInfo> infos;
                {
                    std::lock_guard lk(ingest_mutex_);
                    for (auto& in : ingests_)
                        if (in->connected) infos.push_back(in->endpoint.info);
                }
                infos.push_back(net::marker_stream_info(kWorkflowMarkerSource));
                auto transition = workflow::begin(state_, plan_, now);
                auto rec = rec::start_recording({config_.effective_session_id(), config_.participant_id, utc_now()}, infos);
                {
                    std::lock_guard lk(ingest_mutex_);
                    for (auto& in : ingests_)
                        if (rec->has_stream(in->endpoint.info.source_id)) in->recorded = true;
                }
                {
                    std::lock_guard lk(recording_mutex_);
                    recording_ = std::move(rec);
                }
                recording_started_ = now;
                apply(transition, now);
                break;
            }
            case Command::Type::Submit:
                apply(workflow::advance(state_, plan_, {Type::StepCompleted, cmd.payload}, now), now);
                break;
            case Command::Type::Abort:
                apply(workflow::advance(state_, plan_, {Type::Abort, {}}, now), now);
                break;
            case Command::Type::View: {
                const auto& b = cmd.payload;
                if (!b.is_object() || !b.contains("file") || !b["file"].is_string())
                    return error_reply(400, "view needs a \"file\" string");
                gaze::EditorView view{b["file"].get<std::string>(), config_.geometry};
                if (!view.file.empty() && corpus_.find(view.file) == nullptr)
                    return error_reply(422, "file is not in the corpus: " + view.file);
                if (b.contains("geometry")) view.geometry = geometry_from_json(b["geometry"], config_.geometry);
                if (b.contains("first_visible_line")) view.geometry.first_visible_line = b["first_visible_line"].get<int>();
                if (b.contains("horizontal_scroll")) view.geometry.horizontal_scroll = b["horizontal_scroll"].get<int>();
                view.geometry.validate();
                std::lock_guard lk(views_mutex_);
                views_.push_back({now, view});
                return {200, {{"ok", true}}};
            }
        }
    } catch (const workflow::IllegalTransition& e) {
        return error_reply(409, e.what());
    } catch (const ValidationError& e) {
        return error_reply(422, e.what(), e.diagnostics());
    } catch (const json::exception& e) {
        return error_reply(400, e.what());
    } catch (const ConfigError& e) {
        return error_reply(422, e.what());
    }
    return {200, status()};
}

void SessionService::apply(const workflow::Transition& tr, double now) {
    const auto old_responses = state_.responses.size();
    const bool step_changed = tr.state.current != state_.current || tr.state.phase != state_.phase;
    state_ = tr.state;
    std::shared_ptr<rec::RecordingSession> rec;
    {
        std::lock_guard lk(recording_mutex_);
        rec = recording_;
    }
    if (rec && !rec->finalized()) {
        net::Chunk markers{kWorkflowMarkerSource, {}};
        for (const auto& m : tr.markers) {
            rec->log_event({m.time, m.kind, m.label});
            std::size_t idx = 0;
            for (std::size_t i = 0; i < plan_.size(); ++i)
                if (plan_[i].label() == m.label) idx = i;
            markers.samples.push_back({m.time, {static_cast<float>(2 * idx + (m.kind == "step_start" ? 1 : 2))}});
        }
        if (!markers.samples.empty()) rec->append(kWorkflowMarkerSource, markers);
        for (std::size_t i = old_responses; i < state_.responses.size(); ++i) rec->add_response(state_.responses[i]);
    }
    if (step_changed) on_step_started(now);
    if (state_.terminal()) finish_recording();
    publish();
}

void SessionService::on_step_started(double now) {
    step_started_ = now;
    gaze::EditorView view{"", config_.geometry};
    if (state_.phase == workflow::RunPhase::Running) {
        const auto& step = plan_[state_.current];
        if (step.kind == workflow::PlannedStep::Kind::Task && !step.task.corpus_files.empty())
            view.file = step.task.corpus_files.front();
    }
    std::lock_guard lk(views_mutex_);
    if (!(views_.back().view == view)) views_.push_back({now, view});
}

void SessionService::finish_recording() {
    std::shared_ptr<rec::RecordingSession> rec;
    {
        std::lock_guard lk(recording_mutex_);
        rec = recording_;
    }
    if (!rec || rec->finalized()) return;
    const auto dir = config_.output_dir / config_.effective_session_id();
    try {
        rec->finalize(dir);
        std::vector<gaze::ViewChange> views;
        {
            std::lock_guard lk(views_mutex_);
            views = views_;
        }
        json wf = workflow::to_json(state_, plan_);
        json log = json::array();
        for (const auto& m : state_.markers) log.push_back({{"time", m.time}, {"kind", m.kind}, {"label", m.label}});
        wf["marker_log"] = log;
        write_context(dir, {config_.analysis, views, wf});
        copy_corpus(corpus_, dir);
        text::write_file((dir / kMetricsFile).string(), physio::render_metric_csv(analyze_directory(dir)));
        const auto ex = heatmap_directory(dir, nullptr);
        text::write_file((dir / kOverlayFile).string(), ex.overlay_csv);
        text::write_file((dir / kHtmlFile).string(), ex.html);
        finalized_ = true;
        session_dir_ = dir.string();
    } catch (const Error& e) {
        errors_.push_back(std::string("finalization failed: ") + e.what());
    }
}

void SessionService::publish() {
    auto s = std::make_shared<Snapshot>();
    s->state = state_;
    s->step_started = step_started_;
    s->recording_started = recording_started_;
    {
        std::lock_guard lk(recording_mutex_);
        s->recording = recording_ && !recording_->finalized();
    }
    s->finalized = finalized_;
    s->session_dir = session_dir_;
    s->errors = errors_;
    std::lock_guard lk(snapshot_mutex_);
    if (snapshot_) s->errors.insert(s->errors.begin(), snapshot_->errors.begin(), snapshot_->errors.end());
    std::sort(s->errors.begin(), s->errors.end());
    s->errors.erase(std::unique(s->errors.begin(), s->errors.end()), s->errors.end());
    snapshot_ = std::move(s);
}

std::shared_ptr<const SessionService::Snapshot> SessionService::snapshot() const {
    std::lock_guard lk(snapshot_mutex_);
    return snapshot_;
}

json SessionService::status() const {
    const auto snap = snapshot();
    const double now = net::local_clock();
    json streams = json::array();
    {
        std::lock_guard lk(ingest_mutex_);
        std::vector<const Ingest*> sorted;
        for (const auto& in : ingests_) sorted.push_back(in.get());
        std::sort(sorted.begin(), sorted.end(), [](const Ingest* a, const Ingest* b) {
            return a->endpoint.info.source_id < b->endpoint.info.source_id;
        });
        for (const auto* in : sorted) {
            const auto& info = in->endpoint.info;
            const double last = in->last_sample;
            json age = last < 0.0 ? json(nullptr) : json(now - last);
            const bool live = in->connected && last >= 0.0 && now - last <= kStaleAfterS;
            streams.push_back({{"source_id", info.source_id},
                               {"name", info.name},
                               {"modality", net::to_string(info.modality)},
                               {"nominal_rate", info.nominal_rate},
                               {"channel_count", info.channel_count},
                               {"samples", in->samples.load()},
                               {"last_sample_age_s", age},
                               {"live", live},
                               {"connected", in->connected.load()},
                               {"recorded", in->recorded.load()}});
        }
    }
    json j{{"workflow", workflow::to_json(snap->state, plan_)},
           {"recording", snap->recording},
           {"finalized", snap->finalized},
           {"session_dir", snap->session_dir.empty() ? json(nullptr) : json(snap->session_dir)},
           {"elapsed_s", snap->state.phase == workflow::RunPhase::NotStarted ? 0.0 : now - snap->recording_started},
           {"streams", streams},
           {"errors", snap->errors}};
    return j;
}

Reply SessionService::current_step() const {
    const auto snap = snapshot();
    json j{{"phase", workflow::to_string(snap->state.phase)}, {"step", nullptr}};
    if (snap->state.phase == workflow::RunPhase::Running) {
        const auto& step = plan_[snap->state.current];
        j["index"] = snap->state.current;
        j["count"] = plan_.size();
        j["step"] = workflow::to_json(step);
        const double elapsed = net::local_clock() - snap->step_started;
        j["elapsed_s"] = elapsed;
        if (step.timed()) j["remaining_s"] = std::max(0.0, step.duration_s * config_.time_scale - elapsed);
    }
    return {200, j};
}

Reply SessionService::start_session() { return post(Command::Type::Start, {}); }
Reply SessionService::submit_step(const json& payload) { return post(Command::Type::Submit, payload); }
Reply SessionService::abort_session() { return post(Command::Type::Abort, {}); }
Reply SessionService::set_view(const json& body) { return post(Command::Type::View, body); }

Reply SessionService::markers() const {
    const auto snap = snapshot();
    json log = json::array();
    for (const auto& m : snap->state.markers) log.push_back({{"time", m.time}, {"kind", m.kind}, {"label", m.label}});
    return {200, {{"markers", log}}};
}

Reply SessionService::heatmap(const std::optional<std::string>& script) const {
    const auto snap = snapshot();
    try {
        highlight::HeatmapExport ex;
        highlight::HighlightMap map;
        const std::string text = script.value_or(config_.analysis.script);
        if (snap->finalized) {
            const auto l = analyze_directory(snap->session_dir);
            map = score(l, text, config_.analysis.highlight);
            ex = highlight::render_heatmap(map, corpus_, config_.analysis.granularity);
        } else {
            std::shared_ptr<rec::RecordingSession> rec;
            {
                std::lock_guard lk(recording_mutex_);
                rec = recording_;
            }
            physio::MetricTable table;
            if (rec) {
                std::vector<gaze::ViewChange> views;
                {
                    std::lock_guard lk(views_mutex_);
                    views = views_;
                }
                table = analyze(rec::corrected(rec->snapshot()), corpus_, gaze::ViewTimeline(views), config_.analysis).table;
            }
            map = score(table, text, config_.analysis.highlight);
            ex = highlight::render_heatmap(map, corpus_, config_.analysis.granularity);
        }
        json entries = json::array();
        for (const auto& [id, e] : map.entries)
            entries.push_back({{"symbol_id", id}, {"score", e.score}, {"rgba", e.color.hex()}});
        return {200,
                {{"script", text},
                 {"entries", entries},
                 {"overlay_csv", ex.overlay_csv},
                 {"html", ex.html},
                 {"diagnostics", ex.diagnostics},
                 {"warnings", map.warnings}}};
    } catch (const highlight::ScriptError& e) {
        return {400, {{"error", e.what()}, {"line", e.line()}, {"column", e.column()}}};
    } catch (const highlight::EvaluationError& e) {
        return {422, {{"error", e.what()}, {"symbol_id", e.symbol_id()}}};
    } catch (const Error& e) {
        return error_reply(500, e.what());
    }
}

void SessionService::route() {
    auto& s = *http_;
    s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send(res, error_reply(500, what));
    });
    auto with_body = [](auto fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            auto body = body_json(req);
            if (!body) return send(res, error_reply(400, "request body is not valid JSON"));
            send(res, fn(*body));
        };
    };
    s.Get("/api/status", [this](const httplib::Request&, httplib::Response& res) { send(res, {200, status()}); });
    s.Get("/api/step", [this](const httplib::Request&, httplib::Response& res) { send(res, current_step()); });
    s.Get("/api/markers", [this](const httplib::Request&, httplib::Response& res) { send(res, markers()); });
    s.Post("/api/step/submit", with_body([this](const json& b) { return submit_step(b); }));
    s.Post("/api/session/start", with_body([this](const json&) { return start_session(); }));
    s.Post("/api/session/abort", with_body([this](const json&) { return abort_session(); }));
    s.Post("/api/view", with_body([this](const json& b) { return set_view(b); }));
    s.Get("/api/heatmap", [this](const httplib::Request& req, httplib::Response& res) {
        std::optional<std::string> script;
        if (req.has_param("script")) script = req.get_param_value("script");
        send(res, heatmap(script));
    });
    s.Post("/api/heatmap", with_body([this](const json& b) {
        std::optional<std::string> script;
        if (b.contains("script")) {
            if (!b["script"].is_string()) return error_reply(400, "\"script\" must be a string");
            script = b["script"].get<std::string>();
        }
        return heatmap(script);
    }));
    s.Get("/api/corpus", [this](const httplib::Request& req, httplib::Response& res) {
        if (req.has_param("file")) {
            const auto* f = corpus_.find(req.get_param_value("file"));
            if (f == nullptr) return send(res, error_reply(404, "no such corpus file"));
            return send(res, {200, {{"path", f->path}, {"text", f->text}, {"lines", f->line_count()}}});
        }
        json files = json::array();
        for (const auto& f : corpus_.files()) files.push_back({{"path", f.path}, {"lines", f.line_count()}});
        send(res, {200, {{"files", files}, {"geometry", to_json(config_.geometry)}}});
    });
    s.Get("/api/status/stream", [this](const httplib::Request&, httplib::Response& res) {
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [this](std::size_t, httplib::DataSink& sink) {
            if (stopping_) {
                sink.done();
                return true;
            }
            const std::string event = "event: status\ndata: " + status().dump() + "\n\n";
            if (!sink.write(event.data(), event.size())) return false;
            std::unique_lock lk(stop_mutex_);
            stop_cv_.wait_for(lk, std::chrono::seconds(1), [this] { return stopping_.load(); });
            return true;
        });
    });
}

}  // namespace cogtrace::service
