#include "cogtrace/service/record.hpp"

#include <algorithm>
#include <random>

#include "cogtrace/common/error.hpp"
#include "cogtrace/common/text.hpp"
#include "cogtrace/stream_net/frame.hpp"

namespace cogtrace::service {

using nlohmann::json;

ScriptedEvents parse_scripted_events(const json& j) {
    if (!j.is_object()) throw ConfigError("events: document must be a JSON object");
    ScriptedEvents ev;
    try {
        if (j.contains("time_scale")) ev.time_scale = j.at("time_scale").get<double>();
        ev.questionnaire_s = j.value("questionnaire_s", ev.questionnaire_s);
        ev.task_s = j.value("task_s", ev.task_s);
        if (j.contains("abort_after")) ev.abort_after = j.at("abort_after").get<std::string>();
        if (auto it = j.find("answers"); it != j.end())
            for (const auto& [qid, answers] : it->items()) ev.answers_by_questionnaire[qid] = answers;
        if (auto it = j.find("steps"); it != j.end()) {
            for (const auto& [id, s] : it->items()) {
                ScriptedStep step;
                if (s.contains("duration_s")) step.duration_s = s.at("duration_s").get<double>();
                if (s.contains("answers")) step.answers = s.at("answers");
                if (s.contains("file")) step.file = s.at("file").get<std::string>();
                if (s.contains("first_visible_line")) step.first_visible_line = s.at("first_visible_line").get<int>();
                if (auto g = s.find("gaze"); g != s.end()) {
                    for (const auto& d : *g)
                        step.gaze.push_back({d.at("line").get<int>(), d.at("column").get<int>(), d.value("duration_s", 1.0)});
                }
                for (const auto& d : step.gaze)
                    if (!(d.duration_s > 0.0) || d.line < 0 || d.column < 0)
                        throw ConfigError("events: step " + id + " has an invalid gaze dwell");
                if (step.duration_s && !(*step.duration_s > 0.0))
                    throw ConfigError("events: step " + id + " needs a positive duration_s");
                ev.steps[id] = std::move(step);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("events: ") + e.what());
    }
    if (ev.time_scale && !(*ev.time_scale > 0.0)) throw ConfigError("events: time_scale must be positive");
    if (!(ev.questionnaire_s > 0.0) || !(ev.task_s > 0.0))
        throw ConfigError("events: questionnaire_s and task_s must be positive");
    return ev;
}

ScriptedEvents load_scripted_events(const std::filesystem::path& path) {
    try {
        return parse_scripted_events(json::parse(text::read_file(path.string())));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

namespace {

struct GazeSegment {
    double start, end;  // receiver clock
    net::Rect area;
};

struct Schedule {
    workflow::WorkflowState state;
    std::vector<gaze::ViewChange> views;
    std::vector<GazeSegment> gaze;
    double end = 0.0;
};

net::Rect away_area(const code::EditorGeometry& g) {
    return {g.origin_x + g.viewport_width + 200.0, g.origin_y, 20.0, 20.0};
}

net::Rect dwell_area(const code::EditorGeometry& g, int line, int column) {
    const auto r = code::cell_rect(g, {line, column});
    // Half a cell keeps the jittered samples inside the target cell.
    return {r.x + r.width / 4.0, r.y + r.height / 4.0, r.width / 2.0, r.height / 2.0};
}

constexpr double kLeadIn = 1.0;
constexpr double kTail = 2.0;

Schedule build_schedule(const std::vector<workflow::PlannedStep>& plan, const ScriptedEvents& ev,
                        const SessionConfig& config, double scale, const code::SourceCorpus& corpus) {
    using workflow::PlannedStep;
    using workflow::WorkflowEvent;
    Schedule s;
    const auto& geometry = config.geometry;
    double t = kLeadIn;
    s.gaze.push_back({0.0, t, away_area(geometry)});
    s.views.push_back({0.0, {"", geometry}});

    auto tr = workflow::begin(workflow::initial_state(plan), plan, t);
    s.state = tr.state;
    while (s.state.phase == workflow::RunPhase::Running) {
        const auto& step = plan[s.state.current];
        const ScriptedStep* script = nullptr;
        if (auto it = ev.steps.find(step.id); it != ev.steps.end()) script = &it->second;

        WorkflowEvent event;
        double d = 0.0;
        gaze::EditorView view{"", geometry};
        switch (step.kind) {
            case PlannedStep::Kind::RelaxationVideo:
            case PlannedStep::Kind::Baseline:
                d = step.duration_s * scale;
                event.type = WorkflowEvent::Type::TimerElapsed;
                break;
            case PlannedStep::Kind::Questionnaire: {
                d = (script && script->duration_s ? *script->duration_s : ev.questionnaire_s) * scale;
                event.type = WorkflowEvent::Type::StepCompleted;
                json answers;
                if (script && !script->answers.is_null()) {
                    answers = script->answers;
                } else if (auto a = ev.answers_by_questionnaire.find(step.questionnaire.id);
                           a != ev.answers_by_questionnaire.end()) {
                    answers = a->second;
                } else {
                    throw ConfigError("events: no scripted answers for step " + step.id);
                }
                event.payload = {{"answers", answers}};
                break;
            }
            case PlannedStep::Kind::Task: {
                d = (script && script->duration_s ? *script->duration_s : ev.task_s) * scale;
                event.type = WorkflowEvent::Type::StepCompleted;
                if (step.task.time_limit_s && *step.task.time_limit_s * scale < d) {
                    d = *step.task.time_limit_s * scale;
                    event.type = WorkflowEvent::Type::TimerElapsed;
                }
                if (script && script->file)
                    view.file = *script->file;
                else if (!step.task.corpus_files.empty())
                    view.file = step.task.corpus_files.front();
                if (script && script->first_visible_line) view.geometry.first_visible_line = *script->first_visible_line;
                if (!view.file.empty() && corpus.find(view.file) == nullptr)
                    throw ConfigError("events: step " + step.id + " shows " + view.file + ", which is not in the corpus");
                break;
            }
        }
        if (ev.abort_after && *ev.abort_after == step.id) event = {WorkflowEvent::Type::Abort, {}};

        if (!(s.views.back().view == view)) s.views.push_back({t, view});
        const double end = t + d;
        if (step.kind == PlannedStep::Kind::Task && script && !script->gaze.empty() && !view.file.empty()) {
            double g = t;
            for (std::size_t k = 0; g < end; k = (k + 1) % script->gaze.size()) {
                const auto& dw = script->gaze[k];
                const double e = std::min(end, g + dw.duration_s);
                s.gaze.push_back({g, e, dwell_area(view.geometry, dw.line, dw.column)});
                g = e;
            }
        } else {
            s.gaze.push_back({t, end, away_area(geometry)});
        }
        t = end;
        s.state = workflow::advance(s.state, plan, event, t).state;
    }
    s.end = t + kTail;
    s.gaze.push_back({t, s.end + 1.0, away_area(geometry)});
    if (!(s.views.back().view == gaze::EditorView{"", geometry})) s.views.push_back({t, {"", geometry}});
    return s;
}

// Dwell script on the device's own clock.
std::vector<net::DwellSegment> sender_script(const std::vector<GazeSegment>& segs, const net::ClockModel& clock) {
    std::vector<net::DwellSegment> out;
    for (const auto& g : segs) {
        const double d = clock.sender_time(g.end) - clock.sender_time(g.start);
        if (d > 0.0) out.push_back({g.area, d});
    }
    return out;
}

net::ClockOffsetEstimate simulated_probe_burst(const net::ClockModel& clock, double t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> delay(0.0002, 0.003);
    std::vector<net::ClockProbe> probes;
    for (std::size_t k = 0; k < net::kProbesPerBurst; ++k) {
        net::ClockProbe p;
        p.t0 = t + 0.01 * static_cast<double>(k);
        p.t1 = clock.sender_time(p.t0 + delay(rng));
        p.t2 = p.t1 + 0.0001;
        p.t3 = clock.receiver_time(p.t2) + delay(rng);
        probes.push_back(p);
    }
    return net::receiver_correction(net::estimate_clock_offset(probes));
}

json workflow_summary(const std::vector<workflow::PlannedStep>& plan, const workflow::WorkflowState& state) {
    json j = workflow::to_json(state, plan);
    json markers = json::array();
    for (const auto& m : state.markers) markers.push_back({{"time", m.time}, {"kind", m.kind}, {"label", m.label}});
    j["marker_log"] = markers;
    return j;
}

}  // namespace

RecordResult record_session(const SessionConfig& config_in, const ScriptedEvents& ev, const RecordOptions& options) {
    SessionConfig config = config_in;
    if (options.seed) config.seed = *options.seed;
    const double scale = ev.time_scale.value_or(config.time_scale);
    if (!(options.chunk_period_s > 0.0)) throw ConfigError("chunk period must be positive");

    const auto corpus = code::SourceCorpus::load_directory(config.corpus_dir);
    auto wf = workflow::load_workflow_file(config.workflow_path, config.corpus_dir);
    wf.seed = config.seed;

    RecordResult result;
    result.plan = workflow::plan_steps(wf);
    const Schedule schedule = build_schedule(result.plan, ev, config, scale, corpus);
    result.state = schedule.state;

    auto profiles = simulated_devices(config);
    for (auto& p : profiles) {
        p.start_time = p.clock.sender_time(0.0);
        if (p.info.modality == net::Modality::Gaze) {
            p.gaze.source = net::GazeSource::Scripted;
            p.gaze.script = sender_script(schedule.gaze, p.clock);
        }
    }
    std::vector<net::StreamInfo> infos;
    std::vector<net::DeviceSimulator> sims;
    for (const auto& p : profiles) {
        infos.push_back(p.info);
        sims.emplace_back(p);
    }
    const auto marker_info = net::marker_stream_info(kWorkflowMarkerSource);
    infos.push_back(marker_info);

    const rec::SessionIdentity identity{config.effective_session_id(), config.participant_id, "1970-01-01T00:00:00Z"};
    auto session = rec::start_recording(identity, infos);

    std::vector<std::mt19937_64> probe_rngs;
    for (std::size_t i = 0; i < profiles.size(); ++i) probe_rngs.emplace_back(config.seed * 977 + i + 1);

    std::map<std::string, std::size_t> label_index;
    for (std::size_t i = 0; i < result.plan.size(); ++i) label_index[result.plan[i].label()] = i;

    const auto& markers = schedule.state.markers;
    std::size_t next_marker = 0;
    double next_probe = 0.0;
    for (double t = 0.0; t < schedule.end;) {
        const double t_next = std::min(schedule.end, t + options.chunk_period_s);
        if (t >= next_probe) {
            for (std::size_t i = 0; i < profiles.size(); ++i)
                session->add_offset(profiles[i].info.source_id,
                                    simulated_probe_burst(profiles[i].clock, t, probe_rngs[i]));
            next_probe += net::kProbeIntervalS;
        }
        for (std::size_t i = 0; i < sims.size(); ++i) {
            net::Chunk chunk{profiles[i].info.source_id, sims[i].generate_until(profiles[i].clock.sender_time(t_next))};
            if (chunk.samples.empty()) continue;
            const auto frame = net::encode_chunk(chunk);
            session->append(chunk.stream_id, net::decode_chunk(frame));
        }
        net::Chunk marker_chunk{kWorkflowMarkerSource, {}};
        while (next_marker < markers.size() && markers[next_marker].time < t_next) {
            const auto& m = markers[next_marker++];
            session->log_event({m.time, m.kind, m.label});
            const auto idx = static_cast<float>(2 * label_index.at(m.label) + (m.kind == "step_start" ? 1 : 2));
            marker_chunk.samples.push_back({m.time, {idx}});
        }
        if (!marker_chunk.samples.empty()) session->append(kWorkflowMarkerSource, marker_chunk);
        t = t_next;
    }
    for (const auto& r : schedule.state.responses) session->add_response(r);

    const AnalysisSettings& settings = config.analysis;
    const gaze::ViewTimeline views(schedule.views);
    result.live_table = analyze(rec::corrected(session->snapshot()), corpus, views, settings).table;

    result.directory = options.output ? *options.output : config.output_dir / identity.session_id;
    result.manifest = session->finalize(result.directory);
    write_context(result.directory, {settings, schedule.views, workflow_summary(result.plan, schedule.state)});
    copy_corpus(corpus, result.directory);

    const auto dir_result = [&] {
        const auto data = rec::load_session(result.directory);
        const auto copied = code::SourceCorpus::load_directory(result.directory / kCorpusDir);
        return analyze(data, copied, views, settings);
    }();
    result.table = dir_result.table;
    result.warnings = dir_result.warnings;
    text::write_file((result.directory / kMetricsFile).string(), physio::render_metric_csv(result.table));
    const auto ex = heatmap_directory(result.directory, nullptr);
    text::write_file((result.directory / kOverlayFile).string(), ex.overlay_csv);
    text::write_file((result.directory / kHtmlFile).string(), ex.html);
    return result;
}

}  // namespace cogtrace::service
