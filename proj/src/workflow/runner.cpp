#include <cmath>
#include <random>
#include <set>

#include "cogtrace/common/text.hpp"
#include "cogtrace/workflow/workflow.hpp"

namespace cogtrace::workflow {

using nlohmann::json;

std::vector<TaskSpec> randomize_tasks(const Step& block, std::uint64_t seed) {
    std::vector<TaskSpec> tasks = block.tasks;
    if (!block.randomize || tasks.size() < 2) return tasks;
    const std::uint64_t h = text::fnv1a(block.id);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    std::mt19937_64 rng(seq);
    // Unbiased draw from [0, n) by rejection; independent of the standard
    // library's distribution implementation.
    auto below = [&rng](std::uint64_t n) {
        const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
        std::uint64_t x;
        do x = rng();
        while (x >= limit);
        return x % n;
    };
    for (std::size_t i = tasks.size() - 1; i > 0; --i) std::swap(tasks[i], tasks[below(i + 1)]);
    return tasks;
}

std::string_view to_string(PlannedStep::Kind k) {
    switch (k) {
        case PlannedStep::Kind::Questionnaire: return "questionnaire";
        case PlannedStep::Kind::RelaxationVideo: return "relaxation_video";
        case PlannedStep::Kind::Baseline: return "baseline";
        case PlannedStep::Kind::Task: return "task";
    }
    return "questionnaire";
}

std::string PlannedStep::label() const { return std::string(to_string(kind)) + ":" + id; }

bool PlannedStep::timed() const noexcept {
    return kind == Kind::RelaxationVideo || kind == Kind::Baseline || (kind == Kind::Task && task.time_limit_s);
}

std::vector<PlannedStep> plan_steps(const Workflow& wf) {
    std::vector<PlannedStep> plan;
    for (std::size_t b = 0; b < wf.steps.size(); ++b) {
        const auto& s = wf.steps[b];
        PlannedStep p;
        p.id = s.id;
        p.block = b;
        switch (s.kind) {
            case StepKind::Questionnaire:
                p.kind = PlannedStep::Kind::Questionnaire;
                p.questionnaire = s.questionnaire;
                plan.push_back(std::move(p));
                break;
            case StepKind::RelaxationVideo:
            case StepKind::Baseline:
                p.kind = s.kind == StepKind::Baseline ? PlannedStep::Kind::Baseline : PlannedStep::Kind::RelaxationVideo;
                p.duration_s = s.duration_s;
                p.media = s.media;
                plan.push_back(std::move(p));
                break;
            case StepKind::TaskBlock:
                for (auto& task : randomize_tasks(s, wf.seed)) {
                    PlannedStep t;
                    t.id = task.id;
                    t.kind = PlannedStep::Kind::Task;
                    t.block = b;
                    t.duration_s = task.time_limit_s.value_or(0.0);
                    t.task = task;
                    plan.push_back(t);
                    if (s.interleave) {
                        PlannedStep q;
                        q.id = s.interleave->id + ":" + task.id;
                        q.kind = PlannedStep::Kind::Questionnaire;
                        q.block = b;
                        q.questionnaire = *s.interleave;
                        plan.push_back(std::move(q));
                    }
                }
                break;
        }
    }
    return plan;
}

std::string_view to_string(StepStatus s) {
    switch (s) {
        case StepStatus::Pending: return "pending";
        case StepStatus::Active: return "active";
        case StepStatus::Done: return "done";
    }
    return "pending";
}

std::string_view to_string(RunPhase p) {
    switch (p) {
        case RunPhase::NotStarted: return "not_started";
        case RunPhase::Running: return "running";
        case RunPhase::Finished: return "finished";
        case RunPhase::Aborted: return "aborted";
    }
    return "not_started";
}

WorkflowState initial_state(const std::vector<PlannedStep>& plan) {
    WorkflowState s;
    s.status.assign(plan.size(), StepStatus::Pending);
    return s;
}

namespace {

void start_step(Transition& t, const std::vector<PlannedStep>& plan, std::size_t i, double now) {
    t.state.current = i;
    t.state.status[i] = StepStatus::Active;
    t.markers.push_back({now, "step_start", plan[i].label()});
}

void stop_step(Transition& t, const std::vector<PlannedStep>& plan, double now) {
    const auto i = t.state.current;
    t.state.status[i] = StepStatus::Done;
    t.markers.push_back({now, "step_stop", plan[i].label()});
}

bool on_grid(double v, double min, double step) {
    const double n = (v - min) / step;
    return std::abs(n - std::round(n)) <= 1e-9;
}

}  // namespace

Transition begin(const WorkflowState& state, const std::vector<PlannedStep>& plan, double now) {
    if (state.phase != RunPhase::NotStarted) throw IllegalTransition("session already started");
    if (plan.empty()) throw IllegalTransition("workflow has no steps");
    Transition t{state, {}};
    t.state.phase = RunPhase::Running;
    start_step(t, plan, 0, now);
    t.state.markers.insert(t.state.markers.end(), t.markers.begin(), t.markers.end());
    return t;
}

Transition advance(const WorkflowState& state, const std::vector<PlannedStep>& plan, const WorkflowEvent& event,
                   double now) {
    using Type = WorkflowEvent::Type;
    Transition t{state, {}};
    if (event.type == Type::Abort) {
        if (state.terminal()) return t;
        if (state.phase == RunPhase::Running) stop_step(t, plan, now);
        t.state.phase = RunPhase::Aborted;
        t.state.markers.insert(t.state.markers.end(), t.markers.begin(), t.markers.end());
        return t;
    }
    const char* name = event.type == Type::StepCompleted ? "step completion" : "timer expiry";
    if (state.phase == RunPhase::NotStarted) throw IllegalTransition(std::string(name) + " before the session started");
    if (state.terminal()) throw IllegalTransition(std::string(name) + " after the session ended");

    const auto& step = plan[state.current];
    if (event.type == Type::StepCompleted) {
        if (step.kind == PlannedStep::Kind::RelaxationVideo || step.kind == PlannedStep::Kind::Baseline)
            throw IllegalTransition("step " + step.id + " ends on its timer, not on completion");
        if (step.kind == PlannedStep::Kind::Questionnaire) {
            const json answers = event.payload.is_object() && event.payload.contains("answers")
                                     ? event.payload["answers"]
                                     : json();
            auto responses = validate_answers(step.questionnaire, step.id, answers);
            t.state.responses.insert(t.state.responses.end(), responses.begin(), responses.end());
        }
    } else if (!step.timed()) {
        throw IllegalTransition("step " + step.id + " has no timer");
    }

    stop_step(t, plan, now);
    if (state.current + 1 < plan.size()) {
        start_step(t, plan, state.current + 1, now);
    } else {
        t.state.phase = RunPhase::Finished;
    }
    t.state.markers.insert(t.state.markers.end(), t.markers.begin(), t.markers.end());
    return t;
}

double score_nasa_tlx(const NasaTlxResponse& response) {
    std::vector<std::string> diags;
    double sum = 0.0;
    for (std::size_t i = 0; i < response.values.size(); ++i) {
        const double v = response.values[i];
        if (!(v >= 0.0 && v <= 100.0))
            diags.push_back(std::string(kTlxItems[i]) + ": " + text::format_double(v) + " is outside 0..100");
        else if (!on_grid(v, 0.0, 5.0))
            diags.push_back(std::string(kTlxItems[i]) + ": " + text::format_double(v) + " is not a multiple of 5");
        sum += v;
    }
    if (!diags.empty()) throw ValidationError(diags);
    return sum / 6.0;
}

std::vector<rec::Response> validate_answers(const QuestionnaireSpec& spec, const std::string& step_id,
                                            const json& answers) {
    if (!answers.is_object()) throw ValidationError({step_id + ": payload needs an \"answers\" object"});
    std::vector<std::string> diags;
    std::vector<rec::Response> out;
    std::set<std::string> known;
    for (const auto& item : spec.items) {
        known.insert(item.id);
        const std::string where = step_id + "." + item.id;
        auto it = answers.find(item.id);
        if (it == answers.end()) {
            diags.push_back(where + ": no answer");
            continue;
        }
        const auto& v = *it;
        switch (item.scale.type) {
            case Scale::Type::Likert: {
                if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > item.scale.points) {
                    diags.push_back(where + ": expected an integer 1.." + std::to_string(item.scale.points));
                    continue;
                }
                out.push_back({step_id, item.id, std::to_string(v.get<long long>())});
                break;
            }
            case Scale::Type::Slider: {
                if (!v.is_number()) {
                    diags.push_back(where + ": expected a number");
                    continue;
                }
                const double x = v.get<double>();
                if (!(x >= item.scale.min && x <= item.scale.max) || !on_grid(x, item.scale.min, item.scale.step)) {
                    diags.push_back(where + ": " + text::format_double(x) + " is not a valid slider position");
                    continue;
                }
                out.push_back({step_id, item.id, text::format_double(x)});
                break;
            }
            case Scale::Type::FreeText:
                if (!v.is_string()) {
                    diags.push_back(where + ": expected a string");
                    continue;
                }
                out.push_back({step_id, item.id, v.get<std::string>()});
                break;
        }
    }
    for (const auto& [key, value] : answers.items())
        if (!known.contains(key)) diags.push_back(step_id + "." + key + ": not an item of " + spec.id);
    if (!diags.empty()) throw ValidationError(diags);

    if (spec == nasa_tlx_questionnaire()) {
        NasaTlxResponse r;
        for (std::size_t i = 0; i < kTlxItems.size(); ++i) r.values[i] = answers[kTlxItems[i]].get<double>();
        out.push_back({step_id, "raw_tlx", text::format_double(score_nasa_tlx(r))});
    }
    return out;
}

json to_json(const PlannedStep& step) {
    json j{{"id", step.id}, {"kind", to_string(step.kind)}, {"label", step.label()}, {"timed", step.timed()}};
    switch (step.kind) {
        case PlannedStep::Kind::Questionnaire: {
            json items = json::array();
            for (const auto& it : step.questionnaire.items) {
                json scale;
                switch (it.scale.type) {
                    case Scale::Type::Likert: scale = {{"type", "likert"}, {"points", it.scale.points}}; break;
                    case Scale::Type::Slider:
                        scale = {{"type", "slider"}, {"min", it.scale.min}, {"max", it.scale.max}, {"step", it.scale.step}};
                        break;
                    case Scale::Type::FreeText: scale = {{"type", "free_text"}}; break;
                }
                items.push_back({{"id", it.id}, {"prompt", it.prompt}, {"scale", scale}});
            }
            j["questionnaire"] = {{"id", step.questionnaire.id}, {"title", step.questionnaire.title}, {"items", items}};
            break;
        }
        case PlannedStep::Kind::RelaxationVideo:
            j["duration_s"] = step.duration_s;
            j["media"] = step.media;
            break;
        case PlannedStep::Kind::Baseline: j["duration_s"] = step.duration_s; break;
        case PlannedStep::Kind::Task:
            j["task"] = {{"id", step.task.id},
                         {"kind", to_string(step.task.kind)},
                         {"instructions", step.task.instructions},
                         {"corpus_files", step.task.corpus_files}};
            if (step.task.time_limit_s) j["duration_s"] = *step.task.time_limit_s;
            break;
    }
    return j;
}

json to_json(const WorkflowState& state, const std::vector<PlannedStep>& plan) {
    json steps = json::array();
    for (std::size_t i = 0; i < plan.size(); ++i)
        steps.push_back({{"id", plan[i].id}, {"kind", to_string(plan[i].kind)}, {"status", to_string(state.status[i])}});
    json j{{"phase", to_string(state.phase)}, {"steps", steps}, {"markers", state.markers.size()},
           {"responses", state.responses.size()}};
    if (state.phase == RunPhase::Running) j["current"] = state.current;
    else j["current"] = nullptr;
    return j;
}

}  // namespace cogtrace::workflow
