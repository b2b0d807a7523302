#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogtrace/common/error.hpp"
#include "cogtrace/recorder/session.hpp"

namespace cogtrace::workflow {

struct Scale {
    enum class Type { Likert, Slider, FreeText };

    Type type = Type::FreeText;
    int points = 0;  // likert: answers 1..points
    double min = 0.0, max = 0.0, step = 0.0;

    bool operator==(const Scale&) const = default;
};

struct QuestionItem {
    std::string id;
    std::string prompt;
    Scale scale;

    bool operator==(const QuestionItem&) const = default;
};

struct QuestionnaireSpec {
    std::string id;
    std::string title;
    std::vector<QuestionItem> items;

    bool operator==(const QuestionnaireSpec&) const = default;
};

enum class TaskKind { Coding, Debugging, Documentation, EmailWriting };

std::string_view to_string(TaskKind k);
std::optional<TaskKind> parse_task_kind(std::string_view s);

struct TaskSpec {
    std::string id;
    TaskKind kind = TaskKind::Coding;
    std::string instructions;       // file contents
    std::string instructions_file;  // as written in the config
    std::vector<std::string> corpus_files;  // corpus-relative
    std::optional<double> time_limit_s;

    bool operator==(const TaskSpec&) const = default;
};

enum class StepKind { Questionnaire, RelaxationVideo, Baseline, TaskBlock };

std::string_view to_string(StepKind k);

struct Step {
    std::string id;
    StepKind kind = StepKind::Questionnaire;
    QuestionnaireSpec questionnaire;  // Questionnaire
    double duration_s = 0.0;          // RelaxationVideo, Baseline
    std::string media;                // RelaxationVideo
    std::vector<TaskSpec> tasks;      // TaskBlock
    bool randomize = false;
    std::optional<QuestionnaireSpec> interleave;

    bool operator==(const Step&) const = default;
};

struct Workflow {
    std::string id;
    std::vector<Step> steps;
    std::uint64_t seed = 0;  // participant seed

    bool operator==(const Workflow&) const = default;
};

// The six raw TLX subscales, sliders 0..100 in steps of 5.
QuestionnaireSpec nasa_tlx_questionnaire();
inline constexpr std::array<const char*, 6> kTlxItems{"mental_demand", "physical_demand", "temporal_demand",
                                                     "performance",   "effort",          "frustration"};

struct LoadContext {
    std::filesystem::path base_dir;    // media and instruction files
    std::filesystem::path corpus_dir;  // task corpus files
};

// Throws ValidationError listing every violation found.
Workflow load_workflow(const nlohmann::json& config, const LoadContext& context);
Workflow load_workflow_file(const std::filesystem::path& path, const std::filesystem::path& corpus_dir);

// Fisher-Yates keyed by (seed, block id); identity when randomize is unset.
std::vector<TaskSpec> randomize_tasks(const Step& block, std::uint64_t seed);

// A step as the participant meets it: task blocks expand into their tasks
// and interleaved questionnaires.
struct PlannedStep {
    enum class Kind { Questionnaire, RelaxationVideo, Baseline, Task };

    std::string id;
    Kind kind = Kind::Questionnaire;
    std::size_t block = 0;  // index into Workflow::steps
    QuestionnaireSpec questionnaire;
    TaskSpec task;
    double duration_s = 0.0;
    std::string media;

    // "questionnaire:<id>", "baseline:<id>", ... as used in markers.
    std::string label() const;
    bool timed() const noexcept;
};

std::string_view to_string(PlannedStep::Kind k);

std::vector<PlannedStep> plan_steps(const Workflow& workflow);

enum class StepStatus { Pending, Active, Done };
enum class RunPhase { NotStarted, Running, Finished, Aborted };

std::string_view to_string(StepStatus s);
std::string_view to_string(RunPhase p);

struct Marker {
    double time = 0.0;
    std::string kind;  // step_start | step_stop
    std::string label;

    bool operator==(const Marker&) const = default;
};

struct WorkflowState {
    RunPhase phase = RunPhase::NotStarted;
    std::size_t current = 0;  // index into the plan while Running
    std::vector<StepStatus> status;
    std::vector<rec::Response> responses;
    std::vector<Marker> markers;

    bool terminal() const noexcept { return phase == RunPhase::Finished || phase == RunPhase::Aborted; }
    bool operator==(const WorkflowState&) const = default;
};

struct WorkflowEvent {
    enum class Type { StepCompleted, TimerElapsed, Abort };

    Type type = Type::StepCompleted;
    nlohmann::json payload;  // StepCompleted: {"answers": {...}}
};

class IllegalTransition : public Error {
public:
    using Error::Error;
};

struct Transition {
    WorkflowState state;
    std::vector<Marker> markers;  // emitted by this transition
};

WorkflowState initial_state(const std::vector<PlannedStep>& plan);

// NotStarted -> Running with the first step Active.
Transition begin(const WorkflowState& state, const std::vector<PlannedStep>& plan, double now);

// Questionnaires and tasks complete with StepCompleted, timed steps with
// TimerElapsed (tasks only when they carry a time limit). Abort stops the
// active step and ends the run; repeated Abort is a no-op. Throws
// IllegalTransition or ValidationError (bad answers); the input state is
// never modified.
Transition advance(const WorkflowState& state, const std::vector<PlannedStep>& plan, const WorkflowEvent& event,
                   double now);

struct NasaTlxResponse {
    std::array<double, 6> values{};  // kTlxItems order
};

// Unweighted mean. Throws ValidationError for values outside 0..100 or off
// the 5-point grid.
double score_nasa_tlx(const NasaTlxResponse& response);

// Questionnaire answers to responses; throws ValidationError.
std::vector<rec::Response> validate_answers(const QuestionnaireSpec& spec, const std::string& step_id,
                                            const nlohmann::json& answers);

// JSON views used by the API and the CLI.
nlohmann::json to_json(const PlannedStep& step);
nlohmann::json to_json(const WorkflowState& state, const std::vector<PlannedStep>& plan);

}  // namespace cogtrace::workflow
