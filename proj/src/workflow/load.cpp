#include <fstream>
#include <set>

#include "cogtrace/common/text.hpp"
#include "cogtrace/workflow/workflow.hpp"

namespace cogtrace::workflow {

using nlohmann::json;

std::string_view to_string(TaskKind k) {
    switch (k) {
        case TaskKind::Coding: return "coding";
        case TaskKind::Debugging: return "debugging";
        case TaskKind::Documentation: return "documentation";
        case TaskKind::EmailWriting: return "email_writing";
    }
    return "coding";
}

std::optional<TaskKind> parse_task_kind(std::string_view s) {
    for (auto k : {TaskKind::Coding, TaskKind::Debugging, TaskKind::Documentation, TaskKind::EmailWriting})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::string_view to_string(StepKind k) {
    switch (k) {
        case StepKind::Questionnaire: return "questionnaire";
        case StepKind::RelaxationVideo: return "relaxation_video";
        case StepKind::Baseline: return "baseline";
        case StepKind::TaskBlock: return "task_block";
    }
    return "questionnaire";
}

QuestionnaireSpec nasa_tlx_questionnaire() {
    static constexpr std::array<const char*, 6> prompts{
        "How mentally demanding was the task?",
        "How physically demanding was the task?",
        "How hurried or rushed was the pace of the task?",
        "How successful were you in accomplishing what you were asked to do?",
        "How hard did you have to work to accomplish your level of performance?",
        "How insecure, discouraged, irritated, stressed, and annoyed were you?"};
    QuestionnaireSpec q{"nasa_tlx", "NASA-TLX", {}};
    for (std::size_t i = 0; i < kTlxItems.size(); ++i)
        q.items.push_back({kTlxItems[i], prompts[i], {Scale::Type::Slider, 0, 0.0, 100.0, 5.0}});
    return q;
}

namespace {

// Collects diagnostics instead of stopping at the first problem.
class Reader {
public:
    explicit Reader(const LoadContext& ctx) : ctx_(ctx) {}

    void fail(const std::string& where, const std::string& what) { diags_.push_back(where + ": " + what); }
    std::vector<std::string>& diagnostics() { return diags_; }

    std::optional<std::string> string(const json& obj, const char* key, const std::string& where, bool required = true) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(where, std::string("missing \"") + key + "\"");
            return std::nullopt;
        }
        if (!it->is_string()) {
            fail(where, std::string("\"") + key + "\" must be a string");
            return std::nullopt;
        }
        return it->get<std::string>();
    }

    std::optional<double> number(const json& obj, const char* key, const std::string& where, bool required = true) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(where, std::string("missing \"") + key + "\"");
            return std::nullopt;
        }
        if (!it->is_number()) {
            fail(where, std::string("\"") + key + "\" must be a number");
            return std::nullopt;
        }
        return it->get<double>();
    }

    std::string read_text(const std::string& rel, const std::string& where) {
        const auto path = ctx_.base_dir / rel;
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            fail(where, "file not found: " + path.string());
            return {};
        }
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    bool exists_in_base(const std::string& rel) const { return std::filesystem::is_regular_file(ctx_.base_dir / rel); }
    bool exists_in_corpus(const std::string& rel) const {
        return std::filesystem::is_regular_file(ctx_.corpus_dir / rel);
    }
    const LoadContext& context() const { return ctx_; }

private:
    const LoadContext& ctx_;
    std::vector<std::string> diags_;
};

Scale read_scale(Reader& r, const json& j, const std::string& where) {
    Scale s;
    if (!j.is_object()) {
        r.fail(where, "scale must be an object");
        return s;
    }
    const auto type = r.string(j, "type", where).value_or("");
    if (type == "likert") {
        s.type = Scale::Type::Likert;
        const auto points = r.number(j, "points", where);
        if (points) {
            if (*points < 2 || *points != static_cast<int>(*points))
                r.fail(where, "likert points must be an integer >= 2");
            else
                s.points = static_cast<int>(*points);
        }
    } else if (type == "slider") {
        s.type = Scale::Type::Slider;
        s.min = r.number(j, "min", where).value_or(0.0);
        s.max = r.number(j, "max", where).value_or(0.0);
        s.step = r.number(j, "step", where).value_or(0.0);
        if (!(s.max > s.min)) r.fail(where, "slider max must exceed min");
        if (!(s.step > 0.0)) {
            r.fail(where, "slider step must be positive");
        } else {
            const double n = (s.max - s.min) / s.step;
            if (std::abs(n - std::round(n)) > 1e-9) r.fail(where, "slider range is not a whole number of steps");
        }
    } else if (type == "free_text") {
        s.type = Scale::Type::FreeText;
    } else if (!type.empty()) {
        r.fail(where, "unknown scale type \"" + type + "\"");
    }
    return s;
}

QuestionnaireSpec read_questionnaire(Reader& r, const json& j, const std::string& where) {
    if (j.is_string()) {
        if (j.get<std::string>() == "nasa-tlx") return nasa_tlx_questionnaire();
        r.fail(where, "unknown builtin questionnaire \"" + j.get<std::string>() + "\"");
        return {};
    }
    QuestionnaireSpec q;
    if (!j.is_object()) {
        r.fail(where, "questionnaire must be an object or a builtin name");
        return q;
    }
    q.id = r.string(j, "id", where).value_or("");
    q.title = r.string(j, "title", where, false).value_or(q.id);
    auto items = j.find("items");
    if (items == j.end() || !items->is_array() || items->empty()) {
        r.fail(where, "questionnaire needs a non-empty \"items\" array");
        return q;
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < items->size(); ++i) {
        const auto& it = (*items)[i];
        const std::string w = where + ".items[" + std::to_string(i) + "]";
        if (!it.is_object()) {
            r.fail(w, "item must be an object");
            continue;
        }
        QuestionItem item;
        item.id = r.string(it, "id", w).value_or("");
        item.prompt = r.string(it, "prompt", w).value_or("");
        if (auto sc = it.find("scale"); sc != it.end())
            item.scale = read_scale(r, *sc, w);
        else
            r.fail(w, "missing \"scale\"");
        if (!item.id.empty() && !ids.insert(item.id).second) r.fail(w, "duplicate item id \"" + item.id + "\"");
        q.items.push_back(std::move(item));
    }
    return q;
}

TaskSpec read_task(Reader& r, const json& j, const std::string& where) {
    TaskSpec t;
    if (!j.is_object()) {
        r.fail(where, "task must be an object");
        return t;
    }
    t.id = r.string(j, "id", where).value_or("");
    const auto kind = r.string(j, "kind", where).value_or("");
    if (auto k = parse_task_kind(kind))
        t.kind = *k;
    else if (!kind.empty())
        r.fail(where, "unknown task kind \"" + kind + "\"");
    if (auto file = r.string(j, "instructions", where)) {
        t.instructions_file = *file;
        t.instructions = r.read_text(*file, where);
    }
    if (auto files = j.find("corpus_files"); files != j.end()) {
        if (!files->is_array()) {
            r.fail(where, "\"corpus_files\" must be an array");
        } else {
            for (const auto& f : *files) {
                if (!f.is_string()) {
                    r.fail(where, "corpus file names must be strings");
                    continue;
                }
                t.corpus_files.push_back(f.get<std::string>());
                if (!r.exists_in_corpus(t.corpus_files.back()))
                    r.fail(where, "corpus file not found: " + (r.context().corpus_dir / t.corpus_files.back()).string());
            }
        }
    }
    if (t.kind != TaskKind::EmailWriting && t.corpus_files.empty() && !kind.empty() && parse_task_kind(kind))
        r.fail(where, std::string(to_string(t.kind)) + " task needs at least one corpus file");
    t.time_limit_s = r.number(j, "time_limit_s", where, false);
    if (t.time_limit_s && !(*t.time_limit_s > 0.0)) r.fail(where, "time_limit_s must be positive");
    return t;
}

}  // namespace

Workflow load_workflow(const json& config, const LoadContext& context) {
    Reader r(context);
    Workflow wf;
    if (!config.is_object()) throw ValidationError({"workflow: document must be a JSON object"});
    wf.id = r.string(config, "id", "workflow").value_or("");
    if (auto seed = config.find("seed"); seed != config.end()) {
        if (seed->is_number_unsigned())
            wf.seed = seed->get<std::uint64_t>();
        else
            r.fail("workflow", "\"seed\" must be a non-negative integer");
    }
    auto steps = config.find("steps");
    if (steps == config.end() || !steps->is_array()) {
        r.fail("workflow", "missing \"steps\" array");
        throw ValidationError(r.diagnostics());
    }
    if (steps->empty()) r.fail("workflow", "workflow has zero steps");

    std::set<std::string> ids;
    auto claim = [&](const std::string& id, const std::string& where) {
        if (!id.empty() && !ids.insert(id).second) r.fail(where, "duplicate id \"" + id + "\"");
    };
    int blocks = 0;
    for (std::size_t i = 0; i < steps->size(); ++i) {
        const auto& j = (*steps)[i];
        const std::string where = "steps[" + std::to_string(i) + "]";
        if (!j.is_object()) {
            r.fail(where, "step must be an object");
            continue;
        }
        Step s;
        s.id = r.string(j, "id", where).value_or("");
        claim(s.id, where);
        const auto kind = r.string(j, "kind", where).value_or("");
        if (kind == "questionnaire") {
            s.kind = StepKind::Questionnaire;
            if (auto q = j.find("questionnaire"); q != j.end())
                s.questionnaire = read_questionnaire(r, *q, where + ".questionnaire");
            else
                r.fail(where, "missing \"questionnaire\"");
        } else if (kind == "relaxation_video" || kind == "baseline") {
            s.kind = kind == "baseline" ? StepKind::Baseline : StepKind::RelaxationVideo;
            if (auto d = r.number(j, "duration_s", where)) {
                s.duration_s = *d;
                if (!(*d > 0.0)) r.fail(where, "duration_s must be positive");
            }
            if (s.kind == StepKind::RelaxationVideo) {
                if (auto m = r.string(j, "media", where)) {
                    s.media = *m;
                    if (!r.exists_in_base(*m)) r.fail(where, "media file not found: " + (context.base_dir / *m).string());
                }
            }
        } else if (kind == "task_block") {
            s.kind = StepKind::TaskBlock;
            ++blocks;
            if (auto rnd = j.find("randomize"); rnd != j.end()) {
                if (rnd->is_boolean())
                    s.randomize = rnd->get<bool>();
                else
                    r.fail(where, "\"randomize\" must be a boolean");
            }
            if (auto q = j.find("interleave"); q != j.end() && !q->is_null())
                s.interleave = read_questionnaire(r, *q, where + ".interleave");
            auto tasks = j.find("tasks");
            if (tasks == j.end() || !tasks->is_array() || tasks->empty()) {
                r.fail(where, "task block needs a non-empty \"tasks\" array");
            } else {
                for (std::size_t t = 0; t < tasks->size(); ++t) {
                    const std::string tw = where + ".tasks[" + std::to_string(t) + "]";
                    s.tasks.push_back(read_task(r, (*tasks)[t], tw));
                    claim(s.tasks.back().id, tw);
                }
            }
        } else if (!kind.empty()) {
            r.fail(where, "unknown step kind \"" + kind + "\"");
        }
        wf.steps.push_back(std::move(s));
    }
    if (!steps->empty() && blocks != 1)
        r.fail("workflow", "expected exactly one task_block, found " + std::to_string(blocks));
    if (!r.diagnostics().empty()) throw ValidationError(r.diagnostics());
    return wf;
}

Workflow load_workflow_file(const std::filesystem::path& path, const std::filesystem::path& corpus_dir) {
    json j;
    try {
        j = json::parse(text::read_file(path.string()));
    } catch (const json::parse_error& e) {
        throw ValidationError({path.string() + ": " + e.what()});
    }
    return load_workflow(j, {path.parent_path(), corpus_dir});
}

}  // namespace cogtrace::workflow
