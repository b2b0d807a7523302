#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogtrace/code_model/corpus.hpp"
#include "cogtrace/gaze/mapping.hpp"
#include "cogtrace/recorder/session.hpp"
#include "cogtrace/service/config.hpp"
#include "cogtrace/workflow/workflow.hpp"

namespace httplib {
class Server;
}

namespace cogtrace::service {

struct Reply {
    int status = 200;
    nlohmann::json body;
};

// The long-running session process. Three activities run concurrently:
// ingestion (one thread per discovered stream), the workflow actor (the only
// writer of workflow state, fed through a command queue) and HTTP serving.
// Readers only ever see immutable snapshots.
class SessionService {
public:
    // Loads the workflow and corpus and binds the HTTP port. Throws
    // ValidationError for an invalid config and Error when the port is taken.
    explicit SessionService(SessionConfig config);
    ~SessionService();
    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    std::uint16_t port() const noexcept { return port_; }
    void start();
    void stop();
    // Blocks until stop() is called from another thread.
    void wait();

    // The same operations the HTTP routes expose.
    nlohmann::json status() const;
    Reply current_step() const;
    Reply start_session();
    Reply submit_step(const nlohmann::json& payload);
    Reply abort_session();
    Reply set_view(const nlohmann::json& body);
    Reply heatmap(const std::optional<std::string>& script) const;
    Reply markers() const;

private:
    struct Ingest;
    struct Command {
        enum class Type { Start, Submit, Abort, View } type;
        nlohmann::json payload;
        std::promise<Reply> reply;
    };
    struct Snapshot {
        workflow::WorkflowState state;
        double step_started = 0.0;  // receiver clock
        double recording_started = 0.0;
        bool recording = false;
        bool finalized = false;
        std::string session_dir;
        std::vector<std::string> errors;
    };

    void route();
    void discovery_loop();
    void actor_loop();
    Reply post(Command::Type type, nlohmann::json payload);
    Reply handle(Command& cmd);
    void apply(const workflow::Transition& tr, double now);
    void on_step_started(double now);
    void finish_recording();
    void publish();
    std::shared_ptr<const Snapshot> snapshot() const;
    std::optional<double> active_deadline() const;

    SessionConfig config_;
    code::SourceCorpus corpus_;
    workflow::Workflow workflow_;
    std::vector<workflow::PlannedStep> plan_;
    std::unique_ptr<httplib::Server> http_;
    std::uint16_t port_ = 0;

    // actor-owned
    workflow::WorkflowState state_;
    double step_started_ = 0.0;
    double recording_started_ = 0.0;
    bool finalized_ = false;
    std::string session_dir_;
    std::vector<std::string> errors_;
    std::vector<gaze::ViewChange> views_;  // also read by heatmap under views_mutex_

    mutable std::mutex views_mutex_;
    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const Snapshot> snapshot_;
    mutable std::mutex recording_mutex_;
    std::shared_ptr<rec::RecordingSession> recording_;

    mutable std::mutex ingest_mutex_;
    std::vector<std::unique_ptr<Ingest>> ingests_;

    std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::deque<std::unique_ptr<Command>> queue_;

    std::atomic<bool> stopping_{false};
    std::atomic<bool> started_{false};
    std::mutex stop_mutex_;
    std::condition_variable stop_cv_;
    std::thread http_thread_;
    std::thread discovery_thread_;
    std::thread actor_thread_;
};

}  // namespace cogtrace::service
