#pragma once
// Chat loop over HTTP/JSON and the terminal REPL. Both render turns through
// the same ChatResponse so a transcript can be replayed through either.

#include "domseq/engine.hpp"

#include <chrono>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace domseq {

struct ChatRequest {
    std::string session_id;
    std::string text;
};

struct ScoreRow {
    std::string domain;
    double classifier = 0;  // p(d_i)
    double generator = 0;   // p(r_i)
    double product = 0;
};

struct ChatResponse {
    std::string text;
    std::string domain;
    std::vector<ScoreRow> scores;
    int turn = 0;
    bool empty_input = false;
};

ChatResponse make_chat_response(const TurnResult& result, const SessionState& session, const DomainSet& domains);

std::string to_json(const ChatResponse& response);
ChatResponse chat_response_from_json(std::string_view text);

/// REPL rendering of one turn: response line, chosen domain, product scores.
std::string format_turn(const ChatResponse& response);

/// Reads utterances line by line until EOF or "/quit"; "/reset" clears the
/// session. With a prompt, "> " is printed before each read.
void run_repl(std::istream& in, std::ostream& out, const ModelBundle& bundle, const EngineConfig& config,
              bool prompt = false);

class ServiceUnavailable : public Error {
public:
    using Error::Error;
};

/// In-memory sessions over a shared immutable bundle. Turns of one session
/// run one at a time; distinct sessions run concurrently.
class ChatService {
public:
    explicit ChatService(EngineConfig config,
                         std::chrono::steady_clock::duration idle_timeout = std::chrono::minutes(30));

    void set_bundle(std::shared_ptr<const ModelBundle> bundle);
    bool ready() const;

    ChatResponse chat(const ChatRequest& request);
    void reset(const std::string& session_id);
    /// Transcript and domain history as JSON, or nullopt for unknown sessions.
    std::optional<std::string> session_json(const std::string& session_id);
    std::string health_json() const;
    std::size_t session_count();

    /// Registers POST /chat, POST /session/{id}/reset, GET /session/{id},
    /// GET /health.
    void mount(httplib::Server& server);

private:
    struct Slot {
        std::mutex mutex;
        SessionState state;
        std::chrono::steady_clock::time_point last_used;
    };

    std::shared_ptr<Slot> slot(const std::string& id, bool create);
    void evict_idle();
    std::shared_ptr<const ModelBundle> bundle() const;

    EngineConfig config_;
    std::chrono::steady_clock::duration idle_timeout_;
    mutable std::mutex mutex_;
    std::shared_ptr<const ModelBundle> bundle_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

}  // namespace domseq
