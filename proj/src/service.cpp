#include "domseq/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdio>
#include <istream>
#include <ostream>

namespace domseq {

using nlohmann::json;

ChatResponse make_chat_response(const TurnResult& result, const SessionState& session, const DomainSet& domains) {
    ChatResponse r;
    r.text = result.response_text;
    r.domain = domains.name(result.output.chosen_domain);
    r.turn = session.turn_count;
    r.empty_input = result.empty_input;
    for (int d = 0; d < domains.size(); ++d)
        r.scores.push_back({domains.name(d), result.classification.domain_dist(d), result.output.confidences(d),
                            result.output.scores(d)});
    return r;
}

namespace {

json scores_json(const std::vector<ScoreRow>& rows) {
    json out = json::array();
    for (const auto& s : rows)
        out.push_back({{"domain", s.domain}, {"classifier", s.classifier}, {"generator", s.generator},
                       {"product", s.product}});
    return out;
}

json response_json(const ChatResponse& r) {
    return {{"text", r.text}, {"domain", r.domain}, {"turn", r.turn}, {"empty_input", r.empty_input},
            {"scores", scores_json(r.scores)}};
}

}  // namespace

std::string to_json(const ChatResponse& response) { return response_json(response).dump(); }

ChatResponse chat_response_from_json(std::string_view text) {
    const json j = json::parse(text);
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    r.domain = j.at("domain").get<std::string>();
    r.turn = j.at("turn").get<int>();
    r.empty_input = j.value("empty_input", false);
    for (const auto& s : j.at("scores"))
        r.scores.push_back({s.at("domain").get<std::string>(), s.at("classifier").get<double>(),
                            s.at("generator").get<double>(), s.at("product").get<double>()});
    return r;
}

std::string format_turn(const ChatResponse& r) {
    std::string out = "bot: " + r.text + "\n";
    out += "domain: " + r.domain + (r.empty_input ? " (empty input)" : "") + "\n";
    out += "scores:";
    char buf[64];
    for (const auto& s : r.scores) {
        std::snprintf(buf, sizeof buf, " %s=%.6f", s.domain.c_str(), s.product);
        out += buf;
    }
    out += "\n";
    return out;
}

void run_repl(std::istream& in, std::ostream& out, const ModelBundle& bundle, const EngineConfig& config,
              bool prompt) {
    SessionState session;
    session.session_id = "repl";
    std::string line;
    for (;;) {
        if (prompt) out << "> " << std::flush;
        if (!std::getline(in, line)) break;
        if (line == "/quit") break;
        if (line == "/reset") {
            session = SessionState{};
            session.session_id = "repl";
            out << "(session reset)\n";
            continue;
        }
        const TurnResult r = step(bundle, config, session, line);
        out << format_turn(make_chat_response(r, session, config.domains)) << std::flush;
    }
}

ChatService::ChatService(EngineConfig config, std::chrono::steady_clock::duration idle_timeout)
    : config_(std::move(config)), idle_timeout_(idle_timeout) {}

void ChatService::set_bundle(std::shared_ptr<const ModelBundle> bundle) {
    std::lock_guard lock(mutex_);
    bundle_ = std::move(bundle);
}

bool ChatService::ready() const { return bundle() != nullptr; }

std::shared_ptr<const ModelBundle> ChatService::bundle() const {
    std::lock_guard lock(mutex_);
    return bundle_;
}

std::size_t ChatService::session_count() {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

void ChatService::evict_idle() {
    const auto now = std::chrono::steady_clock::now();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        Slot& s = *it->second;
        std::unique_lock busy(s.mutex, std::try_to_lock);
        if (busy && now - s.last_used > idle_timeout_) {
            busy.unlock();
            it = sessions_.erase(it);
        } else {
            ++it;
        }
    }
}

std::shared_ptr<ChatService::Slot> ChatService::slot(const std::string& id, bool create) {
    std::lock_guard lock(mutex_);
    evict_idle();
    auto it = sessions_.find(id);
    if (it != sessions_.end()) return it->second;
    if (!create) return nullptr;
    auto s = std::make_shared<Slot>();
    s->state.session_id = id;
    s->last_used = std::chrono::steady_clock::now();
    sessions_.emplace(id, s);
    return s;
}

ChatResponse ChatService::chat(const ChatRequest& request) {
    if (request.session_id.empty()) throw Error("session_id must be non-empty");
    auto model = bundle();
    if (!model) throw ServiceUnavailable("model bundle not loaded");
    auto s = slot(request.session_id, true);
    std::lock_guard turn(s->mutex);
    const TurnResult r = step(*model, config_, s->state, request.text);
    s->last_used = std::chrono::steady_clock::now();
    return make_chat_response(r, s->state, config_.domains);
}

void ChatService::reset(const std::string& session_id) {
    auto s = slot(session_id, true);
    std::lock_guard turn(s->mutex);
    s->state = SessionState{};
    s->state.session_id = session_id;
    s->last_used = std::chrono::steady_clock::now();
}

std::optional<std::string> ChatService::session_json(const std::string& session_id) {
    auto s = slot(session_id, false);
    if (!s) return std::nullopt;
    std::lock_guard turn(s->mutex);
    const SessionState& st = s->state;
    json history = json::array();
    for (DomainId d : st.predicted_domain_history) history.push_back(config_.domains.name(d));
    json transcript = json::array();
    int turn_no = 0;
    for (const auto& e : st.transcript) {
        std::vector<ScoreRow> rows;
        for (int d = 0; d < config_.domains.size(); ++d)
            rows.push_back({config_.domains.name(d), e.classifier(d), e.output.confidences(d), e.output.scores(d)});
        transcript.push_back({{"turn", ++turn_no},
                              {"user", e.user},
                              {"response", e.response_text},
                              {"domain", config_.domains.name(e.output.chosen_domain)},
                              {"empty_input", e.empty_input},
                              {"scores", scores_json(rows)}});
    }
    return json{{"session_id", st.session_id},
                {"turn", st.turn_count},
                {"history", std::move(history)},
                {"transcript", std::move(transcript)}}
        .dump();
}

std::string ChatService::health_json() const {
    return json{{"status", "ok"}, {"model_loaded", ready()}, {"version", ModelBundle::kFormatVersion}}.dump();
}

void ChatService::mount(httplib::Server& server) {
    const auto send_error = [](httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(json{{"error", message}}.dump(), "application/json");
    };

    server.Post("/chat", [this, send_error](const httplib::Request& req, httplib::Response& res) {
        ChatRequest request;
        try {
            const json body = json::parse(req.body);
            if (!body.is_object() || !body.contains("session_id") || !body.at("session_id").is_string() ||
                !body.contains("text") || !body.at("text").is_string())
                return send_error(res, 400, "expected {\"session_id\": string, \"text\": string}");
            request.session_id = body.at("session_id").get<std::string>();
            request.text = body.at("text").get<std::string>();
        } catch (const std::exception&) {
            return send_error(res, 400, "malformed JSON body");
        }
        if (request.session_id.empty()) return send_error(res, 400, "session_id must be non-empty");
        try {
            res.set_content(to_json(chat(request)), "application/json");
        } catch (const ServiceUnavailable& e) {
            send_error(res, 503, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    });

    server.Post(R"(/session/([^/]+)/reset)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        reset(id);
        res.set_content(json{{"session_id", id}, {"turn", 0}}.dump(), "application/json");
    });

    server.Get(R"(/session/([^/]+))", [this, send_error](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        if (auto body = session_json(id))
            res.set_content(*body, "application/json");
        else
            send_error(res, 404, "unknown session '" + id + "'");
    });

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(health_json(), "application/json");
    });
}

}  // namespace domseq
