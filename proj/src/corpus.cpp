#include "domseq/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace domseq {

namespace {

bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }
bool is_space(unsigned char c) { return c < 0x80 && std::isspace(c); }

bool is_punct_token(const std::string& t) {
    return t.size() == 1 && is_punct(static_cast<unsigned char>(t[0]));
}

}  // namespace

Tokens tokenize(std::string_view raw) {
    Tokens out;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) out.push_back(std::move(word));
        word.clear();
    };
    for (char ch : raw) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_space(c)) {
            flush();
        } else if (is_punct(c)) {
            flush();
            out.emplace_back(1, ch);
        } else {
            word.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        }
    }
    flush();
    return out;
}

std::string detokenize(std::span<const std::string> tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty() && !is_punct_token(t)) out.push_back(' ');
        out += t;
    }
    return out;
}

Vocabulary::Vocabulary() {
    for (const char* s : {"<pad>", "<unk>", "<s>", "</s>"}) add(s);
}

int Vocabulary::add(std::string token) {
    const int id = size();
    token_to_id_.emplace(token, id);
    id_to_token_.push_back(std::move(token));
    return id;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> id_to_token) {
    Vocabulary v;
    if (id_to_token.size() < kReserved ||
        !std::equal(v.id_to_token_.begin(), v.id_to_token_.end(), id_to_token.begin()))
        throw Error("vocabulary: reserved symbols missing");
    for (std::size_t i = kReserved; i < id_to_token.size(); ++i) {
        if (v.contains(id_to_token[i])) throw Error("vocabulary: duplicate token '" + id_to_token[i] + "'");
        v.add(std::move(id_to_token[i]));
    }
    return v;
}

int Vocabulary::id(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
    return token_to_id_.count(std::string(token)) > 0;
}

Vocabulary build_vocabulary(std::span<const Tokens> corpus, int min_count) {
    if (min_count < 1) throw Error("build_vocabulary: min_count must be >= 1");
    Vocabulary reserved;
    std::map<std::string, int> counts;
    for (const auto& doc : corpus)
        for (const auto& t : doc)
            if (!reserved.contains(t)) ++counts[t];

    std::vector<std::pair<std::string, int>> kept;
    for (auto& [tok, n] : counts)
        if (n >= min_count) kept.emplace_back(tok, n);
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<std::string> ids = reserved.tokens();
    for (auto& [tok, n] : kept) ids.push_back(tok);
    return Vocabulary::from_tokens(std::move(ids));
}

TokenIds encode(std::span<const std::string> tokens, const Vocabulary& vocab) {
    TokenIds ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(vocab.id(t));
    return ids;
}

TokenIds encode(std::string_view utterance, const Vocabulary& vocab) {
    const Tokens tokens = tokenize(utterance);
    return encode(tokens, vocab);
}

Tokens decode(std::span<const int> ids, const Vocabulary& vocab) {
    Tokens out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(vocab.token(id));
    return out;
}

DomainSet::DomainSet(std::vector<std::string> names_, std::string_view out_of_domain)
    : names(std::move(names_)) {
    if (names.size() < 2) throw Error("domain set needs at least two domains");
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = i + 1; j < names.size(); ++j)
            if (names[i] == names[j]) throw Error("duplicate domain name '" + names[i] + "'");
    auto ood = find(out_of_domain);
    if (!ood) throw Error("out-of-domain name '" + std::string(out_of_domain) + "' is not a domain");
    out_of_domain_index = *ood;
}

std::optional<DomainId> DomainSet::find(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<DomainId>(i);
    return std::nullopt;
}

DomainId DomainSet::at(std::string_view name) const {
    if (auto d = find(name)) return *d;
    throw Error("unknown domain '" + std::string(name) + "'");
}

DomainSet DomainSet::standard() { return DomainSet({"movies", "gaming", "out_of_domain"}, "out_of_domain"); }

Utterance Utterance::make(std::string raw, std::string speaker, std::optional<DomainId> domain) {
    Utterance u;
    u.tokens = tokenize(raw);
    u.raw = std::move(raw);
    u.speaker = std::move(speaker);
    u.gold_domain = domain;
    return u;
}

std::vector<DialogueTurn> dialogue_turns(const Conversation& conversation) {
    std::vector<DialogueTurn> out;
    if (conversation.turns.empty()) return out;
    const std::string& user = conversation.turns.front().speaker;
    const auto& turns = conversation.turns;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        if (turns[i].speaker != user) continue;
        DialogueTurn t{&turns[i], nullptr};
        if (i + 1 < turns.size() && turns[i + 1].speaker != user) t.reference = &turns[i + 1];
        out.push_back(t);
    }
    return out;
}

std::vector<QRPair> extract_qr_pairs(std::span<const Conversation> conversations) {
    std::vector<QRPair> out;
    for (const auto& c : conversations)
        for (const auto& t : dialogue_turns(c))
            if (t.reference && t.query->gold_domain)
                out.push_back({*t.query, *t.reference, *t.query->gold_domain});
    return out;
}

namespace {

using nlohmann::json;

template <typename F>
void for_each_record(const std::filesystem::path& path, F&& f) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            f(json::parse(line));
        } catch (const std::exception& e) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::string text_field(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw Error(std::string("missing string field \"") + key + "\"");
    return j.at(key).get<std::string>();
}

}  // namespace

std::vector<Conversation> load_conversations(const std::filesystem::path& path,
                                             const DomainSet& domains) {
    std::vector<Conversation> out;
    for_each_record(path, [&](const json& j) {
        Conversation c;
        c.id = j.contains("id") ? (j.at("id").is_string() ? j.at("id").get<std::string>()
                                                           : j.at("id").dump())
                                : std::to_string(out.size());
        if (!j.contains("turns") || !j.at("turns").is_array()) throw Error("missing \"turns\" array");
        for (const auto& t : j.at("turns")) {
            std::optional<DomainId> d;
            if (t.contains("domain") && !t.at("domain").is_null()) d = domains.at(text_field(t, "domain"));
            c.turns.push_back(Utterance::make(text_field(t, "text"),
                                              t.contains("speaker") ? text_field(t, "speaker") : "", d));
        }
        if (c.turns.empty()) throw Error("conversation has no turns");
        out.push_back(std::move(c));
    });
    return out;
}

std::vector<QRPair> load_qr_pairs(const std::filesystem::path& path, const DomainSet& domains) {
    std::vector<QRPair> out;
    for_each_record(path, [&](const json& j) {
        const DomainId d = domains.at(text_field(j, "domain"));
        out.push_back({Utterance::make(text_field(j, "query"), "user", d),
                       Utterance::make(text_field(j, "response"), "bot", d), d});
    });
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

void save_conversations(const std::filesystem::path& path,
                        std::span<const Conversation> conversations, const DomainSet& domains) {
    std::ostringstream os;
    for (const auto& c : conversations) {
        json turns = json::array();
        for (const auto& u : c.turns) {
            json t = {{"speaker", u.speaker}, {"text", u.raw}};
            if (u.gold_domain) t["domain"] = domains.name(*u.gold_domain);
            turns.push_back(std::move(t));
        }
        os << json{{"id", c.id}, {"turns", std::move(turns)}}.dump() << '\n';
    }
    write_file_atomic(path, os.str());
}

void save_qr_pairs(const std::filesystem::path& path, std::span<const QRPair> pairs,
                   const DomainSet& domains) {
    std::ostringstream os;
    for (const auto& p : pairs)
        os << json{{"query", p.query.raw}, {"response", p.response.raw}, {"domain", domains.name(p.domain)}}
                  .dump()
           << '\n';
    write_file_atomic(path, os.str());
}

}  // namespace domseq
