#pragma once
// Tokenization, vocabularies, and the JSON-lines conversation / QR-pair files.

#include "domseq/types.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace domseq {

using Tokens = std::vector<std::string>;
using TokenIds = std::vector<int>;

/// Lowercase, split on whitespace, and detach every punctuation character
/// into its own token.
Tokens tokenize(std::string_view raw);

/// Inverse of tokenize for display: tokens joined by single spaces with
/// punctuation attached to the preceding token.
std::string detokenize(std::span<const std::string> tokens);

class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kSos = 2;
    static constexpr int kEos = 3;
    static constexpr int kReserved = 4;

    Vocabulary();

    /// Builds from an explicit id-ordered token list (reserved symbols first).
    static Vocabulary from_tokens(std::vector<std::string> id_to_token);

    int size() const { return static_cast<int>(id_to_token_.size()); }
    int id(std::string_view token) const;  // UNK when absent
    bool contains(std::string_view token) const;
    const std::string& token(int id) const { return id_to_token_.at(static_cast<std::size_t>(id)); }
    const std::vector<std::string>& tokens() const { return id_to_token_; }

    bool operator==(const Vocabulary& other) const { return id_to_token_ == other.id_to_token_; }

private:
    int add(std::string token);

    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
};

/// Tokens with corpus frequency >= min_count, ordered by frequency
/// descending then lexicographically.
Vocabulary build_vocabulary(std::span<const Tokens> corpus, int min_count = 2);

TokenIds encode(std::span<const std::string> tokens, const Vocabulary& vocab);
TokenIds encode(std::string_view utterance, const Vocabulary& vocab);
Tokens decode(std::span<const int> ids, const Vocabulary& vocab);

struct DomainSet {
    std::vector<std::string> names;
    int out_of_domain_index = 0;

    DomainSet() = default;
    DomainSet(std::vector<std::string> names, std::string_view out_of_domain);

    int size() const { return static_cast<int>(names.size()); }
    std::optional<DomainId> find(std::string_view name) const;
    DomainId at(std::string_view name) const;  // throws on unknown names
    const std::string& name(DomainId d) const { return names.at(static_cast<std::size_t>(d)); }

    bool operator==(const DomainSet&) const = default;

    static DomainSet standard();  // movies, gaming, out_of_domain
};

struct Utterance {
    std::string raw;
    Tokens tokens;
    std::string speaker;
    std::optional<DomainId> gold_domain;

    static Utterance make(std::string raw, std::string speaker = {},
                          std::optional<DomainId> domain = std::nullopt);
};

struct Conversation {
    std::string id;
    std::vector<Utterance> turns;
};

struct QRPair {
    Utterance query;
    Utterance response;
    DomainId domain = 0;
};

/// One routable user turn: the query, the reply that followed it (if any),
/// and the gold domain.
struct DialogueTurn {
    const Utterance* query = nullptr;
    const Utterance* reference = nullptr;
};

/// The turns spoken by the conversation's opening speaker, each paired with
/// the next turn by a different speaker.
std::vector<DialogueTurn> dialogue_turns(const Conversation& conversation);

std::vector<Conversation> load_conversations(const std::filesystem::path& path,
                                             const DomainSet& domains);
std::vector<QRPair> load_qr_pairs(const std::filesystem::path& path, const DomainSet& domains);

void save_conversations(const std::filesystem::path& path,
                        std::span<const Conversation> conversations, const DomainSet& domains);
void save_qr_pairs(const std::filesystem::path& path, std::span<const QRPair> pairs,
                   const DomainSet& domains);

/// Writes via a sibling temporary file and renames, so readers never observe
/// a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Question/answer pairs extracted from every dialogue turn with a reference.
std::vector<QRPair> extract_qr_pairs(std::span<const Conversation> conversations);

}  // namespace domseq
