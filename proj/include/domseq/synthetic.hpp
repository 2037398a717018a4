#pragma once
// Desk-scale three-domain conversation corpus. Each domain has keyword
// templates; a shared pool of ambiguous templates can only be resolved by
// the domain of earlier turns.

#include "domseq/corpus.hpp"
#include "domseq/evalmetrics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace domseq {

struct SyntheticOptions {
    std::uint64_t seed = 1;
    int n_conversations = 500;
    double switch_prob = 0.2;
    /// Chance that a turn which continues the current domain uses an
    /// ambiguous template. Openings and switch turns always carry keywords.
    double ambiguous_rate = 0.55;
    int min_user_turns = 4;
    int max_user_turns = 9;
};

struct SyntheticCorpus {
    DomainSet domains;
    std::vector<Conversation> conversations;
    std::vector<QRPair> pairs;
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions& options);

/// Query texts of the ambiguous pool, as they appear in the corpus.
const std::vector<std::string>& ambiguous_queries();
bool is_ambiguous_query(const std::string& raw);

/// Seed keywords per domain name, suitable for topic-to-domain mapping.
std::vector<std::pair<std::string, std::vector<std::string>>> synthetic_seed_keywords();

/// Embedding table over every corpus token with domain-clustered geometry:
/// tokens used mostly by one domain share that domain's direction, tokens
/// spread across domains share a common one.
EmbeddingTable synthetic_embeddings(const SyntheticCorpus& corpus, int dim = 24,
                                    std::uint64_t seed = 7);

}  // namespace domseq
