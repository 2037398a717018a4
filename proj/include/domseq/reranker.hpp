#pragma once
// Final response selection: argmax_i p(d_i) * p(r_i), where p(d_i) comes
// from the domain classifier and p(r_i) is generator i's confidence.

#include "domseq/seq2seq.hpp"

#include <span>
#include <string>
#include <vector>

namespace domseq {

struct RerankInput {
    DomainDistribution domain_dist;
    std::vector<ScoredResponse> candidates;  // candidates[i].domain == i
};

struct RerankOutput {
    DomainId chosen_domain = 0;
    ScoredResponse response;
    Vector confidences;  // p(r_i) of every candidate
    Vector scores;       // p(d_i) * p(r_i)
};

/// Ties go to the lowest domain index. Confidences are used as produced,
/// never renormalized across domains.
RerankOutput rerank(const RerankInput& input);

}  // namespace domseq

namespace domseq {

struct TranscriptEntry {
    std::string user;
    std::string response_text;
    RerankOutput output;
    DomainDistribution classifier;  // p(d_i) used for this turn
    bool empty_input = false;
};

/// Per-conversation state. The predicted-domain history holds one d' per
/// completed turn and is what the classifiers condition on next turn.
struct SessionState {
    std::string session_id;
    std::vector<DomainId> predicted_domain_history;
    int turn_count = 0;
    std::vector<TranscriptEntry> transcript;
};

/// Appends the chosen domain to the session history.
SessionState feedback(SessionState session, const RerankOutput& output);

}  // namespace domseq
