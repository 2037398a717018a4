#include "domseq/reranker.hpp"

namespace domseq {

RerankOutput rerank(const RerankInput& input) {
    const auto k = static_cast<std::size_t>(input.domain_dist.size());
    if (input.candidates.size() != k || k == 0)
        throw Error("rerank: " + std::to_string(input.candidates.size()) + " candidates for " +
                    std::to_string(k) + " domains");
    RerankOutput out;
    out.scores.resize(static_cast<Eigen::Index>(k));
    out.confidences.resize(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        if (input.candidates[i].domain != static_cast<DomainId>(i))
            throw Error("rerank: candidate " + std::to_string(i) + " is not aligned with its domain");
        const auto d = static_cast<Eigen::Index>(i);
        out.confidences(d) = input.candidates[i].confidence;
        out.scores(d) = input.domain_dist(d) * out.confidences(d);
    }
    out.chosen_domain = static_cast<DomainId>(argmax(out.scores));
    out.response = input.candidates[static_cast<std::size_t>(out.chosen_domain)];
    return out;
}

}  // namespace domseq

namespace domseq {

SessionState feedback(SessionState session, const RerankOutput& output) {
    session.predicted_domain_history.push_back(output.chosen_domain);
    session.turn_count = static_cast<int>(session.predicted_domain_history.size());
    return session;
}

}  // namespace domseq
