#pragma once
// Automatic per-utterance domain tagging: LDA topic proportions (collapsed
// Gibbs sampling), thresholded topic-to-domain mapping, out-of-scope
// relabelling, and exponentially decaying smoothing along the conversation.

#include "domseq/corpus.hpp"
#include "domseq/math.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace domseq {

struct LdaModel {
    int n_topics = 0;
    int vocab_size = 0;
    double alpha = 0.1;
    double beta = 0.01;
    Eigen::MatrixXi topic_word_counts;  // T x V
    Eigen::VectorXi topic_totals;       // row sums of topic_word_counts
};

struct LdaFit {
    LdaModel model;
    Eigen::MatrixXi doc_topic_counts;        // D x T
    std::vector<std::vector<int>> assignments;  // topic per token
};

struct LdaOptions {
    int n_topics = 3;
    double alpha = 0.1;
    double beta = 0.01;
    int iterations = 500;
    int infer_iterations = 100;
    std::uint64_t seed = 1;
};

/// Called after each Gibbs sweep with the sweep index and current counts.
using SweepObserver = std::function<void(int, const LdaFit&)>;

LdaFit fit_lda(std::span<const TokenIds> documents, int vocab_size, const LdaOptions& options,
               const SweepObserver& observer = {});

/// Topic proportions of a fitted training document.
Vector document_theta(const LdaFit& fit, std::size_t doc);

/// Fold-in estimate for an unseen document; the model counts stay fixed.
/// Proportions are averaged over the second half of the sweeps. Empty
/// documents (or ones made only of unknown ids) return the uniform vector.
Vector infer_theta(const LdaModel& model, std::span<const int> document, int iterations,
                   std::uint64_t seed);

/// Topic -> label id. Label ids below the DomainSet size are configured
/// domains; larger ids name keyword groups outside the configured set.
struct TopicDomainMap {
    std::vector<int> assignment;
    std::vector<std::string> labels;  // label id -> name
};

/// Each topic maps to the label whose seed keywords carry the most count
/// mass among the topic's top_n words; topics without any seed keyword map
/// to the out-of-domain index.
TopicDomainMap map_topics(const LdaModel& model, const Vocabulary& vocab, const DomainSet& domains,
                          std::span<const std::pair<std::string, std::vector<std::string>>> seed_keywords,
                          int top_n = 20);

/// Label whose summed topic mass is strictly above threshold, if any.
std::optional<int> tag_utterance(const Vector& theta, const TopicDomainMap& map, double threshold = 0.5);

/// Labels outside [0, K) become the out-of-domain index; untagged stays untagged.
std::vector<std::optional<int>> relabel_out_of_scope(std::span<const std::optional<int>> tags,
                                                     const DomainSet& domains);

/// Turn t takes the argmax of sum_k decay^k onehot(tag_{t-k}) over tagged
/// history; turns with no tagged history become out-of-domain.
std::vector<DomainId> smooth_domains(std::span<const std::optional<int>> raw_tags, double decay,
                                     const DomainSet& domains);

struct TaggerOptions {
    LdaOptions lda;
    double threshold = 0.5;
    double decay = 0.5;
    int min_count = 2;
    /// Drop common English function words before fitting. Without this,
    /// topics over short utterances form around words like "the" and "you".
    bool drop_stopwords = true;
};

const std::vector<std::string>& english_stopwords();

struct TaggingResult {
    std::vector<Conversation> conversations;  // every turn's domain filled
    TopicDomainMap topic_map;
    std::size_t raw_tagged = 0;  // turns whose topic mass cleared the threshold
};

/// Full pipeline over raw conversations: fit on utterances, tag, relabel,
/// smooth per conversation.
TaggingResult tag_conversations(std::span<const Conversation> conversations, const DomainSet& domains,
                                std::span<const std::pair<std::string, std::vector<std::string>>> seed_keywords,
                                const TaggerOptions& options);

}  // namespace domseq
