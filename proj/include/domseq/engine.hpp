#pragma once
// End-to-end turn processing: SVM -> context-aware classifier -> one greedy
// decode per domain generator -> rerank -> feed d' back into the session.

#include "domseq/corpus.hpp"
#include "domseq/ensemble_classifier.hpp"
#include "domseq/evalmetrics.hpp"
#include "domseq/lda_tagger.hpp"
#include "domseq/reranker.hpp"
#include "domseq/rnn_classifier.hpp"
#include "domseq/seq2seq.hpp"
#include "domseq/tfidf_svm.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace domseq {

enum class ClassifierKind { Ensemble, Rnn };

struct EngineConfig {
    DomainSet domains = DomainSet::standard();
    ClassifierKind classifier = ClassifierKind::Ensemble;
    SvmFeature svm_vector = SvmFeature::Soft;            // v_d fed to the RNN classifier
    SvmFeature ensemble_svm_feature = SvmFeature::Soft;  // SVM slot of the ensemble
    int max_len = 30;
    int min_count = 2;

    SvmOptions svm;
    EnsembleOptions ensemble;
    RnnOptions rnn;
    GeneratorOptions generator;
    TaggerOptions tagger;

    // Training data, resolved relative to the config file.
    std::filesystem::path conversations;
    std::map<std::string, std::filesystem::path> qr_pairs;  // domain name -> file
    std::filesystem::path seed_keywords;
};

EngineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
EngineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const EngineConfig& config);

ClassifierKind parse_classifier_kind(std::string_view name);
std::string to_string(ClassifierKind kind);

struct ModelBundle {
    static constexpr int kFormatVersion = 1;

    int format_version = kFormatVersion;
    EngineConfig config;
    TfIdfVectorizer vectorizer;
    LinearSvm svm;
    LogisticModel ensemble;
    RnnDomainModel rnn;
    std::vector<Seq2SeqModel> generators;  // index == domain id
};

/// Verifies that every component agrees on the domain count.
void validate(const ModelBundle& bundle);

/// Bundle directory: manifest.json plus one little-endian float64 file per
/// tensor. Written to a sibling temporary directory and renamed into place.
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir);
ModelBundle load_bundle(const std::filesystem::path& dir);

struct Classification {
    DomainDistribution v_d;        // soft SVM distribution
    DomainId svm_label = 0;
    DomainDistribution domain_dist;  // p(d_i) from the configured classifier
};

Classification classify(const ModelBundle& bundle, const EngineConfig& config,
                        std::span<const DomainId> history, std::span<const std::string> tokens);

struct TurnResult {
    RerankOutput output;
    Classification classification;
    std::string response_text;
    Tokens response_tokens;
    bool empty_input = false;
};

/// Runs one turn and advances the session. Blank utterances are answered by
/// the out-of-domain generator and flagged.
TurnResult step(const ModelBundle& bundle, const EngineConfig& config, SessionState& session,
                std::string_view utterance);

using ProgressFn = std::function<void(const std::string&)>;

/// Trains every component from the files named in `config`. Untagged
/// conversations are tagged with the LDA pipeline first.
ModelBundle train_all(const EngineConfig& config, std::uint64_t seed, const ProgressFn& progress = {});

/// Same, from in-memory corpora. `qr_pairs` holds every domain's pairs.
ModelBundle train_all(const EngineConfig& config, std::span<const Conversation> conversations,
                      std::span<const QRPair> qr_pairs, std::uint64_t seed, const ProgressFn& progress = {});

struct TurnRecord {
    DomainId gold = 0;
    DomainId predicted = 0;
    DomainId svm_label = 0;
    Tokens generated;
    Tokens reference;
};

/// Replays each conversation's user turns through a fresh session.
std::vector<TurnRecord> run_conversations(const ModelBundle& bundle, const EngineConfig& config,
                                          std::span<const Conversation> conversations);

std::vector<EvalExample> to_eval_examples(std::span<const TurnRecord> records);

}  // namespace domseq
