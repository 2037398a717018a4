#pragma once
// Domain accuracy and the word-embedding greedy match between a generated
// response and its reference.

#include "domseq/corpus.hpp"
#include "domseq/math.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace domseq {

class EmbeddingTable {
public:
    explicit EmbeddingTable(int dim = 0) : dim_(dim) {}

    int dim() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }
    void set(const std::string& token, Vector v);
    const Vector* find(const std::string& token) const;

    /// Tokens in insertion order (useful for writing the table back out).
    const std::vector<std::string>& tokens() const { return order_; }

private:
    int dim_;
    std::unordered_map<std::string, Vector> vectors_;
    std::vector<std::string> order_;
};

/// Text layout: one token per line followed by dim decimal floats.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

/// Mean over tokens of `from` of their best cosine against tokens of `to`.
/// Tokens missing from the table are dropped first; returns nullopt when
/// either side is left empty.
std::optional<double> greedy_match_directional(std::span<const std::string> from,
                                               std::span<const std::string> to,
                                               const EmbeddingTable& table);

/// Symmetrized greedy match, (G(c->r) + G(r->c)) / 2. Scores 0 when either
/// sentence has no token in the table.
double greedy_match(std::span<const std::string> candidate, std::span<const std::string> reference,
                    const EmbeddingTable& table);

struct EvalExample {
    std::optional<DomainId> predicted;  // absent for domain-agnostic baselines
    std::optional<DomainId> gold;
    Tokens generated;
    Tokens reference;
};

struct EvalReport {
    std::optional<double> domain_accuracy;
    std::optional<double> greedy_match;
    std::size_t n_examples = 0;
    std::size_t uncovered_sentences = 0;  // examples scored 0 for lack of embeddings
};

EvalReport evaluate(std::span<const EvalExample> examples, const EmbeddingTable& table);

}  // namespace domseq
