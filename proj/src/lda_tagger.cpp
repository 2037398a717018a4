#include "domseq/lda_tagger.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace domseq {

namespace {

void check_options(const LdaOptions& o) {
    if (o.n_topics < 1) throw Error("lda: need at least one topic");
    if (o.iterations < 1) throw Error("lda: iterations must be >= 1");
    if (!(o.alpha > 0) || !(o.beta > 0)) throw Error("lda: priors must be positive");
}

}  // namespace

LdaFit fit_lda(std::span<const TokenIds> documents, int vocab_size, const LdaOptions& options,
               const SweepObserver& observer) {
    check_options(options);
    if (documents.empty()) throw Error("lda: empty corpus");
    const int T = options.n_topics;
    const int V = vocab_size;

    LdaFit fit;
    auto& m = fit.model;
    m.n_topics = T;
    m.vocab_size = V;
    m.alpha = options.alpha;
    m.beta = options.beta;
    m.topic_word_counts = Eigen::MatrixXi::Zero(T, V);
    m.topic_totals = Eigen::VectorXi::Zero(T);
    fit.doc_topic_counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(documents.size()), T);
    fit.assignments.resize(documents.size());

    Rng rng(options.seed);
    for (std::size_t d = 0; d < documents.size(); ++d) {
        for (int w : documents[d]) {
            if (w < 0 || w >= V) throw Error("lda: token id out of range");
            const int z = static_cast<int>(rng.below(static_cast<std::size_t>(T)));
            fit.assignments[d].push_back(z);
            ++m.topic_word_counts(z, w);
            ++m.topic_totals(z);
            ++fit.doc_topic_counts(static_cast<Eigen::Index>(d), z);
        }
    }

    std::vector<double> p(static_cast<std::size_t>(T));
    const double vbeta = V * options.beta;
    for (int sweep = 0; sweep < options.iterations; ++sweep) {
        for (std::size_t d = 0; d < documents.size(); ++d) {
            const auto row = static_cast<Eigen::Index>(d);
            for (std::size_t i = 0; i < documents[d].size(); ++i) {
                const int w = documents[d][i];
                int& z = fit.assignments[d][i];
                --m.topic_word_counts(z, w);
                --m.topic_totals(z);
                --fit.doc_topic_counts(row, z);
                for (int t = 0; t < T; ++t)
                    p[static_cast<std::size_t>(t)] = (fit.doc_topic_counts(row, t) + options.alpha) *
                                                     (m.topic_word_counts(t, w) + options.beta) /
                                                     (m.topic_totals(t) + vbeta);
                z = static_cast<int>(rng.categorical(p));
                ++m.topic_word_counts(z, w);
                ++m.topic_totals(z);
                ++fit.doc_topic_counts(row, z);
            }
        }
        if (observer) observer(sweep, fit);
    }
    return fit;
}

Vector document_theta(const LdaFit& fit, std::size_t doc) {
    const auto& m = fit.model;
    const Vector counts = fit.doc_topic_counts.row(static_cast<Eigen::Index>(doc)).transpose().cast<double>();
    return (counts.array() + m.alpha) / (counts.sum() + m.n_topics * m.alpha);
}

Vector infer_theta(const LdaModel& model, std::span<const int> document, int iterations, std::uint64_t seed) {
    const int T = model.n_topics;
    std::vector<int> words;
    for (int w : document)
        if (w >= 0 && w < model.vocab_size) words.push_back(w);
    if (words.empty() || iterations < 1) return Vector::Constant(T, 1.0 / T);

    Rng rng(seed);
    std::vector<int> z(words.size());
    Eigen::VectorXi doc_counts = Eigen::VectorXi::Zero(T);
    for (auto& zi : z) {
        zi = static_cast<int>(rng.below(static_cast<std::size_t>(T)));
        ++doc_counts(zi);
    }

    const double vbeta = model.vocab_size * model.beta;
    const double denom = static_cast<double>(words.size()) + T * model.alpha;
    std::vector<double> p(static_cast<std::size_t>(T));
    Vector theta_sum = Vector::Zero(T);
    int kept = 0;
    const int burn_in = iterations / 2;
    for (int sweep = 0; sweep < iterations; ++sweep) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            --doc_counts(z[i]);
            for (int t = 0; t < T; ++t)
                p[static_cast<std::size_t>(t)] = (doc_counts(t) + model.alpha) *
                                                 (model.topic_word_counts(t, words[i]) + model.beta) /
                                                 (model.topic_totals(t) + vbeta);
            z[i] = static_cast<int>(rng.categorical(p));
            ++doc_counts(z[i]);
        }
        if (sweep >= burn_in) {
            theta_sum += (doc_counts.cast<double>().array() + model.alpha).matrix() / denom;
            ++kept;
        }
    }
    Vector theta = theta_sum / kept;
    return theta / theta.sum();
}

TopicDomainMap map_topics(const LdaModel& model, const Vocabulary& vocab, const DomainSet& domains,
                          std::span<const std::pair<std::string, std::vector<std::string>>> seed_keywords,
                          int top_n) {
    TopicDomainMap map;
    map.labels = domains.names;
    std::vector<int> keyword_label;  // parallel to seed_keywords
    for (const auto& [name, words] : seed_keywords) {
        if (auto d = domains.find(name)) {
            keyword_label.push_back(*d);
        } else {
            keyword_label.push_back(static_cast<int>(map.labels.size()));
            map.labels.push_back(name);
        }
    }

    for (int t = 0; t < model.n_topics; ++t) {
        std::vector<int> order(static_cast<std::size_t>(model.vocab_size));
        std::iota(order.begin(), order.end(), 0);
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(top_n), order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                          [&](int a, int b) {
                              const int ca = model.topic_word_counts(t, a);
                              const int cb = model.topic_word_counts(t, b);
                              return ca != cb ? ca > cb : a < b;
                          });
        std::vector<double> mass(map.labels.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const int w = order[i];
            if (w >= vocab.size()) continue;
            const std::string& tok = vocab.token(w);
            for (std::size_t k = 0; k < seed_keywords.size(); ++k) {
                const auto& words = seed_keywords[k].second;
                if (std::find(words.begin(), words.end(), tok) != words.end())
                    mass[static_cast<std::size_t>(keyword_label[k])] += model.topic_word_counts(t, w);
            }
        }
        int best = domains.out_of_domain_index;
        double best_mass = 0;
        for (std::size_t l = 0; l < mass.size(); ++l)
            if (mass[l] > best_mass) {
                best_mass = mass[l];
                best = static_cast<int>(l);
            }
        map.assignment.push_back(best);
    }
    return map;
}

std::optional<int> tag_utterance(const Vector& theta, const TopicDomainMap& map, double threshold) {
    if (!(threshold > 0 && threshold <= 1)) throw Error("tag_utterance: threshold must be in (0, 1]");
    if (static_cast<std::size_t>(theta.size()) != map.assignment.size())
        throw Error("tag_utterance: theta length does not match topic map");
    std::vector<double> mass(map.labels.size(), 0.0);
    for (Eigen::Index t = 0; t < theta.size(); ++t)
        mass[static_cast<std::size_t>(map.assignment[static_cast<std::size_t>(t)])] += theta(t);
    for (std::size_t l = 0; l < mass.size(); ++l)
        if (mass[l] > threshold) return static_cast<int>(l);
    return std::nullopt;
}

std::vector<std::optional<int>> relabel_out_of_scope(std::span<const std::optional<int>> tags,
                                                     const DomainSet& domains) {
    std::vector<std::optional<int>> out(tags.begin(), tags.end());
    for (auto& t : out)
        if (t && (*t < 0 || *t >= domains.size())) t = domains.out_of_domain_index;
    return out;
}

std::vector<DomainId> smooth_domains(std::span<const std::optional<int>> raw_tags, double decay,
                                     const DomainSet& domains) {
    if (!(decay > 0 && decay < 1)) throw Error("smooth_domains: decay must be in (0, 1)");
    std::vector<DomainId> out;
    Vector mass = Vector::Zero(domains.size());
    for (const auto& tag : raw_tags) {
        // m_t = decay * m_{t-1} + onehot(tag_t) unrolls to the decaying sum.
        mass *= decay;
        if (tag) {
            if (*tag < 0 || *tag >= domains.size()) throw Error("smooth_domains: tag outside domain set");
            mass(*tag) += 1;
        }
        out.push_back(mass.sum() > 0 ? static_cast<DomainId>(argmax(mass)) : domains.out_of_domain_index);
    }
    return out;
}

const std::vector<std::string>& english_stopwords() {
    static const std::vector<std::string> words = {
        "a",     "about", "after", "again", "all",   "also",  "am",    "an",    "and",   "any",   "are",
        "as",    "at",    "be",    "been",  "being", "but",   "by",    "can",   "could", "did",   "do",
        "does",  "doing", "for",   "from",  "had",   "has",   "have",  "he",    "her",   "here",  "him",
        "his",   "how",   "i",     "if",    "in",    "into",  "is",    "it",    "its",   "just",  "let",
        "lets",  "like",  "me",    "more",  "most",  "my",    "no",    "not",   "now",   "of",    "off",
        "on",    "one",   "or",    "our",   "out",   "over",  "really", "s",    "she",   "should", "so",
        "some",  "such",  "t",     "than",  "that",  "the",   "their", "them",  "then",  "there", "these",
        "they",  "this",  "those", "to",    "too",   "up",    "us",    "very",  "was",   "we",    "were",
        "what",  "when",  "where", "which", "while", "who",   "why",   "will",  "with",  "would", "yes",
        "you",   "your"};
    return words;
}

TaggingResult tag_conversations(std::span<const Conversation> conversations, const DomainSet& domains,
                                std::span<const std::pair<std::string, std::vector<std::string>>> seed_keywords,
                                const TaggerOptions& options) {
    std::vector<Tokens> texts;
    const auto& stop = english_stopwords();
    const auto is_noise = [&](const std::string& tok) {
        if (tok.size() == 1 && std::ispunct(static_cast<unsigned char>(tok[0]))) return true;
        return options.drop_stopwords && std::binary_search(stop.begin(), stop.end(), tok);
    };
    for (const auto& c : conversations)
        for (const auto& u : c.turns) {
            Tokens kept;
            for (const auto& tok : u.tokens)
                if (!is_noise(tok)) kept.push_back(tok);
            texts.push_back(std::move(kept));
        }
    const Vocabulary vocab = build_vocabulary(texts, options.min_count);

    // Reserved ids never occur in encoded utterances except UNK, which is
    // dropped so it cannot form its own topic.
    std::vector<TokenIds> docs;
    for (const auto& t : texts) {
        TokenIds ids;
        for (int id : encode(t, vocab))
            if (id >= Vocabulary::kReserved) ids.push_back(id);
        docs.push_back(std::move(ids));
    }
    const LdaFit fit = fit_lda(docs, vocab.size(), options.lda);

    TaggingResult result;
    result.topic_map = map_topics(fit.model, vocab, domains, seed_keywords);
    result.conversations.assign(conversations.begin(), conversations.end());
    std::size_t doc = 0;
    for (auto& c : result.conversations) {
        std::vector<std::optional<int>> raw;
        for (std::size_t i = 0; i < c.turns.size(); ++i, ++doc) {
            const Vector theta = docs[doc].empty() ? Vector::Constant(fit.model.n_topics, 1.0 / fit.model.n_topics)
                                                   : document_theta(fit, doc);
            raw.push_back(tag_utterance(theta, result.topic_map, options.threshold));
            if (raw.back()) ++result.raw_tagged;
        }
        const auto smoothed = smooth_domains(relabel_out_of_scope(raw, domains), options.decay, domains);
        for (std::size_t i = 0; i < c.turns.size(); ++i) c.turns[i].gold_domain = smoothed[i];
    }
    return result;
}

}  // namespace domseq
