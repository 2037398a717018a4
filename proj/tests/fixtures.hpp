#pragma once
// Small hand-built corpora shared by the unit and acceptance tests.

#include "domseq/corpus.hpp"
#include "domseq/math.hpp"
#include "domseq/rnn_classifier.hpp"

#include <string>
#include <utility>
#include <vector>

namespace fixtures {

using namespace domseq;

inline const std::vector<std::string>& movie_words() {
    static const std::vector<std::string> w = {"film",   "actor",   "director", "cinema", "trailer",
                                               "sequel", "oscar",   "scene",    "studio", "screen"};
    return w;
}

inline const std::vector<std::string>& game_words() {
    static const std::vector<std::string> w = {"console", "controller", "level", "boss",  "quest",
                                               "arcade",  "joystick",   "pixel", "score", "multiplayer"};
    return w;
}

inline std::vector<std::pair<std::string, std::vector<std::string>>> cluster_keywords() {
    return {{"movies", {"film", "actor", "cinema"}}, {"gaming", {"console", "level", "quest"}}};
}

/// Conversations whose utterances draw only from one of two disjoint word
/// clusters. Each conversation keeps a domain for a few turns, then may
/// switch. Gold domains hold the planted cluster.
inline std::vector<Conversation> two_cluster_conversations(int n_conversations, std::uint64_t seed,
                                                           int turns = 6, int words = 6) {
    const DomainSet domains = DomainSet::standard();
    Rng rng(seed);
    std::vector<Conversation> out;
    for (int c = 0; c < n_conversations; ++c) {
        Conversation conv;
        conv.id = "cluster-" + std::to_string(c);
        int d = static_cast<int>(rng.below(2));
        for (int t = 0; t < turns; ++t) {
            if (t > 0 && rng.bernoulli(0.2)) d = 1 - d;
            const auto& pool = d == 0 ? movie_words() : game_words();
            std::string text;
            for (int w = 0; w < words; ++w) {
                if (w) text += ' ';
                text += rng.pick(pool);
            }
            conv.turns.push_back(Utterance::make(text, t % 2 == 0 ? "user" : "bot",
                                                 domains.at(d == 0 ? "movies" : "gaming")));
        }
        out.push_back(std::move(conv));
    }
    return out;
}

/// Histories of five domains where the gold label is the oldest entry, four
/// turns before the most recent. The three most recent entries are drawn
/// independently of it, and the SVM vector is uninformative.
inline std::vector<RnnExample> long_dependency_examples(int n, std::uint64_t seed, int n_domains = 3) {
    Rng rng(seed);
    std::vector<RnnExample> out;
    for (int i = 0; i < n; ++i) {
        RnnExample ex;
        const auto key = static_cast<DomainId>(rng.below(2));
        ex.history.push_back(key);
        for (int t = 0; t < 4; ++t) ex.history.push_back(static_cast<DomainId>(rng.below(n_domains)));
        ex.v_d = Vector::Constant(n_domains, 1.0 / n_domains);
        ex.gold = key;
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace fixtures
