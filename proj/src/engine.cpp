#include "domseq/engine.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace domseq {

using nlohmann::json;

namespace {

SvmFeature parse_svm_feature(const std::string& s) {
    if (s == "soft") return SvmFeature::Soft;
    if (s == "onehot" || s == "hard") return SvmFeature::Hard;
    throw Error("unknown SVM vector mode '" + s + "' (expected soft or onehot)");
}

OptimizerKind parse_optimizer(const std::string& s) {
    if (s == "sgd") return OptimizerKind::Sgd;
    if (s == "adam") return OptimizerKind::Adam;
    throw Error("unknown optimizer '" + s + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_relative() && !base.empty()) ? base / path : path;
}

}  // namespace

ClassifierKind parse_classifier_kind(std::string_view name) {
    if (name == "ensemble") return ClassifierKind::Ensemble;
    if (name == "rnn") return ClassifierKind::Rnn;
    throw Error("unknown classifier '" + std::string(name) + "' (expected ensemble or rnn)");
}

std::string to_string(ClassifierKind kind) { return kind == ClassifierKind::Rnn ? "rnn" : "ensemble"; }

EngineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    EngineConfig c;
    try {
        if (j.contains("domains")) {
            auto names = j.at("domains").get<std::vector<std::string>>();
            std::string ood = j.value("out_of_domain", names.empty() ? std::string() : names.back());
            c.domains = DomainSet(std::move(names), ood);
        }
        if (j.contains("classifier")) c.classifier = parse_classifier_kind(j.at("classifier").get<std::string>());
        if (j.contains("svm_vector")) c.svm_vector = parse_svm_feature(j.at("svm_vector").get<std::string>());
        if (j.contains("ensemble_svm_feature"))
            c.ensemble_svm_feature = parse_svm_feature(j.at("ensemble_svm_feature").get<std::string>());
        read(j, "max_len", c.max_len);
        read(j, "min_count", c.min_count);

        if (j.contains("svm")) {
            const auto& s = j.at("svm");
            read(s, "epochs", c.svm.epochs);
            read(s, "learning_rate", c.svm.learning_rate);
            read(s, "l2", c.svm.l2);
        }
        if (j.contains("ensemble")) {
            const auto& s = j.at("ensemble");
            read(s, "epochs", c.ensemble.epochs);
            read(s, "learning_rate", c.ensemble.learning_rate);
        }
        if (j.contains("rnn")) {
            const auto& s = j.at("rnn");
            read(s, "hidden", c.rnn.hidden);
            read(s, "epochs", c.rnn.epochs);
            read(s, "learning_rate", c.rnn.learning_rate);
            read(s, "clip", c.rnn.clip);
        }
        if (j.contains("generator")) {
            const auto& s = j.at("generator");
            auto& g = c.generator;
            read(s, "embed", g.embed);
            read(s, "hidden", g.hidden);
            read(s, "layers", g.layers);
            read(s, "epochs", g.epochs);
            read(s, "learning_rate", g.learning_rate);
            if (s.contains("optimizer")) g.optimizer = parse_optimizer(s.at("optimizer").get<std::string>());
            read(s, "clip", g.clip);
            read(s, "patience", g.patience);
            read(s, "validation_fraction", g.validation_fraction);
            read(s, "min_count", g.min_count);
            read(s, "init_scale", g.init_scale);
        }
        if (j.contains("tagger")) {
            const auto& s = j.at("tagger");
            auto& t = c.tagger;
            read(s, "topics", t.lda.n_topics);
            read(s, "alpha", t.lda.alpha);
            read(s, "beta", t.lda.beta);
            read(s, "iterations", t.lda.iterations);
            read(s, "infer_iterations", t.lda.infer_iterations);
            read(s, "threshold", t.threshold);
            read(s, "decay", t.decay);
            read(s, "min_count", t.min_count);
            read(s, "drop_stopwords", t.drop_stopwords);
        }
        if (j.contains("data")) {
            const auto& d = j.at("data");
            if (d.contains("conversations"))
                c.conversations = resolve(base_dir, d.at("conversations").get<std::string>());
            if (d.contains("seed_keywords"))
                c.seed_keywords = resolve(base_dir, d.at("seed_keywords").get<std::string>());
            if (d.contains("qr_pairs"))
                for (const auto& [name, path] : d.at("qr_pairs").items())
                    c.qr_pairs[name] = resolve(base_dir, path.get<std::string>());
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    c.generator.max_len = c.max_len;
    return c;
}

EngineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string config_to_json(const EngineConfig& c) {
    const auto feature = [](SvmFeature f) { return f == SvmFeature::Soft ? "soft" : "onehot"; };
    const auto& g = c.generator;
    const auto& t = c.tagger;
    json qr = json::object();
    for (const auto& [name, path] : c.qr_pairs) qr[name] = path.generic_string();
    json j = {
        {"domains", c.domains.names},
        {"out_of_domain", c.domains.name(c.domains.out_of_domain_index)},
        {"classifier", to_string(c.classifier)},
        {"svm_vector", feature(c.svm_vector)},
        {"ensemble_svm_feature", feature(c.ensemble_svm_feature)},
        {"max_len", c.max_len},
        {"min_count", c.min_count},
        {"svm", {{"epochs", c.svm.epochs}, {"learning_rate", c.svm.learning_rate}, {"l2", c.svm.l2}}},
        {"ensemble", {{"epochs", c.ensemble.epochs}, {"learning_rate", c.ensemble.learning_rate}}},
        {"rnn",
         {{"hidden", c.rnn.hidden},
          {"epochs", c.rnn.epochs},
          {"learning_rate", c.rnn.learning_rate},
          {"clip", c.rnn.clip}}},
        {"generator",
         {{"embed", g.embed},
          {"hidden", g.hidden},
          {"layers", g.layers},
          {"epochs", g.epochs},
          {"learning_rate", g.learning_rate},
          {"optimizer", g.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
          {"clip", g.clip},
          {"patience", g.patience},
          {"validation_fraction", g.validation_fraction},
          {"min_count", g.min_count},
          {"init_scale", g.init_scale}}},
        {"tagger",
         {{"topics", t.lda.n_topics},
          {"alpha", t.lda.alpha},
          {"beta", t.lda.beta},
          {"iterations", t.lda.iterations},
          {"infer_iterations", t.lda.infer_iterations},
          {"threshold", t.threshold},
          {"decay", t.decay},
          {"min_count", t.min_count},
          {"drop_stopwords", t.drop_stopwords}}},
        {"data",
         {{"conversations", c.conversations.generic_string()},
          {"seed_keywords", c.seed_keywords.generic_string()},
          {"qr_pairs", qr}}},
    };
    return j.dump(2);
}

void validate(const ModelBundle& b) {
    const int k = b.config.domains.size();
    if (b.svm.n_classes() != k || b.ensemble.n_classes() != k || b.rnn.n_domains() != k ||
        static_cast<int>(b.generators.size()) != k)
        throw Error("bundle components disagree on the number of domains");
    if (b.svm.weights.cols() != b.vectorizer.vocab.size())
        throw Error("bundle SVM width does not match the vectorizer vocabulary");
    for (int d = 0; d < k; ++d)
        if (b.generators[static_cast<std::size_t>(d)].domain != d)
            throw Error("bundle generator " + std::to_string(d) + " is registered for another domain");
}

Classification classify(const ModelBundle& bundle, const EngineConfig& config, std::span<const DomainId> history,
                        std::span<const std::string> tokens) {
    const int k = config.domains.size();
    Classification out;
    out.v_d = predict_distribution(bundle.svm, transform(bundle.vectorizer, tokens));
    out.svm_label = static_cast<DomainId>(argmax(out.v_d));
    if (config.classifier == ClassifierKind::Ensemble) {
        const EnsembleFeatures f = featurize(history, out.v_d);
        out.domain_dist = predict_distribution(bundle.ensemble, f, config.ensemble_svm_feature);
    } else {
        DomainDistribution v = out.v_d;
        if (config.svm_vector == SvmFeature::Hard) {
            v = Vector::Zero(k);
            v(out.svm_label) = 1;
        }
        out.domain_dist = forward(bundle.rnn, history, v);
    }
    return out;
}

TurnResult step(const ModelBundle& bundle, const EngineConfig& config, SessionState& session,
                std::string_view utterance) {
    const int k = config.domains.size();
    if (static_cast<int>(bundle.generators.size()) != k) throw Error("engine: models not loaded");

    TurnResult r;
    const Tokens tokens = tokenize(utterance);
    r.empty_input = tokens.empty();
    if (r.empty_input) {
        r.classification.v_d = Vector::Constant(k, 1.0 / k);
        r.classification.svm_label = config.domains.out_of_domain_index;
        r.classification.domain_dist = Vector::Zero(k);
        r.classification.domain_dist(config.domains.out_of_domain_index) = 1;
    } else {
        r.classification = classify(bundle, config, session.predicted_domain_history, tokens);
    }

    RerankInput input{r.classification.domain_dist, {}};
    for (const auto& gen : bundle.generators) {
        TokenIds query = encode(tokens, gen.vocab);
        if (query.empty()) query.push_back(Vocabulary::kEos);
        input.candidates.push_back(decode_greedy(gen, query, config.max_len));
    }
    r.output = rerank(input);
    const auto& vocab = bundle.generators[static_cast<std::size_t>(r.output.chosen_domain)].vocab;
    r.response_tokens = decode(r.output.response.tokens, vocab);
    r.response_text = detokenize(r.response_tokens);

    session = feedback(std::move(session), r.output);
    session.transcript.push_back(
        {std::string(utterance), r.response_text, r.output, r.classification.domain_dist, r.empty_input});
    return r;
}

namespace {

std::vector<std::pair<std::string, std::vector<std::string>>> load_seed_keywords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open seed keywords '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    for (const auto& [name, words] : j.items()) out.emplace_back(name, words.get<std::vector<std::string>>());
    return out;
}

}  // namespace

ModelBundle train_all(const EngineConfig& config, std::uint64_t seed, const ProgressFn& progress) {
    if (config.conversations.empty()) throw Error("config names no conversation corpus");
    std::vector<Conversation> conversations = load_conversations(config.conversations, config.domains);

    bool untagged = false;
    for (const auto& c : conversations)
        for (const auto& u : c.turns) untagged |= !u.gold_domain.has_value();
    if (untagged) {
        if (config.seed_keywords.empty())
            throw Error("conversations are untagged and the config names no seed keywords");
        if (progress) progress("tagging conversations with LDA");
        const auto keywords = load_seed_keywords(config.seed_keywords);
        TaggerOptions opts = config.tagger;
        opts.lda.seed = seed;
        conversations = tag_conversations(conversations, config.domains, keywords, opts).conversations;
    }

    std::vector<QRPair> pairs;
    for (const auto& name : config.domains.names) {
        auto it = config.qr_pairs.find(name);
        if (it == config.qr_pairs.end()) throw Error("missing corpus for domain '" + name + "'");
        if (!std::filesystem::exists(it->second))
            throw Error("missing corpus for domain '" + name + "': " + it->second.string());
        for (auto& p : load_qr_pairs(it->second, config.domains)) pairs.push_back(std::move(p));
    }
    return train_all(config, conversations, pairs, seed, progress);
}

ModelBundle train_all(const EngineConfig& config, std::span<const Conversation> conversations,
                      std::span<const QRPair> qr_pairs, std::uint64_t seed, const ProgressFn& progress) {
    const int k = config.domains.size();
    Rng seeds(seed);
    ModelBundle b;
    b.config = config;

    // SVM over every labelled utterance.
    std::vector<Tokens> docs;
    std::vector<DomainId> labels;
    for (const auto& c : conversations)
        for (const auto& u : c.turns)
            if (u.gold_domain) {
                docs.push_back(u.tokens);
                labels.push_back(*u.gold_domain);
            }
    if (docs.empty()) throw Error("no labelled utterances to train the domain classifier");
    if (progress) progress("training tf-idf SVM on " + std::to_string(docs.size()) + " utterances");
    b.vectorizer = fit_tfidf(docs, config.min_count);
    std::vector<SparseVector> x;
    x.reserve(docs.size());
    for (const auto& d : docs) x.push_back(transform(b.vectorizer, d));
    SvmOptions svm_opts = config.svm;
    svm_opts.seed = seeds.next();
    b.svm = train_svm(x, labels, k, b.vectorizer.vocab.size(), svm_opts);

    // Context classifiers over user turns, conditioned on gold history.
    std::vector<EnsembleFeatures> features;
    std::vector<RnnExample> rnn_examples;
    std::vector<DomainId> gold;
    for (const auto& c : conversations) {
        std::vector<DomainId> history;
        for (const auto& turn : dialogue_turns(c)) {
            if (!turn.query->gold_domain) continue;
            const DomainId y = *turn.query->gold_domain;
            const Vector v_d = predict_distribution(b.svm, transform(b.vectorizer, turn.query->tokens));
            features.push_back(featurize(history, v_d));
            gold.push_back(y);
            RnnExample ex{history, v_d, y};
            if (config.svm_vector == SvmFeature::Hard) {
                ex.v_d = Vector::Zero(k);
                ex.v_d(argmax(v_d)) = 1;
            }
            rnn_examples.push_back(std::move(ex));
            history.push_back(y);
        }
    }
    if (progress) progress("training ensemble classifier on " + std::to_string(features.size()) + " turns");
    EnsembleOptions ens = config.ensemble;
    ens.svm_feature = config.ensemble_svm_feature;
    b.ensemble = train_ensemble(features, gold, k, ens);
    if (progress) progress("training RNN classifier");
    RnnOptions rnn = config.rnn;
    rnn.seed = seeds.next();
    b.rnn = train_rnn(rnn_examples, k, rnn);

    for (DomainId d = 0; d < k; ++d) {
        std::vector<QRPair> domain_pairs;
        for (const auto& p : qr_pairs)
            if (p.domain == d) domain_pairs.push_back(p);
        const std::string& name = config.domains.name(d);
        if (domain_pairs.empty()) throw Error("missing corpus for domain '" + name + "'");
        GeneratorOptions g = config.generator;
        g.seed = seeds.next();
        if (progress) progress("training " + name + " generator on " + std::to_string(domain_pairs.size()) + " pairs");
        b.generators.push_back(train_generator(domain_pairs, d, g, nullptr, [&](int epoch, double loss, double ppl) {
            if (progress) {
                std::ostringstream os;
                os << "  " << name << " epoch " << epoch + 1 << " loss " << loss << " val ppl " << ppl;
                progress(os.str());
            }
        }));
    }
    validate(b);
    return b;
}

std::vector<TurnRecord> run_conversations(const ModelBundle& bundle, const EngineConfig& config,
                                          std::span<const Conversation> conversations) {
    std::vector<TurnRecord> out;
    for (const auto& c : conversations) {
        SessionState session;
        session.session_id = c.id;
        for (const auto& turn : dialogue_turns(c)) {
            const TurnResult r = step(bundle, config, session, turn.query->raw);
            if (!turn.query->gold_domain || !turn.reference) continue;
            out.push_back({*turn.query->gold_domain, r.output.chosen_domain, r.classification.svm_label,
                           r.response_tokens, turn.reference->tokens});
        }
    }
    return out;
}

std::vector<EvalExample> to_eval_examples(std::span<const TurnRecord> records) {
    std::vector<EvalExample> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back({r.predicted, r.gold, r.generated, r.reference});
    return out;
}

}  // namespace domseq
