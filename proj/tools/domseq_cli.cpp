// domseq: synthesize corpora, tag conversations, train bundles, evaluate,
// chat in the terminal, and serve the HTTP chat API.

#include "domseq/engine.hpp"
#include "domseq/service.hpp"
#include "domseq/synthetic.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

using namespace domseq;
using nlohmann::json;

namespace {

// Applies "a.b.c=value" overrides; values parse as JSON when they can.
EngineConfig apply_overrides(const EngineConfig& config, const std::vector<std::string>& overrides) {
    if (overrides.empty()) return config;
    json j = json::parse(config_to_json(config));
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw Error("override '" + o + "' is not key=value");
        json value;
        try {
            value = json::parse(o.substr(eq + 1));
        } catch (const std::exception&) {
            value = o.substr(eq + 1);
        }
        json* node = &j;
        std::stringstream path(o.substr(0, eq));
        std::string key;
        std::vector<std::string> keys;
        while (std::getline(path, key, '.')) keys.push_back(key);
        for (std::size_t i = 0; i + 1 < keys.size(); ++i) node = &(*node)[keys[i]];
        (*node)[keys.back()] = value;
    }
    return parse_config(j.dump());
}

std::vector<std::pair<std::string, std::vector<std::string>>> read_keywords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    json j;
    in >> j;
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    for (const auto& [name, words] : j.items()) out.emplace_back(name, words.get<std::vector<std::string>>());
    return out;
}

int cmd_synth(std::uint64_t seed, const std::string& out_dir, int n_conversations, double switch_prob,
              double test_fraction) {
    namespace fs = std::filesystem;
    SyntheticOptions opts;
    opts.seed = seed;
    opts.n_conversations = n_conversations;
    opts.switch_prob = switch_prob;
    const SyntheticCorpus corpus = generate_synthetic_corpus(opts);
    const auto n_test = static_cast<std::size_t>(test_fraction * static_cast<double>(corpus.conversations.size()));
    const std::span<const Conversation> all(corpus.conversations);
    const auto train = all.first(all.size() - n_test);
    const auto test = all.last(n_test);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    save_conversations(dir / "conversations.jsonl", train, corpus.domains);
    save_conversations(dir / "test.jsonl", test, corpus.domains);
    const auto train_pairs = extract_qr_pairs(train);
    json qr = json::object();
    for (const auto& name : corpus.domains.names) {
        std::vector<QRPair> pairs;
        for (const auto& p : train_pairs)
            if (corpus.domains.name(p.domain) == name) pairs.push_back(p);
        save_qr_pairs(dir / ("qr_" + name + ".jsonl"), pairs, corpus.domains);
        qr[name] = "qr_" + name + ".jsonl";
    }
    save_embeddings(dir / "embeddings.txt", synthetic_embeddings(corpus));

    json keywords = json::object();
    for (const auto& [name, words] : synthetic_seed_keywords()) keywords[name] = words;
    write_file_atomic(dir / "keywords.json", keywords.dump(2) + "\n");

    EngineConfig config;
    config.conversations = "conversations.jsonl";
    config.seed_keywords = "keywords.json";
    for (const auto& [name, file] : qr.items()) config.qr_pairs[name] = file.get<std::string>();
    write_file_atomic(dir / "config.json", config_to_json(config) + "\n");

    std::cerr << "wrote " << train.size() << " training and " << test.size() << " test conversations to "
              << out_dir << "\n";
    return 0;
}

int cmd_tag(const std::string& in_path, const std::string& out_path, int topics, const std::string& keywords_path,
            std::uint64_t seed, double threshold, double decay, int iterations, double alpha,
            const std::vector<std::string>& domain_names, const std::string& ood) {
    const DomainSet domains = domain_names.empty() ? DomainSet::standard() : DomainSet(domain_names, ood);
    const auto conversations = load_conversations(in_path, domains);
    TaggerOptions opts;
    opts.lda.n_topics = topics;
    opts.lda.seed = seed;
    opts.lda.iterations = iterations;
    opts.lda.alpha = alpha;
    opts.threshold = threshold;
    opts.decay = decay;
    const TaggingResult result = tag_conversations(conversations, domains, read_keywords(keywords_path), opts);
    save_conversations(out_path, result.conversations, domains);
    std::cerr << "tagged " << result.conversations.size() << " conversations (" << result.raw_tagged
              << " utterances above threshold)\n";
    for (std::size_t t = 0; t < result.topic_map.assignment.size(); ++t)
        std::cerr << "  topic " << t << " -> "
                  << result.topic_map.labels[static_cast<std::size_t>(result.topic_map.assignment[t])] << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& out, std::uint64_t seed,
              const std::vector<std::string>& overrides, bool quiet) {
    // Data paths are already absolute once loaded, so overrides keep them.
    const EngineConfig config = apply_overrides(load_config(config_path), overrides);
    const ProgressFn progress = [quiet](const std::string& msg) {
        if (!quiet) std::cerr << msg << "\n";
    };
    const ModelBundle bundle = train_all(config, seed, progress);
    save_bundle(bundle, out);
    if (!quiet) std::cerr << "saved bundle to " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& bundle_path, const std::string& test_path, const std::string& embeddings_path,
             const std::vector<std::string>& overrides) {
    const ModelBundle bundle = load_bundle(bundle_path);
    const EngineConfig config = apply_overrides(bundle.config, overrides);
    const auto conversations = load_conversations(test_path, config.domains);
    const auto table = load_embeddings(embeddings_path);
    const auto records = run_conversations(bundle, config, conversations);
    const auto examples = to_eval_examples(records);
    const EvalReport report = evaluate(examples, table);

    std::size_t svm_correct = 0;
    for (const auto& r : records) svm_correct += (r.svm_label == r.gold);
    json j = {{"classifier", to_string(config.classifier)},
              {"n_examples", report.n_examples},
              {"uncovered_sentences", report.uncovered_sentences}};
    j["domain_accuracy"] = report.domain_accuracy ? json(*report.domain_accuracy) : json(nullptr);
    j["greedy_match"] = report.greedy_match ? json(*report.greedy_match) : json(nullptr);
    j["svm_accuracy"] = records.empty() ? json(nullptr)
                                        : json(static_cast<double>(svm_correct) / static_cast<double>(records.size()));
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_chat(const std::string& bundle_path, const std::vector<std::string>& overrides) {
    const ModelBundle bundle = load_bundle(bundle_path);
    const EngineConfig config = apply_overrides(bundle.config, overrides);
    run_repl(std::cin, std::cout, bundle, config, ::isatty(STDIN_FILENO) != 0);
    return 0;
}

}  // namespace

namespace {

int cmd_serve(const std::string& bundle_path, const std::string& host, int port,
              const std::vector<std::string>& overrides) {
    if (const char* env = std::getenv("PORT"); env != nullptr && *env != '\0') port = std::atoi(env);
    auto bundle = std::make_shared<const ModelBundle>(load_bundle(bundle_path));
    const EngineConfig config = apply_overrides(bundle->config, overrides);
    ChatService service(config);
    service.set_bundle(bundle);
    httplib::Server server;
    service.mount(server);
    std::cerr << "listening on " << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Domain-aware chat engine"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    std::vector<std::string> overrides;

    auto* synth = app.add_subcommand("synth", "Generate the synthetic three-domain corpus");
    std::string synth_out = "data";
    int n_conv = 500;
    double switch_prob = 0.2, test_fraction = 0.2;
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--seed", seed, "Random seed");
    synth->add_option("--conversations", n_conv, "Number of conversations")->check(CLI::PositiveNumber);
    synth->add_option("--switch-prob", switch_prob, "Per-turn domain switch probability")->check(CLI::Range(0.0, 1.0));
    synth->add_option("--test-fraction", test_fraction, "Share held out as test.jsonl")->check(CLI::Range(0.0, 1.0));

    auto* tag = app.add_subcommand("tag", "Tag raw conversations with LDA topics");
    std::string tag_in, tag_out, keywords, ood = "out_of_domain";
    std::vector<std::string> domain_names;
    int topics = 3, iterations = 500;
    double threshold = 0.5, decay = 0.5, alpha = 0.1;
    tag->add_option("--in", tag_in, "Conversations JSONL")->required();
    tag->add_option("--out", tag_out, "Tagged conversations JSONL")->required();
    tag->add_option("--seed-keywords,--keywords", keywords, "Seed keywords JSON")->required();
    tag->add_option("--topics", topics, "Number of LDA topics")->check(CLI::PositiveNumber);
    tag->add_option("--iterations", iterations, "Gibbs sweeps")->check(CLI::PositiveNumber);
    tag->add_option("--alpha", alpha, "Document-topic prior")->check(CLI::PositiveNumber);
    tag->add_option("--threshold", threshold, "Topic mass needed to tag an utterance");
    tag->add_option("--decay", decay, "Smoothing decay")->check(CLI::Range(0.0, 1.0));
    tag->add_option("--domains", domain_names, "Domain names, including the out-of-domain one");
    tag->add_option("--ood", ood, "Out-of-domain label");
    tag->add_option("--seed", seed, "Random seed");

    auto* train = app.add_subcommand("train", "Train every component and write a bundle");
    std::string config_path, bundle_out = "bundle";
    bool quiet = false;
    train->add_option("--config", config_path, "Config JSON")->required()->check(CLI::ExistingFile);
    train->add_option("--out", bundle_out, "Bundle directory");
    train->add_option("--seed", seed, "Random seed");
    train->add_option("--set", overrides, "Config override key=value");
    train->add_flag("--quiet", quiet, "Suppress progress output");

    auto* eval = app.add_subcommand("eval", "Score a bundle on held-out conversations");
    std::string bundle_path, test_path, embeddings;
    eval->add_option("--bundle", bundle_path, "Bundle directory")->required();
    eval->add_option("--test", test_path, "Test conversations JSONL")->required();
    eval->add_option("--embeddings", embeddings, "Word embeddings")->required();
    eval->add_option("--set", overrides, "Config override key=value");

    auto* chat = app.add_subcommand("chat", "Chat in the terminal");
    chat->add_option("--bundle", bundle_path, "Bundle directory")->required();
    chat->add_option("--set", overrides, "Config override key=value");

    auto* serve = app.add_subcommand("serve", "Serve the HTTP chat API");
    std::string host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--bundle", bundle_path, "Bundle directory")->required();
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (PORT in the environment wins)");
    serve->add_option("--set", overrides, "Config override key=value");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return cmd_synth(seed, synth_out, n_conv, switch_prob, test_fraction);
        if (*tag)
            return cmd_tag(tag_in, tag_out, topics, keywords, seed, threshold, decay, iterations, alpha, domain_names,
                           ood);
        if (*train) return cmd_train(config_path, bundle_out, seed, overrides, quiet);
        if (*eval) return cmd_eval(bundle_path, test_path, embeddings, overrides);
        if (*chat) return cmd_chat(bundle_path, overrides);
        if (*serve) return cmd_serve(bundle_path, host, port, overrides);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
