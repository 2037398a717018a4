#include "domseq/engine.hpp"

#include "trained.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

using namespace domseq;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("domseq_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("config parsing") {
    const EngineConfig c = parse_config(R"({
        "domains": ["news", "sports", "other"], "out_of_domain": "other",
        "classifier": "rnn", "svm_vector": "onehot",
        "rnn": {"hidden": 4, "epochs": 7},
        "generator": {"hidden": 16, "optimizer": "sgd", "learning_rate": 0.05},
        "data": {"conversations": "convs.jsonl", "qr_pairs": {"news": "/abs/news.jsonl"}}
    })", "/base");
    CHECK(c.domains.size() == 3);
    CHECK(c.domains.out_of_domain_index == 2);
    CHECK(c.classifier == ClassifierKind::Rnn);
    CHECK(c.svm_vector == SvmFeature::Hard);
    CHECK(c.rnn.hidden == 4);
    CHECK(c.rnn.epochs == 7);
    CHECK(c.generator.optimizer == OptimizerKind::Sgd);
    CHECK(c.conversations == fs::path("/base/convs.jsonl"));
    CHECK(c.qr_pairs.at("news") == fs::path("/abs/news.jsonl"));
    const EngineConfig again = parse_config(config_to_json(c));
    CHECK(config_to_json(again) == config_to_json(c));
    CHECK_THROWS_AS(parse_config(R"({"classifier": "tree"})"), Error);
    CHECK_THROWS_AS(parse_config("{not json"), Error);
    CHECK(parse_classifier_kind("ensemble") == ClassifierKind::Ensemble);
    CHECK(to_string(ClassifierKind::Rnn) == "rnn");
}

TEST_CASE("classify pads an empty history") {
    const ModelBundle& b = fixtures::small_bundle();
    const EngineConfig& cfg = b.config;
    const Tokens tokens = tokenize("want to play tonight");
    const Classification c = classify(b, cfg, std::vector<DomainId>{}, tokens);
    CHECK(c.domain_dist.sum() == Approx(1.0));
    const Vector v_d = predict_distribution(b.svm, transform(b.vectorizer, tokens));
    const auto expected = predict_distribution(b.ensemble, featurize(std::vector<DomainId>{}, v_d), SvmFeature::Soft);
    CHECK(c.domain_dist.isApprox(expected));
    CHECK(c.v_d.isApprox(v_d));
}

TEST_CASE("a gaming utterance after gaming turns routes to the gaming generator") {
    const ModelBundle& b = fixtures::small_bundle();
    const DomainId gaming = b.config.domains.at("gaming");
    SessionState s;
    step(b, b.config, s, "what is your favorite video game");
    step(b, b.config, s, "do you play on console");
    const TurnResult r = step(b, b.config, s, "i just beat the final boss in zelda");
    CHECK(r.output.chosen_domain == gaming);
    CHECK(s.predicted_domain_history.back() == gaming);
    CHECK(s.turn_count == 3);
}

TEST_CASE("blank utterances go to the out-of-domain generator") {
    const ModelBundle& b = fixtures::small_bundle();
    SessionState s;
    const TurnResult r = step(b, b.config, s, "   ");
    CHECK(r.empty_input);
    CHECK(r.output.chosen_domain == b.config.domains.out_of_domain_index);
    CHECK(s.turn_count == 1);
}

TEST_CASE("engine refuses an unloaded bundle") {
    ModelBundle empty;
    SessionState s;
    CHECK_THROWS_AS(step(empty, empty.config, s, "hello"), Error);
}

TEST_CASE("bundle round trip") {
    const ModelBundle& b = fixtures::small_bundle();
    const auto dir = fresh_dir("bundle");
    save_bundle(b, dir);
    const ModelBundle back = load_bundle(dir);
    CHECK(back.svm.weights == b.svm.weights);
    CHECK(back.generators.size() == b.generators.size());
    CHECK(back.generators[1].vocab == b.generators[1].vocab);
    SessionState s1, s2;
    for (const char* u : {"do you like movies", "want to play tonight", "how long is it"}) {
        const TurnResult a = step(b, b.config, s1, u);
        const TurnResult c = step(back, back.config, s2, u);
        CHECK(a.response_text == c.response_text);
        CHECK(a.output.scores == c.output.scores);
    }
    CHECK_FALSE(fs::exists(dir.string() + ".partial"));
}

TEST_CASE("bundle load errors") {
    const ModelBundle& b = fixtures::small_bundle();
    const auto dir = fresh_dir("bundle_bad");
    save_bundle(b, dir);
    SUBCASE("version bump") {
        nlohmann::json m;
        std::ifstream(dir / "manifest.json") >> m;
        m["version"] = ModelBundle::kFormatVersion + 1;
        std::ofstream(dir / "manifest.json") << m.dump();
        try {
            load_bundle(dir);
            FAIL("expected a version error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("version") != std::string::npos);
        }
    }
    SUBCASE("truncated tensor") {
        fs::resize_file(dir / "svm.weights.f64", 16);
        CHECK_THROWS_AS(load_bundle(dir), Error);
    }
    SUBCASE("corrupt manifest") {
        std::ofstream(dir / "manifest.json") << "{oops";
        CHECK_THROWS_AS(load_bundle(dir), Error);
    }
    SUBCASE("missing directory") { CHECK_THROWS_AS(load_bundle(fresh_dir("nothing_here")), Error); }
}

TEST_CASE("train_all names a missing domain corpus") {
    const auto dir = fresh_dir("missing_corpus");
    fs::create_directories(dir);
    const auto& c = fixtures::small_corpus();
    save_conversations(dir / "convs.jsonl", c.conversations, c.domains);
    std::vector<QRPair> movies;
    for (const auto& p : c.pairs)
        if (p.domain == 0) movies.push_back(p);
    save_qr_pairs(dir / "movies.jsonl", movies, c.domains);
    EngineConfig cfg = fixtures::small_config();
    cfg.conversations = dir / "convs.jsonl";
    cfg.qr_pairs["movies"] = dir / "movies.jsonl";
    try {
        train_all(cfg, 1);
        FAIL("expected a missing corpus error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("gaming") != std::string::npos);
    }
}

TEST_CASE("run_conversations replays user turns") {
    const ModelBundle& b = fixtures::small_bundle();
    const auto& c = fixtures::small_corpus();
    const std::span<const Conversation> first(c.conversations.data(), 3);
    const auto records = run_conversations(b, b.config, first);
    std::size_t turns = 0;
    for (const auto& conv : first) turns += dialogue_turns(conv).size();
    CHECK(records.size() == turns);
    const auto examples = to_eval_examples(records);
    CHECK(examples.size() == records.size());
    CHECK(examples[0].gold == records[0].gold);
}
