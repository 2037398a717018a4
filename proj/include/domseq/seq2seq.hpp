#pragma once
// Per-domain response generator: stacked LSTM encoder-decoder with additive
// attention over the top encoder states.
//
// Decoder step t (top-layer state d_t, encoder states e_s):
//   score_{t,s} = v_a . tanh(W_a d_t + U_a e_s)
//   a_t         = softmax_s(score_{t,s}),   c_t = sum_s a_{t,s} e_s
//   logits_t    = W_out [d_t ; c_t] + b_out
//
// Training uses teacher forcing; decoding is greedy. The response confidence
// is sigmoid of the logit of the token emitted at the final decode step.

#include "domseq/corpus.hpp"
#include "domseq/gradcheck.hpp"
#include "domseq/math.hpp"
#include "domseq/optim.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace domseq {

struct LstmLayer {
    Matrix w;  // 4H x (in + H), gate rows ordered input, forget, cell, output
    Vector b;  // 4H
};

struct Seq2SeqParams {
    Matrix embedding;  // V x E
    std::vector<LstmLayer> encoder;
    std::vector<LstmLayer> decoder;
    Matrix w_a;    // H x H, applied to the decoder state
    Matrix u_a;    // H x H, applied to encoder states
    Vector v_a;    // H
    Matrix w_out;  // V x 2H
    Vector b_out;  // V

    int vocab_size() const { return static_cast<int>(embedding.rows()); }
    int embed_dim() const { return static_cast<int>(embedding.cols()); }
    int hidden() const { return static_cast<int>(w_a.rows()); }
    int layers() const { return static_cast<int>(encoder.size()); }

    static Seq2SeqParams zeros(int vocab, int embed, int hidden, int layers);
    static Seq2SeqParams random(int vocab, int embed, int hidden, int layers, std::uint64_t seed,
                                double scale = 0.1);

    template <typename F>
    void visit(F&& f) {
        f("embedding", embedding);
        for (std::size_t l = 0; l < encoder.size(); ++l) {
            const std::string p = "encoder." + std::to_string(l);
            f((p + ".w").c_str(), encoder[l].w);
            f((p + ".b").c_str(), encoder[l].b);
        }
        for (std::size_t l = 0; l < decoder.size(); ++l) {
            const std::string p = "decoder." + std::to_string(l);
            f((p + ".w").c_str(), decoder[l].w);
            f((p + ".b").c_str(), decoder[l].b);
        }
        f("w_a", w_a);
        f("u_a", u_a);
        f("v_a", v_a);
        f("w_out", w_out);
        f("b_out", b_out);
    }
};

struct Seq2SeqModel {
    Seq2SeqParams params;
    Vocabulary vocab;
    DomainId domain = 0;
};

struct ScoredResponse {
    TokenIds tokens;        // without the terminating EOS
    bool reached_eos = false;
    double final_logit = 0;
    double confidence = 0.5;  // sigmoid(final_logit), in (0, 1)
    DomainId domain = 0;
};


struct ForwardResult {
    double loss = 0;       // mean cross-entropy in nats per target token
    int target_tokens = 0;  // response length + EOS
    Matrix attention;      // source positions x decoder steps; columns sum to 1
};

ForwardResult teacher_forced(const Seq2SeqParams& params, std::span<const int> query,
                             std::span<const int> response);

/// Loss and full-model gradient (BPTT through decoder and encoder).
double loss_and_gradient(const Seq2SeqParams& params, std::span<const int> query,
                         std::span<const int> response, Seq2SeqParams& grad);

/// One SGD step with gradient clipping; returns the loss before the update.
double encode_decode_train_step(Seq2SeqParams& params, std::span<const int> query,
                                std::span<const int> response, double learning_rate, double clip = 5.0);

ScoredResponse decode_greedy(const Seq2SeqModel& model, std::span<const int> query, int max_len);

/// sigmoid(l); l is the logit of the last emitted token.
double response_confidence(double final_logit);

struct EncodedPair {
    TokenIds query;
    TokenIds response;
};

std::vector<EncodedPair> encode_pairs(std::span<const QRPair> pairs, const Vocabulary& vocab);

/// exp of the token-weighted mean cross-entropy under teacher forcing.
double perplexity(const Seq2SeqParams& params, std::span<const EncodedPair> data);
double perplexity(const Seq2SeqModel& model, std::span<const QRPair> data);

struct GeneratorOptions {
    int embed = 16;
    int hidden = 32;
    int layers = 1;
    int epochs = 30;
    double learning_rate = 0.01;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double clip = 5.0;
    int patience = 3;
    double validation_fraction = 0.1;  // 0 monitors training perplexity
    int min_count = 2;
    int max_len = 30;
    double init_scale = 0.1;
    std::uint64_t seed = 1;

    /// Three 1024-unit LSTM layers, too large for desk training.
    static GeneratorOptions large_scale();
};

struct TrainingLog {
    std::vector<double> train_loss;           // mean per epoch
    std::vector<double> validation_perplexity;
    int best_epoch = -1;
    bool stopped_early = false;
};

using EpochCallback = std::function<void(int epoch, double train_loss, double validation_perplexity)>;

/// Builds the domain vocabulary, then trains with per-pair updates and keeps
/// the parameters of the epoch with the lowest validation perplexity.
/// All pairs must share `domain`.
Seq2SeqModel train_generator(std::span<const QRPair> corpus, DomainId domain, const GeneratorOptions& options,
                             TrainingLog* log = nullptr, const EpochCallback& on_epoch = {});

/// Full-model BPTT check against central finite differences.
GradCheckResult gradient_check(const Seq2SeqParams& params, std::span<const int> query,
                               std::span<const int> response, double eps = 1e-5);

}  // namespace domseq
