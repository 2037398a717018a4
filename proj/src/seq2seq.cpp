#include "domseq/seq2seq.hpp"

#include <cmath>
#include <limits>

namespace domseq {

Seq2SeqParams Seq2SeqParams::zeros(int vocab, int embed, int hidden, int layers) {
    if (vocab < 1 || embed < 1 || hidden < 1 || layers < 1) throw Error("seq2seq: dimensions must be >= 1");
    Seq2SeqParams p;
    p.embedding = Matrix::Zero(vocab, embed);
    for (int l = 0; l < layers; ++l) {
        const int in = l == 0 ? embed : hidden;
        p.encoder.push_back({Matrix::Zero(4 * hidden, in + hidden), Vector::Zero(4 * hidden)});
        p.decoder.push_back({Matrix::Zero(4 * hidden, in + hidden), Vector::Zero(4 * hidden)});
    }
    p.w_a = Matrix::Zero(hidden, hidden);
    p.u_a = Matrix::Zero(hidden, hidden);
    p.v_a = Vector::Zero(hidden);
    p.w_out = Matrix::Zero(vocab, 2 * hidden);
    p.b_out = Vector::Zero(vocab);
    return p;
}

Seq2SeqParams Seq2SeqParams::random(int vocab, int embed, int hidden, int layers, std::uint64_t seed,
                                    double scale) {
    Seq2SeqParams p = zeros(vocab, embed, hidden, layers);
    Rng rng(seed);
    p.visit([&](const char*, auto& t) { rng.fill_uniform(t, scale); });
    return p;
}

GeneratorOptions GeneratorOptions::large_scale() {
    GeneratorOptions o;
    o.layers = 3;
    o.hidden = 1024;
    o.embed = 1024;
    return o;
}

namespace {

struct LstmTrace {
    Matrix x;  // in x T
    Matrix h;  // H x (T+1); column 0 is the initial state
    Matrix c;  // H x (T+1)
    Matrix i, f, g, o, tanh_c;  // H x T
};

struct LstmGradOut {
    Matrix dx;
    Vector dh0;
    Vector dc0;
};

template <typename X>
void lstm_cell(const LstmLayer& layer, const Eigen::MatrixBase<X>& x, Vector& h, Vector& c, Vector* gates = nullptr,
               Vector* tanh_c = nullptr) {
    const Eigen::Index H = h.size();
    Vector xh(x.size() + H);
    xh << x, h;
    Vector z = layer.w * xh + layer.b;
    z.head(H) = sigmoid(z.head(H));
    z.segment(H, H) = sigmoid(z.segment(H, H));
    z.segment(2 * H, H) = z.segment(2 * H, H).array().tanh();
    z.tail(H) = sigmoid(z.tail(H));
    c = z.segment(H, H).cwiseProduct(c) + z.head(H).cwiseProduct(z.segment(2 * H, H));
    Vector tc = c.array().tanh();
    h = z.tail(H).cwiseProduct(tc);
    if (gates) *gates = std::move(z);
    if (tanh_c) *tanh_c = std::move(tc);
}

LstmTrace lstm_forward(const LstmLayer& layer, Matrix x, const Vector& h0, const Vector& c0) {
    const Eigen::Index H = h0.size();
    const Eigen::Index T = x.cols();
    LstmTrace tr;
    tr.h.resize(H, T + 1);
    tr.c.resize(H, T + 1);
    tr.i.resize(H, T);
    tr.f.resize(H, T);
    tr.g.resize(H, T);
    tr.o.resize(H, T);
    tr.tanh_c.resize(H, T);
    tr.h.col(0) = h0;
    tr.c.col(0) = c0;
    Vector h = h0, c = c0, gates, tc;
    for (Eigen::Index t = 0; t < T; ++t) {
        lstm_cell(layer, x.col(t), h, c, &gates, &tc);
        tr.i.col(t) = gates.head(H);
        tr.f.col(t) = gates.segment(H, H);
        tr.g.col(t) = gates.segment(2 * H, H);
        tr.o.col(t) = gates.tail(H);
        tr.tanh_c.col(t) = tc;
        tr.h.col(t + 1) = h;
        tr.c.col(t + 1) = c;
    }
    tr.x = std::move(x);
    return tr;
}

LstmGradOut lstm_backward(const LstmLayer& layer, const LstmTrace& tr, const Matrix& dh_out, Vector dh_next,
                          Vector dc_next, LstmLayer& grad) {
    const Eigen::Index H = dh_next.size();
    const Eigen::Index in = tr.x.rows();
    const Eigen::Index T = tr.x.cols();
    LstmGradOut out;
    out.dx = Matrix::Zero(in, T);
    Vector xh(in + H), dz(4 * H);
    for (Eigen::Index t = T - 1; t >= 0; --t) {
        const auto i = tr.i.col(t).array();
        const auto f = tr.f.col(t).array();
        const auto g = tr.g.col(t).array();
        const auto o = tr.o.col(t).array();
        const auto tc = tr.tanh_c.col(t).array();
        const Eigen::ArrayXd dh = dh_out.col(t).array() + dh_next.array();
        const Eigen::ArrayXd dc = dc_next.array() + dh * o * (1 - tc.square());
        dz.head(H) = (dc * g * i * (1 - i)).matrix();
        dz.segment(H, H) = (dc * tr.c.col(t).array() * f * (1 - f)).matrix();
        dz.segment(2 * H, H) = (dc * i * (1 - g.square())).matrix();
        dz.tail(H) = (dh * tc * o * (1 - o)).matrix();
        xh << tr.x.col(t), tr.h.col(t);
        grad.w.noalias() += dz * xh.transpose();
        grad.b += dz;
        const Vector dxh = layer.w.transpose() * dz;
        out.dx.col(t) = dxh.head(in);
        dh_next = dxh.tail(H);
        dc_next = (dc * f).matrix();
    }
    out.dh0 = std::move(dh_next);
    out.dc0 = std::move(dc_next);
    return out;
}

Matrix embed(const Matrix& embedding, std::span<const int> ids) {
    Matrix x(embedding.cols(), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] < 0 || ids[t] >= embedding.rows()) throw Error("seq2seq: token id out of range");
        x.col(static_cast<Eigen::Index>(t)) = embedding.row(ids[t]).transpose();
    }
    return x;
}

std::vector<LstmTrace> run_stack(const std::vector<LstmLayer>& stack, Matrix x, const std::vector<Vector>& h0,
                                 const std::vector<Vector>& c0) {
    std::vector<LstmTrace> traces;
    for (std::size_t l = 0; l < stack.size(); ++l) {
        traces.push_back(lstm_forward(stack[l], std::move(x), h0[l], c0[l]));
        x = traces.back().h.rightCols(traces.back().h.cols() - 1);
    }
    return traces;
}

struct Trace {
    TokenIds query;
    TokenIds dec_in;
    TokenIds target;
    std::vector<LstmTrace> enc;
    std::vector<LstmTrace> dec;
    Matrix enc_out;  // H x S
    Matrix dec_out;  // H x T
    std::vector<Matrix> att_hidden;  // per step: tanh(W_a d_t + U_a e_s), H x S
    Matrix attn;     // S x T
    Matrix ctx;      // H x T
    Matrix probs;    // V x T
    double loss = 0;
};

Trace forward(const Seq2SeqParams& p, std::span<const int> query, std::span<const int> response) {
    if (query.empty()) throw Error("seq2seq: empty query");
    const int H = p.hidden();
    const int L = p.layers();
    Trace tr;
    tr.query.assign(query.begin(), query.end());
    tr.dec_in.push_back(Vocabulary::kSos);
    tr.dec_in.insert(tr.dec_in.end(), response.begin(), response.end());
    tr.target.assign(response.begin(), response.end());
    tr.target.push_back(Vocabulary::kEos);
    for (int id : tr.target)
        if (id < 0 || id >= p.vocab_size()) throw Error("seq2seq: token id out of range");

    const auto S = static_cast<Eigen::Index>(query.size());
    const auto T = static_cast<Eigen::Index>(tr.target.size());
    std::vector<Vector> zeros(static_cast<std::size_t>(L), Vector::Zero(H));
    tr.enc = run_stack(p.encoder, embed(p.embedding, query), zeros, zeros);
    tr.enc_out = tr.enc.back().h.rightCols(S);

    std::vector<Vector> h0, c0;
    for (const auto& layer : tr.enc) {
        h0.push_back(layer.h.col(S));
        c0.push_back(layer.c.col(S));
    }
    tr.dec = run_stack(p.decoder, embed(p.embedding, tr.dec_in), h0, c0);
    tr.dec_out = tr.dec.back().h.rightCols(T);

    const Matrix u_enc = p.u_a * tr.enc_out;
    const Matrix w_dec = p.w_a * tr.dec_out;
    tr.attn.resize(S, T);
    tr.ctx.resize(H, T);
    tr.probs.resize(p.vocab_size(), T);
    Vector feat(2 * H);
    for (Eigen::Index t = 0; t < T; ++t) {
        Matrix u = (u_enc.colwise() + w_dec.col(t)).array().tanh();
        tr.attn.col(t) = softmax(u.transpose() * p.v_a);
        tr.ctx.col(t) = tr.enc_out * tr.attn.col(t);
        feat << tr.dec_out.col(t), tr.ctx.col(t);
        const Vector logits = p.w_out * feat + p.b_out;
        const double lse = log_sum_exp(logits);
        tr.loss += lse - logits(tr.target[static_cast<std::size_t>(t)]);
        tr.probs.col(t) = (logits.array() - lse).exp();
        tr.att_hidden.push_back(std::move(u));
    }
    tr.loss /= static_cast<double>(T);
    return tr;
}

void backward(const Seq2SeqParams& p, const Trace& tr, Seq2SeqParams& g) {
    const int H = p.hidden();
    const int L = p.layers();
    const Eigen::Index S = tr.enc_out.cols();
    const Eigen::Index T = tr.dec_out.cols();

    Matrix d_dec = Matrix::Zero(H, T);
    Matrix d_enc = Matrix::Zero(H, S);
    Matrix d_uenc = Matrix::Zero(H, S);
    Vector feat(2 * H);
    for (Eigen::Index t = 0; t < T; ++t) {
        Vector dlogits = tr.probs.col(t);
        dlogits(tr.target[static_cast<std::size_t>(t)]) -= 1;
        dlogits /= static_cast<double>(T);
        feat << tr.dec_out.col(t), tr.ctx.col(t);
        g.w_out.noalias() += dlogits * feat.transpose();
        g.b_out += dlogits;
        const Vector dfeat = p.w_out.transpose() * dlogits;
        d_dec.col(t) += dfeat.head(H);
        const Vector dctx = dfeat.tail(H);

        const auto a = tr.attn.col(t);
        d_enc.noalias() += dctx * a.transpose();
        const Vector da = tr.enc_out.transpose() * dctx;
        const Vector de = a.cwiseProduct((da.array() - a.dot(da)).matrix());
        const Matrix& u = tr.att_hidden[static_cast<std::size_t>(t)];
        g.v_a.noalias() += u * de;
        const Matrix dpre = ((p.v_a * de.transpose()).array() * (1 - u.array().square())).matrix();
        const Vector dsum = dpre.rowwise().sum();
        g.w_a.noalias() += dsum * tr.dec_out.col(t).transpose();
        d_dec.col(t) += p.w_a.transpose() * dsum;
        d_uenc += dpre;
    }
    g.u_a.noalias() += d_uenc * tr.enc_out.transpose();
    d_enc.noalias() += p.u_a.transpose() * d_uenc;

    std::vector<Vector> dh0(static_cast<std::size_t>(L)), dc0(static_cast<std::size_t>(L));
    Matrix dh_out = std::move(d_dec);
    for (int l = L - 1; l >= 0; --l) {
        const auto ul = static_cast<std::size_t>(l);
        LstmGradOut out = lstm_backward(p.decoder[ul], tr.dec[ul], dh_out, Vector::Zero(H), Vector::Zero(H),
                                        g.decoder[ul]);
        dh0[ul] = std::move(out.dh0);
        dc0[ul] = std::move(out.dc0);
        dh_out = std::move(out.dx);
    }
    for (Eigen::Index t = 0; t < T; ++t) g.embedding.row(tr.dec_in[static_cast<std::size_t>(t)]) += dh_out.col(t).transpose();

    dh_out = std::move(d_enc);
    for (int l = L - 1; l >= 0; --l) {
        const auto ul = static_cast<std::size_t>(l);
        LstmGradOut out = lstm_backward(p.encoder[ul], tr.enc[ul], dh_out, dh0[ul], dc0[ul], g.encoder[ul]);
        dh_out = std::move(out.dx);
    }
    for (Eigen::Index s = 0; s < S; ++s) g.embedding.row(tr.query[static_cast<std::size_t>(s)]) += dh_out.col(s).transpose();
}

Seq2SeqParams zeros_like(const Seq2SeqParams& p) {
    return Seq2SeqParams::zeros(p.vocab_size(), p.embed_dim(), p.hidden(), p.layers());
}

}  // namespace

ForwardResult teacher_forced(const Seq2SeqParams& params, std::span<const int> query,
                             std::span<const int> response) {
    Trace tr = forward(params, query, response);
    return {tr.loss, static_cast<int>(tr.target.size()), std::move(tr.attn)};
}

double loss_and_gradient(const Seq2SeqParams& params, std::span<const int> query, std::span<const int> response,
                         Seq2SeqParams& grad) {
    const Trace tr = forward(params, query, response);
    grad = zeros_like(params);
    backward(params, tr, grad);
    return tr.loss;
}

double encode_decode_train_step(Seq2SeqParams& params, std::span<const int> query, std::span<const int> response,
                                double learning_rate, double clip) {
    if (response.empty()) throw Error("seq2seq: empty response");
    Seq2SeqParams grad;
    const double loss = loss_and_gradient(params, query, response, grad);
    clip_global_norm(grad, clip);
    sgd_update(params, grad, learning_rate);
    return loss;
}

double response_confidence(double final_logit) { return sigmoid(final_logit); }

ScoredResponse decode_greedy(const Seq2SeqModel& model, std::span<const int> query, int max_len) {
    if (max_len < 1) throw Error("decode_greedy: max_len must be >= 1");
    if (query.empty()) throw Error("decode_greedy: empty query");
    const Seq2SeqParams& p = model.params;
    const int H = p.hidden();
    const int L = p.layers();
    const auto S = static_cast<Eigen::Index>(query.size());

    std::vector<Vector> zeros(static_cast<std::size_t>(L), Vector::Zero(H));
    const auto enc = run_stack(p.encoder, embed(p.embedding, query), zeros, zeros);
    const Matrix enc_out = enc.back().h.rightCols(S);
    const Matrix u_enc = p.u_a * enc_out;
    std::vector<Vector> h, c;
    for (const auto& layer : enc) {
        h.push_back(layer.h.col(S));
        c.push_back(layer.c.col(S));
    }

    ScoredResponse out;
    out.domain = model.domain;
    int token = Vocabulary::kSos;
    Vector feat(2 * H);
    for (int step = 0; step < max_len; ++step) {
        Vector x = p.embedding.row(token).transpose();
        for (int l = 0; l < L; ++l) {
            lstm_cell(p.decoder[static_cast<std::size_t>(l)], x, h[static_cast<std::size_t>(l)],
                      c[static_cast<std::size_t>(l)]);
            x = h[static_cast<std::size_t>(l)];
        }
        const Vector& d = h.back();
        const Matrix u = (u_enc.colwise() + p.w_a * d).array().tanh();
        const Vector a = softmax(u.transpose() * p.v_a);
        feat << d, enc_out * a;
        Vector logits = p.w_out * feat + p.b_out;
        Vector masked = logits;
        masked(Vocabulary::kPad) = -std::numeric_limits<double>::infinity();
        masked(Vocabulary::kSos) = -std::numeric_limits<double>::infinity();
        token = static_cast<int>(argmax(masked));
        out.final_logit = logits(token);
        if (token == Vocabulary::kEos) {
            out.reached_eos = true;
            break;
        }
        out.tokens.push_back(token);
    }
    out.confidence = response_confidence(out.final_logit);
    return out;
}

std::vector<EncodedPair> encode_pairs(std::span<const QRPair> pairs, const Vocabulary& vocab) {
    std::vector<EncodedPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        EncodedPair e{encode(p.query.tokens, vocab), encode(p.response.tokens, vocab)};
        if (e.query.empty()) e.query.push_back(Vocabulary::kEos);
        out.push_back(std::move(e));
    }
    return out;
}

double perplexity(const Seq2SeqParams& params, std::span<const EncodedPair> data) {
    if (data.empty()) throw Error("perplexity: empty dataset");
    double nats = 0;
    long tokens = 0;
    for (const auto& pair : data) {
        const ForwardResult r = teacher_forced(params, pair.query, pair.response);
        nats += r.loss * r.target_tokens;
        tokens += r.target_tokens;
    }
    return std::exp(nats / static_cast<double>(tokens));
}

double perplexity(const Seq2SeqModel& model, std::span<const QRPair> data) {
    const auto encoded = encode_pairs(data, model.vocab);
    return perplexity(model.params, encoded);
}

Seq2SeqModel train_generator(std::span<const QRPair> corpus, DomainId domain, const GeneratorOptions& options,
                             TrainingLog* log, const EpochCallback& on_epoch) {
    if (corpus.empty()) throw Error("train_generator: empty corpus");
    for (const auto& p : corpus)
        if (p.domain != domain) throw Error("train_generator: corpus mixes domains");

    std::vector<Tokens> texts;
    for (const auto& p : corpus) {
        texts.push_back(p.query.tokens);
        texts.push_back(p.response.tokens);
    }
    Seq2SeqModel model;
    model.domain = domain;
    model.vocab = build_vocabulary(texts, options.min_count);
    model.params = Seq2SeqParams::random(model.vocab.size(), options.embed, options.hidden, options.layers,
                                         options.seed, options.init_scale);

    std::vector<EncodedPair> all = encode_pairs(corpus, model.vocab);
    Rng rng(options.seed ^ 0xdec0deULL);
    std::vector<EncodedPair> train, validation;
    if (options.validation_fraction > 0 && all.size() >= 2) {
        rng.shuffle(all);
        auto n_val = static_cast<std::size_t>(std::ceil(options.validation_fraction * static_cast<double>(all.size())));
        n_val = std::min(n_val, all.size() - 1);
        validation.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_val));
        train.assign(all.begin() + static_cast<std::ptrdiff_t>(n_val), all.end());
    } else {
        train = all;
        validation = all;
    }

    TrainingLog local;
    TrainingLog& history = log ? *log : local;
    history = {};
    Optimizer<Seq2SeqParams> opt(options.optimizer, options.learning_rate, model.params);
    Seq2SeqParams best = model.params;
    double best_ppl = perplexity(model.params, validation);
    int since_best = 0;
    auto order = iota_indices(train.size());
    Seq2SeqParams grad;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0;
        for (std::size_t n : order) {
            loss_sum += loss_and_gradient(model.params, train[n].query, train[n].response, grad);
            clip_global_norm(grad, options.clip);
            opt.step(model.params, grad);
        }
        const double ppl = perplexity(model.params, validation);
        history.train_loss.push_back(loss_sum / static_cast<double>(train.size()));
        history.validation_perplexity.push_back(ppl);
        if (on_epoch) on_epoch(epoch, history.train_loss.back(), ppl);
        if (ppl < best_ppl) {
            best_ppl = ppl;
            best = model.params;
            history.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= options.patience) {
            history.stopped_early = true;
            break;
        }
    }
    model.params = std::move(best);
    return model;
}

GradCheckResult gradient_check(const Seq2SeqParams& params, std::span<const int> query,
                               std::span<const int> response, double eps) {
    Seq2SeqParams grad;
    loss_and_gradient(params, query, response, grad);
    return check_gradients(
        params, grad, [&](const Seq2SeqParams& p) { return forward(p, query, response).loss; }, eps);
}

}  // namespace domseq
