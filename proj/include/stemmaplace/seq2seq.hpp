#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stemmaplace/pairgen.hpp"
#include "stemmaplace/vocab.hpp"

namespace stemmaplace {

enum class OptimizerKind { Adam, Sgd };

struct HyperParams {
  int embed_dim = 128;
  int hidden_dim = 512;  // split evenly between the two encoder directions
  int layers = 1;
  double dropout = 0.0;
  int batch_size = 16;
  int train_steps = 7000;
  int valid_size = 5;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  double param_init = 0.1;
  std::uint64_t seed = 1;
  int checkpoint_every = 500;
  int max_decode_len = 8;
  int threads = 1;

  // Throws BadHyperParams.
  void validate() const;
};

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Parameter tensors of the encoder-decoder. Gate blocks are ordered
// input, forget, cell, output.
template <typename T>
struct Seq2SeqParams {
  Matrix<T> src_emb, tgt_emb;
  Matrix<T> enc_fw_w, enc_fw_u, enc_fw_b;
  Matrix<T> enc_bw_w, enc_bw_u, enc_bw_b;
  Matrix<T> dec_w, dec_u, dec_b;
  Matrix<T> attn_w, attn_b;
  Matrix<T> out_w, out_b;

  template <typename F>
  void visit(F&& f) {
    f("src_emb", src_emb);
    f("tgt_emb", tgt_emb);
    f("enc_fw_w", enc_fw_w);
    f("enc_fw_u", enc_fw_u);
    f("enc_fw_b", enc_fw_b);
    f("enc_bw_w", enc_bw_w);
    f("enc_bw_u", enc_bw_u);
    f("enc_bw_b", enc_bw_b);
    f("dec_w", dec_w);
    f("dec_u", dec_u);
    f("dec_b", dec_b);
    f("attn_w", attn_w);
    f("attn_b", attn_b);
    f("out_w", out_w);
    f("out_b", out_b);
  }
  template <typename F>
  void visit(F&& f) const {
    const_cast<Seq2SeqParams*>(this)->visit([&](const char* name, Matrix<T>& m) {
      f(name, static_cast<const Matrix<T>&>(m));
    });
  }

  // Zero tensors with the given sizes.
  static Seq2SeqParams zeros(int src_vocab, int tgt_vocab, int embed, int hidden);
  void set_zero();
  std::size_t parameter_count() const;
};

// One encoded training or evaluation example. `target` holds the target
// token ids without BOS/EOS.
struct EncodedPair {
  std::vector<int> source;
  std::vector<int> target;
};

// Bidirectional LSTM encoder, unidirectional LSTM decoder initialised from
// the final encoder states, dot-product global attention and a tanh
// attentional layer feeding the output softmax.
template <typename T>
class Seq2Seq {
 public:
  Seq2Seq(Vocabs vocabs, HyperParams hp);  // random init from hp.seed

  const Vocabs& vocabs() const { return vocabs_; }
  const HyperParams& hyper_params() const { return hp_; }
  Seq2SeqParams<T>& params() { return params_; }
  const Seq2SeqParams<T>& params() const { return params_; }

  EncodedPair encode(const PairInstance& inst) const;

  // Mean token cross-entropy over the batch (targets + EOS). When `grads` is
  // given it receives the gradient of that mean. `dropout_seed` seeds the
  // per-example dropout masks; dropout is off when hp.dropout == 0 or
  // `train` is false.
  T loss(const std::vector<EncodedPair>& batch, Seq2SeqParams<T>* grads = nullptr, bool train = false,
         std::uint64_t dropout_seed = 0) const;

  // Greedy decode until EOS or max_decode_len. Reserved tokens other than
  // EOS are never emitted. The returned list excludes EOS.
  std::vector<std::string> decode(const std::vector<std::string>& source) const;

  // Fraction of target tokens (incl. EOS) predicted correctly under teacher forcing.
  double token_accuracy(const std::vector<EncodedPair>& data) const;

  void save(const std::filesystem::path& path) const;
  static Seq2Seq load(const std::filesystem::path& path);

 private:
  struct Projections;
  struct Cache;
  Projections project() const;
  void forward(const Projections& proj, const EncodedPair& ex, Cache& cache, bool train,
               std::uint64_t dropout_seed) const;
  void backward(const Projections& proj, const EncodedPair& ex, const Cache& cache, T scale, Seq2SeqParams<T>& g, Matrix<T>& s_fw,
                Matrix<T>& s_bw, Matrix<T>& s_dec) const;
  void encode_source(const Projections& proj, const std::vector<int>& src, Cache& cache) const;
  // Decoder step `s` fed with `token`; fills the step's rows of `cache`.
  void decoder_step(const Projections& proj, Cache& cache, int s, int token, bool train,
                    std::uint64_t dropout_seed) const;

  Vocabs vocabs_;
  HyperParams hp_;
  Seq2SeqParams<T> params_;
};

using Seq2SeqModel = Seq2Seq<float>;

struct TrainingLogEntry {
  int step = 0;
  double train_loss = 0.0;
  double valid_acc = 0.0;
};

struct TrainingLog {
  std::vector<TrainingLogEntry> entries;
  double final_loss = 0.0;
  std::string to_csv() const;
};

struct TrainResult {
  Seq2SeqModel model;
  TrainingLog log;
};

// Called after every update with (step, batch loss).
using StepCallback = std::function<void(int, double)>;

// hp.train_steps minibatch updates over seeded per-epoch shuffles. Throws
// EmptyTrainingSet, EmptyValidation, NonFiniteLoss.
TrainResult train(const std::vector<PairInstance>& train_set, const std::vector<PairInstance>& valid_set,
                  const HyperParams& hp, const StepCallback& on_step = {});

// Runs the optimiser on an existing model. Exposed for loss-curve tests.
TrainingLog train_model(Seq2SeqModel& model, const std::vector<PairInstance>& train_set,
                        const std::vector<PairInstance>& valid_set, const HyperParams& hp,
                        const StepCallback& on_step = {});

// Fraction of instances whose first decoded token equals the target.
double exact_accuracy(const Seq2SeqModel& model, const std::vector<PairInstance>& data);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::vector<std::pair<std::string, double>> per_group;  // group name, max relative error
};

// Central finite differences against the analytic gradient, in double
// precision with dropout disabled. Throws EmptyInput for a zero-length source.
GradientCheckReport gradient_check(const Seq2Seq<double>& model, const std::vector<EncodedPair>& batch,
                                   double epsilon = 1e-5);

}  // namespace stemmaplace
