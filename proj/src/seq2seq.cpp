#include "stemmaplace/seq2seq.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>
#include <type_traits>

#include <json.hpp>

#include "stemmaplace/error.hpp"
#include "stemmaplace/rng.hpp"

namespace stemmaplace {

namespace {

template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

constexpr char kMagic[8] = {'S', 'T', 'P', 'L', 'S', '2', 'S', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
using ArrayMap = Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstArrayMap = Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>;

// `z` holds the 4n gate pre-activations and is overwritten with the
// activations. A null `c_prev` means a zero initial cell state.
template <typename T>
void lstm_cell(T* z, const T* c_prev, T* c, T* h, int n) {
  ArrayMap<T> i(z, n), f(z + n, n), g(z + 2 * n, n), o(z + 3 * n, n);
  i = T(1) / (T(1) + (-i).exp());
  f = T(1) / (T(1) + (-f).exp());
  g = g.tanh();
  o = T(1) / (T(1) + (-o).exp());
  ArrayMap<T> cell(c, n), hid(h, n);
  if (c_prev)
    cell = f * ConstArrayMap<T>(c_prev, n) + i * g;
  else
    cell = i * g;
  hid = o * cell.tanh();
}

// `dc` carries the cell gradient from the next step in and the gradient
// w.r.t. c_prev out. Writes gate pre-activation gradients to `dz`.
template <typename T>
void lstm_cell_backward(const T* gates, const T* c_prev, const T* c, const T* dh, T* dc, T* dz, int n) {
  ConstArrayMap<T> i(gates, n), f(gates + n, n), g(gates + 2 * n, n), o(gates + 3 * n, n);
  ConstArrayMap<T> cell(c, n), dhv(dh, n);
  ArrayMap<T> dcv(dc, n);
  dcv += dhv * o * (T(1) - cell.tanh().square());
  ArrayMap<T>(dz, n) = dcv * g * i * (T(1) - i);
  if (c_prev)
    ArrayMap<T>(dz + n, n) = dcv * ConstArrayMap<T>(c_prev, n) * f * (T(1) - f);
  else
    ArrayMap<T>(dz + n, n).setZero();
  ArrayMap<T>(dz + 2 * n, n) = dcv * i * (T(1) - g.square());
  ArrayMap<T>(dz + 3 * n, n) = dhv * cell.tanh() * o * (T(1) - o);
  dcv *= f;
}

// out += x * W for a row vector x and row-major W. Plain loops beat the
// generic product for the small recurrent matrices used here.
template <typename T>
void add_row_times(const T* x, const Matrix<T>& w, T* out) {
  const auto rows = w.rows(), cols = w.cols();
  for (Eigen::Index i = 0; i < rows; ++i) {
    const T xi = x[i];
    const T* wr = w.data() + i * cols;
    for (Eigen::Index j = 0; j < cols; ++j) out[j] += xi * wr[j];
  }
}

template <typename T>
void softmax_inplace(RowVec<T>& v) {
  const T m = v.maxCoeff();
  v = (v.array() - m).exp();
  v /= v.sum();
}

nlohmann::json hp_to_json(const HyperParams& hp) {
  return {{"embed_dim", hp.embed_dim},
          {"hidden_dim", hp.hidden_dim},
          {"layers", hp.layers},
          {"dropout", hp.dropout},
          {"batch_size", hp.batch_size},
          {"train_steps", hp.train_steps},
          {"valid_size", hp.valid_size},
          {"optimizer", hp.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
          {"learning_rate", hp.learning_rate},
          {"clip_norm", hp.clip_norm},
          {"param_init", hp.param_init},
          {"seed", hp.seed},
          {"checkpoint_every", hp.checkpoint_every},
          {"max_decode_len", hp.max_decode_len},
          {"threads", hp.threads}};
}

HyperParams hp_from_json(const nlohmann::json& j) {
  HyperParams hp;
  hp.embed_dim = j.at("embed_dim");
  hp.hidden_dim = j.at("hidden_dim");
  hp.layers = j.at("layers");
  hp.dropout = j.at("dropout");
  hp.batch_size = j.at("batch_size");
  hp.train_steps = j.at("train_steps");
  hp.valid_size = j.at("valid_size");
  hp.optimizer = j.at("optimizer") == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
  hp.learning_rate = j.at("learning_rate");
  hp.clip_norm = j.at("clip_norm");
  hp.param_init = j.at("param_init");
  hp.seed = j.at("seed");
  hp.checkpoint_every = j.at("checkpoint_every");
  hp.max_decode_len = j.at("max_decode_len");
  hp.threads = j.at("threads");
  return hp;
}

template <typename T>
void write_le(std::ostream& out, const T* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      char bytes[sizeof(T)];
      std::memcpy(bytes, data + i, sizeof(T));
      std::reverse(bytes, bytes + sizeof(T));
      out.write(bytes, sizeof(T));
    }
  }
}

template <typename T>
void read_le(std::istream& in, T* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  if constexpr (std::endian::native != std::endian::little) {
    for (std::size_t i = 0; i < count; ++i) {
      char bytes[sizeof(T)];
      std::memcpy(bytes, data + i, sizeof(T));
      std::reverse(bytes, bytes + sizeof(T));
      std::memcpy(data + i, bytes, sizeof(T));
    }
  }
}

}  // namespace

void HyperParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::BadHyperParams, msg); };
  if (embed_dim <= 0) fail("embed_dim must be positive");
  if (hidden_dim <= 0 || hidden_dim % 2) fail("hidden_dim must be positive and even");
  if (layers != 1) fail("only single-layer networks are supported");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0,1)");
  if (batch_size <= 0) fail("batch_size must be positive");
  if (train_steps <= 0) fail("train_steps must be positive");
  if (valid_size <= 0) fail("valid_size must be positive");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(clip_norm > 0.0)) fail("clip_norm must be positive");
  if (!(param_init > 0.0)) fail("param_init must be positive");
  if (checkpoint_every <= 0) fail("checkpoint_every must be positive");
  if (max_decode_len <= 0) fail("max_decode_len must be positive");
  if (threads <= 0) fail("threads must be positive");
}

template <typename T>
Seq2SeqParams<T> Seq2SeqParams<T>::zeros(int src_vocab, int tgt_vocab, int embed, int hidden) {
  const int half = hidden / 2;
  Seq2SeqParams p;
  p.src_emb = Matrix<T>::Zero(src_vocab, embed);
  p.tgt_emb = Matrix<T>::Zero(tgt_vocab, embed);
  p.enc_fw_w = Matrix<T>::Zero(embed, 4 * half);
  p.enc_fw_u = Matrix<T>::Zero(half, 4 * half);
  p.enc_fw_b = Matrix<T>::Zero(1, 4 * half);
  p.enc_bw_w = Matrix<T>::Zero(embed, 4 * half);
  p.enc_bw_u = Matrix<T>::Zero(half, 4 * half);
  p.enc_bw_b = Matrix<T>::Zero(1, 4 * half);
  p.dec_w = Matrix<T>::Zero(embed, 4 * hidden);
  p.dec_u = Matrix<T>::Zero(hidden, 4 * hidden);
  p.dec_b = Matrix<T>::Zero(1, 4 * hidden);
  p.attn_w = Matrix<T>::Zero(2 * hidden, hidden);
  p.attn_b = Matrix<T>::Zero(1, hidden);
  p.out_w = Matrix<T>::Zero(hidden, tgt_vocab);
  p.out_b = Matrix<T>::Zero(1, tgt_vocab);
  return p;
}

template <typename T>
void Seq2SeqParams<T>::set_zero() {
  visit([](const char*, Matrix<T>& m) { m.setZero(); });
}

template <typename T>
std::size_t Seq2SeqParams<T>::parameter_count() const {
  std::size_t n = 0;
  visit([&](const char*, const Matrix<T>& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

template <typename T>
struct Seq2Seq<T>::Projections {
  Matrix<T> fw, bw, dec;  // embedding rows pushed through the input weights
  Matrix<T> fw_u_t, bw_u_t, dec_u_t;  // transposed recurrent weights for backprop
};

template <typename T>
struct Seq2Seq<T>::Cache {
  Matrix<T> fw_gates, fw_c, fw_h;
  Matrix<T> bw_gates, bw_c, bw_h;
  Matrix<T> enc;
  RowVec<T> h0, c0;
  Matrix<T> dec_gates, dec_c, dec_h, attn, ctx, attn_h, mask, probs;
  std::vector<int> dec_in, dec_out;
  T loss = T(0);

  void size_decoder(int steps, int src_len, int hidden, int tgt_vocab) {
    dec_gates.resize(steps, 4 * hidden);
    dec_c.resize(steps, hidden);
    dec_h.resize(steps, hidden);
    attn.resize(steps, src_len);
    ctx.resize(steps, hidden);
    attn_h.resize(steps, hidden);
    mask.resize(steps, hidden);
    probs.resize(steps, tgt_vocab);
  }
};

template <typename T>
Seq2Seq<T>::Seq2Seq(Vocabs vocabs, HyperParams hp) : vocabs_(std::move(vocabs)), hp_(hp) {
  hp_.validate();
  params_ = Seq2SeqParams<T>::zeros(vocabs_.source.size(), vocabs_.target.size(), hp_.embed_dim, hp_.hidden_dim);
  Rng rng(derive_seed(hp_.seed, 0));
  const double r = hp_.param_init;
  params_.visit([&](const char*, Matrix<T>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>((2.0 * rng.uniform01() - 1.0) * r);
  });
}

template <typename T>
EncodedPair Seq2Seq<T>::encode(const PairInstance& inst) const {
  return {vocabs_.source.encode(inst.source), {vocabs_.target.index(inst.target)}};
}

template <typename T>
typename Seq2Seq<T>::Projections Seq2Seq<T>::project() const {
  Projections p;
  p.fw.noalias() = params_.src_emb * params_.enc_fw_w;
  p.bw.noalias() = params_.src_emb * params_.enc_bw_w;
  p.dec.noalias() = params_.tgt_emb * params_.dec_w;
  p.fw_u_t = params_.enc_fw_u.transpose();
  p.bw_u_t = params_.enc_bw_u.transpose();
  p.dec_u_t = params_.dec_u.transpose();
  return p;
}

template <typename T>
void Seq2Seq<T>::encode_source(const Projections& proj, const std::vector<int>& src, Cache& c) const {
  const int len = static_cast<int>(src.size());
  const int n = hp_.hidden_dim / 2;
  c.fw_gates.resize(len, 4 * n);
  c.fw_c.resize(len, n);
  c.fw_h.resize(len, n);
  c.bw_gates.resize(len, 4 * n);
  c.bw_c.resize(len, n);
  c.bw_h.resize(len, n);

  for (int t = 0; t < len; ++t) {
    auto z = c.fw_gates.row(t);
    z = proj.fw.row(src[t]) + params_.enc_fw_b;
    if (t > 0) add_row_times(c.fw_h.row(t - 1).data(), params_.enc_fw_u, z.data());
    lstm_cell(z.data(), t > 0 ? c.fw_c.row(t - 1).data() : nullptr, c.fw_c.row(t).data(), c.fw_h.row(t).data(), n);
  }
  for (int t = len - 1; t >= 0; --t) {
    auto z = c.bw_gates.row(t);
    z = proj.bw.row(src[t]) + params_.enc_bw_b;
    if (t < len - 1) add_row_times(c.bw_h.row(t + 1).data(), params_.enc_bw_u, z.data());
    lstm_cell(z.data(), t < len - 1 ? c.bw_c.row(t + 1).data() : nullptr, c.bw_c.row(t).data(),
              c.bw_h.row(t).data(), n);
  }
  c.enc.resize(len, 2 * n);
  c.enc.leftCols(n) = c.fw_h;
  c.enc.rightCols(n) = c.bw_h;
  c.h0.resize(2 * n);
  c.c0.resize(2 * n);
  c.h0 << c.fw_h.row(len - 1), c.bw_h.row(0);
  c.c0 << c.fw_c.row(len - 1), c.bw_c.row(0);
}

template <typename T>
void Seq2Seq<T>::decoder_step(const Projections& proj, Cache& c, int s, int token, bool train,
                              std::uint64_t dropout_seed) const {
  const int hid = hp_.hidden_dim;
  const T* h_prev = s > 0 ? c.dec_h.row(s - 1).data() : c.h0.data();
  const T* c_prev = s > 0 ? c.dec_c.row(s - 1).data() : c.c0.data();
  auto z = c.dec_gates.row(s);
  z = proj.dec.row(token) + params_.dec_b;
  add_row_times(h_prev, params_.dec_u, z.data());
  lstm_cell(z.data(), c_prev, c.dec_c.row(s).data(), c.dec_h.row(s).data(), hid);

  RowVec<T> scores = c.dec_h.row(s) * c.enc.transpose();
  softmax_inplace(scores);
  c.attn.row(s) = scores;
  c.ctx.row(s).noalias() = scores * c.enc;
  RowVec<T> u = params_.attn_b;
  u.noalias() += c.ctx.row(s) * params_.attn_w.topRows(hid);
  u.noalias() += c.dec_h.row(s) * params_.attn_w.bottomRows(hid);
  c.attn_h.row(s) = u.array().tanh().matrix();

  if (train && hp_.dropout > 0.0) {
    Rng rng(derive_seed(dropout_seed, static_cast<std::uint64_t>(s)));
    const T keep_scale = static_cast<T>(1.0 / (1.0 - hp_.dropout));
    for (int k = 0; k < hid; ++k) c.mask(s, k) = rng.uniform01() < hp_.dropout ? T(0) : keep_scale;
  } else {
    c.mask.row(s).setOnes();
  }

  RowVec<T> logits = params_.out_b;
  logits.noalias() += c.attn_h.row(s).cwiseProduct(c.mask.row(s)) * params_.out_w;
  softmax_inplace(logits);
  c.probs.row(s) = logits;
}

template <typename T>
void Seq2Seq<T>::forward(const Projections& proj, const EncodedPair& ex, Cache& c, bool train,
                         std::uint64_t dropout_seed) const {
  encode_source(proj, ex.source, c);
  c.dec_in.assign(1, Vocab::kBos);
  c.dec_in.insert(c.dec_in.end(), ex.target.begin(), ex.target.end());
  c.dec_out = ex.target;
  c.dec_out.push_back(Vocab::kEos);
  const int steps = static_cast<int>(c.dec_in.size());
  c.size_decoder(steps, static_cast<int>(ex.source.size()), hp_.hidden_dim, vocabs_.target.size());
  c.loss = T(0);
  for (int s = 0; s < steps; ++s) {
    decoder_step(proj, c, s, c.dec_in[static_cast<std::size_t>(s)], train, dropout_seed);
    c.loss -= std::log(std::max(c.probs(s, c.dec_out[static_cast<std::size_t>(s)]), std::numeric_limits<T>::min()));
  }
}

template <typename T>
void Seq2Seq<T>::backward(const Projections& proj, const EncodedPair& ex, const Cache& c, T scale, Seq2SeqParams<T>& g, Matrix<T>& s_fw,
                          Matrix<T>& s_bw, Matrix<T>& s_dec) const {
  const auto& p = params_;
  const int hid = hp_.hidden_dim;
  const int n = hid / 2;
  const int len = static_cast<int>(ex.source.size());
  const int steps = static_cast<int>(c.dec_in.size());

  Matrix<T> d_enc = Matrix<T>::Zero(len, hid);
  Matrix<T> dz_dec(steps, 4 * hid);
  RowVec<T> dh_next = RowVec<T>::Zero(hid);
  RowVec<T> dc = RowVec<T>::Zero(hid);

  for (int s = steps - 1; s >= 0; --s) {
    RowVec<T> dlogits = c.probs.row(s);
    dlogits(c.dec_out[static_cast<std::size_t>(s)]) -= T(1);
    dlogits *= scale;
    const RowVec<T> out_h = c.attn_h.row(s).cwiseProduct(c.mask.row(s));
    g.out_w.noalias() += out_h.transpose() * dlogits;
    g.out_b += dlogits;

    RowVec<T> d_attn_h = (dlogits * p.out_w.transpose()).cwiseProduct(c.mask.row(s));
    const RowVec<T> du = d_attn_h.array() * (T(1) - c.attn_h.row(s).array().square());
    g.attn_w.topRows(hid).noalias() += c.ctx.row(s).transpose() * du;
    g.attn_w.bottomRows(hid).noalias() += c.dec_h.row(s).transpose() * du;
    g.attn_b += du;
    const RowVec<T> dctx = du * p.attn_w.topRows(hid).transpose();
    RowVec<T> dh = dh_next;
    dh.noalias() += du * p.attn_w.bottomRows(hid).transpose();

    // Attention: ctx = a * enc, a = softmax(enc * h).
    const RowVec<T> da = dctx * c.enc.transpose();
    const T mean = c.attn.row(s).dot(da);
    const RowVec<T> ds = c.attn.row(s).array() * (da.array() - mean);
    d_enc.noalias() += c.attn.row(s).transpose() * dctx;
    d_enc.noalias() += ds.transpose() * c.dec_h.row(s);
    dh.noalias() += ds * c.enc;

    const T* c_prev = s > 0 ? c.dec_c.row(s - 1).data() : c.c0.data();
    lstm_cell_backward(c.dec_gates.row(s).data(), c_prev, c.dec_c.row(s).data(), dh.data(), dc.data(),
                       dz_dec.row(s).data(), hid);
    s_dec.row(c.dec_in[static_cast<std::size_t>(s)]) += dz_dec.row(s);
    dh_next.setZero();
    add_row_times(dz_dec.row(s).data(), proj.dec_u_t, dh_next.data());
  }
  g.dec_u.noalias() += c.h0.transpose() * dz_dec.row(0);
  if (steps > 1) g.dec_u.noalias() += c.dec_h.topRows(steps - 1).transpose() * dz_dec.bottomRows(steps - 1);
  g.dec_b += dz_dec.colwise().sum();

  // Forward direction: final state at t = len-1 feeds the decoder.
  {
    Matrix<T> dz(len, 4 * n);
    RowVec<T> dh_n = dh_next.head(n);
    RowVec<T> dcn = dc.head(n);
    RowVec<T> dh(n);
    for (int t = len - 1; t >= 0; --t) {
      dh = dh_n + d_enc.row(t).head(n);
      lstm_cell_backward(c.fw_gates.row(t).data(), t > 0 ? c.fw_c.row(t - 1).data() : nullptr, c.fw_c.row(t).data(),
                         dh.data(), dcn.data(), dz.row(t).data(), n);
      s_fw.row(ex.source[static_cast<std::size_t>(t)]) += dz.row(t);
      dh_n.setZero();
      add_row_times(dz.row(t).data(), proj.fw_u_t, dh_n.data());
    }
    if (len > 1) g.enc_fw_u.noalias() += c.fw_h.topRows(len - 1).transpose() * dz.bottomRows(len - 1);
    g.enc_fw_b += dz.colwise().sum();
  }
  // Backward direction: final state at t = 0.
  {
    Matrix<T> dz(len, 4 * n);
    RowVec<T> dh_n = dh_next.tail(n);
    RowVec<T> dcn = dc.tail(n);
    RowVec<T> dh(n);
    for (int t = 0; t < len; ++t) {
      dh = dh_n + d_enc.row(t).tail(n);
      lstm_cell_backward(c.bw_gates.row(t).data(), t < len - 1 ? c.bw_c.row(t + 1).data() : nullptr,
                         c.bw_c.row(t).data(), dh.data(), dcn.data(), dz.row(t).data(), n);
      s_bw.row(ex.source[static_cast<std::size_t>(t)]) += dz.row(t);
      dh_n.setZero();
      add_row_times(dz.row(t).data(), proj.bw_u_t, dh_n.data());
    }
    if (len > 1) g.enc_bw_u.noalias() += c.bw_h.bottomRows(len - 1).transpose() * dz.topRows(len - 1);
    g.enc_bw_b += dz.colwise().sum();
  }
}

template <typename T>
T Seq2Seq<T>::loss(const std::vector<EncodedPair>& batch, Seq2SeqParams<T>* grads, bool train,
                   std::uint64_t dropout_seed) const {
  if (batch.empty()) return T(0);
  for (const auto& ex : batch)
    if (ex.source.empty()) throw Error(ErrorKind::EmptyInput, "zero-length source sequence");
  const Projections proj = project();
  std::size_t tokens = 0;
  for (const auto& ex : batch) tokens += ex.target.size() + 1;
  const T scale = T(1) / static_cast<T>(tokens);

  const int workers = std::max(1, std::min<int>(hp_.threads, static_cast<int>(batch.size())));
  struct Worker {
    Seq2SeqParams<T> g;
    Matrix<T> s_fw, s_bw, s_dec;
    T loss = T(0);
  };
  std::vector<Worker> work(static_cast<std::size_t>(workers));
  const int src_v = vocabs_.source.size(), tgt_v = vocabs_.target.size();
  const int n = hp_.hidden_dim / 2;

  auto run = [&](int w) {
    auto& wk = work[static_cast<std::size_t>(w)];
    if (grads) {
      wk.g = Seq2SeqParams<T>::zeros(src_v, tgt_v, hp_.embed_dim, hp_.hidden_dim);
      wk.s_fw = Matrix<T>::Zero(src_v, 4 * n);
      wk.s_bw = Matrix<T>::Zero(src_v, 4 * n);
      wk.s_dec = Matrix<T>::Zero(tgt_v, 8 * n);
    }
    Cache cache;
    // Contiguous chunks keep the reduction order fixed for a given thread count.
    const std::size_t chunk = (batch.size() + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
    const std::size_t lo = static_cast<std::size_t>(w) * chunk;
    const std::size_t hi = std::min(batch.size(), lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) {
      forward(proj, batch[i], cache, train, derive_seed(dropout_seed, i));
      wk.loss += cache.loss;
      if (grads) backward(proj, batch[i], cache, scale, wk.g, wk.s_fw, wk.s_bw, wk.s_dec);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }

  T total = T(0);
  for (const auto& wk : work) total += wk.loss;
  if (grads) {
    *grads = std::move(work[0].g);
    Matrix<T> s_fw = std::move(work[0].s_fw), s_bw = std::move(work[0].s_bw), s_dec = std::move(work[0].s_dec);
    for (std::size_t w = 1; w < work.size(); ++w) {
      std::vector<Matrix<T>*> dst;
      grads->visit([&](const char*, Matrix<T>& m) { dst.push_back(&m); });
      std::size_t k = 0;
      work[w].g.visit([&](const char*, Matrix<T>& m) { *dst[k++] += m; });
      s_fw += work[w].s_fw;
      s_bw += work[w].s_bw;
      s_dec += work[w].s_dec;
    }
    // Input projections were computed as emb * W; push the per-token sums back.
    grads->enc_fw_w.noalias() += params_.src_emb.transpose() * s_fw;
    grads->enc_bw_w.noalias() += params_.src_emb.transpose() * s_bw;
    grads->src_emb.noalias() += s_fw * params_.enc_fw_w.transpose();
    grads->src_emb.noalias() += s_bw * params_.enc_bw_w.transpose();
    grads->dec_w.noalias() += params_.tgt_emb.transpose() * s_dec;
    grads->tgt_emb.noalias() += s_dec * params_.dec_w.transpose();
  }
  return total * scale;
}

template <typename T>
std::vector<std::string> Seq2Seq<T>::decode(const std::vector<std::string>& source) const {
  if (source.empty()) throw Error(ErrorKind::EmptyInput, "zero-length source sequence");
  const Projections proj = project();
  const auto src = vocabs_.source.encode(source);
  Cache c;
  encode_source(proj, src, c);
  c.size_decoder(hp_.max_decode_len, static_cast<int>(src.size()), hp_.hidden_dim, vocabs_.target.size());
  std::vector<std::string> out;
  int token = Vocab::kBos;
  for (int s = 0; s < hp_.max_decode_len; ++s) {
    decoder_step(proj, c, s, token, false, 0);
    int best = Vocab::kEos;
    for (int v = 0; v < vocabs_.target.size(); ++v) {
      if (v == Vocab::kPad || v == Vocab::kBos || v == Vocab::kUnk) continue;
      if (c.probs(s, v) > c.probs(s, best)) best = v;
    }
    if (best == Vocab::kEos) break;
    out.push_back(vocabs_.target.token(best));
    token = best;
  }
  return out;
}

template <typename T>
double Seq2Seq<T>::token_accuracy(const std::vector<EncodedPair>& data) const {
  if (data.empty()) return 0.0;
  const Projections proj = project();
  Cache c;
  std::size_t hits = 0, total = 0;
  for (const auto& ex : data) {
    forward(proj, ex, c, false, 0);
    for (int s = 0; s < c.probs.rows(); ++s) {
      Eigen::Index best = 0;
      c.probs.row(s).maxCoeff(&best);
      hits += static_cast<int>(best) == c.dec_out[static_cast<std::size_t>(s)];
      ++total;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

template <typename T>
void Seq2Seq<T>::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  const nlohmann::json header = {{"dtype", std::is_same_v<T, float> ? "float32" : "float64"},
                                 {"hyper_params", hp_to_json(hp_)},
                                 {"source_vocab", vocabs_.source.known_tokens()},
                                 {"target_vocab", vocabs_.target.known_tokens()}};
  const std::string text = header.dump();
  out.write(kMagic, sizeof kMagic);
  write_le(out, &kFormatVersion, 1);
  const auto len = static_cast<std::uint32_t>(text.size());
  write_le(out, &len, 1);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  params_.visit([&](const char*, const Matrix<T>& m) {
    const std::uint32_t dims[2] = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    write_le(out, dims, 2);
    write_le(out, m.data(), static_cast<std::size_t>(m.size()));
  });
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

template <typename T>
Seq2Seq<T> Seq2Seq<T>::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error(ErrorKind::BadModelFile, path.string() + ": bad magic");
  std::uint32_t version = 0, len = 0;
  read_le(in, &version, 1);
  if (version != kFormatVersion)
    throw Error(ErrorKind::BadModelFile, path.string() + ": unsupported version " + std::to_string(version));
  read_le(in, &len, 1);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw Error(ErrorKind::BadModelFile, path.string() + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadModelFile, path.string() + ": " + e.what());
  }
  const std::string dtype = std::is_same_v<T, float> ? "float32" : "float64";
  if (header.at("dtype") != dtype) throw Error(ErrorKind::BadModelFile, path.string() + ": dtype mismatch");
  Vocabs vocabs{Vocab(header.at("source_vocab").get<std::vector<std::string>>()),
                Vocab(header.at("target_vocab").get<std::vector<std::string>>())};
  Seq2Seq model(std::move(vocabs), hp_from_json(header.at("hyper_params")));
  model.params_.visit([&](const char* name, Matrix<T>& m) {
    std::uint32_t dims[2] = {0, 0};
    read_le(in, dims, 2);
    if (!in || dims[0] != m.rows() || dims[1] != m.cols())
      throw Error(ErrorKind::BadModelFile, path.string() + ": shape mismatch for " + name);
    read_le(in, m.data(), static_cast<std::size_t>(m.size()));
    if (!in) throw Error(ErrorKind::BadModelFile, path.string() + ": truncated tensor " + name);
  });
  return model;
}

template struct Seq2SeqParams<float>;
template struct Seq2SeqParams<double>;
template class Seq2Seq<float>;
template class Seq2Seq<double>;

std::string TrainingLog::to_csv() const {
  std::ostringstream out;
  out << "step,train_loss,valid_acc\n";
  out.precision(9);
  for (const auto& e : entries) out << e.step << ',' << e.train_loss << ',' << e.valid_acc << '\n';
  return out.str();
}

TrainingLog train_model(Seq2SeqModel& model, const std::vector<PairInstance>& train_set,
                        const std::vector<PairInstance>& valid_set, const HyperParams& hp,
                        const StepCallback& on_step) {
  hp.validate();
  if (train_set.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no training instances");
  if (valid_set.empty()) throw Error(ErrorKind::EmptyValidation, "no validation instances");

  std::vector<EncodedPair> data, valid;
  for (const auto& inst : train_set) data.push_back(model.encode(inst));
  for (const auto& inst : valid_set) valid.push_back(model.encode(inst));

  auto& params = model.params();
  using P = Seq2SeqParams<float>;
  P grads;
  P m1 = P::zeros(model.vocabs().source.size(), model.vocabs().target.size(), hp.embed_dim, hp.hidden_dim);
  P m2 = m1;
  std::vector<Matrix<float>*> p_list, g_list, m1_list, m2_list;
  params.visit([&](const char*, Matrix<float>& m) { p_list.push_back(&m); });
  m1.visit([&](const char*, Matrix<float>& m) { m1_list.push_back(&m); });
  m2.visit([&](const char*, Matrix<float>& m) { m2_list.push_back(&m); });

  Rng shuffle_rng(derive_seed(hp.seed, 1));
  std::vector<std::size_t> order(data.size());
  std::size_t cursor = order.size();
  auto reshuffle = [&] {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
    cursor = 0;
  };

  TrainingLog log;
  double loss_sum = 0.0;
  int loss_count = 0;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<EncodedPair> batch;
  for (int step = 1; step <= hp.train_steps; ++step) {
    batch.clear();
    while (static_cast<int>(batch.size()) < hp.batch_size && batch.size() < data.size()) {
      if (cursor >= order.size()) reshuffle();
      batch.push_back(data[order[cursor++]]);
    }
    const float loss = model.loss(batch, &grads, true, derive_seed(hp.seed, 1000 + static_cast<std::uint64_t>(step)));
    if (!std::isfinite(loss))
      throw Error(ErrorKind::NonFiniteLoss, "loss " + std::to_string(loss) + " at step " + std::to_string(step));

    g_list.clear();
    grads.visit([&](const char*, Matrix<float>& m) { g_list.push_back(&m); });
    double norm2 = 0.0;
    for (auto* g : g_list) norm2 += static_cast<double>(g->squaredNorm());
    const double norm = std::sqrt(norm2);
    if (!std::isfinite(norm))
      throw Error(ErrorKind::NonFiniteLoss, "gradient norm not finite at step " + std::to_string(step));
    const float clip = norm > hp.clip_norm ? static_cast<float>(hp.clip_norm / norm) : 1.0f;

    if (hp.optimizer == OptimizerKind::Adam) {
      const double bc1 = 1.0 - std::pow(beta1, step), bc2 = 1.0 - std::pow(beta2, step);
      const auto step_size = static_cast<float>(hp.learning_rate * std::sqrt(bc2) / bc1);
      for (std::size_t k = 0; k < p_list.size(); ++k) {
        auto g = g_list[k]->array() * clip;
        auto& a = *m1_list[k];
        auto& b = *m2_list[k];
        a.array() = static_cast<float>(beta1) * a.array() + static_cast<float>(1 - beta1) * g;
        b.array() = static_cast<float>(beta2) * b.array() + static_cast<float>(1 - beta2) * g.square();
        p_list[k]->array() -= step_size * a.array() / (b.array().sqrt() + static_cast<float>(eps));
      }
    } else {
      const auto lr = static_cast<float>(hp.learning_rate) * clip;
      for (std::size_t k = 0; k < p_list.size(); ++k) *p_list[k] -= lr * *g_list[k];
    }

    loss_sum += loss;
    ++loss_count;
    log.final_loss = loss;
    if (on_step) on_step(step, loss);
    if (step % hp.checkpoint_every == 0 || step == hp.train_steps) {
      log.entries.push_back({step, loss_sum / loss_count, model.token_accuracy(valid)});
      loss_sum = 0.0;
      loss_count = 0;
    }
  }
  return log;
}

TrainResult train(const std::vector<PairInstance>& train_set, const std::vector<PairInstance>& valid_set,
                  const HyperParams& hp, const StepCallback& on_step) {
  Seq2SeqModel model(build_vocab(train_set), hp);
  auto log = train_model(model, train_set, valid_set, hp, on_step);
  return {std::move(model), std::move(log)};
}

double exact_accuracy(const Seq2SeqModel& model, const std::vector<PairInstance>& data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& inst : data) {
    const auto out = model.decode(inst.source);
    hits += !out.empty() && out.front() == inst.target;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

GradientCheckReport gradient_check(const Seq2Seq<double>& model, const std::vector<EncodedPair>& batch,
                                   double epsilon) {
  for (const auto& ex : batch)
    if (ex.source.empty()) throw Error(ErrorKind::EmptyInput, "zero-length source sequence");
  HyperParams hp = model.hyper_params();
  hp.dropout = 0.0;
  hp.threads = 1;
  Seq2Seq<double> probe(model.vocabs(), hp);
  probe.params() = model.params();

  Seq2SeqParams<double> analytic;
  probe.loss(batch, &analytic, false);
  std::vector<Matrix<double>*> grads;
  analytic.visit([&](const char*, Matrix<double>& m) { grads.push_back(&m); });

  GradientCheckReport report;
  std::size_t k = 0;
  probe.params().visit([&](const char* name, Matrix<double>& m) {
    const Matrix<double>& g = *grads[k++];
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double saved = m.data()[i];
      m.data()[i] = saved + epsilon;
      const double up = probe.loss(batch);
      m.data()[i] = saved - epsilon;
      const double down = probe.loss(batch);
      m.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = g.data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    report.per_group.emplace_back(name, worst);
    report.max_relative_error = std::max(report.max_relative_error, worst);
  });
  return report;
}

}  // namespace stemmaplace
