#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exnet/data/episode.hpp"
#include "exnet/model/config.hpp"
#include "exnet/numerics/adamw.hpp"
#include "exnet/numerics/tensor.hpp"
#include "exnet/text/tokenizer.hpp"
#include "exnet/util/random.hpp"

namespace exnet::model {

using numerics::Mode;
using numerics::NamedParameter;
using numerics::Tensor;

template <typename T>
struct LinearParams {
  Tensor<T> w;  // [in, out]
  Tensor<T> b;  // [out]
};

template <typename T>
struct NormParams {
  Tensor<T> gamma;
  Tensor<T> beta;
};

template <typename T>
struct AttentionParams {
  LinearParams<T> q, k, v, o;
};

template <typename T>
struct EncoderBlock {
  NormParams<T> ln1;
  AttentionParams<T> attn;
  NormParams<T> ln2;
  LinearParams<T> ff1, ff2;
};

// Shared encoder E, support projector P1, query projector P2, cross-attention
// C and the sigmoid head.
//
//   e = E(seq)                              pooled [d_model]
//   s_i = P1(e_i)      three GeLU layers, dropout before the third
//   y = P2(e_q)        one GeLU layer
//   f = y + Wo·MHA(Wq·y, Wk·S, Wv·S)        no positions over the support axis
//   p = sigmoid(head(f))                    two GeLU layers, one sigmoid layer
template <typename T>
class ExnetModel {
 public:
  // Throws ValidationError when cfg is invalid.
  ExnetModel(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return cfg_; }

  // Every learnable tensor with a stable dotted name, in a fixed order.
  std::vector<NamedParameter<T>>& parameters() noexcept { return params_; }
  const std::vector<NamedParameter<T>>& parameters() const noexcept { return params_; }
  std::size_t num_parameters() const;

  // Deep copy with parameters converted to U (no shared storage).
  template <typename U>
  ExnetModel<U> cast() const;

  // Copies values by name from `src`; shapes must match.
  void load_values(const std::vector<NamedParameter<T>>& src);

  // Pooled embeddings [M, d_model] for M sequences. The batch is cut to the
  // longest real length, so PAD tokens never enter the computation.
  Tensor<T> encode(std::span<const text::TokenSequence* const> seqs, Mode mode,
                   util::Rng& rng) const;
  Tensor<T> encode(const text::TokenSequence& seq, Mode mode, util::Rng& rng) const;

  // P1, row-wise over [..., d_model].
  Tensor<T> project_support(const Tensor<T>& e, Mode mode, util::Rng& rng) const;
  // P2, row-wise over [..., d_model].
  Tensor<T> project_query(const Tensor<T>& e) const;

  // support_proj [N, K, d], query_proj [N, d] -> fused [N, d]. `support_mask`
  // (N*K entries, may be empty) marks real support slots when K varies.
  Tensor<T> cross_attend(const Tensor<T>& support_proj, const Tensor<T>& query_proj,
                         std::span<const std::uint8_t> support_mask = {}) const;
  // Single episode: support_proj [K, d], query_proj [d] -> [d].
  Tensor<T> cross_attend_one(const Tensor<T>& support_proj, const Tensor<T>& query_proj) const;

  // fused [..., d] -> probabilities [...].
  Tensor<T> predict_head(const Tensor<T>& fused) const;

  // Probabilities [N], one per episode; episodes may have different K.
  Tensor<T> forward_batch(std::span<const data::Episode* const> episodes, Mode mode,
                          util::Rng& rng) const;
  // Scalar probability.
  Tensor<T> forward(const data::Episode& episode, Mode mode, util::Rng& rng) const;

  // Eval-mode probabilities without building a graph, in chunks of `batch`.
  std::vector<T> predict(std::span<const data::Episode> episodes, std::size_t batch = 32) const;

  // Raw component parameters, exposed for tests and surgery.
  Tensor<T> token_embedding, position_embedding;
  std::vector<EncoderBlock<T>> blocks;
  NormParams<T> final_norm;
  LinearParams<T> p1[3];
  LinearParams<T> p2;
  AttentionParams<T> cross;
  LinearParams<T> head[3];

 private:
  template <typename U>
  friend class ExnetModel;

  struct Unset {};
  ExnetModel(const ModelConfig& cfg, Unset);
  void register_parameters();
  void initialize(std::uint64_t seed);

  Tensor<T> encoder_block(const EncoderBlock<T>& blk, const Tensor<T>& x,
                          std::span<const std::uint8_t> mask, Mode mode, util::Rng& rng) const;

  ModelConfig cfg_;
  std::vector<NamedParameter<T>> params_;
};

extern template class ExnetModel<float>;
extern template class ExnetModel<double>;

}  // namespace exnet::model
