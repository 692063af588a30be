#include "exnet/model/exnet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "exnet/error.hpp"
#include "exnet/numerics/ops.hpp"

namespace exnet::model {

namespace ops = numerics;
using numerics::Shape;

namespace {

template <typename T>
LinearParams<T> make_linear(std::size_t in, std::size_t out) {
  return {Tensor<T>::zeros({in, out}, true), Tensor<T>::zeros({out}, true)};
}

template <typename T>
NormParams<T> make_norm(std::size_t d) {
  return {Tensor<T>::full({d}, T(1), true), Tensor<T>::zeros({d}, true)};
}

template <typename T>
AttentionParams<T> make_attention(std::size_t d) {
  return {make_linear<T>(d, d), make_linear<T>(d, d), make_linear<T>(d, d), make_linear<T>(d, d)};
}

template <typename T>
Tensor<T> apply(const LinearParams<T>& p, const Tensor<T>& x) {
  return ops::linear(x, p.w, p.b);
}

template <typename T>
Tensor<T> apply(const NormParams<T>& p, const Tensor<T>& x, double eps) {
  return ops::layer_norm(x, p.gamma, p.beta, static_cast<T>(eps));
}

// Standard normal truncated to [-2, 2], Box-Muller on the raw engine.
double truncated_normal(util::Rng& rng) {
  for (;;) {
    const double u1 = 1.0 - util::uniform01(rng);
    const double u2 = util::uniform01(rng);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    if (std::abs(z) <= 2.0) return z;
  }
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::size_t real_length(const text::TokenSequence& seq) {
  std::size_t n = seq.mask.size();
  while (n > 0 && seq.mask[n - 1] == 0) --n;
  return n;
}

}  // namespace

template <typename T>
ExnetModel<T>::ExnetModel(const ModelConfig& cfg, Unset) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t d = cfg_.d_model, f = cfg_.ff_mult * d, h = cfg_.head_width();
  token_embedding = Tensor<T>::zeros({cfg_.vocab_size, d}, true);
  position_embedding = Tensor<T>::zeros({cfg_.max_len, d}, true);
  for (std::size_t i = 0; i < cfg_.n_layers; ++i) {
    blocks.push_back({make_norm<T>(d), make_attention<T>(d), make_norm<T>(d), make_linear<T>(d, f),
                      make_linear<T>(f, d)});
  }
  final_norm = make_norm<T>(d);
  for (auto& p : p1) p = make_linear<T>(d, d);
  p2 = make_linear<T>(d, d);
  cross = make_attention<T>(d);
  head[0] = make_linear<T>(d, h);
  head[1] = make_linear<T>(h, h);
  head[2] = make_linear<T>(h, 1);
  register_parameters();
}

template <typename T>
ExnetModel<T>::ExnetModel(const ModelConfig& cfg, std::uint64_t seed) : ExnetModel(cfg, Unset{}) {
  initialize(seed);
}

template <typename T>
void ExnetModel<T>::register_parameters() {
  params_.clear();
  auto add = [&](std::string name, const Tensor<T>& t) { params_.push_back({std::move(name), t}); };
  auto add_linear = [&](const std::string& name, const LinearParams<T>& p) {
    add(name + ".w", p.w);
    add(name + ".b", p.b);
  };
  auto add_norm = [&](const std::string& name, const NormParams<T>& p) {
    add(name + ".gamma", p.gamma);
    add(name + ".beta", p.beta);
  };
  auto add_attention = [&](const std::string& name, const AttentionParams<T>& p) {
    add_linear(name + ".q", p.q);
    add_linear(name + ".k", p.k);
    add_linear(name + ".v", p.v);
    add_linear(name + ".o", p.o);
  };
  add("embed.token", token_embedding);
  add("embed.position", position_embedding);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string prefix = "encoder." + std::to_string(i);
    add_norm(prefix + ".ln1", blocks[i].ln1);
    add_attention(prefix + ".attn", blocks[i].attn);
    add_norm(prefix + ".ln2", blocks[i].ln2);
    add_linear(prefix + ".ff1", blocks[i].ff1);
    add_linear(prefix + ".ff2", blocks[i].ff2);
  }
  add_norm("encoder.final_norm", final_norm);
  for (std::size_t i = 0; i < 3; ++i) add_linear("p1." + std::to_string(i), p1[i]);
  add_linear("p2", p2);
  add_attention("cross", cross);
  for (std::size_t i = 0; i < 3; ++i) add_linear("head." + std::to_string(i), head[i]);
}

template <typename T>
void ExnetModel<T>::initialize(std::uint64_t seed) {
  util::Rng rng(seed);
  for (auto& p : params_) {
    auto values = p.tensor.mutable_data();
    if (ends_with(p.name, ".b") || ends_with(p.name, ".beta")) {
      std::fill(values.begin(), values.end(), T(0));
    } else if (ends_with(p.name, ".gamma")) {
      std::fill(values.begin(), values.end(), T(1));
    } else {
      double std = cfg_.init_std;
      if (cfg_.init == InitScheme::kFanIn && ends_with(p.name, ".w")) {
        std = 1.0 / std::sqrt(static_cast<double>(p.tensor.shape()[0]));
      }
      for (auto& v : values) v = static_cast<T>(std * truncated_normal(rng));
    }
  }
}

template <typename T>
std::size_t ExnetModel<T>::num_parameters() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

template <typename T>
template <typename U>
ExnetModel<U> ExnetModel<T>::cast() const {
  ExnetModel<U> out(cfg_, typename ExnetModel<U>::Unset{});
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto src = params_[i].tensor.data();
    auto dst = out.params_[i].tensor.mutable_data();
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = static_cast<U>(src[j]);
  }
  return out;
}

template <typename T>
void ExnetModel<T>::load_values(const std::vector<NamedParameter<T>>& src) {
  std::unordered_map<std::string, const Tensor<T>*> by_name;
  for (const auto& p : src) by_name[p.name] = &p.tensor;
  for (auto& p : params_) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw ShapeError("missing parameter '" + p.name + "'");
    if (it->second->shape() != p.tensor.shape()) {
      throw ShapeError("parameter '" + p.name + "' has shape " +
                       numerics::shape_to_string(it->second->shape()) + ", expected " +
                       numerics::shape_to_string(p.tensor.shape()));
    }
    auto values = it->second->data();
    std::copy(values.begin(), values.end(), p.tensor.mutable_data().begin());
  }
}

template <typename T>
Tensor<T> ExnetModel<T>::encoder_block(const EncoderBlock<T>& blk, const Tensor<T>& x,
                                       std::span<const std::uint8_t> mask, Mode mode,
                                       util::Rng& rng) const {
  const auto h = apply(blk.ln1, x, cfg_.layer_norm_eps);
  const auto a = ops::attention(apply(blk.attn.q, h), apply(blk.attn.k, h), apply(blk.attn.v, h),
                                cfg_.n_heads, mask);
  const auto x1 =
      ops::add(x, ops::dropout(apply(blk.attn.o, a), cfg_.encoder_dropout, mode, rng));
  const auto h2 = apply(blk.ln2, x1, cfg_.layer_norm_eps);
  const auto ff = apply(blk.ff2, ops::gelu(apply(blk.ff1, h2)));
  return ops::add(x1, ops::dropout(ff, cfg_.encoder_dropout, mode, rng));
}

template <typename T>
Tensor<T> ExnetModel<T>::encode(std::span<const text::TokenSequence* const> seqs, Mode mode,
                                util::Rng& rng) const {
  if (seqs.empty()) throw ValidationError("sequences", "nothing to encode");
  const std::size_t m = seqs.size(), d = cfg_.d_model;
  std::size_t len = 1;
  for (const auto* s : seqs) {
    if (s->ids.size() > cfg_.max_len || s->mask.size() != s->ids.size()) {
      throw ValidationError("sequence", "length " + std::to_string(s->ids.size()) +
                                            " does not fit max_len " +
                                            std::to_string(cfg_.max_len));
    }
    if (s->mask.empty() || s->mask[0] == 0) {
      throw ValidationError("sequence", "position 0 must be a real token");
    }
    len = std::max(len, real_length(*s));
  }

  std::vector<std::size_t> ids(m * len), positions(m * len);
  std::vector<std::uint8_t> mask(m * len, 0);
  std::vector<std::vector<std::size_t>> groups(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& s = *seqs[i];
    for (std::size_t t = 0; t < len; ++t) {
      const bool real = t < s.ids.size() && s.mask[t] != 0;
      const auto id = t < s.ids.size() ? s.ids[t] : text::kPad;
      if (id < 0 || static_cast<std::size_t>(id) >= cfg_.vocab_size) {
        throw ValidationError("token_id", "id " + std::to_string(id) + " outside vocabulary of " +
                                              std::to_string(cfg_.vocab_size));
      }
      ids[i * len + t] = real ? static_cast<std::size_t>(id) : 0;
      positions[i * len + t] = t;
      mask[i * len + t] = real ? 1 : 0;
      if (real) groups[i].push_back(i * len + t);
    }
  }

  auto x = ops::add(ops::gather_rows<T>(token_embedding, ids),
                    ops::gather_rows<T>(position_embedding, positions));
  x = ops::reshape(x, {m, len, d});
  for (const auto& blk : blocks) x = encoder_block(blk, x, mask, mode, rng);
  x = ops::reshape(x, {m * len, d});

  Tensor<T> pooled;
  if (cfg_.pooling == Pooling::kCls) {
    std::vector<std::size_t> cls(m);
    for (std::size_t i = 0; i < m; ++i) cls[i] = i * len;
    pooled = ops::gather_rows<T>(x, cls);
  } else {
    pooled = ops::group_mean_rows<T>(x, groups);
  }
  return apply(final_norm, pooled, cfg_.layer_norm_eps);
}

template <typename T>
Tensor<T> ExnetModel<T>::encode(const text::TokenSequence& seq, Mode mode, util::Rng& rng) const {
  const text::TokenSequence* one[] = {&seq};
  return ops::reshape(encode(one, mode, rng), {cfg_.d_model});
}

template <typename T>
Tensor<T> ExnetModel<T>::project_support(const Tensor<T>& e, Mode mode, util::Rng& rng) const {
  if (e.rank() == 0 || e.numel() == 0) throw ValidationError("support", "empty support set");
  auto h = ops::gelu(apply(p1[0], e));
  h = ops::gelu(apply(p1[1], h));
  h = ops::dropout(h, cfg_.projector_dropout, mode, rng);
  return ops::gelu(apply(p1[2], h));
}

template <typename T>
Tensor<T> ExnetModel<T>::project_query(const Tensor<T>& e) const {
  return ops::gelu(apply(p2, e));
}

template <typename T>
Tensor<T> ExnetModel<T>::cross_attend(const Tensor<T>& support_proj, const Tensor<T>& query_proj,
                                      std::span<const std::uint8_t> support_mask) const {
  const std::size_t d = cfg_.d_model;
  if (support_proj.rank() != 3 || query_proj.rank() != 2 ||
      support_proj.shape()[0] != query_proj.shape()[0] || support_proj.shape()[2] != d ||
      query_proj.shape()[1] != d) {
    throw ShapeError("cross_attend: expected [N, K, " + std::to_string(d) + "] and [N, " +
                     std::to_string(d) + "], got " + numerics::shape_to_string(support_proj.shape()) +
                     " and " + numerics::shape_to_string(query_proj.shape()));
  }
  const std::size_t n = query_proj.shape()[0];
  if (support_proj.shape()[1] == 0) throw ValidationError("support", "K must be at least 1");
  const auto q = ops::reshape(apply(cross.q, query_proj), {n, 1, d});
  const auto a = ops::attention(q, apply(cross.k, support_proj), apply(cross.v, support_proj),
                                cfg_.n_heads, support_mask);
  return ops::add(query_proj, apply(cross.o, ops::reshape(a, {n, d})));
}

template <typename T>
Tensor<T> ExnetModel<T>::cross_attend_one(const Tensor<T>& support_proj,
                                          const Tensor<T>& query_proj) const {
  const std::size_t d = cfg_.d_model;
  if (support_proj.rank() != 2) {
    throw ShapeError("cross_attend: expected [K, d] supports, got " +
                     numerics::shape_to_string(support_proj.shape()));
  }
  const std::size_t k = support_proj.shape()[0];
  auto fused = cross_attend(ops::reshape(support_proj, {1, k, d}), ops::reshape(query_proj, {1, d}));
  return ops::reshape(fused, {d});
}

template <typename T>
Tensor<T> ExnetModel<T>::predict_head(const Tensor<T>& fused) const {
  auto h = ops::gelu(apply(head[0], fused));
  h = ops::gelu(apply(head[1], h));
  auto p = ops::sigmoid(apply(head[2], h));
  Shape shape(fused.shape().begin(), fused.shape().end() - 1);
  return ops::reshape(p, std::move(shape));
}

template <typename T>
Tensor<T> ExnetModel<T>::forward_batch(std::span<const data::Episode* const> episodes, Mode mode,
                                       util::Rng& rng) const {
  if (episodes.empty()) throw ValidationError("episodes", "empty batch");
  const std::size_t n = episodes.size(), d = cfg_.d_model;
  std::vector<const text::TokenSequence*> seqs;
  std::size_t k_max = 0, total_k = 0;
  for (const auto* ep : episodes) {
    if (ep->supports.empty()) throw ValidationError("support", "episode has no support examples");
    seqs.push_back(&ep->query);
    k_max = std::max(k_max, ep->supports.size());
    total_k += ep->supports.size();
  }
  for (const auto* ep : episodes)
    for (const auto& s : ep->supports) seqs.push_back(&s);

  const auto emb = encode(seqs, mode, rng);
  std::vector<std::size_t> query_rows(n), support_rows(total_k);
  for (std::size_t i = 0; i < n; ++i) query_rows[i] = i;
  for (std::size_t j = 0; j < total_k; ++j) support_rows[j] = n + j;
  const auto y = project_query(ops::gather_rows<T>(emb, query_rows));
  const auto s = project_support(ops::gather_rows<T>(emb, support_rows), mode, rng);

  std::vector<std::size_t> slots(n * k_max, 0);
  std::vector<std::uint8_t> mask(n * k_max, 0);
  bool ragged = false;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = episodes[i]->supports.size();
    ragged |= k != k_max;
    for (std::size_t j = 0; j < k; ++j) {
      slots[i * k_max + j] = offset + j;
      mask[i * k_max + j] = 1;
    }
    offset += k;
  }
  Tensor<T> stacked = ragged ? ops::reshape(ops::gather_rows<T>(s, slots), {n, k_max, d})
                             : ops::reshape(s, {n, k_max, d});
  const auto fused = cross_attend(stacked, y, ragged ? std::span<const std::uint8_t>(mask)
                                                     : std::span<const std::uint8_t>());
  return predict_head(fused);
}

template <typename T>
Tensor<T> ExnetModel<T>::forward(const data::Episode& episode, Mode mode, util::Rng& rng) const {
  const data::Episode* one[] = {&episode};
  return ops::reshape(forward_batch(one, mode, rng), {});
}

template <typename T>
std::vector<T> ExnetModel<T>::predict(std::span<const data::Episode> episodes,
                                      std::size_t batch) const {
  numerics::NoGradGuard guard;
  util::Rng unused(0);
  std::vector<T> out;
  out.reserve(episodes.size());
  batch = std::max<std::size_t>(batch, 1);
  for (std::size_t start = 0; start < episodes.size(); start += batch) {
    const std::size_t end = std::min(episodes.size(), start + batch);
    std::vector<const data::Episode*> chunk;
    for (std::size_t i = start; i < end; ++i) chunk.push_back(&episodes[i]);
    const auto p = forward_batch(chunk, Mode::kEval, unused);
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  return out;
}

template class ExnetModel<float>;
template class ExnetModel<double>;
template ExnetModel<double> ExnetModel<float>::cast<double>() const;
template ExnetModel<float> ExnetModel<double>::cast<float>() const;
template ExnetModel<float> ExnetModel<float>::cast<float>() const;
template ExnetModel<double> ExnetModel<double>::cast<double>() const;

}  // namespace exnet::model
