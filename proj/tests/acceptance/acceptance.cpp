// Acceptance run: one PASS/FAIL line per primary criterion. Exit status is
// the number of failures (0 when everything passes).
//
//   exnet_acceptance [--only name[,name...]]

#include <malloc.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "exnet/data/dataset.hpp"
#include "exnet/data/episode.hpp"
#include "exnet/data/synthetic.hpp"
#include "exnet/model/checkpoint.hpp"
#include "exnet/model/exnet.hpp"
#include "exnet/numerics/ops.hpp"
#include "exnet/service/http_server.hpp"
#include "exnet/service/service.hpp"
#include "exnet/text/tokenizer.hpp"
#include "exnet/training/benchmark.hpp"
#include "exnet/training/metrics.hpp"
#include "exnet/training/trainer.hpp"
#include "exnet/util/hash.hpp"
#include "httplib.h"
#include "json.hpp"
#include "model_fixtures.hpp"
#include "test_util.hpp"

namespace {

using namespace exnet;
using numerics::Mode;
using numerics::Tensor;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared between criteria: the model trained by the learnability run.
struct Trained {
  text::Vocab vocab{std::vector<std::string>{"[PAD]", "[UNK]", "[CLS]", "[SEP]"}};
  std::optional<model::ExnetModel<float>> model;
  data::SupportPool pool;
  std::vector<std::string> labels;
};

Trained g_trained;

data::MultiClassDataset bundled(const std::string& name) {
  return data::load_jsonl(std::string(EXNET_DATA) + "/" + name);
}

// ---------------------------------------------------------------- gradients

Outcome gradient_suite() {
  using exnet::testing::check_gradients;
  using exnet::testing::project;
  using exnet::testing::random_tensor;
  using namespace numerics;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::vector<std::pair<std::string, double>> results;
  auto run = [&](const std::string& name, auto&& loss, std::vector<Tensor<double>*> inputs) {
    results.emplace_back(name, check_gradients(loss, std::move(inputs)).max_rel_error);
  };

  auto a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng), c = random_tensor({3, 4}, rng);
  run("add", [&] { return project(add(a, b)); }, {&a, &b});
  run("mul", [&] { return project(mul(a, b)); }, {&a, &b});
  run("scale", [&] { return project(scale(a, -1.7)); }, {&a});
  run("add_n", [&] { std::vector<Tensor<double>> t{a, b, c}; return project(add_n<double>(t)); }, {&a, &b, &c});
  run("sum", [&] { return sum(mul(a, b)); }, {&a, &b});
  run("mean", [&] { return mean(mul(a, a)); }, {&a});
  run("reshape", [&] { return project(reshape(a, {4, 3})); }, {&a});
  auto x = random_tensor({2, 3, 5}, rng), w = random_tensor({5, 4}, rng), bias = random_tensor({4}, rng);
  run("matmul", [&] { return project(matmul(x, w)); }, {&x, &w});
  run("linear", [&] { return project(linear(x, w, bias)); }, {&x, &w, &bias});
  auto z = random_tensor({4, 5}, rng, -4, 4);
  run("gelu", [&] { return project(gelu(z)); }, {&z});
  run("sigmoid", [&] { return project(sigmoid(z)); }, {&z});
  run("softmax", [&] { return project(softmax(z, 1)); }, {&z});
  auto g = random_tensor({5}, rng, 0.5, 1.5), beta = random_tensor({5}, rng);
  run("layer_norm", [&] { return project(layer_norm(z, g, beta, 1e-5)); }, {&z, &g, &beta});
  run("dropout", [&] { std::mt19937_64 m(3); return project(dropout(z, 0.3, Mode::kTrain, m)); }, {&z});
  const std::vector<std::size_t> rows{3, 0, 3};
  run("gather_rows", [&] { return project(gather_rows<double>(z, rows)); }, {&z});
  const std::vector<std::vector<std::size_t>> groups{{0, 1}, {2, 3}, {1}};
  run("group_mean_rows", [&] { return project(group_mean_rows<double>(z, groups)); }, {&z});
  auto q = random_tensor({2, 3, 4}, rng), k = random_tensor({2, 5, 4}, rng), v = random_tensor({2, 5, 4}, rng);
  const std::vector<std::uint8_t> mask{1, 1, 0, 1, 0, 1, 1, 1, 1, 1};
  run("attention", [&] { return project(attention<double>(q, k, v, 2, mask)); }, {&q, &k, &v});
  auto p = Tensor<double>::from_data({3}, {0.2, 0.6, 0.9}, true);
  const std::vector<double> y{1, 0, 1};
  run("bce", [&] { return mean_binary_cross_entropy<double>(p, y, 1e-7); }, {&p});

  // Composed forward on the micro configuration, every parameter element.
  auto vocab = exnet::testing::fixture_vocab();
  auto cfg = exnet::testing::micro_config(vocab.size());
  model::ExnetModel<double> m(cfg, 11);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (auto& prm : m.parameters())
    for (auto& val : prm.tensor.mutable_data()) val = u(rng);
  const auto e1 = exnet::testing::random_episode(rng, vocab, 2, cfg.max_len);
  const auto e2 = exnet::testing::random_episode(rng, vocab, 2, cfg.max_len);
  const data::Episode* batch[] = {&e1, &e2};
  const std::vector<double> targets{1.0, 0.0};
  std::vector<Tensor<double>*> params;
  for (auto& prm : m.parameters()) params.push_back(&prm.tensor);
  run("exnet_forward",
      [&] {
        util::Rng drop(5);
        return mean_binary_cross_entropy<double>(m.forward_batch(batch, Mode::kTrain, drop), targets, 1e-7);
      },
      params);

  const double elapsed = seconds_since(t0);
  auto worst = std::max_element(results.begin(), results.end(),
                                [](const auto& l, const auto& r) { return l.second < r.second; });
  return {worst->second < 1e-4 && elapsed < 60.0,
          fmt("%zu checks, worst %s rel err %.2e (limit 1e-4), %.1f s (limit 60 s)", results.size(),
              worst->first.c_str(), worst->second, elapsed)};
}

// ------------------------------------------------------------- learnability

double nearest_centroid_accuracy(const data::MultiClassDataset& ds) {
  std::map<std::string, std::map<std::string, double>> centroid;
  for (const auto& r : ds.records)
    for (const auto& t : text::tokenize(r.text)) centroid[r.label][t] += 1.0;
  for (auto& [label, vec] : centroid) {
    double norm = 0;
    for (const auto& [t, c] : vec) norm += c * c;
    for (auto& [t, c] : vec) c /= std::sqrt(norm);
  }
  std::size_t correct = 0;
  for (const auto& r : ds.records) {
    std::map<std::string, double> bag;
    for (const auto& t : text::tokenize(r.text)) bag[t] += 1.0;
    std::string best;
    double best_score = -1;
    for (const auto& [label, vec] : centroid) {
      double s = 0;
      for (const auto& [t, c] : bag)
        if (auto it = vec.find(t); it != vec.end()) s += c * it->second;
      if (s > best_score) best_score = s, best = label;
    }
    correct += best == r.label;
  }
  return static_cast<double>(correct) / ds.records.size();
}

Outcome learnability() {
  const auto t0 = Clock::now();
  const auto ds = bundled("synthetic-train.jsonl");
  const double oracle = nearest_centroid_accuracy(ds);
  if (oracle != 1.0) return {false, fmt("nearest-centroid oracle accuracy %.4f, task not separable", oracle)};

  std::vector<std::string> corpus;
  for (const auto& r : ds.records) corpus.push_back(r.text);
  for (const auto& l : ds.label_set) corpus.push_back(l);
  g_trained.vocab = text::build_vocab(corpus, 8000);
  g_trained.pool = data::build_support_pool(ds);
  g_trained.labels = ds.label_set;
  const std::vector<data::MultiClassDataset> sets{ds};
  auto cfg = model::preset_config("desk", g_trained.vocab.size());
  g_trained.model.emplace(cfg, 0);
  data::EpisodeStream stream(training::episode_tasks(sets, 0), 2, 8, g_trained.vocab, cfg.max_len);

  util::Rng held_rng(util::mix_seed(12345));
  std::vector<data::Episode> held_in;
  for (int i = 0; i < 64; ++i) held_in.push_back(stream.next(held_rng));

  training::TrainConfig tc;
  tc.lr = 1e-3;
  tc.batch_size = 64;
  tc.seed = 0;
  numerics::AdamWState<float> opt;
  double bce = training::mean_bce(*g_trained.model, held_in);
  while (bce >= 0.05 && opt.step < 2000) {
    tc.steps = opt.step + 50;
    const auto r = training::train(*g_trained.model, opt, training::stream_source(stream), tc);
    if (r.stop == training::StopReason::kNonFinite) return {false, r.message};
    bce = training::mean_bce(*g_trained.model, held_in);
  }
  const double elapsed = seconds_since(t0);
  return {bce < 0.05 && elapsed < 300.0,
          fmt("oracle accuracy 1.0; held-in BCE %.4f after %llu steps (limit 0.05, 2000), %.1f s (limit 300 s)",
              bce, static_cast<unsigned long long>(opt.step), elapsed)};
}

// ------------------------------------------------------- order and K claims

data::Episode fixture_episode(std::mt19937_64& rng, std::size_t k) {
  const auto& labels = g_trained.labels;
  const auto& label = labels[rng() % labels.size()];
  const auto& texts = g_trained.pool.at(label);
  std::vector<std::size_t> idx(texts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::string> supports;
  for (std::size_t i = 0; i < k; ++i) supports.push_back(texts[idx[i % idx.size()]]);
  const bool yes = rng() % 2;
  const auto& query_label = yes ? label : labels[(std::find(labels.begin(), labels.end(), label) - labels.begin() + 1 +
                                                   rng() % (labels.size() - 1)) % labels.size()];
  const auto& qtexts = g_trained.pool.at(query_label);
  return data::make_episode(qtexts[rng() % qtexts.size()], label, std::move(supports), yes, g_trained.vocab,
                            g_trained.model->config().max_len);
}

Outcome order_invariance() {
  if (!g_trained.model) return {false, "no trained model"};
  std::mt19937_64 rng(77);
  double worst = 0;
  for (int e = 0; e < 100; ++e) {
    const auto base = fixture_episode(rng, 2 + rng() % 7);
    std::vector<data::Episode> variants{base};
    for (int p = 0; p < 10; ++p) {
      std::vector<std::string> s = base.support_texts;
      std::shuffle(s.begin(), s.end(), rng);
      variants.push_back(data::make_episode(base.query_text, base.label, std::move(s), base.target,
                                            g_trained.vocab, g_trained.model->config().max_len));
    }
    const auto probs = g_trained.model->predict(variants);
    for (std::size_t i = 1; i < probs.size(); ++i)
      worst = std::max(worst, static_cast<double>(std::abs(probs[i] - probs[0])));
  }
  return {worst < 1e-6, fmt("100 episodes x 10 permutations, max |dp| %.3g (limit 1e-6)", worst)};
}

Outcome unlimited_k() {
  if (!g_trained.model) return {false, "no trained model"};
  std::mt19937_64 rng(78);
  std::string detail;
  bool ok = true;
  for (std::size_t k : {1, 32}) {
    std::vector<data::Episode> eps;
    for (int i = 0; i < 20; ++i) eps.push_back(fixture_episode(rng, k));
    try {
      const auto probs = g_trained.model->predict(eps);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        ok = ok && std::isfinite(probs[i]) && probs[i] >= 0.0f && probs[i] <= 1.0f;
        correct += (probs[i] >= 0.5f) == (eps[i].target == 1);
      }
      detail += fmt("K=%zu: %zu/20 correct; ", k, correct);
    } catch (const std::exception& e) {
      ok = false;
      detail += fmt("K=%zu raised: %s; ", k, e.what());
    }
  }
  return {ok, detail + "model trained with K in [2,8]"};
}

// ------------------------------------------------------- few-shot transfer

Outcome few_shot_generalization() {
  const auto t0 = Clock::now();
  const training::BenchmarkSpec spec;
  std::map<std::pair<bool, std::size_t>, double> total;
  std::string per_seed;
  const int seeds = 5;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto clean = training::make_benchmark(spec, seed, 0.0);
    const auto noisy = training::make_benchmark(spec, seed, 0.2);
    const auto cfg = model::preset_config("desk", clean.vocab.size());
    model::ExnetModel<float> m(cfg, seed);
    data::EpisodeStream stream(training::episode_tasks(clean.train, seed), 2, 8, clean.vocab, cfg.max_len);
    training::TrainConfig tc;
    tc.lr = 1e-3;
    tc.batch_size = 64;
    tc.steps = 1500;
    tc.warmup_steps = 200;
    tc.seed = seed;
    numerics::AdamWState<float> opt;
    const auto r = training::train(m, opt, training::stream_source(stream), tc);
    if (r.stop == training::StopReason::kNonFinite) return {false, fmt("seed %d: %s", seed, r.message.c_str())};
    per_seed += fmt("\n    seed %d:", seed);
    for (bool noise : {false, true}) {
      for (std::size_t k : {2, 4, 8}) {
        const auto e = training::evaluate_datasets(m, (noise ? noisy : clean).heldout, k, seed, clean.vocab);
        total[{noise, k}] += e.f1;
        per_seed += fmt(" %s K=%zu %.3f", noise ? "noisy" : "clean", k, e.f1);
      }
    }
    std::fprintf(stderr, "few-shot seed %d done, %.0f s%s\n", seed, seconds_since(t0), per_seed.c_str());
  }
  for (auto& [key, v] : total) v /= seeds;
  const double c2 = total[{false, 2}], c4 = total[{false, 4}], c8 = total[{false, 8}];
  const double n2 = total[{true, 2}], n4 = total[{true, 4}], n8 = total[{true, 8}];
  const bool ok = c8 >= 0.90 && n8 >= 0.75 && c8 >= c2 && n8 >= n2;
  return {ok, fmt("mean F1 clean K2/4/8 %.3f/%.3f/%.3f (K8 >= 0.90), noisy %.3f/%.3f/%.3f (K8 >= 0.75), "
                  "K8 >= K2 both; %d seeds, %.0f s",
                  c2, c4, c8, n2, n4, n8, seeds, seconds_since(t0))};
}

// ------------------------------------------------------------ metric oracle

Outcome metric_oracle() {
  std::size_t mismatches = 0, cases = 0;
  for (unsigned bits = 0; bits < 1024; ++bits, ++cases) {
    std::vector<int> pred(5), gold(5);
    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (int i = 0; i < 5; ++i) {
      pred[i] = (bits >> i) & 1;
      gold[i] = (bits >> (5 + i)) & 1;
      tp += pred[i] && gold[i];
      fp += pred[i] && !gold[i];
      fn += !pred[i] && gold[i];
      tn += !pred[i] && !gold[i];
    }
    const double f1 = tp == 0 ? 0.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    const double precision = tp + fp == 0 ? 0.0 : tp / static_cast<double>(tp + fp);
    const double recall = tp + fn == 0 ? 0.0 : tp / static_cast<double>(tp + fn);
    const auto r = training::f1_score(pred, gold);
    if (r.f1 != f1 || r.precision != precision || r.recall != recall || static_cast<long>(r.tp) != tp ||
        static_cast<long>(r.fp) != fp || static_cast<long>(r.fn) != fn || static_cast<long>(r.tn) != tn)
      ++mismatches;
  }
  return {mismatches == 0, fmt("%zu prediction/gold pairs, %zu mismatches (exact equality)", cases, mismatches)};
}

// ------------------------------------------------------------ data pipeline

std::string pipeline_digest(const std::vector<data::MultiClassDataset>& sets, std::uint64_t seed) {
  std::vector<std::string> corpus;
  for (const auto& ds : sets)
    for (const auto& r : ds.records) corpus.push_back(r.text);
  const auto vocab = text::build_vocab(corpus, 8000);
  std::string all = vocab.serialize();
  for (const auto& t : training::episode_tasks(sets, seed)) all += data::instances_to_jsonl(t.instances);
  for (const auto& ds : sets) {
    std::size_t smallest = ds.records.size();
    for (const auto& [label, n] : ds.label_counts()) smallest = std::min(smallest, n);
    for (std::size_t k : {1, 2, 4, 8})
      if (k <= smallest)
        all += data::episodes_to_jsonl(data::make_eval_episodes(ds, ds, k, seed, vocab, 64).episodes);
  }
  return util::sha256_hex(all);
}

Outcome data_pipeline() {
  std::vector<data::MultiClassDataset> fixtures{bundled("synthetic-train.jsonl"), bundled("synthetic-heldout.jsonl"),
                                                data::make_dataset("toy", {{"a b", "x"}, {"a c", "x"}, {"b c", "x"},
                                                                           {"d e", "y"}, {"d f", "y"}, {"e f", "z"},
                                                                           {"e g", "z"}, {"f g", "z"}})};
  const auto bench = training::make_benchmark(training::BenchmarkSpec{}, 3, 0.2);
  fixtures.insert(fixtures.end(), bench.train.begin(), bench.train.begin() + 8);
  fixtures.insert(fixtures.end(), bench.heldout.begin(), bench.heldout.end());

  std::size_t unbalanced = 0, split_labels = 0, runs = 0;
  for (const auto& ds : fixtures) {
    for (std::uint64_t seed : {0, 1, 2}) {
      const auto inst = data::binarize(ds, seed);
      const auto yes = std::count_if(inst.begin(), inst.end(),
                                     [](const auto& i) { return i.answer == data::Answer::kYes; });
      unbalanced += 2 * yes != static_cast<long>(inst.size());
    }
    const auto vocab = text::build_vocab(std::vector<std::string>{"a"}, 100);
    for (std::size_t k : {1, 2}) {
      for (std::uint64_t seed : {0, 1}) {
        const auto ev = data::make_eval_episodes(ds, ds, k, seed, vocab, 64);
        std::map<std::string, std::set<std::string>> hashes;
        for (const auto& e : ev.episodes) hashes[e.label].insert(data::support_set_hash(e.support_texts));
        for (const auto& [label, h] : hashes) split_labels += h.size() != 1;
        ++runs;
      }
    }
  }
  bool identical = true;
  for (std::uint64_t seed : {0, 7})
    identical = identical && pipeline_digest(fixtures, seed) == pipeline_digest(fixtures, seed);
  const bool differs = pipeline_digest(fixtures, 0) != pipeline_digest(fixtures, 7);
  return {unbalanced == 0 && split_labels == 0 && identical && differs,
          fmt("%zu fixtures: %zu unbalanced binarizations, %zu labels with more than one support set over %zu eval "
              "runs, reruns %s, different seeds %s",
              fixtures.size(), unbalanced, split_labels, runs, identical ? "bit-identical" : "DIFFER",
              differs ? "differ" : "IDENTICAL")};
}

// --------------------------------------------------------------- checkpoint

Outcome checkpoint_round_trip() {
  if (!g_trained.model) return {false, "no trained model"};
  const auto path = std::filesystem::temp_directory_path() / ("exnet-accept-" + std::to_string(::getpid()) + ".ckpt");
  const auto id = model::save_checkpoint(path, *g_trained.model, g_trained.vocab.hash());
  const auto ck = model::load_checkpoint(path, g_trained.vocab.hash());
  std::filesystem::remove(path);
  std::mt19937_64 rng(79);
  std::vector<data::Episode> eps;
  for (int i = 0; i < 100; ++i) eps.push_back(fixture_episode(rng, 1 + rng() % 12));
  const auto a = g_trained.model->predict(eps), b = ck.model.predict(eps);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += std::memcmp(&a[i], &b[i], sizeof(float)) != 0;
  return {differ == 0 && ck.model_id == id,
          fmt("100 episodes, %zu predictions differ bitwise, model id %s", differ,
              ck.model_id == id ? "stable" : "CHANGED")};
}

// ------------------------------------------------------------------ service

Outcome service_contract() {
  if (!g_trained.model) return {false, "no trained model"};
  service::InferenceService svc;
  svc.publish(std::make_shared<const service::Snapshot>(
      service::Snapshot{*g_trained.model, g_trained.vocab, model::model_id(*g_trained.model, g_trained.vocab.hash())}));
  service::HttpServer server(svc);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  auto post = [&](const std::string& path, const json& body) {
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res || res->status != 200) throw std::runtime_error(path + " failed");
    return json::parse(res->body);
  };

  // classify vs predict
  std::size_t field_mismatch = 0, compared = 0;
  std::mt19937_64 rng(80);
  for (int trial = 0; trial < 10; ++trial) {
    json labels = json::object();
    for (std::size_t li = 0; li < 3; ++li) {
      const auto& label = g_trained.labels[(trial + li) % g_trained.labels.size()];
      labels[label] = json::array();
      const auto& pool = g_trained.pool.at(label);
      for (int s = 0; s < 2 + trial % 5; ++s) labels[label].push_back(pool[(trial + s) % pool.size()]);
    }
    const std::string text = g_trained.pool.at(g_trained.labels[trial % g_trained.labels.size()])[5];
    const auto cls = post("/classify", {{"labels", labels}, {"text", text}});
    for (const auto& [label, support] : labels.items()) {
      const auto single = post("/predict", {{"label", label}, {"support", support}, {"text", text}});
      const auto& shared = cls.at("results").at(label);
      for (const auto& [field, value] : single.items()) {
        ++compared;
        field_mismatch += !shared.contains(field) || shared.at(field) != value;
      }
      field_mismatch += cls.at("scores").at(label) != single.at("probability");
    }
  }

  // permuted supports over the wire
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto e = fixture_episode(rng, 2 + trial % 7);
    json body{{"label", e.label}, {"support", e.support_texts}, {"text", e.query_text}};
    const double base = post("/predict", body).at("probability");
    for (int p = 0; p < 5; ++p) {
      std::shuffle(e.support_texts.begin(), e.support_texts.end(), rng);
      body["support"] = e.support_texts;
      worst = std::max(worst, std::abs(post("/predict", body).at("probability").get<double>() - base));
    }
  }
  server.stop();

  // latency with the S preset
  service::InferenceService s_svc;
  auto s_cfg = model::preset_config("s", g_trained.vocab.size());
  model::ExnetModel<float> s_model(s_cfg, 1);
  s_svc.publish(std::make_shared<const service::Snapshot>(
      service::Snapshot{std::move(s_model), g_trained.vocab, "s-preset"}));
  service::HttpServer s_server(s_svc);
  const int s_port = s_server.start("127.0.0.1", 0);
  httplib::Client s_client("127.0.0.1", s_port);
  double slowest = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = fixture_episode(rng, 1 + trial % 8);
    const json body{{"label", e.label}, {"support", e.support_texts}, {"text", e.query_text}};
    const auto t0 = Clock::now();
    auto res = s_client.Post("/predict", body.dump(), "application/json");
    const double ms = seconds_since(t0) * 1000;
    if (!res || res->status != 200) return {false, "S preset predict failed"};
    slowest = std::max(slowest, ms);
  }
  s_server.stop();

  return {field_mismatch == 0 && worst < 1e-6 && slowest < 200.0,
          fmt("classify/predict: %zu of %zu shared fields differ; permuted supports max |dp| %.3g (limit 1e-6); "
              "S preset predict worst %.1f ms over 20 requests, K<=8 (limit 200 ms)",
              field_mismatch, compared, worst, slowest)};
}

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  std::set<std::string> only;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--only") {
      std::stringstream list(argv[++i]);
      for (std::string name; std::getline(list, name, ',');) only.insert(name);
    }
  }

  // learnability trains the model that later criteria reuse.
  const std::vector<Criterion> criteria{
      {"gradient-suite", gradient_suite},
      {"learnability", learnability},
      {"order-invariance", order_invariance},
      {"unlimited-k", unlimited_k},
      {"few-shot-generalization", few_shot_generalization},
      {"metric-oracle", metric_oracle},
      {"data-pipeline", data_pipeline},
      {"checkpoint-round-trip", checkpoint_round_trip},
      {"service-contract", service_contract},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const bool selected = only.empty() || only.count(c.name);
    if (!selected && c.name != "learnability") continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!selected) continue;
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
