#include "commands.hpp"

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "exnet/data/dataset.hpp"
#include "exnet/data/episode.hpp"
#include "exnet/data/synthetic.hpp"
#include "exnet/error.hpp"
#include "exnet/model/checkpoint.hpp"
#include "exnet/service/http_server.hpp"
#include "exnet/service/service.hpp"
#include "exnet/training/benchmark.hpp"
#include "exnet/training/evaluate.hpp"
#include "exnet/training/metrics.hpp"
#include "exnet/training/trainer.hpp"
#include "exnet/util/hash.hpp"
#include "run_config.hpp"

namespace exnet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError(path.filename().string(), "cannot read " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
  if (!f) throw Error("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ValidationError(path.filename().string(), "not valid JSON");
  return j;
}

fs::path require_path(const std::string& value, const std::string& field) {
  if (value.empty()) throw ValidationError(field, "required");
  return value;
}

void require_file(const fs::path& path, const std::string& field) {
  if (!fs::is_regular_file(path)) throw ValidationError(field, "no such file: " + path.string());
}

void warn_unused(const RunConfig& rc) {
  for (const auto& key : rc.unused_keys()) std::cerr << "note: config key '" << key << "' is not used by this command\n";
}

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> ks) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

std::string episodes_file(const std::string& dataset, std::size_t k) {
  return dataset + ".k" + std::to_string(k) + ".episodes.jsonl";
}

// Prepared directory: vocab.txt, prepare.json, train/, eval/.
struct Prepared {
  fs::path dir;
  json manifest;
  text::Vocab vocab;
};

Prepared load_prepared(const fs::path& dir) {
  require_file(dir / "prepare.json", "prepared");
  Prepared p{dir, read_json(dir / "prepare.json"), text::Vocab::load(dir / "vocab.txt")};
  if (p.manifest.value("vocab_hash", "") != p.vocab.hash()) {
    throw CheckpointError(CheckpointError::Kind::kIncompatible,
                          "vocab.txt in " + dir.string() + " does not match prepare.json");
  }
  return p;
}

fs::path default_vocab(const std::string& vocab, const fs::path& checkpoint) {
  return vocab.empty() ? checkpoint.parent_path() / "vocab.txt" : fs::path(vocab);
}

}  // namespace

int cmd_prepare(const CLI::App& cmd, const GlobalFlags& g, const PrepareFlags& f) {
  RunConfig rc(cmd, g.config);
  const auto train_paths = rc.get("train", f.train);
  const auto eval_paths = rc.get("eval", f.eval);
  const auto ks = sorted_unique(rc.get("k", f.k));
  const auto vocab_size = rc.get("vocab_size", f.vocab_size);
  const auto seed = rc.get("seed", g.seed);
  const fs::path out = require_path(rc.get("out", g.out), "out");
  warn_unused(rc);
  if (train_paths.empty()) throw ValidationError("train", "at least one training file is required");
  if (!eval_paths.empty() && ks.empty()) throw ValidationError("k", "no K values given");
  if (!ks.empty() && ks.front() == 0) throw ValidationError("k", "K must be at least 1");

  // Everything is computed before the first byte is written.
  std::vector<data::MultiClassDataset> train_sets, eval_sets;
  std::set<std::string> names;
  auto load = [&](const std::string& path, const std::string& field) {
    require_file(path, field);
    auto ds = data::load_jsonl(path);
    if (!names.insert(ds.name).second) throw ValidationError(field, "duplicate dataset name '" + ds.name + "'");
    return ds;
  };
  for (const auto& p : train_paths) train_sets.push_back(load(p, "train"));
  for (const auto& p : eval_paths) eval_sets.push_back(load(p, "eval"));

  std::vector<std::string> corpus;
  for (const auto& ds : train_sets) {
    for (const auto& r : ds.records) corpus.push_back(r.text);
    for (const auto& l : ds.label_set) corpus.push_back(l);
  }
  const auto vocab = text::build_vocab(corpus, vocab_size);
  const auto tasks = training::episode_tasks(train_sets, seed);

  std::map<fs::path, std::string> files;
  files["vocab.txt"] = vocab.serialize();
  json manifest{{"seed", seed}, {"vocab_hash", vocab.hash()}, {"vocab_size", vocab.size()},
                {"train", json::array()}, {"eval", json::array()}};
  for (std::size_t i = 0; i < train_sets.size(); ++i) {
    const auto& ds = train_sets[i];
    const fs::path data_file = fs::path("train") / (ds.name + ".jsonl");
    const fs::path inst_file = fs::path("train") / (ds.name + ".instances.jsonl");
    files[data_file] = data::to_jsonl(ds);
    files[inst_file] = data::instances_to_jsonl(tasks[i].instances);
    manifest["train"].push_back({{"name", ds.name},
                                 {"dataset", data_file.generic_string()},
                                 {"instances", inst_file.generic_string()},
                                 {"records", ds.records.size()},
                                 {"labels", ds.label_set}});
  }
  for (const auto& ds : eval_sets) {
    const fs::path data_file = fs::path("eval") / (ds.name + ".jsonl");
    files[data_file] = data::to_jsonl(ds);
    json entry{{"name", ds.name}, {"dataset", data_file.generic_string()}, {"episodes", json::array()}};
    for (auto k : ks) {
      const auto ev = data::make_eval_episodes(ds, ds, k, seed, vocab, 64);
      const fs::path ep_file = fs::path("eval") / episodes_file(ds.name, k);
      files[ep_file] = data::episodes_to_jsonl(ev.episodes);
      json hashes = json::object();
      for (const auto& [label, supports] : ev.fixed_supports) hashes[label] = data::support_set_hash(supports);
      entry["episodes"].push_back({{"k", k},
                                   {"file", ep_file.generic_string()},
                                   {"n_episodes", ev.episodes.size()},
                                   {"dropped_collisions", ev.dropped_collisions},
                                   {"support_hashes", hashes}});
    }
    manifest["eval"].push_back(entry);
  }
  json digests = json::object();
  for (const auto& [path, content] : files) digests[path.generic_string()] = util::sha256_hex(content);
  manifest["sha256"] = digests;

  fs::create_directories(out / "train");
  if (!eval_sets.empty()) fs::create_directories(out / "eval");
  for (const auto& [path, content] : files) write_file(out / path, content);
  write_file(out / "prepare.json", manifest.dump(2) + "\n");
  rc.write(out / "config.json");

  std::printf("vocabulary: %zu tokens  sha256 %s\n", vocab.size(), vocab.hash().c_str());
  for (std::size_t i = 0; i < train_sets.size(); ++i) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> yes_no;
    for (const auto& inst : tasks[i].instances) {
      auto& c = yes_no[inst.label];
      (inst.answer == data::Answer::kYes ? c.first : c.second)++;
    }
    const auto counts = train_sets[i].label_counts();
    std::printf("\n%s (train)\n  %-24s %8s %6s %6s\n", train_sets[i].name.c_str(), "label", "records", "yes", "no");
    for (const auto& [label, n] : counts) {
      std::printf("  %-24s %8zu %6zu %6zu\n", label.c_str(), n, yes_no[label].first, yes_no[label].second);
    }
  }
  for (const auto& entry : manifest["eval"]) {
    std::printf("\n%s (eval)\n", entry["name"].get<std::string>().c_str());
    for (const auto& e : entry["episodes"]) {
      std::printf("  K=%-3zu episodes %6zu  dropped %zu\n", e["k"].get<std::size_t>(),
                  e["n_episodes"].get<std::size_t>(), e["dropped_collisions"].get<std::size_t>());
    }
  }
  return kOk;
}

int cmd_train(const CLI::App& cmd, const GlobalFlags& g, const TrainFlags& f) {
  RunConfig rc(cmd, g.config);
  const fs::path prepared_dir = require_path(rc.get("prepared", f.prepared), "prepared");
  const fs::path out = require_path(rc.get("out", g.out), "out");
  const auto resume = rc.get("resume", f.resume);
  const auto preset = rc.get("preset", g.preset);
  training::TrainConfig tc;
  tc.lr = rc.get("lr", f.lr);
  tc.batch_size = rc.get("batch_size", f.batch_size);
  tc.steps = rc.get("steps", f.steps);
  tc.k_min = rc.get("k_min", f.k_min);
  tc.k_max = rc.get("k_max", f.k_max);
  tc.seed = rc.get("seed", g.seed);
  tc.checkpoint_every = rc.get("checkpoint_every", f.checkpoint_every);
  tc.eval_every = rc.get("eval_every", f.eval_every);
  tc.weight_decay = rc.get("weight_decay", f.weight_decay);
  tc.warmup_steps = rc.get("warmup_steps", f.warmup_steps);
  tc.patience = rc.get("patience", f.patience);
  const auto max_len = rc.get("max_len", f.max_len);
  const auto pooling = rc.get("pooling", f.pooling);
  const auto init = rc.get("init", f.init);
  const auto log_every = rc.get("log_every", f.log_every);
  warn_unused(rc);
  tc.validate();

  const auto prep = load_prepared(prepared_dir);
  std::vector<data::EpisodeTask> tasks;
  for (const auto& t : prep.manifest.at("train")) {
    auto ds = data::parse_jsonl(read_file(prepared_dir / t.at("dataset").get<std::string>()),
                                t.at("name").get<std::string>());
    tasks.push_back({data::parse_instances_jsonl(read_file(prepared_dir / t.at("instances").get<std::string>())),
                     data::build_support_pool(ds)});
  }

  std::optional<model::ExnetModel<float>> model;
  numerics::AdamWState<float> opt;
  if (!resume.empty()) {
    require_file(resume, "resume");
    auto ck = model::load_checkpoint(resume, prep.vocab.hash());
    model.emplace(std::move(ck.model));
    if (ck.optimizer) opt = std::move(*ck.optimizer);
    opt.step = ck.train_step;
    std::cerr << "resuming from " << resume << " at step " << opt.step << "\n";
  } else {
    auto cfg = model::preset_config(preset, prep.vocab.size());
    if (max_len > 0) cfg.max_len = max_len;
    if (!pooling.empty()) cfg = model::config_from_json([&] { auto j = model::to_json(cfg); j["pooling"] = pooling; return j; }());
    if (!init.empty()) cfg = model::config_from_json([&] { auto j = model::to_json(cfg); j["init"] = init; return j; }());
    model.emplace(cfg, tc.seed);
  }
  const auto& cfg = model->config();
  const std::uint64_t start_step = opt.step;

  // Validation set: every prepared eval dataset at its smallest K.
  std::vector<std::vector<data::Episode>> val_sets;
  for (const auto& e : prep.manifest.at("eval")) {
    if (e.at("episodes").empty()) continue;
    val_sets.push_back(data::parse_episodes_jsonl(
        read_file(prepared_dir / e.at("episodes")[0].at("file").get<std::string>()), prep.vocab, cfg.max_len));
  }

  fs::create_directories(out / "checkpoints");
  auto effective = rc.effective();
  effective["model"] = model::to_json(cfg);
  write_file(out / "config.json", effective.dump(2) + "\n");
  write_file(out / "vocab.txt", prep.vocab.serialize());

  data::EpisodeStream stream(std::move(tasks), tc.k_min, tc.k_max, prep.vocab, cfg.max_len);
  const json extra{{"preset", cfg.preset}, {"train", training::to_json(tc)}};
  std::string last_good;
  training::TrainHooks hooks;
  hooks.checkpoint = [&](std::uint64_t step) {
    const auto path = out / "checkpoints" / ("step-" + std::to_string(step) + ".ckpt");
    model::save_checkpoint(path, *model, prep.vocab.hash(), &opt, step, extra);
    last_good = path.string();
  };
  if (!val_sets.empty()) {
    hooks.validate = [&](std::uint64_t step) {
      std::vector<int> preds, golds;
      for (const auto& eps : val_sets) {
        const auto probs = model->predict(eps);
        for (std::size_t i = 0; i < eps.size(); ++i) {
          preds.push_back(probs[i] >= 0.5f);
          golds.push_back(eps[i].target);
        }
      }
      const double f1 = training::f1_score(preds, golds).f1;
      std::fprintf(stderr, "step %llu  validation F1 %.4f\n", static_cast<unsigned long long>(step), f1);
      return f1;
    };
  }
  hooks.on_step = [&](const training::LossPoint& p) {
    if (log_every > 0 && (p.step % log_every == 0 || p.step == tc.steps)) {
      std::fprintf(stderr, "step %llu  loss %.5f\n", static_cast<unsigned long long>(p.step), p.loss);
    }
  };

  const auto result = training::train(*model, opt, training::stream_source(stream), tc, hooks);

  // The trace keeps earlier rows when resuming into the same directory.
  std::string csv = training::loss_trace_csv(result.trace);
  if (start_step > 0 && fs::exists(out / "loss.csv")) {
    std::istringstream old(read_file(out / "loss.csv"));
    std::string line, kept;
    std::getline(old, line);
    while (std::getline(old, line)) {
      if (!line.empty() && std::stoull(line) <= start_step) kept += line + "\n";
    }
    csv.insert(csv.find('\n') + 1, kept);
  }
  write_file(out / "loss.csv", csv);

  if (result.stop == training::StopReason::kNonFinite) {
    std::cerr << "training halted: " << result.message << "\n"
              << "last good checkpoint: " << (last_good.empty() ? "none" : last_good) << "\n";
    return kNumeric;
  }
  if (result.stop == training::StopReason::kEarlyStopped) std::cerr << result.message << "\n";
  const auto id = model::save_checkpoint(out / "model.ckpt", *model, prep.vocab.hash(), &opt,
                                         result.final_step, extra);
  json summary{{"checkpoint", (out / "model.ckpt").string()},
               {"model_id", id},
               {"steps", result.final_step},
               {"parameters", model->num_parameters()}};
  if (!result.trace.empty()) summary["final_loss"] = result.trace.back().loss;
  std::cout << summary.dump() << "\n";
  return kOk;
}

int cmd_eval(const CLI::App& cmd, const GlobalFlags& g, const EvalFlags& f) {
  RunConfig rc(cmd, g.config);
  const fs::path checkpoint = require_path(rc.get("checkpoint", f.checkpoint), "checkpoint");
  const fs::path prepared_dir = require_path(rc.get("prepared", f.prepared), "prepared");
  const fs::path out = require_path(rc.get("out", g.out), "out");
  auto ks = sorted_unique(rc.get("k", f.k));
  const auto threshold = rc.get("threshold", f.threshold);
  warn_unused(rc);

  const auto prep = load_prepared(prepared_dir);
  require_file(checkpoint, "checkpoint");
  const auto ck = model::load_checkpoint(checkpoint, prep.vocab.hash());
  if (prep.manifest.at("eval").empty()) {
    throw ValidationError("eval", "the prepared directory has no evaluation sets");
  }

  std::vector<training::EvalReport> reports;
  for (const auto& e : prep.manifest.at("eval")) {
    training::EvalReport report{e.at("name").get<std::string>(), {}, ck.model_id,
                                prep.manifest.at("seed").get<std::uint64_t>(), training::report_timestamp()};
    std::map<std::size_t, json> by_k;
    for (const auto& ep : e.at("episodes")) by_k[ep.at("k").get<std::size_t>()] = ep;
    std::vector<std::size_t> wanted = ks;
    if (wanted.empty())
      for (const auto& [k, ep] : by_k) wanted.push_back(k);
    for (auto k : wanted) {
      const auto it = by_k.find(k);
      if (it == by_k.end()) {
        throw ValidationError("k", "K=" + std::to_string(k) + " was not prepared for " + report.dataset +
                                       "; rerun prepare with --k");
      }
      const auto episodes = data::parse_episodes_jsonl(
          read_file(prepared_dir / it->second.at("file").get<std::string>()), prep.vocab, ck.model.config().max_len);
      if (episodes.empty()) throw ValidationError("eval", report.dataset + " has no episodes for K=" + std::to_string(k));
      auto entry = training::evaluate(ck.model, episodes, threshold);
      entry.dropped_collisions = it->second.at("dropped_collisions").get<std::size_t>();
      report.entries.push_back(entry);
    }
    reports.push_back(std::move(report));
  }

  fs::create_directories(out);
  json all = json::array();
  for (const auto& r : reports) all.push_back(training::to_json(r));
  write_file(out / "eval.json", all.dump(2) + "\n");
  rc.write(out / "config.json");
  std::cout << training::render_table(reports);
  return kOk;
}

int cmd_predict(const CLI::App& cmd, const GlobalFlags& g, const PredictFlags& f) {
  RunConfig rc(cmd, g.config);
  const fs::path checkpoint = require_path(rc.get("checkpoint", f.checkpoint), "checkpoint");
  const auto vocab_path = default_vocab(rc.get("vocab", f.vocab), checkpoint);
  service::PredictRequest req{rc.get("label", f.label), rc.get("support", f.support), rc.get("text", f.text)};
  warn_unused(rc);
  if (req.support.empty()) throw ValidationError("support", "at least one --support example is required");
  if (std::all_of(req.label.begin(), req.label.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw ValidationError("label", "must not be blank");
  }

  require_file(checkpoint, "checkpoint");
  require_file(vocab_path, "vocab");
  auto vocab = text::Vocab::load(vocab_path);
  auto ck = model::load_checkpoint(checkpoint, vocab.hash());
  const service::Snapshot snap{std::move(ck.model), std::move(vocab), ck.model_id};
  auto r = service::run_predict(snap, req);
  r.erase("model_id");
  std::cout << r.dump() << "\n";
  return kOk;
}

int cmd_serve(const CLI::App& cmd, const GlobalFlags& g, const ServeFlags& f) {
  RunConfig rc(cmd, g.config);
  const fs::path checkpoint = require_path(rc.get("checkpoint", f.checkpoint), "checkpoint");
  const auto vocab_path = default_vocab(rc.get("vocab", f.vocab), checkpoint);
  const auto host = rc.get("host", f.host);
  const auto port = rc.get("port", f.port);
  warn_unused(rc);
  require_file(checkpoint, "checkpoint");
  require_file(vocab_path, "vocab");

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::InferenceService svc;
  service::HttpServer server(svc);
  const int bound = server.start(host, port);
  std::cerr << "listening on http://" << host << ":" << bound << "\n";

  auto vocab = text::Vocab::load(vocab_path);
  auto ck = model::load_checkpoint(checkpoint, vocab.hash());
  const auto id = ck.model_id;
  svc.publish(std::make_shared<const service::Snapshot>(service::Snapshot{std::move(ck.model), std::move(vocab), id}));
  std::cerr << "model " << id << " ready\n";

  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "shutting down\n";
  server.stop();
  return kOk;
}

int cmd_synth(const CLI::App& cmd, const GlobalFlags& g, const SynthFlags& f) {
  RunConfig rc(cmd, g.config);
  data::SyntheticSpec spec;
  spec.n_labels = rc.get("labels", f.labels);
  spec.vocab_per_label = rc.get("vocab_per_label", f.vocab_per_label);
  spec.shared_vocab = rc.get("shared_vocab", f.shared_vocab);
  spec.texts_per_label = rc.get("texts_per_label", f.texts_per_label);
  spec.text_len = rc.get("text_len", f.text_len);
  spec.noise_rate = rc.get("noise", f.noise);
  spec.word_pool = rc.get("word_pool", f.word_pool);
  const auto tasks = rc.get("tasks", f.tasks);
  const auto seed = rc.get("seed", g.seed);
  const fs::path out = require_path(rc.get("out", g.out), "out");
  warn_unused(rc);
  if (tasks == 0) throw ValidationError("tasks", "must be at least 1");

  std::vector<data::SyntheticTask> generated;
  for (std::size_t t = 0; t < tasks; ++t) generated.push_back(data::gen_synthetic_task(spec, seed + t));
  fs::create_directories(out);
  for (const auto& task : generated) {
    const auto path = out / (task.dataset.name + ".jsonl");
    write_file(path, data::to_jsonl(task.dataset));
    std::cout << path.string() << "  " << task.dataset.records.size() << " records\n";
  }
  return kOk;
}

}  // namespace exnet::cli
