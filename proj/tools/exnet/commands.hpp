#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace exnet::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalid = 2,
  kNumeric = 3,
  kIncompatible = 4,
};

struct GlobalFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string preset = "s";
};

struct PrepareFlags {
  std::vector<std::string> train;
  std::vector<std::string> eval;
  std::vector<std::size_t> k{2, 4, 8};
  std::size_t vocab_size = 8000;
};

struct TrainFlags {
  std::string prepared;
  std::string resume;
  double lr = 2e-5;
  std::size_t batch_size = 16;
  std::size_t steps = 500;
  std::size_t k_min = 2;
  std::size_t k_max = 8;
  std::size_t checkpoint_every = 0;
  std::size_t eval_every = 0;
  double weight_decay = 0.01;
  std::size_t warmup_steps = 0;
  std::size_t patience = 0;
  std::size_t max_len = 0;  // 0: preset value
  std::string pooling;      // empty: preset value
  std::string init;         // empty: preset value
  std::size_t log_every = 50;
};

struct EvalFlags {
  std::string checkpoint;
  std::string prepared;
  std::vector<std::size_t> k;
  double threshold = 0.5;
};

struct PredictFlags {
  std::string checkpoint;
  std::string vocab;
  std::string label;
  std::vector<std::string> support;
  std::string text;
};

struct ServeFlags {
  std::string checkpoint;
  std::string vocab;
  std::string host = "127.0.0.1";
  int port = 8080;
};

struct SynthFlags {
  std::size_t labels = 8;
  std::size_t vocab_per_label = 4;
  std::size_t shared_vocab = 20;
  std::size_t texts_per_label = 40;
  std::size_t text_len = 6;
  double noise = 0.0;
  std::size_t word_pool = 0;
  std::size_t tasks = 1;
};

int cmd_prepare(const CLI::App& cmd, const GlobalFlags& g, const PrepareFlags& f);
int cmd_train(const CLI::App& cmd, const GlobalFlags& g, const TrainFlags& f);
int cmd_eval(const CLI::App& cmd, const GlobalFlags& g, const EvalFlags& f);
int cmd_predict(const CLI::App& cmd, const GlobalFlags& g, const PredictFlags& f);
int cmd_serve(const CLI::App& cmd, const GlobalFlags& g, const ServeFlags& f);
int cmd_synth(const CLI::App& cmd, const GlobalFlags& g, const SynthFlags& f);

}  // namespace exnet::cli
