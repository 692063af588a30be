#include <malloc.h>

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "exnet/error.hpp"

using namespace exnet;
using namespace exnet::cli;

namespace {

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help) {
  auto* sub = app.add_subcommand(name, help);
  sub->fallthrough();
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  // Activations are large and short-lived; keep freed memory in the heap.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  CLI::App app{"exnet: in-context few-shot yes/no text classification"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "JSON file with option values; flags override it");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--preset", g.preset, "model preset: s, m, l, desk or micro");

  PrepareFlags pf;
  auto* prepare = add_command(app, "prepare", "build vocabulary, binarized instances and frozen eval episodes");
  prepare->add_option("--train", pf.train, "training dataset (JSONL of {text, label}); repeatable");
  prepare->add_option("--eval", pf.eval, "evaluation dataset; repeatable");
  prepare->add_option("--k", pf.k, "support set sizes for evaluation")->delimiter(',');
  prepare->add_option("--vocab-size", pf.vocab_size, "maximum vocabulary size");

  TrainFlags tf;
  auto* train = add_command(app, "train", "episodic training");
  train->add_option("--prepared", tf.prepared, "directory written by prepare");
  train->add_option("--resume", tf.resume, "checkpoint to continue from");
  train->add_option("--lr", tf.lr, "AdamW learning rate");
  train->add_option("--batch-size", tf.batch_size, "episodes per step");
  train->add_option("--steps", tf.steps, "total optimizer steps");
  train->add_option("--k-min", tf.k_min, "smallest training K");
  train->add_option("--k-max", tf.k_max, "largest training K");
  train->add_option("--checkpoint-every", tf.checkpoint_every, "steps between checkpoints (0: end only)");
  train->add_option("--eval-every", tf.eval_every, "steps between validation passes (0: never)");
  train->add_option("--weight-decay", tf.weight_decay, "decoupled weight decay");
  train->add_option("--warmup-steps", tf.warmup_steps, "linear learning-rate warmup");
  train->add_option("--patience", tf.patience, "stop after this many validations without improvement");
  train->add_option("--max-len", tf.max_len, "override the preset's sequence length");
  train->add_option("--pooling", tf.pooling, "override pooling: cls or mean");
  train->add_option("--init", tf.init, "override init: trunc_normal or fan_in");
  train->add_option("--log-every", tf.log_every, "steps between loss lines on stderr");

  EvalFlags ef;
  auto* eval = add_command(app, "eval", "K-shot evaluation on prepared episodes");
  eval->add_option("--checkpoint", ef.checkpoint, "model checkpoint");
  eval->add_option("--prepared", ef.prepared, "directory written by prepare");
  eval->add_option("--k", ef.k, "K values (default: all prepared)")->delimiter(',');
  eval->add_option("--threshold", ef.threshold, "answer yes when p >= threshold");

  PredictFlags qf;
  auto* predict = add_command(app, "predict", "answer one question from a support set");
  predict->add_option("--checkpoint", qf.checkpoint, "model checkpoint");
  predict->add_option("--vocab", qf.vocab, "vocabulary (default: vocab.txt next to the checkpoint)");
  predict->add_option("--label", qf.label, "label to ask about");
  predict->add_option("--support", qf.support, "support example; repeatable");
  predict->add_option("--text", qf.text, "text to classify");

  ServeFlags sf;
  auto* serve = add_command(app, "serve", "HTTP inference service");
  serve->add_option("--checkpoint", sf.checkpoint, "model checkpoint");
  serve->add_option("--vocab", sf.vocab, "vocabulary (default: vocab.txt next to the checkpoint)");
  serve->add_option("--host", sf.host, "bind address");
  serve->add_option("--port", sf.port, "port (0 picks a free one)");

  SynthFlags yf;
  auto* synth = add_command(app, "synth", "write synthetic separable datasets");
  synth->add_option("--labels", yf.labels, "labels per task");
  synth->add_option("--vocab-per-label", yf.vocab_per_label, "signature words per label");
  synth->add_option("--shared-vocab", yf.shared_vocab, "shared noise words");
  synth->add_option("--texts-per-label", yf.texts_per_label, "texts per label");
  synth->add_option("--text-len", yf.text_len, "tokens per text");
  synth->add_option("--noise", yf.noise, "probability that a token is a shared word");
  synth->add_option("--word-pool", yf.word_pool, "signature word pool size (0: exact fit)");
  synth->add_option("--tasks", yf.tasks, "number of tasks, seeds seed..seed+tasks-1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*prepare) return cmd_prepare(*prepare, g, pf);
    if (*train) return cmd_train(*train, g, tf);
    if (*eval) return cmd_eval(*eval, g, ef);
    if (*predict) return cmd_predict(*predict, g, qf);
    if (*serve) return cmd_serve(*serve, g, sf);
    if (*synth) return cmd_synth(*synth, g, yf);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIncompatible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
