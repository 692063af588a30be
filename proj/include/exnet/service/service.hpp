#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "exnet/model/exnet.hpp"
#include "exnet/text/vocab.hpp"
#include "json.hpp"

namespace exnet::service {

inline constexpr std::size_t kMaxSupports = 64;

struct PredictRequest {
  std::string label;
  std::vector<std::string> support;
  std::string text;
};

struct ClassifyRequest {
  std::vector<std::pair<std::string, std::vector<std::string>>> labels;  // sorted by label
  std::string text;
};

// Throw ValidationError whose field names the offending request key.
PredictRequest parse_predict_request(const nlohmann::json& body);
ClassifyRequest parse_classify_request(const nlohmann::json& body);

// Everything a request needs, immutable once published.
struct Snapshot {
  model::ExnetModel<float> model;
  text::Vocab vocab;
  std::string model_id;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

nlohmann::json error_body(const std::string& field, const std::string& message);

// Transport-independent request handling. Until a snapshot is published,
// /predict, /classify and /health answer 503.
class InferenceService {
 public:
  InferenceService();

  void publish(std::shared_ptr<const Snapshot> snapshot);
  bool ready() const;

  Response predict(const std::string& body) const;
  Response classify(const std::string& body) const;
  Response health() const;
  // Routes by method and path; unknown routes get 404.
  Response dispatch(const std::string& method, const std::string& path,
                    const std::string& body) const;

 private:
  std::shared_ptr<const Snapshot> current() const;

  mutable std::mutex mu_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::chrono::steady_clock::time_point started_;
};

// {probability, answer, k, truncated, model_id} for one validated request.
nlohmann::json run_predict(const Snapshot& snap, const PredictRequest& req);

}  // namespace exnet::service
