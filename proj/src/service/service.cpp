#include "exnet/service/service.hpp"

#include <algorithm>

#include "exnet/data/episode.hpp"
#include "exnet/error.hpp"

namespace exnet::service {

using nlohmann::json;

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

json parse_body(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ValidationError("body", "request body is not valid JSON");
  if (!j.is_object()) throw ValidationError("body", "request body must be a JSON object");
  return j;
}

std::string string_field(const json& body, const std::string& field) {
  const auto it = body.find(field);
  if (it == body.end()) throw ValidationError(field, "missing");
  if (!it->is_string()) throw ValidationError(field, "must be a string");
  return it->get<std::string>();
}

std::vector<std::string> support_list(const json& value, const std::string& field) {
  if (!value.is_array()) throw ValidationError(field, "must be a list of strings");
  if (value.empty()) throw ValidationError(field, "at least one support example is required");
  if (value.size() > kMaxSupports) {
    throw ValidationError(field, std::to_string(value.size()) + " supports exceed the limit of " +
                                     std::to_string(kMaxSupports));
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_string()) {
      throw ValidationError(field + "[" + std::to_string(i) + "]", "must be a string");
    }
    out.push_back(value[i].get<std::string>());
  }
  return out;
}

Response validation_error(const ValidationError& e) { return {400, error_body(e.field(), e.message())}; }

Response unavailable() { return {503, error_body("model", "model is not loaded yet")}; }

}  // namespace

json error_body(const std::string& field, const std::string& message) {
  return json{{"error", {{"field", field}, {"message", message}}}};
}

PredictRequest parse_predict_request(const json& body) {
  PredictRequest req;
  req.label = string_field(body, "label");
  if (blank(req.label)) throw ValidationError("label", "must not be blank");
  if (!body.contains("support")) throw ValidationError("support", "missing");
  req.support = support_list(body.at("support"), "support");
  req.text = string_field(body, "text");
  return req;
}

ClassifyRequest parse_classify_request(const json& body) {
  ClassifyRequest req;
  const auto it = body.find("labels");
  if (it == body.end()) throw ValidationError("labels", "missing");
  if (!it->is_object()) throw ValidationError("labels", "must map each label to its supports");
  if (it->empty()) throw ValidationError("labels", "at least one label is required");
  for (const auto& [label, supports] : it->items()) {
    if (blank(label)) throw ValidationError("labels", "label names must not be blank");
    req.labels.emplace_back(label, support_list(supports, "labels." + label));
  }
  req.text = string_field(body, "text");
  return req;
}

json run_predict(const Snapshot& snap, const PredictRequest& req) {
  std::vector<data::Episode> one;
  one.push_back(data::make_episode(req.text, req.label, req.support, 0, snap.vocab,
                                   snap.model.config().max_len));
  const float p = snap.model.predict(one).front();
  return json{{"probability", p},
              {"answer", p >= 0.5f ? "yes" : "no"},
              {"k", req.support.size()},
              {"truncated", one.front().truncated()},
              {"model_id", snap.model_id}};
}

InferenceService::InferenceService() : started_(std::chrono::steady_clock::now()) {}

void InferenceService::publish(std::shared_ptr<const Snapshot> snapshot) {
  std::lock_guard lock(mu_);
  snapshot_ = std::move(snapshot);
}

std::shared_ptr<const Snapshot> InferenceService::current() const {
  std::lock_guard lock(mu_);
  return snapshot_;
}

bool InferenceService::ready() const { return current() != nullptr; }

Response InferenceService::predict(const std::string& body) const {
  const auto snap = current();
  if (!snap) return unavailable();
  try {
    return {200, run_predict(*snap, parse_predict_request(parse_body(body)))};
  } catch (const ValidationError& e) {
    return validation_error(e);
  }
}

Response InferenceService::classify(const std::string& body) const {
  const auto snap = current();
  if (!snap) return unavailable();
  try {
    const auto req = parse_classify_request(parse_body(body));
    json scores = json::object(), results = json::object();
    std::string top;
    double best = -1;
    // labels are in lexicographic order, so a strict > keeps the first of a tie
    for (const auto& [label, supports] : req.labels) {
      auto r = run_predict(*snap, {label, supports, req.text});
      const double p = r.at("probability").get<double>();
      if (p > best) best = p, top = label;
      scores[label] = r.at("probability");
      results[label] = std::move(r);
    }
    return {200, json{{"scores", scores}, {"top", top}, {"results", results},
                      {"model_id", snap->model_id}}};
  } catch (const ValidationError& e) {
    return validation_error(e);
  }
}

Response InferenceService::health() const {
  const auto snap = current();
  const double uptime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  if (!snap) return {503, json{{"status", "loading"}, {"uptime_s", uptime}}};
  return {200, json{{"status", "ready"},
                    {"model_id", snap->model_id},
                    {"config_preset", snap->model.config().preset},
                    {"uptime_s", uptime}}};
}

Response InferenceService::dispatch(const std::string& method, const std::string& path,
                                    const std::string& body) const {
  if (path == "/predict" || path == "/classify") {
    if (method != "POST") return {405, error_body("method", path + " accepts POST")};
    return path == "/predict" ? predict(body) : classify(body);
  }
  if (path == "/health") {
    if (method != "GET") return {405, error_body("method", "/health accepts GET")};
    return health();
  }
  return {404, error_body("path", "no route for " + path)};
}

}  // namespace exnet::service
