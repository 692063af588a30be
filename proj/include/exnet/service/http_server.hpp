#pragma once

#include <memory>
#include <string>
#include <thread>

#include "exnet/service/service.hpp"

namespace httplib {
class Server;
}

namespace exnet::service {

// HTTP/1.1 front end for an InferenceService: POST /predict, POST /classify,
// GET /health, with permissive CORS headers.
class HttpServer {
 public:
  explicit HttpServer(const InferenceService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free port) and returns the bound port. Throws Error
  // when binding fails.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  // bind + run on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  const InferenceService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace exnet::service
