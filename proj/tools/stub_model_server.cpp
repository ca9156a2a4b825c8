/*
 * Copyright 2026 The windowshap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Minimal wire-protocol model server for tests and manual experiments.
//
//   stub_model_server [--transport stdio|http] [--port P] --model M
//
// M is one of
//   constant[:v]   every score is v (default 0.5)
//   linear@FILE    sigmoid(bias + <W, X>) with W, bias read from FILE
//   short          returns one score fewer than requested
//   out-of-range   returns 1.5 for every instance
//   slow:MS        sleeps MS milliseconds before answering, scores 0.5
//   garbage        answers with a line that is not JSON
// Malformed requests get {"id": ..., "error": "..."} and the server keeps
// running. The empty health-check batch is always answered normally.

#include <chrono>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "windowshap/io.hpp"
#include "windowshap/models.hpp"

namespace {

using nlohmann::json;
using windowshap::InstanceBatch;

struct StubModel {
  std::string kind = "constant";
  double constant = 0.5;
  int delay_ms = 0;
  std::unique_ptr<windowshap::LinearPredictor> linear;

  // Returns the response line.
  std::string answer(const std::string& body) const {
    std::int64_t id = -1;
    json request;
    try {
      request = json::parse(body);
      if (request.contains("id") && request["id"].is_number_integer())
        id = request["id"].get<std::int64_t>();
      InstanceBatch batch = windowshap::wire::decode_request(request, &id);
      if (batch.size() == 0) {
        return windowshap::wire::encode_response(id, {}).dump();
      }
      if (delay_ms > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      if (kind == "garbage") return "this is not json";
      std::vector<double> scores;
      if (kind == "linear") {
        scores = linear->predict(batch);
      } else {
        scores.assign(batch.size(), kind == "out-of-range" ? 1.5 : constant);
      }
      if (kind == "short") scores.pop_back();
      return windowshap::wire::encode_response(id, scores).dump();
    } catch (const std::exception& e) {
      json err;
      err["id"] = id;
      err["error"] = e.what();
      return err.dump();
    }
  }
};

StubModel parse_model(const std::string& text) {
  StubModel m;
  if (text.rfind("constant", 0) == 0) {
    m.kind = "constant";
    if (text.size() > 9 && text[8] == ':') m.constant = std::stod(text.substr(9));
  } else if (text.rfind("linear@", 0) == 0) {
    m.kind = "linear";
    const json params = windowshap::io::read_json(text.substr(7));
    auto w = windowshap::Matrix::from_rows(
        params.at("weights").get<std::vector<std::vector<double>>>());
    m.linear = std::make_unique<windowshap::LinearPredictor>(
        std::move(w), params.value("bias", 0.0));
  } else if (text.rfind("slow:", 0) == 0) {
    m.kind = "slow";
    m.delay_ms = std::stoi(text.substr(5));
  } else if (text == "short" || text == "out-of-range" || text == "garbage") {
    m.kind = text;
  } else {
    throw std::runtime_error("unknown stub model '" + text + "'");
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wire-protocol stub model server"};
  std::string transport = "stdio";
  std::string model = "constant";
  int port = 0;
  app.add_option("--transport", transport)->check(CLI::IsMember({"stdio", "http"}));
  app.add_option("--model", model);
  app.add_option("--port", port);
  CLI11_PARSE(app, argc, argv);

  StubModel stub;
  try {
    stub = parse_model(model);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (transport == "stdio") {
    std::ios::sync_with_stdio(false);
    std::string line;
    while (std::getline(std::cin, line)) {
      if (line.empty()) continue;
      std::cout << stub.answer(line) << "\n" << std::flush;
    }
    return 0;
  }

  httplib::Server server;
  server.Post("/", [&](const httplib::Request& req, httplib::Response& res) {
    res.set_content(stub.answer(req.body), "application/json");
  });
  if (port == 0) port = server.bind_to_any_port("127.0.0.1");
  else if (!server.bind_to_port("127.0.0.1", port)) return 4;
  std::cout << "listening " << port << "\n" << std::flush;
  server.listen_after_bind();
  return 0;
}
