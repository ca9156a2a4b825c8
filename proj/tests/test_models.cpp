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


#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <unistd.h>

#include <gtest/gtest.h>

#include "httplib.h"
#include "oracles.hpp"
#include "windowshap/algorithms.hpp"
#include "windowshap/io.hpp"
#include "windowshap/models.hpp"

namespace windowshap {
namespace {

namespace fs = std::filesystem;

InstanceBatch batch_of(const std::vector<TimeSeriesInstance>& xs) {
  InstanceBatch b(xs.front().shape(), xs.size());
  for (std::size_t n = 0; n < xs.size(); ++n) b.set(n, xs[n]);
  return b;
}

TEST(BuiltinLinear, ClosedForms) {
  auto zero = builtin_linear(Matrix(2, 3, 0.0), 0.0);
  std::mt19937_64 rng(1);
  EXPECT_EQ(zero->predict_one(testing::random_instance({2, 3}, rng)), 0.5);

  auto ones = builtin_linear(Matrix::from_rows({{1, 1}}), 0.0);
  EXPECT_EQ(ones->predict_one(new_instance({{0, 0}}, {"a"})), 0.5);

  auto w = builtin_linear(Matrix::from_rows({{2, -1}}), 0.0);
  EXPECT_NEAR(w->predict_one(new_instance({{1, 1}}, {"a"})), 0.7310585786300049,
              1e-12);

  EXPECT_THROW(w->predict_one(new_instance({{1, 1, 1}}, {"a"})), Error);
  EXPECT_THROW(builtin_linear(Matrix::from_rows({{std::nan("")}}), 0.0), Error);
}

TEST(BuiltinLinear, PureAndBatched) {
  std::mt19937_64 rng(2);
  const Shape shape{3, 8};
  Matrix w(3, 8);
  for (double& v : w.flat()) v = std::normal_distribution<double>(0, 1)(rng);
  auto f = builtin_linear(w, 0.3);
  std::vector<TimeSeriesInstance> xs;
  for (int k = 0; k < 5; ++k) xs.push_back(testing::random_instance(shape, rng));
  const auto a = f->predict(batch_of(xs));
  const auto b = f->predict(batch_of(xs));
  EXPECT_EQ(a, b);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double z = 0.3;
    for (std::size_t c = 0; c < 24; ++c) z += w.flat()[c] * xs[k].values().flat()[c];
    EXPECT_NEAR(a[k], testing::logistic(z), 1e-14);
  }
}

TEST(BuiltinLinear, ExactShapleyClosedForm) {
  // Additive model in [0, 1]: singleton values are w * (x - mean bg).
  std::mt19937_64 rng(3);
  const Shape shape{2, 4};
  Matrix w(2, 4);
  for (double& v : w.flat()) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  testing::FunctionPredictor f(shape, [&](const Matrix& m) {
    double z = 0.0;
    for (std::size_t c = 0; c < 8; ++c) z += w.flat()[c] * m.flat()[c];
    return 0.5 + 0.02 * z;
  });
  const auto x = testing::random_instance(shape, rng);
  const auto bg = testing::random_background(shape, 3, rng);
  StationaryParams p{1, {}};
  p.engine.mode = EngineMode::kExact;
  const Attribution a = stationary_windowshap(f, x, bg, p);
  for (std::size_t c = 0; c < 8; ++c) {
    double mean = 0.0;
    for (const auto& b : bg.instances()) mean += b.values().flat()[c];
    mean /= 3.0;
    EXPECT_NEAR(a.point_values.flat()[c],
                0.02 * w.flat()[c] * (x.values().flat()[c] - mean), 1e-12);
  }
}

TEST(BuiltinAnomaly, ClosedForms) {
  const Shape shape{2, 10};
  auto f = builtin_anomaly(shape, 3, 1.0, 10.0);
  const auto flat = TimeSeriesInstance::create(Matrix(2, 10, 0.0), testing::names(2));
  EXPECT_NEAR(f->predict_one(flat), testing::logistic(-10.0), 1e-15);
  EXPECT_NEAR(f->predict_one(flat), 4.5397868702434395e-05, 1e-15);

  Matrix spike(2, 10, 0.0);
  spike(0, 4) = 3.0;  // one window mean of exactly 1
  EXPECT_DOUBLE_EQ(f->predict_one(TimeSeriesInstance::create(spike, testing::names(2))),
                   0.5);

  std::mt19937_64 rng(4);
  Matrix other = spike;
  for (std::size_t t = 0; t < 10; ++t) other(1, t) = 50.0 * std::normal_distribution<double>(0, 1)(rng);
  EXPECT_EQ(f->predict_one(TimeSeriesInstance::create(other, testing::names(2))), 0.5);

  for (std::size_t l : {0u, 11u}) {
    try {
      builtin_anomaly(shape, l, 1.0, 10.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidWindowLength);
    }
  }
}

TEST(BuiltinAnomaly, DummyVariablesGetZero) {
  const SyntheticData data = generate_synthetic(SyntheticKind::kAnomaly, 3, 12, 4, 5);
  const BackgroundSet bg({data.instances[0], data.instances[1]});
  auto f = builtin_anomaly({3, 12}, 2, 0.5, 10.0);
  StationaryParams p{3, {}};
  p.engine.mode = EngineMode::kExact;
  for (const auto& x : data.instances) {
    const Attribution a = stationary_windowshap(*f, x, bg, p);
    for (std::size_t i = 1; i < 3; ++i)
      for (std::size_t t = 0; t < 12; ++t)
        EXPECT_NEAR(a.point_values(i, t), 0.0, 1e-9);
  }
}

TEST(BuiltinRecency, WeightsFavourRecentSteps) {
  auto f = builtin_recency({2, 5}, 0.5, 2.0, -0.1);
  auto* linear = dynamic_cast<LinearPredictor*>(f.get());
  ASSERT_NE(linear, nullptr);
  EXPECT_NEAR(linear->weights()(1, 4), 1.0, 1e-15);
  EXPECT_NEAR(linear->weights()(0, 0), std::exp(-2.0), 1e-15);
  EXPECT_DOUBLE_EQ(linear->bias(), -0.1);
}

TEST(Synthetic, ContractAndDeterminism) {
  const auto a = generate_synthetic(SyntheticKind::kAnomaly, 4, 100, 50, 1);
  const auto b = generate_synthetic(SyntheticKind::kAnomaly, 4, 100, 50, 1);
  EXPECT_EQ(a.instances, b.instances);
  EXPECT_EQ(a.labels, b.labels);
  int ones = 0;
  for (std::size_t k = 0; k < 50; ++k) {
    ones += a.labels[k];
    EXPECT_EQ(a.segments[k].has_value(), a.labels[k] == 1);
    if (a.segments[k]) {
      EXPECT_LT(a.segments[k]->start, a.segments[k]->end);
      EXPECT_LE(a.segments[k]->end, 100u);
      EXPECT_EQ(a.segments[k]->end - a.segments[k]->start, 11u);
    }
  }
  EXPECT_EQ(ones, 25);
  EXPECT_NE(generate_synthetic(SyntheticKind::kAnomaly, 4, 100, 50, 2).instances,
            a.instances);
  EXPECT_EQ(a.instances[0].variable_names()[3], "var3");
}

TEST(Synthetic, AnomalyDetectorSeparatesLabels) {
  const auto data = generate_synthetic(SyntheticKind::kAnomaly, 2, 100, 100, 7);
  auto f = builtin_anomaly({2, 100}, synthetic_segment_length(100), 0.5, 10.0);
  int correct = 0;
  for (std::size_t k = 0; k < 100; ++k) {
    const int predicted = f->predict_one(data.instances[k]) > 0.5 ? 1 : 0;
    correct += predicted == data.labels[k];
  }
  EXPECT_EQ(correct, 100);
}

TEST(Synthetic, SmoothKindDiffersFromAnomaly) {
  const auto a = generate_synthetic(SyntheticKind::kAnomaly, 2, 40, 6, 3);
  const auto s = generate_synthetic(SyntheticKind::kSmooth, 2, 40, 6, 3);
  EXPECT_NE(a.instances, s.instances);
  EXPECT_EQ(parse_synthetic_kind("smooth"), SyntheticKind::kSmooth);
  EXPECT_THROW(parse_synthetic_kind("wavy"), Error);
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("windowshap_models_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

TEST(ModelSpec, Parse) {
  TempDir dir;
  io::write_text(dir.file("w.json"), R"({"weights": [[1, 2]], "bias": 0.5})");
  const auto lin = ModelSpec::parse("builtin:linear@" + dir.file("w.json"));
  EXPECT_EQ(lin.kind, ModelKind::kLinear);
  auto f = make_predictor(lin, {1, 2});
  EXPECT_NEAR(f->predict_one(new_instance({{1, 1}}, {"a"})), testing::logistic(3.5),
              1e-15);
  EXPECT_THROW(make_predictor(lin, {1, 3}), Error);

  EXPECT_EQ(ModelSpec::parse("builtin:anomaly").kind, ModelKind::kAnomaly);
  EXPECT_EQ(ModelSpec::parse("builtin:recency").kind, ModelKind::kRecency);
  const auto cmd = ModelSpec::parse("cmd:python3 serve.py --x");
  EXPECT_EQ(cmd.kind, ModelKind::kExternalCmd);
  EXPECT_EQ(cmd.target, "python3 serve.py --x");
  const auto http = ModelSpec::parse("http://127.0.0.1:8080/predict");
  EXPECT_EQ(http.kind, ModelKind::kExternalHttp);
  EXPECT_EQ(http.target, "http://127.0.0.1:8080/predict");

  EXPECT_THROW(ModelSpec::parse("builtin:forest"), Error);
  EXPECT_THROW(ModelSpec::parse("ftp:x"), Error);
  EXPECT_THROW(ModelSpec::parse("cmd:"), Error);
  try {
    ModelSpec::parse("builtin:linear@" + dir.file("missing.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(error_category(e.code()), ErrorCategory::kIo);
  }
  try {
    make_predictor(ModelSpec::parse("builtin:linear"), {1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(error_category(e.code()), ErrorCategory::kConfig);
  }
}

TEST(Wire, RoundTrip) {
  std::mt19937_64 rng(8);
  std::vector<TimeSeriesInstance> xs;
  for (int k = 0; k < 3; ++k) xs.push_back(testing::random_instance({2, 4}, rng));
  const InstanceBatch b = batch_of(xs);
  const auto req = wire::encode_request(17, b);
  EXPECT_EQ(req["shape"], nlohmann::json::array({2, 4}));
  std::int64_t id = 0;
  const InstanceBatch back = wire::decode_request(nlohmann::json::parse(req.dump()), &id);
  EXPECT_EQ(id, 17);
  EXPECT_TRUE(std::equal(back.flat().begin(), back.flat().end(), b.flat().begin(),
                         b.flat().end()));

  const auto res = wire::encode_response(17, {0.1, 0.2, 0.3});
  EXPECT_EQ(wire::decode_response(res, 17, 3), (std::vector<double>{0.1, 0.2, 0.3}));
}

TEST(Wire, ResponseViolations) {
  auto code_of = [](const nlohmann::json& r, std::int64_t id, std::size_t n) {
    try {
      wire::decode_response(r, id, n);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code_of(wire::encode_response(1, {0.5}), 1, 2),
            ErrorCode::kProtocolViolation);
  EXPECT_EQ(code_of(wire::encode_response(2, {0.5}), 1, 1),
            ErrorCode::kProtocolViolation);
  EXPECT_EQ(code_of(wire::encode_response(1, {1.5}), 1, 1),
            ErrorCode::kProtocolViolation);
  EXPECT_EQ(code_of({{"id", 1}}, 1, 1), ErrorCode::kProtocolViolation);
  EXPECT_EQ(code_of({{"id", 1}, {"error", "boom"}}, 1, 1),
            ErrorCode::kPredictorFailure);
  EXPECT_EQ(code_of(nlohmann::json::array(), 1, 1), ErrorCode::kProtocolViolation);
}

TEST(Wire, MalformedRequest) {
  EXPECT_THROW(wire::decode_request({{"id", 1}}, nullptr), Error);
  EXPECT_THROW(wire::decode_request(
                   {{"id", 1}, {"shape", {1, 2}}, {"instances", {{{1.0}}}}}, nullptr),
               Error);
}

std::string stub(const std::string& model) {
  return std::string("cmd:") + WINDOWSHAP_STUB_SERVER_PATH + " --model " + model;
}

ErrorCode construct_error(const std::string& address, Shape shape,
                          std::chrono::milliseconds timeout =
                              std::chrono::milliseconds(5000)) {
  try {
    auto f = make_predictor(ModelSpec::parse(address), shape, timeout);
    std::mt19937_64 rng(1);
    InstanceBatch b(shape, 3);
    f->predict(b);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

TEST(SubprocessPredictor, ConstantServer) {
  auto f = make_predictor(ModelSpec::parse(stub("constant:0.5")), {2, 3});
  InstanceBatch b({2, 3}, 7);
  EXPECT_EQ(f->predict(b), std::vector<double>(7, 0.5));
  EXPECT_EQ(f->predict(b), std::vector<double>(7, 0.5));
}

TEST(SubprocessPredictor, ContractBreaches) {
  EXPECT_EQ(construct_error(stub("short"), {1, 4}), ErrorCode::kProtocolViolation);
  EXPECT_EQ(construct_error(stub("out-of-range"), {1, 4}),
            ErrorCode::kProtocolViolation);
  EXPECT_EQ(construct_error(stub("garbage"), {1, 4}), ErrorCode::kProtocolViolation);
  EXPECT_EQ(construct_error(stub("slow:2000"), {1, 4}, std::chrono::milliseconds(200)),
            ErrorCode::kTimeout);
  EXPECT_EQ(construct_error("cmd:/nonexistent/model-binary", {1, 4}),
            ErrorCode::kConnectionFailure);
  EXPECT_EQ(construct_error("cmd:true", {1, 4}), ErrorCode::kConnectionFailure);
}

TEST(SubprocessPredictor, EngineSeesProtocolErrorsAsModelErrors) {
  auto f = make_predictor(ModelSpec::parse(stub("short")), {1, 4});
  const auto x = new_instance({{1, 2, 3, 4}}, {"a"});
  const BackgroundSet bg({x, x});
  StationaryParams p{2, {}};
  try {
    stationary_windowshap(*f, x, bg, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(error_category(e.code()), ErrorCategory::kModel);
  }
}

TEST(SubprocessPredictor, MatchesInProcessLinear) {
  TempDir dir;
  std::mt19937_64 rng(9);
  const Shape shape{2, 6};
  Matrix w(2, 6);
  for (double& v : w.flat()) v = std::normal_distribution<double>(0, 0.5)(rng);
  nlohmann::json params;
  params["weights"] = w.to_rows();
  params["bias"] = 0.2;
  io::write_json(dir.file("w.json"), params);

  auto local = builtin_linear(w, 0.2);
  auto remote = make_predictor(ModelSpec::parse(stub("linear@" + dir.file("w.json"))),
                               shape);
  const auto x = testing::random_instance(shape, rng);
  const auto bg = testing::random_background(shape, 3, rng);
  std::vector<TimeSeriesInstance> xs = {x, bg[0], bg[1]};
  const auto a = local->predict(batch_of(xs));
  const auto b = remote->predict(batch_of(xs));
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-9);

  StationaryParams p{2, {}};
  p.engine.mode = EngineMode::kExact;
  const Attribution la = stationary_windowshap(*local, x, bg, p);
  const Attribution ra = stationary_windowshap(*remote, x, bg, p);
  for (std::size_t c = 0; c < 12; ++c)
    EXPECT_NEAR(la.point_values.flat()[c], ra.point_values.flat()[c], 1e-9);
}

// In-process HTTP model server on an ephemeral port.
class HttpModel {
 public:
  explicit HttpModel(std::function<void(const httplib::Request&, httplib::Response&)> h) {
    server_.Post("/predict", std::move(h));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~HttpModel() {
    server_.stop();
    thread_.join();
  }
  std::string address() const {
    return "http:127.0.0.1:" + std::to_string(port_) + "/predict";
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpPredictor, ConstantAndLinearServers) {
  HttpModel constant([](const httplib::Request& req, httplib::Response& res) {
    std::int64_t id = 0;
    const auto batch = wire::decode_request(nlohmann::json::parse(req.body), &id);
    res.set_content(
        wire::encode_response(id, std::vector<double>(batch.size(), 0.5)).dump(),
        "application/json");
  });
  auto f = make_predictor(ModelSpec::parse(constant.address()), {1, 3});
  InstanceBatch b({1, 3}, 4);
  EXPECT_EQ(f->predict(b), std::vector<double>(4, 0.5));

  const Matrix w = Matrix::from_rows({{0.3, -0.2, 0.9}});
  HttpModel linear([&](const httplib::Request& req, httplib::Response& res) {
    std::int64_t id = 0;
    const auto batch = wire::decode_request(nlohmann::json::parse(req.body), &id);
    LinearPredictor model(w, 0.1);
    res.set_content(wire::encode_response(id, model.predict(batch)).dump(),
                    "application/json");
  });
  auto remote = make_predictor(ModelSpec::parse(linear.address()), {1, 3});
  auto local = builtin_linear(w, 0.1);
  const auto x = new_instance({{1, 2, 3}}, {"a"});
  const BackgroundSet bg({new_instance({{0, 0, 0}}, {"a"}),
                          new_instance({{1, -1, 0.5}}, {"a"})});
  StationaryParams p{1, {}};
  p.engine.mode = EngineMode::kExact;
  const auto la = stationary_windowshap(*local, x, bg, p);
  const auto ra = stationary_windowshap(*remote, x, bg, p);
  for (std::size_t t = 0; t < 3; ++t)
    EXPECT_NEAR(la.point_values(0, t), ra.point_values(0, t), 1e-9);
}

TEST(HttpPredictor, Failures) {
  HttpModel broken([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("nope", "text/plain");
  });
  EXPECT_EQ(construct_error(broken.address(), {1, 2}), ErrorCode::kConnectionFailure);

  HttpModel short_server([](const httplib::Request& req, httplib::Response& res) {
    std::int64_t id = 0;
    const auto batch = wire::decode_request(nlohmann::json::parse(req.body), &id);
    std::vector<double> out(batch.size(), 0.5);
    if (!out.empty()) out.pop_back();
    res.set_content(wire::encode_response(id, out).dump(), "application/json");
  });
  EXPECT_EQ(construct_error(short_server.address(), {1, 2}),
            ErrorCode::kProtocolViolation);

  // Nothing listens on port 1.
  EXPECT_EQ(construct_error("http:127.0.0.1:1/predict", {1, 2}),
            ErrorCode::kConnectionFailure);
}

TEST(ExternalTimeout, EnvironmentOverride) {
  ::setenv("WINDOWSHAP_TIMEOUT_SECS", "2.5", 1);
  EXPECT_EQ(default_external_timeout(), std::chrono::milliseconds(2500));
  ::unsetenv("WINDOWSHAP_TIMEOUT_SECS");
  EXPECT_EQ(default_external_timeout(), std::chrono::milliseconds(30000));
}

}  // namespace
}  // namespace windowshap
