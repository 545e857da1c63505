// Copyright 2026 The tfgb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <thread>

#include "test_util.hpp"
#include "tfgb/error.hpp"
#include "tfgb/rpc.hpp"

using namespace tfgb;
using tfgb::testing::Gen;

namespace {

ServerConfig local_server(PayloadSpec response = generate_uniform(CategorySet::all(), 4, BufferSizeConfig{}, 9)) {
  ServerConfig cfg;
  cfg.endpoint = {"127.0.0.1", 0};
  cfg.response_spec = std::move(response);
  return cfg;
}

std::uint16_t unused_port() {
  auto l = TcpListener::bind({"127.0.0.1", 0});
  return l.port();
}

}  // namespace

TEST_SUITE("rpc") {

TEST_CASE("endpoint parsing") {
  const auto ep = Endpoint::parse("10.0.0.2:6000");
  CHECK(ep.host == "10.0.0.2");
  CHECK(ep.port == 6000);
  CHECK(ep.to_string() == "10.0.0.2:6000");
  CHECK(Endpoint{}.port == 50001);
  CHECK_THROWS_AS(Endpoint::parse("host"), ConfigError);
  CHECK_THROWS_AS(Endpoint::parse("host:0"), ConfigError);
  CHECK_THROWS_AS(Endpoint::parse("host:70000"), ConfigError);
  CHECK_THROWS_AS(Endpoint::parse(":80"), ConfigError);
}

TEST_CASE("echo is bit-identical in both modes") {
  ParameterServer server(local_server());
  server.start();
  auto conn = Connection::open(server.bound_endpoint());
  Gen g(8);
  for (int i = 0; i < 60; ++i) {
    const Payload p = materialize(g.spec(10, 70000));
    const auto mode = g.coin() ? WireMode::Serialized : WireMode::NonSerialized;
    const CallResult r = conn.call(MsgType::EchoReq, p.views(), mode);
    CHECK(r.buffers == p.buffers());
    CHECK(r.header.type == MsgType::EchoResp);
    CHECK(r.header.mode == mode);
    CHECK(r.elapsed.count() > 0);
  }
  server.stop();
}

TEST_CASE("put is acknowledged with an empty body") {
  ParameterServer server(local_server());
  server.start();
  auto conn = Connection::open(server.bound_endpoint());
  const Payload p = materialize(generate_skew(CategorySet::all(), 10, BufferSizeConfig{}, BufferCategory::Large, 1));
  for (auto mode : {WireMode::NonSerialized, WireMode::Serialized}) {
    const CallResult r = conn.call(MsgType::PutReq, p.views(), mode);
    CHECK(r.header.type == MsgType::Ack);
    CHECK(r.header.body_length == 0);
    CHECK(r.buffers.empty());
  }
}

TEST_CASE("get returns the server's configured payload") {
  const auto spec = generate_random(CategorySet::all(), 7, BufferSizeConfig{}, 555);
  ParameterServer server(local_server(spec));
  server.start();
  auto conn = Connection::open(server.bound_endpoint());
  const Payload want = materialize(spec);
  for (auto mode : {WireMode::NonSerialized, WireMode::Serialized}) {
    const CallResult r = conn.call(MsgType::GetReq, {}, mode);
    CHECK(r.header.type == MsgType::GetResp);
    CHECK(r.buffers == want.buffers());
  }
}

TEST_CASE("request ids pair up in order and modes interleave") {
  ParameterServer server(local_server());
  server.start();
  auto conn = Connection::open(server.bound_endpoint());
  const Payload p = materialize(generate_uniform(CategorySet::all(), 3, BufferSizeConfig{}, 1));
  for (std::uint64_t k = 1; k <= 50; ++k) {
    CHECK(conn.next_request_id() == k);
    const auto mode = k % 2 ? WireMode::Serialized : WireMode::NonSerialized;
    const CallResult r = conn.call(MsgType::EchoReq, p.views(), mode);
    CHECK(r.header.request_id == k);
    CHECK(r.header.mode == mode);
  }
  CHECK(server.frames_served() == 50);
}

TEST_CASE("call argument contract") {
  ParameterServer server(local_server());
  server.start();
  auto conn = Connection::open(server.bound_endpoint());
  const Payload p = materialize(generate_uniform(CategorySet::all(), 3, BufferSizeConfig{}, 1));
  CHECK_THROWS_AS(conn.call(MsgType::EchoReq, {}, WireMode::NonSerialized), ConfigError);
  CHECK_THROWS_AS(conn.call(MsgType::GetReq, p.views(), WireMode::NonSerialized), ConfigError);
  CHECK_THROWS_AS(conn.call(MsgType::Ack, p.views(), WireMode::NonSerialized), ConfigError);
}

TEST_CASE("malformed frame drops only its own connection") {
  ParameterServer server(local_server());
  server.start();
  auto good = Connection::open(server.bound_endpoint());
  const Payload p = materialize(generate_uniform(CategorySet::all(), 3, BufferSizeConfig{}, 1));
  CHECK(good.call(MsgType::EchoReq, p.views(), WireMode::NonSerialized).buffers == p.buffers());

  auto raw = TcpStream::connect(server.bound_endpoint());
  const std::vector<std::uint8_t> junk(64, 0x5A);
  raw->write_raw(junk);
  std::uint8_t b;
  // The server closes the bad connection.
  CHECK_THROWS_AS(raw->read_exact({&b, 1}), TransportError);
  CHECK(server.connections_dropped() == 1);

  for (int i = 0; i < 5; ++i) CHECK(good.call(MsgType::EchoReq, p.views(), WireMode::Serialized).buffers == p.buffers());
  auto fresh = Connection::open(server.bound_endpoint());
  CHECK(fresh.call(MsgType::PutReq, p.views(), WireMode::NonSerialized).buffers.empty());
}

TEST_CASE("concurrent connections are served independently") {
  ParameterServer server(local_server());
  server.start();
  const auto ep = server.bound_endpoint();
  std::atomic<int> ok{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      auto conn = Connection::open(ep);
      const Payload p = materialize(generate_random(CategorySet::all(), 5, BufferSizeConfig{}, t));
      bool all = true;
      for (int i = 0; i < 20; ++i) all = all && conn.call(MsgType::EchoReq, p.views(), WireMode::NonSerialized).buffers == p.buffers();
      if (all) ++ok;
    });
  }
  for (auto& th : threads) th.join();
  CHECK(ok == 4);
}

TEST_CASE("connection failures") {
  CHECK_THROWS_AS(Connection::open({"127.0.0.1", unused_port()}), ConnectError);
  try {
    Connection::open({"127.0.0.1", unused_port()});
  } catch (const ConnectError& e) {
    CHECK(std::string(e.what()).find("127.0.0.1") != std::string::npos);
  }

  auto server = std::make_unique<ParameterServer>(local_server());
  server->start();
  auto conn = Connection::open(server->bound_endpoint());
  const Payload p = materialize(generate_uniform(CategorySet::all(), 3, BufferSizeConfig{}, 1));
  conn.call(MsgType::EchoReq, p.views(), WireMode::NonSerialized);
  server->stop();
  CHECK_THROWS_AS(conn.call(MsgType::EchoReq, p.views(), WireMode::NonSerialized), TransportError);
}

TEST_CASE("bind conflict is a startup error") {
  ParameterServer first(local_server());
  first.start();
  ServerConfig cfg = local_server();
  cfg.endpoint = first.bound_endpoint();
  ParameterServer second(cfg);
  CHECK_THROWS_AS(second.start(), StartupError);
}

TEST_CASE("byte counters see every frame byte") {
  ParameterServer server(local_server());
  server.start();
  ByteCounters counters;
  auto conn = Connection::open(server.bound_endpoint(), &counters);
  const Payload p = materialize(generate_uniform(CategorySet::all(), 6, BufferSizeConfig{}, 1));
  const auto frame = encode_frame(WireMode::NonSerialized, p.views(), MsgType::PutReq, 1);
  conn.call(MsgType::PutReq, p.views(), WireMode::NonSerialized);
  CHECK(counters.tx.load() == frame.size());
  CHECK(counters.rx.load() == kHeaderSize);
}

TEST_CASE("expected responses") {
  CHECK(expected_response(MsgType::EchoReq) == MsgType::EchoResp);
  CHECK(expected_response(MsgType::PutReq) == MsgType::Ack);
  CHECK(expected_response(MsgType::GetReq) == MsgType::GetResp);
}

}
