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

// Parameter-server and worker endpoints: echo, put/ack and get exchanges.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "tfgb/transport.hpp"
#include "tfgb/wire.hpp"
#include "tfgb/workload.hpp"

namespace tfgb {

struct ServerConfig {
  Endpoint endpoint;
  // Served on every GET_RESP.
  PayloadSpec response_spec;
  // Advertised default. Responses always use the mode of their request.
  WireMode mode = WireMode::NonSerialized;
};

// One PS process worth of serving: a listener plus one handler thread per
// accepted connection.
class ParameterServer {
 public:
  explicit ParameterServer(ServerConfig config);
  ~ParameterServer();
  ParameterServer(const ParameterServer&) = delete;
  ParameterServer& operator=(const ParameterServer&) = delete;

  // Binds and starts accepting. Throws StartupError on bind failure.
  void start();
  // Closes the listener and every live connection, then joins all threads.
  void stop();

  // The address actually bound (resolves port 0).
  Endpoint bound_endpoint() const;
  const ByteCounters& counters() const { return counters_; }
  std::uint64_t frames_served() const { return frames_served_.load(); }
  std::uint64_t connections_dropped() const { return connections_dropped_.load(); }

 private:
  struct Handler {
    std::unique_ptr<TcpStream> stream;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void serve_connection(Handler& h);
  void reap_finished();

  ServerConfig config_;
  Payload response_;
  std::optional<TcpListener> listener_;
  int wake_fds_[2] = {-1, -1};
  std::thread acceptor_;
  std::mutex mu_;
  std::list<Handler> handlers_;
  std::atomic<bool> stopping_{false};
  ByteCounters counters_;
  std::atomic<std::uint64_t> frames_served_{0};
  std::atomic<std::uint64_t> connections_dropped_{0};
};

struct CallResult {
  std::vector<Buffer> buffers;
  std::chrono::nanoseconds elapsed{0};
  FrameHeader header;
};

// Worker side of one (worker, PS) channel. Calls are serial; request ids
// count up from 1.
class Connection {
 public:
  // Throws ConnectError naming the endpoint.
  static Connection open(const Endpoint& ep, ByteCounters* counters = nullptr);

  // Blocking request/response. `payload` must be empty iff type is GetReq.
  // elapsed spans first byte written to last byte read on the monotonic
  // clock. Throws TransportError on stream failure and ProtocolError on a
  // mismatched id or response type.
  CallResult call(MsgType type, std::span<const BufferView> payload, WireMode mode);

  const Endpoint& endpoint() const { return endpoint_; }
  std::uint64_t next_request_id() const { return next_id_; }

 private:
  Connection(Endpoint ep, std::unique_ptr<Stream> stream) : endpoint_(std::move(ep)), stream_(std::move(stream)) {}

  Endpoint endpoint_;
  std::unique_ptr<Stream> stream_;
  std::uint64_t next_id_ = 1;
};

MsgType expected_response(MsgType request);

}  // namespace tfgb
