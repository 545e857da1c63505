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

#include "tfgb/rpc.hpp"

#include <fcntl.h>
#include <poll.h>
#include <unistd.h>

#include <cstdio>
#include <vector>

#include "tfgb/error.hpp"

namespace tfgb {

MsgType expected_response(MsgType request) {
  switch (request) {
    case MsgType::EchoReq:
      return MsgType::EchoResp;
    case MsgType::PutReq:
      return MsgType::Ack;
    case MsgType::GetReq:
      return MsgType::GetResp;
    default:
      throw ProtocolError("no response defined for " + std::string(to_string(request)));
  }
}

ParameterServer::ParameterServer(ServerConfig config) : config_(std::move(config)) {
  response_ = materialize(config_.response_spec);
}

ParameterServer::~ParameterServer() { stop(); }

void ParameterServer::start() {
  listener_.emplace(TcpListener::bind(config_.endpoint));
  if (::pipe2(wake_fds_, O_CLOEXEC) != 0) throw StartupError("cannot create wake pipe");
  acceptor_ = std::thread([this] { accept_loop(); });
}

void ParameterServer::stop() {
  if (!acceptor_.joinable()) return;
  stopping_ = true;
  const char b = 1;
  [[maybe_unused]] auto n = ::write(wake_fds_[1], &b, 1);
  acceptor_.join();
  {
    std::lock_guard lock(mu_);
    for (auto& h : handlers_) h.stream->shutdown();
  }
  for (auto& h : handlers_) {
    if (h.thread.joinable()) h.thread.join();
  }
  handlers_.clear();
  listener_.reset();
  ::close(wake_fds_[0]);
  ::close(wake_fds_[1]);
  wake_fds_[0] = wake_fds_[1] = -1;
}

Endpoint ParameterServer::bound_endpoint() const {
  Endpoint ep = config_.endpoint;
  if (listener_) ep.port = listener_->port();
  return ep;
}

void ParameterServer::accept_loop() {
  for (;;) {
    pollfd fds[2] = {{listener_->fd(), POLLIN, 0}, {wake_fds_[0], POLLIN, 0}};
    if (::poll(fds, 2, -1) < 0) continue;
    if (stopping_ || (fds[1].revents & POLLIN)) return;
    if (!(fds[0].revents & POLLIN)) continue;
    auto stream = listener_->accept(&counters_);
    if (!stream) continue;
    reap_finished();
    std::lock_guard lock(mu_);
    auto& h = handlers_.emplace_back();
    h.stream = std::move(stream);
    h.thread = std::thread([this, &h] { serve_connection(h); });
  }
}

void ParameterServer::reap_finished() {
  std::lock_guard lock(mu_);
  for (auto it = handlers_.begin(); it != handlers_.end();) {
    if (it->done) {
      it->thread.join();
      it = handlers_.erase(it);
    } else {
      ++it;
    }
  }
}

void ParameterServer::serve_connection(Handler& h) {
  Stream& stream = *h.stream;
  try {
    for (;;) {
      Message req = read_message(stream);
      const FrameHeader& rh = req.header;
      std::vector<BufferView> views;
      std::span<const BufferView> body;
      switch (rh.type) {
        case MsgType::EchoReq:
          views.assign(req.buffers.begin(), req.buffers.end());
          body = views;
          break;
        case MsgType::PutReq:
          break;
        case MsgType::GetReq:
          if (!req.buffers.empty()) throw ProtocolError("GET_REQ with a payload");
          body = response_.views();
          break;
        default:
          throw ProtocolError("unexpected " + std::string(to_string(rh.type)) + " from worker");
      }
      SegmentList resp = encode_frame(rh.mode, body, expected_response(rh.type), rh.request_id);
      stream.write_segments(resp.segments());
      ++frames_served_;
    }
  } catch (const EndOfStream&) {
  } catch (const ProtocolError& e) {
    ++connections_dropped_;
    std::fprintf(stderr, "tfgb ps: dropping connection from %s: %s\n", stream.peer().c_str(), e.what());
  } catch (const Error& e) {
    if (!stopping_) {
      ++connections_dropped_;
      std::fprintf(stderr, "tfgb ps: connection from %s failed: %s\n", stream.peer().c_str(), e.what());
    }
  }
  stream.shutdown();
  h.done = true;
}

Connection Connection::open(const Endpoint& ep, ByteCounters* counters) {
  return Connection(ep, TcpStream::connect(ep, counters));
}

CallResult Connection::call(MsgType type, std::span<const BufferView> payload, WireMode mode) {
  if (type != MsgType::EchoReq && type != MsgType::PutReq && type != MsgType::GetReq) {
    throw ConfigError("call() takes ECHO_REQ, PUT_REQ or GET_REQ, not " + std::string(to_string(type)));
  }
  const MsgType want = expected_response(type);
  if ((type == MsgType::GetReq) != payload.empty()) {
    throw ConfigError("payload must be empty for GET_REQ and non-empty otherwise");
  }
  const std::uint64_t id = next_id_++;
  // The clock starts before encoding: in serialized mode the copy into the
  // contiguous message is the cost being measured.
  const auto t0 = std::chrono::steady_clock::now();
  SegmentList frame = encode_frame(mode, payload, type, id);
  stream_->write_segments(frame.segments());
  Message resp = read_message(*stream_);
  const auto t1 = std::chrono::steady_clock::now();

  if (resp.header.request_id != id) {
    throw ProtocolError("response id " + std::to_string(resp.header.request_id) + " does not match request id " +
                        std::to_string(id));
  }
  if (resp.header.type != want) {
    throw ProtocolError("expected " + std::string(to_string(want)) + ", got " + std::string(to_string(resp.header.type)));
  }
  return CallResult{std::move(resp.buffers), t1 - t0, resp.header};
}

}  // namespace tfgb
